use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line `ln y = intercept + slope ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits in log-log space, skipping points with nonpositive or non-finite
/// coordinates. Returns the fit together with the skipped indices.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<(LogLogFit, Vec<usize>)> {
    let mut skipped = Vec::new();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
            lx.push(x.ln());
            ly.push(y.ln());
        } else {
            skipped.push(i);
        }
    }
    if lx.len() < 3 {
        return Err(Error::DegenerateFit { needed: 3, got: lx.len() });
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit { needed: 3, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((LogLogFit { slope, intercept, r_squared, points: lx.len() }, skipped))
}
