//! Viscous against inviscid solves from shared data: sup-in-time distances,
//! ε sweeps with a log-log rate fit, and the frequency-truncation triangle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{solve, Method, SolverConfig, Trajectory};
use crate::spectral::{project_low, sobolev_norm, SpectralField};
use crate::stats::loglog_fit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    /// `sup_t ‖S^ε(φ)(t) - S(φ)(t)‖_{H^s}` over shared nodes.
    pub distance: f64,
    pub s: f64,
    pub horizon: f64,
    pub band: usize,
    /// Largest jump of the distance between adjacent nodes relative to its
    /// maximum; small values mean the nodes resolve the sup.
    pub node_variation: f64,
    /// Hash of the discretization shared by both legs.
    pub fingerprint: String,
}

/// FNV-1a over the debug form of the configuration with `ε` removed.
pub fn fingerprint(cfg: &SolverConfig, method: Method) -> String {
    let mut c = cfg.clone();
    c.epsilon = 0.0;
    let text = format!("{c:?}{method:?}");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn leg(name: &str, r: Result<Trajectory>) -> Result<Trajectory> {
    r.map_err(|e| Error::Leg { leg: name.into(), source: Box::new(e) })
}

/// Both legs of a pair, viscous first.
pub fn solve_pair(phi: &SpectralField, epsilon: f64, cfg: &SolverConfig, method: Method) -> Result<(Trajectory, Trajectory)> {
    let mut vis = cfg.clone();
    vis.epsilon = epsilon;
    let mut inv = cfg.clone();
    inv.epsilon = 0.0;
    let b = leg("inviscid", solve(phi, &inv, method))?;
    let a = if epsilon == 0.0 { b.clone() } else { leg("viscous", solve(phi, &vis, method))? };
    Ok((a, b))
}

fn record(a: &Trajectory, b: &Trajectory, epsilon: f64, cfg: &SolverConfig, method: Method) -> Result<SweepRecord> {
    if a.times.len() != b.times.len() {
        return Err(Error::InvalidParameter("legs produced different node sets".into()));
    }
    let d: Vec<f64> = a.states.iter().zip(&b.states).map(|(x, y)| sobolev_norm(&(x - y), cfg.s)).collect();
    let distance = d.iter().cloned().fold(0.0, f64::max);
    let jump = d.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    Ok(SweepRecord {
        epsilon,
        distance,
        s: cfg.s.s,
        horizon: cfg.horizon,
        band: cfg.grid.band(),
        node_variation: if distance > 0.0 { jump / distance } else { 0.0 },
        fingerprint: fingerprint(cfg, method),
    })
}

/// Solves with `ε` and with `0` on one discretization and measures the gap.
pub fn run_pair(phi: &SpectralField, epsilon: f64, cfg: &SolverConfig, method: Method) -> Result<SweepRecord> {
    let (a, b) = solve_pair(phi, epsilon, cfg, method)?;
    record(&a, &b, epsilon, cfg, method)
}

/// One record per `ε`, in input order. The inviscid leg is solved once.
pub fn epsilon_sweep(phi: &SpectralField, epsilons: &[f64], cfg: &SolverConfig, method: Method) -> Result<Vec<SweepRecord>> {
    let mut inv = cfg.clone();
    inv.epsilon = 0.0;
    let b = leg("inviscid", solve(phi, &inv, method))?;
    epsilons
        .par_iter()
        .map(|&eps| {
            if eps == 0.0 {
                return record(&b, &b, eps, cfg, method);
            }
            let mut vis = cfg.clone();
            vis.epsilon = eps;
            let a = leg("viscous", solve(phi, &vis, method))?;
            record(&a, &b, eps, cfg, method)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub epsilons_used: Vec<f64>,
    /// Records dropped because their distance (or `ε`) was zero.
    pub excluded: Vec<f64>,
}

/// Least-squares `ln d = intercept + slope ln ε`.
pub fn fit_rate(records: &[SweepRecord]) -> Result<RateFit> {
    if records.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "at least 3 epsilons required for fit, got {}",
            records.len()
        )));
    }
    let xs: Vec<f64> = records.iter().map(|r| r.epsilon).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.distance).collect();
    let (fit, skipped) = loglog_fit(&xs, &ys)?;
    Ok(RateFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        epsilons_used: xs.iter().enumerate().filter(|(i, _)| !skipped.contains(i)).map(|(_, &x)| x).collect(),
        excluded: skipped.iter().map(|&i| xs[i]).collect(),
    })
}

/// The triangle behind the truncation argument for one cutoff `K'`:
/// `‖S^ε φ - S φ‖ <= ‖S^ε φ - S^ε P φ‖ + ‖S^ε P φ - S P φ‖ + ‖S P φ - S φ‖`
/// with `P` the projection onto `|k| <= K'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub cutoff: usize,
    /// `‖φ - P φ‖_{H^s}`
    pub data_tail: f64,
    pub direct: f64,
    pub viscous_leg: f64,
    pub truncated_gap: f64,
    pub inviscid_leg: f64,
    pub triangle_ok: bool,
}

impl TruncationRow {
    pub fn leg_sum(&self) -> f64 {
        self.viscous_leg + self.truncated_gap + self.inviscid_leg
    }
}

/// Slack allowed in the triangle check for rounding in the sup norms.
pub const TRIANGLE_SLACK: f64 = 1e-8;

pub fn truncation_study(
    phi: &SpectralField,
    cutoffs: &[usize],
    epsilon: f64,
    cfg: &SolverConfig,
    method: Method,
) -> Result<Vec<TruncationRow>> {
    if let Some(&bad) = cutoffs.iter().find(|&&c| c > cfg.grid.band()) {
        return Err(Error::BadSplit { split: bad, band: cfg.grid.band() });
    }
    let (full_v, full_i) = solve_pair(phi, epsilon, cfg, method)?;
    let sup = |a: &Trajectory, b: &Trajectory| a.sup_distance(b, cfg.s);
    let direct = sup(&full_v, &full_i)?;
    cutoffs
        .par_iter()
        .map(|&cut| {
            let p = project_low(phi, cut);
            let (tv, ti) = solve_pair(&p, epsilon, cfg, method)?;
            let row = TruncationRow {
                cutoff: cut,
                data_tail: sobolev_norm(&(phi - &p), cfg.s),
                direct,
                viscous_leg: sup(&full_v, &tv)?,
                truncated_gap: sup(&tv, &ti)?,
                inviscid_leg: sup(&ti, &full_i)?,
                triangle_ok: false,
            };
            Ok(TruncationRow { triangle_ok: row.direct <= row.leg_sum() + TRIANGLE_SLACK, ..row })
        })
        .collect()
}
