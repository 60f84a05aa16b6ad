//! Empirical operator-norm constants over random inputs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{a2, a3, a4_1, a4_2, b_total, mkdv_n1, mkdv_n2, mkdv_resonant, r3_0, OpContext};
use crate::error::{Error, Result};
use crate::spectral::{random_band_field, random_sobolev_field, sobolev_norm, GridSpec, SobolevIndex, SpectralField};
use crate::stats::loglog_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    A2,
    A3,
    R30,
    A41,
    A42,
    BTotal,
    MkdvR,
    MkdvN1,
    MkdvN2,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 9] = [
        Self::A2,
        Self::A3,
        Self::R30,
        Self::A41,
        Self::A42,
        Self::BTotal,
        Self::MkdvR,
        Self::MkdvN1,
        Self::MkdvN2,
    ];

    pub fn arity(self) -> usize {
        match self {
            Self::A2 => 2,
            Self::A3 | Self::R30 | Self::MkdvR | Self::MkdvN1 => 3,
            Self::A41 | Self::A42 => 4,
            Self::BTotal => 1,
            Self::MkdvN2 => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::A2 => "a2",
            Self::A3 => "a3",
            Self::R30 => "r3_0",
            Self::A41 => "a4_1",
            Self::A42 => "a4_2",
            Self::BTotal => "b_total",
            Self::MkdvR => "mkdv_r",
            Self::MkdvN1 => "mkdv_n1",
            Self::MkdvN2 => "mkdv_n2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Polynomial degree of the diagonal form.
    fn degree(self) -> i32 {
        match self {
            Self::A2 => 2,
            Self::A3 | Self::R30 | Self::MkdvR | Self::MkdvN1 => 3,
            Self::A41 | Self::A42 => 4,
            Self::BTotal => 4,
            Self::MkdvN2 => 5,
        }
    }

    pub fn apply(self, f: &[&SpectralField], ctx: OpContext) -> Result<SpectralField> {
        if f.len() != self.arity() {
            return Err(Error::InvalidParameter(format!("{} takes {} inputs", self.name(), self.arity())));
        }
        match self {
            Self::A2 => a2(f[0], f[1], ctx),
            Self::A3 => a3(f[0], f[1], f[2], ctx),
            Self::R30 => r3_0(f[0], f[1], f[2], ctx),
            Self::A41 => a4_1(f[0], f[1], f[2], f[3], ctx),
            Self::A42 => a4_2(f[0], f[1], f[2], f[3], ctx),
            Self::BTotal => b_total(f[0], ctx),
            Self::MkdvR => mkdv_resonant(f[0], f[1], f[2], ctx),
            Self::MkdvN1 => mkdv_n1(f[0], f[1], f[2], ctx),
            Self::MkdvN2 => mkdv_n2([f[0], f[1], f[2], f[3], f[4]], ctx),
        }
    }

    fn apply_diagonal(self, v: &SpectralField, ctx: OpContext) -> Result<SpectralField> {
        let f: Vec<&SpectralField> = (0..self.arity()).map(|_| v).collect();
        self.apply(&f, ctx)
    }
}

/// How trial inputs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeEnsemble {
    /// Every slot is a random field with `|û_k| ∝ |k|^{-(s+1)}`.
    Sobolev,
    /// Slots cycle through Sobolev fields, packets on `1..=4` and packets on
    /// `N+1..=2N`, so that interactions between a low and a high input are
    /// always represented.
    Extremal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub kind: OperatorKind,
    pub band: usize,
    pub s: SobolevIndex,
    pub epsilon: f64,
    pub t: f64,
    pub splits: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub ensemble: ProbeEnsemble,
    /// Measure `P_{>N}` of the output when set, the whole output otherwise.
    pub project: bool,
}

impl ProbeSpec {
    pub fn new(kind: OperatorKind, band: usize, s: f64) -> Self {
        Self {
            kind,
            band,
            s: SobolevIndex::new(s),
            epsilon: 0.0,
            t: 0.0,
            splits: vec![8, 16, 32, 64],
            trials: 32,
            seed: 0,
            ensemble: ProbeEnsemble::Extremal,
            project: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub split: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub kind: OperatorKind,
    pub band: usize,
    pub s: f64,
    pub epsilon: f64,
    pub project: bool,
    pub rows: Vec<ProbeRow>,
    /// Slope of `ln max_ratio` against `ln N`.
    pub exponent: Option<f64>,
    pub r_squared: Option<f64>,
}

fn trial_fields(spec: &ProbeSpec, split: usize, trial: usize) -> Result<Vec<SpectralField>> {
    let grid = GridSpec::new(spec.band)?;
    let slots = spec.kind.arity();
    let mut code = trial;
    (0..slots)
        .map(|slot| {
            let seed = spec
                .seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add((trial as u64) << 20)
                .wrapping_add((slot as u64) * 7919 + split as u64);
            let kind = match spec.ensemble {
                ProbeEnsemble::Sobolev => 0,
                ProbeEnsemble::Extremal => {
                    let c = code % 3;
                    code /= 3;
                    c
                }
            };
            match kind {
                0 => {
                    let f = random_sobolev_field(grid, spec.s.s, seed, 1.0);
                    let n = sobolev_norm(&f, spec.s);
                    Ok(f.scale(1.0 / n))
                }
                1 => random_band_field(grid, 1, 4.min(spec.band), spec.s, seed),
                _ => {
                    let lo = (split + 1).min(spec.band);
                    let hi = (2 * split).clamp(lo, spec.band);
                    random_band_field(grid, lo, hi, spec.s, seed)
                }
            }
        })
        .collect()
}

fn rhs(kind: OperatorKind, norms: &[f64]) -> f64 {
    match kind {
        OperatorKind::BTotal => norms[0].powi(3) + norms[0].powi(4),
        _ => norms.iter().product(),
    }
}

fn validate(spec: &ProbeSpec) -> Result<()> {
    if spec.trials == 0 {
        return Err(Error::InvalidParameter("probe needs at least one trial".into()));
    }
    if let Some(&n) = spec.splits.iter().find(|&&n| n == 0 || n >= spec.band) {
        return Err(Error::BadSplit { split: n, band: spec.band });
    }
    Ok(())
}

fn summarise(spec: &ProbeSpec, rows: Vec<ProbeRow>) -> ProbeReport {
    let xs: Vec<f64> = rows.iter().map(|r| r.split as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_ratio).collect();
    let fit = loglog_fit(&xs, &ys).ok().map(|(f, _)| f);
    ProbeReport {
        kind: spec.kind,
        band: spec.band,
        s: spec.s.s,
        epsilon: spec.epsilon,
        project: spec.project,
        rows,
        exponent: fit.map(|f| f.slope),
        r_squared: fit.map(|f| f.r_squared),
    }
}

/// For each split `N`, the largest observed
/// `‖P_{>N} op(v_1, …)‖_{H^s} / Π ‖v_i‖_{H^s}` over the trials.
pub fn estimate_probe(spec: &ProbeSpec) -> Result<ProbeReport> {
    validate(spec)?;
    let mut rows = Vec::with_capacity(spec.splits.len());
    for &split in &spec.splits {
        let ratios: Vec<f64> = (0..spec.trials)
            .into_par_iter()
            .map(|trial| -> Result<f64> {
                let fields = trial_fields(spec, split, trial)?;
                let refs: Vec<&SpectralField> = fields.iter().collect();
                let ctx = OpContext {
                    t: spec.t,
                    epsilon: spec.epsilon,
                    min_output: if spec.project { split } else { 0 },
                };
                let out = spec.kind.apply(&refs, ctx)?;
                let norms: Vec<f64> = fields.iter().map(|f| sobolev_norm(f, spec.s)).collect();
                Ok(sobolev_norm(&out, spec.s) / rhs(spec.kind, &norms))
            })
            .collect::<Result<_>>()?;
        rows.push(ProbeRow {
            split,
            max_ratio: ratios.iter().copied().fold(0.0, f64::max),
            mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
            trials: ratios.len(),
        });
    }
    Ok(summarise(spec, rows))
}

/// Difference form: `‖P_{>N}(op(v) - op(w))‖ / ((‖v‖ + ‖w‖)^{d-1} ‖v - w‖)` for
/// the diagonal operator of degree `d`, with `w` a relative perturbation of `v`.
pub fn estimate_difference_probe(spec: &ProbeSpec, relative: f64) -> Result<ProbeReport> {
    validate(spec)?;
    let mut rows = Vec::with_capacity(spec.splits.len());
    for &split in &spec.splits {
        let ratios: Vec<f64> = (0..spec.trials)
            .into_par_iter()
            .map(|trial| -> Result<f64> {
                let mut one = spec.clone();
                one.kind = OperatorKind::A3;
                let f = trial_fields(&one, split, trial)?;
                let v = &f[0] + &f[1];
                let w = &v + &f[2].scale(relative);
                let ctx = OpContext {
                    t: spec.t,
                    epsilon: spec.epsilon,
                    min_output: if spec.project { split } else { 0 },
                };
                let d = &spec.kind.apply_diagonal(&v, ctx)? - &spec.kind.apply_diagonal(&w, ctx)?;
                let nv = sobolev_norm(&v, spec.s);
                let nw = sobolev_norm(&w, spec.s);
                let nd = sobolev_norm(&(&v - &w), spec.s);
                let sum = nv + nw;
                let denom = match spec.kind {
                    OperatorKind::BTotal => (sum.powi(2) + sum.powi(3)) * nd,
                    k => sum.powi(k.degree() - 1) * nd,
                };
                Ok(sobolev_norm(&d, spec.s) / denom)
            })
            .collect::<Result<_>>()?;
        rows.push(ProbeRow {
            split,
            max_ratio: ratios.iter().copied().fold(0.0, f64::max),
            mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
            trials: ratios.len(),
        });
    }
    Ok(summarise(spec, rows))
}
