use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Equation, Method, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::operators::{self, OpContext};
use crate::quadrature::DampedWeights;
use crate::spectral::{sobolev_norm, to_twisted, untwist, Gauge, SpectralField};

/// Smallness conditions of the contraction argument with the empirical
/// constant `C = max(1, sup_t ‖u‖ / ‖φ‖)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Smallness {
    pub empirical_c: f64,
    /// `T^θ (2C)² r`
    pub quadratic: f64,
    /// `T^θ (2C)⁴ r³`
    pub cubic: f64,
    pub quadratic_ok: bool,
    pub cubic_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardDiagnostics {
    pub horizon: f64,
    pub split: usize,
    pub gate_statistic: f64,
    pub iterations: usize,
    /// `sup_t ‖v^{m+1} - v^m‖_{H^s}` per iteration.
    pub distances: Vec<f64>,
    /// Successive ratios of `distances`.
    pub ratios: Vec<f64>,
    pub smallness: Smallness,
}

/// Per-node pieces of the high-band part of the map, in the twisted gauge.
struct NodeTerms {
    /// Boundary operator, modes `|k| > N` only.
    boundary: SpectralField,
    /// Normal-form remainder, modes `|k| > N` only.
    integrand: SpectralField,
}

fn node_terms(eq: Equation, w: &SpectralField, t: f64, eps: f64, split: usize) -> Result<NodeTerms> {
    let hi = OpContext::new(t, eps).above(split);
    let (boundary, integrand) = match eq {
        Equation::KdvBurgers => (operators::a_total(w, hi)?, operators::b_total(w, hi)?.scale(2.0)),
        Equation::MkdvBurgers => {
            let n1 = operators::mkdv_n1(w, w, w, hi)?;
            let g0 = operators::mkdv_gamma0(w, w, w, hi)?;
            let n2 = operators::mkdv_n2([w, w, w, w, w], hi)?;
            (n1, &g0 + &n2.scale(3.0))
        }
    };
    Ok(NodeTerms { boundary, integrand })
}

/// Duhamel integrals `∫_0^{t_n} e^{-εk²(t_n-τ)} ik Σ e^{-iΩτ} Π ŵ(τ) dτ` for
/// `1 <= k <= N`. Terms are grouped by their phase `Ω`; each group's
/// oscillation is integrated exactly and only the product of the slowly
/// varying coefficients is interpolated.
fn low_band(cfg: &SolverConfig, history: &[SpectralField], split: usize) -> Vec<Vec<Complex64>> {
    let m = history.len() - 1;
    let h = cfg.horizon / m as f64;
    let band = cfg.grid.band() as i64;
    let signed: Vec<Vec<Complex64>> = history.iter().map(|w| w.signed()).collect();
    let at = |j: usize, k: i64| signed[j][(k + band) as usize];
    (1..=split as i64)
        .into_par_iter()
        .map(|k| {
            let mut groups: BTreeMap<i64, Vec<Complex64>> = BTreeMap::new();
            let mut add = |omega: i64, ks: &[i64]| {
                let g = groups.entry(omega).or_insert_with(|| vec![Complex64::new(0.0, 0.0); m + 1]);
                for (j, slot) in g.iter_mut().enumerate() {
                    *slot += ks.iter().map(|&q| at(j, q)).product::<Complex64>();
                }
            };
            let ok = |q: i64| q != 0 && q.abs() <= band;
            match cfg.equation {
                Equation::KdvBurgers => {
                    for k1 in -band..=band {
                        let k2 = k - k1;
                        if ok(k1) && ok(k2) {
                            add(3 * k * k1 * k2, &[k1, k2]);
                        }
                    }
                }
                Equation::MkdvBurgers => {
                    for k1 in -band..=band {
                        for k2 in -band..=band {
                            let k3 = k - k1 - k2;
                            if ok(k1) && ok(k2) && ok(k3) {
                                add(3 * (k1 + k2) * (k2 + k3) * (k1 + k3), &[k1, k2, k3]);
                            }
                        }
                    }
                }
            }
            let lam = cfg.epsilon * (k * k) as f64;
            let mut total = vec![Complex64::new(0.0, 0.0); m + 1];
            for (omega, p) in groups {
                let om = omega as f64;
                let w = DampedWeights::with_rate(cfg.quadrature, Complex64::new(lam, -om), h);
                for (n, z) in w.cumulative(&p).into_iter().enumerate() {
                    total[n] += z * Complex64::from_polar(1.0, -om * n as f64 * h);
                }
            }
            total.iter().map(|z| z * Complex64::new(0.0, k as f64)).collect()
        })
        .collect()
}

/// One application of the integral map to a twisted-gauge history on the
/// uniform nodes `t_j = jT/M`. `first` caches the node-0 terms.
fn apply_map(cfg: &SolverConfig, phi: &SpectralField, history: &[SpectralField], split: usize, first: &NodeTerms) -> Result<Vec<SpectralField>> {
    let m = history.len() - 1;
    let h = cfg.horizon / m as f64;
    let eps = cfg.epsilon;
    let mut terms: Vec<NodeTerms> = Vec::with_capacity(m + 1);
    terms.push(NodeTerms { boundary: first.boundary.clone(), integrand: first.integrand.clone() });
    for (j, w) in history.iter().enumerate().skip(1) {
        terms.push(node_terms(cfg.equation, w, j as f64 * h, eps, split)?);
    }
    let kb = cfg.grid.band();
    let low = low_band(cfg, history, split);
    let per_mode: Vec<Vec<Complex64>> = (1..=kb)
        .into_par_iter()
        .map(|k| {
            let lam = eps * (k * k) as f64;
            let integral = if k <= split {
                low[k - 1].clone()
            } else {
                let f: Vec<Complex64> = terms.iter().map(|n| n.integrand.positive()[k]).collect();
                DampedWeights::new(cfg.quadrature, lam, h).cumulative(&f)
            };
            let phik = phi.positive()[k];
            let b0 = terms[0].boundary.positive()[k];
            (0..=m)
                .map(|n| {
                    let decay = (-lam * n as f64 * h).exp();
                    let mut z = phik * decay + integral[n];
                    if k > split {
                        z += b0 * decay - terms[n].boundary.positive()[k];
                    }
                    z
                })
                .collect()
        })
        .collect();
    let mut out: Vec<SpectralField> = (0..=m).map(|_| SpectralField::zeros(cfg.grid, Gauge::Twisted)).collect();
    for (n, f) in out.iter_mut().enumerate() {
        let c = f.positive_mut();
        for k in 1..=kb {
            c[k] = per_mode[k - 1][n];
        }
    }
    out[0] = phi.clone();
    Ok(out)
}

/// `Φ(v)` at every node of `history`, which must hold `cfg.nodes + 1`
/// states covering `[0, T]`. Inputs may be in either gauge; output is twisted.
pub fn phi_map(history: &[SpectralField], phi: &SpectralField, cfg: &SolverConfig) -> Result<Vec<SpectralField>> {
    cfg.validate()?;
    if history.len() != cfg.nodes + 1 {
        return Err(Error::MissingNodes(history.len().min(cfg.nodes + 1)));
    }
    let split = cfg.resolved_split()?;
    let h = cfg.node_spacing();
    let tw: Vec<SpectralField> = history.iter().enumerate().map(|(j, f)| to_twisted(f, j as f64 * h)).collect();
    let phi = to_twisted(phi, 0.0);
    let first = node_terms(cfg.equation, &phi, 0.0, cfg.epsilon, split)?;
    apply_map(cfg, &phi, &tw, split, &first)
}

/// Picard iteration of the normal-form map on `[0, T]`, behind the gate
/// `T^θ ‖φ‖²_{H^s} <= c`.
pub fn picard_solve(phi: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if phi.band() != cfg.grid.band() {
        return Err(Error::GridMismatch { left: phi.band(), right: cfg.grid.band() });
    }
    if cfg.equation == Equation::MkdvBurgers && cfg.s.s < 0.5 {
        return Err(Error::InvalidParameter(format!("the cubic map needs s >= 1/2, got {}", cfg.s.s)));
    }
    let r = sobolev_norm(phi, cfg.s);
    let stat = cfg.gate_statistic(phi);
    // Relative slack absorbs rounding in norms of data placed on the gate.
    if stat > cfg.gate * (1.0 + 1e-12) {
        return Err(Error::GateExceeded { statistic: stat, gate: cfg.gate, horizon: cfg.horizon, norm: r });
    }
    picard_window(phi, cfg, stat)
}

/// The iteration itself, after the caller has admitted the window.
pub(super) fn picard_window(phi: &SpectralField, cfg: &SolverConfig, stat: f64) -> Result<Trajectory> {
    let r = sobolev_norm(phi, cfg.s);
    let split = cfg.resolved_split()?;
    let m = cfg.nodes;
    let h = cfg.node_spacing();
    let eps = cfg.epsilon;
    let phi = to_twisted(phi, 0.0);
    let mut iterate: Vec<SpectralField> = (0..=m)
        .map(|j| {
            let t = j as f64 * h;
            phi.map_modes(|k, z| z * (-eps * (k * k) as f64 * t).exp())
        })
        .collect();
    let first = node_terms(cfg.equation, &phi, 0.0, eps, split)?;
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        let next = apply_map(cfg, &phi, &iterate, split, &first)?;
        let d = next
            .iter()
            .zip(&iterate)
            .map(|(a, b)| sobolev_norm(&(a - b), cfg.s))
            .fold(0.0, f64::max);
        if !d.is_finite() || d > cfg.blowup {
            return Err(Error::BlowUp { t: cfg.horizon, norm: d, limit: cfg.blowup });
        }
        if let Some(&prev) = distances.last() {
            ratios.push(if prev > 0.0 { d / prev } else { 0.0 });
        }
        distances.push(d);
        iterate = next;
        if d <= cfg.tolerance {
            converged = true;
            break;
        }
        if ratios.len() >= 3 && ratios[ratios.len() - 3..].iter().all(|&q| q >= 1.0) {
            return Err(Error::NotContracting { ratios, distances });
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: distances.len(), distance: *distances.last().unwrap_or(&f64::NAN) });
    }
    let sup = iterate.iter().map(|w| sobolev_norm(w, cfg.s)).fold(0.0, f64::max);
    let c = if r > 0.0 { (sup / r).max(1.0) } else { 1.0 };
    let tt = cfg.horizon.powf(cfg.equation.gate_exponent());
    let quadratic = tt * (2.0 * c).powi(2) * r;
    let cubic = tt * (2.0 * c).powi(4) * r.powi(3);
    let diag = PicardDiagnostics {
        horizon: cfg.horizon,
        split,
        gate_statistic: stat,
        iterations: distances.len(),
        distances,
        ratios,
        smallness: Smallness {
            empirical_c: c,
            quadratic,
            cubic,
            quadratic_ok: quadratic <= 0.25,
            cubic_ok: cubic <= 0.25,
        },
    };
    let times: Vec<f64> = (0..=m).map(|j| j as f64 * h).collect();
    let states = iterate.iter().zip(&times).map(|(w, &t)| untwist(w, t)).collect();
    Ok(Trajectory {
        times,
        states,
        equation: cfg.equation,
        epsilon: eps,
        method: Method::Picard,
        picard: vec![diag],
    })
}

/// [`picard_solve`] for the cubic equation regardless of `cfg.equation`.
pub fn picard_solve_mkdv(phi: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    let mut c = cfg.clone();
    c.equation = Equation::MkdvBurgers;
    picard_solve(phi, &c)
}
