//! Conservation laws, energy budgets and stability probes evaluated on
//! finished trajectories.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{solve, Method, SolverConfig, Trajectory};
use crate::quadrature::{cumulative_real, QuadratureRule};
use crate::spectral::{convolve_signed, sobolev_norm, SobolevIndex, SpectralField};

/// Time integrals reuse the trajectory nodes with this rule.
const RULE: QuadratureRule = QuadratureRule::Simpson;

fn spacing(traj: &Trajectory) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    }
    if traj.len() == 1 {
        return Ok(0.0);
    }
    traj.spacing().ok_or_else(|| Error::InvalidParameter("time nodes are not uniform".into()))
}

/// `‖∂^j u‖²_{L²} = 2π Σ k^{2j} |û_k|²` summed over both signs.
fn derivative_norm2(u: &SpectralField, j: i32) -> f64 {
    sobolev_norm(u, SobolevIndex::homogeneous(j as f64)).powi(2)
}

/// Cumulative `∫_0^{t_n} f` by the shared rule.
fn integrate(h: f64, f: &[f64]) -> Vec<f64> {
    if f.len() < 2 {
        return vec![0.0; f.len()];
    }
    cumulative_real(RULE, h, f)
}

/// `∫_𝕋 a b c dx`.
pub fn cubic_integral(a: &SpectralField, b: &SpectralField, c: &SpectralField) -> f64 {
    let kb = a.band();
    let bc = convolve_signed(&b.signed(), &c.signed(), kb);
    let sa = a.signed();
    let s: f64 = (0..sa.len()).map(|i| (sa[i] * bc[2 * kb - i]).re).sum();
    2.0 * PI * s
}

/// `H[u] = ∫ u_x² + (2/3) u³ + u² dx`.
pub fn energy_h(u: &SpectralField) -> f64 {
    let quad = sobolev_norm(u, SobolevIndex::new(1.0)).powi(2);
    quad + 2.0 / 3.0 * cubic_integral(u, u, u)
}

/// `|½‖u(t)‖² + ε∫_0^t ‖u_x‖² - ½‖φ‖²| / (½‖φ‖²)` at every node; absolute
/// when `φ = 0`.
pub fn l2_identity_residual(traj: &Trajectory, epsilon: f64) -> Result<Vec<f64>> {
    let h = spacing(traj)?;
    let dx: Vec<f64> = traj.states.iter().map(|u| derivative_norm2(u, 1)).collect();
    let diss = integrate(h, &dx);
    let half = |u: &SpectralField| 0.5 * derivative_norm2(u, 0);
    let e0 = half(&traj.states[0]);
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    Ok(traj
        .states
        .iter()
        .zip(&diss)
        .map(|(u, d)| (half(u) + epsilon * d - e0).abs() / scale)
        .collect())
}

/// `sup_t ‖u‖_{H^m} + ε^{1/2} (∫_0^T ‖·‖²)^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub sup_norm: f64,
    pub dissipative: f64,
}

impl Budget {
    pub fn total(&self) -> f64 {
        self.sup_norm + self.dissipative
    }
}

fn budget(traj: &Trajectory, epsilon: f64, sup_idx: SobolevIndex, diss: impl Fn(&SpectralField) -> f64) -> Result<Budget> {
    let h = spacing(traj)?;
    let sup_norm = traj.sup_norm(sup_idx);
    let f: Vec<f64> = traj.states.iter().map(diss).collect();
    let total = *integrate(h, &f).last().unwrap_or(&0.0);
    let b = Budget { sup_norm, dissipative: (epsilon * total.max(0.0)).sqrt() };
    if !(b.sup_norm.is_finite() && b.dissipative.is_finite()) {
        return Err(Error::NonFiniteDiagnostic("energy budget".into()));
    }
    Ok(b)
}

/// `sup_t ‖u‖_{H¹}` and `ε^{1/2} (∫_0^T ‖u_xx‖²)^{1/2}`.
pub fn h1_budget(traj: &Trajectory, epsilon: f64) -> Result<Budget> {
    budget(traj, epsilon, SobolevIndex::new(1.0), |u| derivative_norm2(u, 2))
}

/// `sup_t ‖u‖_{H²}` and `ε^{1/2} (∫_0^T ‖u‖²_{H³})^{1/2}`.
pub fn h2_budget_mkdv(traj: &Trajectory, epsilon: f64) -> Result<Budget> {
    budget(traj, epsilon, SobolevIndex::new(2.0), |u| sobolev_norm(u, SobolevIndex::new(3.0)).powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub l2_norms: Vec<f64>,
    /// `2ε ∫_0^t ‖u_x‖²`
    pub dissipation_integral: Vec<f64>,
    pub identity_residuals: Vec<f64>,
    pub h_values: Vec<f64>,
    pub h1_budget: Budget,
    pub h2_budget: Option<Budget>,
}

/// Every node-wise functional of one trajectory. The H² budget is filled in
/// for the cubic equation only.
pub fn energy_report(traj: &Trajectory, epsilon: f64) -> Result<EnergyReport> {
    let h = spacing(traj)?;
    let dx: Vec<f64> = traj.states.iter().map(|u| derivative_norm2(u, 1)).collect();
    let dissipation_integral = integrate(h, &dx).into_iter().map(|x| 2.0 * epsilon * x).collect();
    let h2 = match traj.equation {
        crate::integrators::Equation::MkdvBurgers => Some(h2_budget_mkdv(traj, epsilon)?),
        crate::integrators::Equation::KdvBurgers => None,
    };
    let report = EnergyReport {
        times: traj.times.clone(),
        l2_norms: traj.states.iter().map(|u| u.l2_norm()).collect(),
        dissipation_integral,
        identity_residuals: l2_identity_residual(traj, epsilon)?,
        h_values: traj.states.iter().map(energy_h).collect(),
        h1_budget: h1_budget(traj, epsilon)?,
        h2_budget: h2,
    };
    let finite = [&report.l2_norms, &report.dissipation_integral, &report.identity_residuals, &report.h_values]
        .iter()
        .all(|v| v.iter().all(|x| x.is_finite()));
    if !finite {
        return Err(Error::NonFiniteDiagnostic("energy report".into()));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRow {
    pub epsilon: f64,
    /// `sup_t ‖u₁ - u₂‖_{H^s}`
    pub solution_distance: f64,
    /// `‖φ₁ - φ₂‖_{H^s}`
    pub data_distance: f64,
    /// `None` when the data coincide.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzTable {
    pub rows: Vec<LipschitzRow>,
    /// `max / min` of the ratios, `None` when no ratio is defined.
    pub uniformity: Option<f64>,
}

/// Ratio of solution to data distance for each `ε`, both data solved with
/// the same discretization.
pub fn lipschitz_probe(
    phi1: &SpectralField,
    phi2: &SpectralField,
    epsilons: &[f64],
    cfg: &SolverConfig,
    method: Method,
) -> Result<LipschitzTable> {
    let data_distance = sobolev_norm(&(phi1 - phi2), cfg.s);
    let rows: Vec<LipschitzRow> = epsilons
        .par_iter()
        .map(|&epsilon| {
            let mut c = cfg.clone();
            c.epsilon = epsilon;
            let solution_distance = if data_distance == 0.0 {
                0.0
            } else {
                let a = solve(phi1, &c, method)?;
                let b = solve(phi2, &c, method)?;
                a.sup_distance(&b, cfg.s)?
            };
            let ratio = (data_distance > 0.0).then(|| solution_distance / data_distance);
            Ok(LipschitzRow { epsilon, solution_distance, data_distance, ratio })
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let uniformity = (!ratios.is_empty()).then(|| {
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    });
    Ok(LipschitzTable { rows, uniformity })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurgersTerm {
    /// `∫_0^T ∫ u_x w² dx ds`
    pub term: f64,
    /// `sup_t |∫_0^t ∫ u_x w² dx ds|`
    pub sup_term: f64,
    /// `ε² ∫_0^T ‖∂_x u_ε‖²` with `u_ε = u + w`.
    pub viscous: f64,
    /// `sup_t ‖w‖²_{L²}`
    pub difference: f64,
    /// `sup_term / (viscous + difference)`, zero when both vanish.
    pub ratio: f64,
}

/// The critical cross term of the difference equation: `u` is the inviscid
/// trajectory and `w = u_ε - u`.
pub fn burgers_term(u_traj: &Trajectory, w_traj: &Trajectory, epsilon: f64) -> Result<BurgersTerm> {
    let h = spacing(u_traj)?;
    let aligned = u_traj.times.len() == w_traj.times.len()
        && u_traj.times.iter().zip(&w_traj.times).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !aligned {
        return Err(Error::InvalidParameter("trajectories are not on the same nodes".into()));
    }
    let integrand: Vec<f64> = u_traj
        .states
        .iter()
        .zip(&w_traj.states)
        .map(|(u, w)| cubic_integral(&crate::spectral::derivative(u, 1), w, w))
        .collect();
    let cum = integrate(h, &integrand);
    let term = *cum.last().unwrap_or(&0.0);
    let sup_term = cum.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dx: Vec<f64> = u_traj.states.iter().zip(&w_traj.states).map(|(u, w)| derivative_norm2(&(u + w), 1)).collect();
    let viscous = epsilon * epsilon * integrate(h, &dx).last().unwrap_or(&0.0);
    let difference = w_traj.sup_norm(SobolevIndex::L2).powi(2);
    let denom = viscous + difference;
    let ratio = if denom > 0.0 { sup_term / denom } else { 0.0 };
    Ok(BurgersTerm { term, sup_term, viscous, difference, ratio })
}

/// `w = a - b` node by node.
pub fn difference(a: &Trajectory, b: &Trajectory) -> Result<Trajectory> {
    if a.times.len() != b.times.len() {
        return Err(Error::InvalidParameter("trajectories have different node counts".into()));
    }
    Ok(Trajectory {
        times: a.times.clone(),
        states: a.states.iter().zip(&b.states).map(|(x, y)| x - y).collect(),
        equation: a.equation,
        epsilon: a.epsilon,
        method: a.method,
        picard: Vec::new(),
    })
}
