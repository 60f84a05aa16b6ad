//! Time integration: an integrating-factor Runge–Kutta reference and the
//! Picard iteration of the normal-form integral map.

mod picard;
mod reference;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::spectral::{sobolev_norm, GridSpec, ProductMethod, SobolevIndex, SpectralField};

pub use picard::{phi_map, picard_solve, picard_solve_mkdv, PicardDiagnostics, Smallness};
pub use reference::reference_solve;

/// `u_t + u_xxx - ε u_xx = ∂_x(u^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equation {
    /// `α = 2`
    KdvBurgers,
    /// `α = 3`
    MkdvBurgers,
}

impl Equation {
    pub fn power(self) -> u32 {
        match self {
            Equation::KdvBurgers => 2,
            Equation::MkdvBurgers => 3,
        }
    }

    /// Exponent `θ` in the gate `T^θ ‖φ‖² <= c`.
    pub fn gate_exponent(self) -> f64 {
        match self {
            Equation::KdvBurgers => 0.4,
            Equation::MkdvBurgers => 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Reference,
    Picard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub equation: Equation,
    pub epsilon: f64,
    pub horizon: f64,
    pub grid: GridSpec,
    /// Norm used by the gate and the contraction diagnostics.
    pub s: SobolevIndex,
    /// Number of output intervals; trajectories hold `nodes + 1` states.
    pub nodes: usize,
    /// Reference-solver steps per output interval.
    pub substeps: usize,
    /// Frequency split `N`; defaults to `⌈T^{-2/5}⌉`.
    pub split: Option<usize>,
    pub quadrature: QuadratureRule,
    pub max_iterations: usize,
    /// Picard stops once successive iterates differ by less than this.
    pub tolerance: f64,
    pub gate: f64,
    pub product: ProductMethod,
    /// Drops the nonlinearity (linear propagation only).
    pub linear: bool,
    pub blowup: f64,
}

impl SolverConfig {
    pub fn new(equation: Equation, grid: GridSpec, epsilon: f64, horizon: f64) -> Self {
        Self {
            equation,
            epsilon,
            horizon,
            grid,
            s: SobolevIndex::L2,
            nodes: 64,
            substeps: 8,
            split: None,
            quadrature: QuadratureRule::Simpson,
            max_iterations: 60,
            tolerance: 1e-13,
            gate: 0.01,
            product: ProductMethod::Auto,
            linear: false,
            blowup: 1e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if self.nodes == 0 || self.substeps == 0 {
            return Err(Error::InvalidParameter("nodes and substeps must be positive".into()));
        }
        Ok(())
    }

    pub fn node_spacing(&self) -> f64 {
        self.horizon / self.nodes as f64
    }

    pub fn step(&self) -> f64 {
        self.node_spacing() / self.substeps as f64
    }

    pub fn default_split(horizon: f64) -> usize {
        horizon.powf(-0.4).ceil().max(1.0) as usize
    }

    pub fn resolved_split(&self) -> Result<usize> {
        let n = self.split.unwrap_or_else(|| Self::default_split(self.horizon));
        if n == 0 || n > self.grid.band() {
            return Err(Error::BadSplit { split: n, band: self.grid.band() });
        }
        Ok(n)
    }

    /// `T^θ ‖φ‖²_{H^s}`.
    pub fn gate_statistic(&self, phi: &SpectralField) -> f64 {
        self.horizon.powf(self.equation.gate_exponent()) * sobolev_norm(phi, self.s).powi(2)
    }

    /// Longest horizon admitted by the gate for data of this size.
    pub fn gated_horizon(&self, phi: &SpectralField) -> f64 {
        let r2 = sobolev_norm(phi, self.s).powi(2);
        if r2 == 0.0 {
            return f64::INFINITY;
        }
        (self.gate / r2).powf(1.0 / self.equation.gate_exponent())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Physical-gauge states at `times`.
    pub states: Vec<SpectralField>,
    pub equation: Equation,
    pub epsilon: f64,
    pub method: Method,
    pub picard: Vec<PicardDiagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &SpectralField {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Uniform spacing, if the nodes are uniform.
    pub fn spacing(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let h = self.times[1] - self.times[0];
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.abs().max(1.0));
        uniform.then_some(h)
    }

    /// `sup_j ‖a_j - b_j‖` at shared nodes.
    pub fn sup_distance(&self, other: &Trajectory, idx: SobolevIndex) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::InvalidParameter("trajectories have different node counts".into()));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| sobolev_norm(&(a - b), idx))
            .fold(0.0, f64::max))
    }

    pub fn sup_norm(&self, idx: SobolevIndex) -> f64 {
        self.states.iter().map(|u| sobolev_norm(u, idx)).fold(0.0, f64::max)
    }
}

/// Solves on `[0, T]`, restarting the Picard map from the current state
/// whenever the remaining horizon exceeds what the gate allows.
///
/// In `L²` the windows are sized once from `‖φ‖`: the norm is nonincreasing
/// along the flow, so every restart state satisfies the same gate. Other
/// norms are re-gated at each restart.
pub fn solve(phi: &SpectralField, cfg: &SolverConfig, method: Method) -> Result<Trajectory> {
    cfg.validate()?;
    match method {
        Method::Reference => reference_solve(phi, cfg),
        Method::Picard => {
            if cfg.gate_statistic(phi) <= cfg.gate * (1.0 + 1e-12) {
                return picard_solve(phi, cfg);
            }
            let l2_bound = cfg.s == SobolevIndex::L2;
            let per_unit = cfg.nodes as f64 / cfg.horizon;
            let mut times = vec![0.0];
            let mut states = vec![phi.clone()];
            let mut diags = Vec::new();
            let mut t0 = 0.0;
            let mut u = phi.clone();
            let uniform = cfg.horizon / (cfg.horizon / cfg.gated_horizon(phi) * (1.0 - 1e-9)).ceil();
            while cfg.horizon - t0 > 1e-12 * cfg.horizon {
                let remaining = cfg.horizon - t0;
                let chunk = if l2_bound {
                    uniform.min(remaining)
                } else {
                    let windows = (remaining / cfg.gated_horizon(&u) * (1.0 - 1e-9)).ceil().max(1.0);
                    remaining / windows
                };
                let mut sub = cfg.clone();
                sub.horizon = chunk;
                sub.nodes = ((chunk * per_unit).round() as usize).max(2);
                if sub.split.is_none() {
                    sub.split = Some(SolverConfig::default_split(chunk).min(cfg.grid.band()));
                }
                let tr = if l2_bound {
                    // Gate evaluated on the a priori bound ‖u(t)‖ <= ‖φ‖.
                    let stat = sub.gate_statistic(phi);
                    if stat > sub.gate * (1.0 + 1e-12) {
                        return Err(Error::GateExceeded {
                            statistic: stat,
                            gate: sub.gate,
                            horizon: chunk,
                            norm: sobolev_norm(phi, cfg.s),
                        });
                    }
                    picard::picard_window(&u, &sub, stat)?
                } else {
                    picard_solve(&u, &sub)?
                };
                times.extend(tr.times.iter().skip(1).map(|t| t + t0));
                states.extend(tr.states.iter().skip(1).cloned());
                u = tr.last().clone();
                diags.extend(tr.picard);
                t0 += chunk;
            }
            Ok(Trajectory {
                times,
                states,
                equation: cfg.equation,
                epsilon: cfg.epsilon,
                method,
                picard: diags,
            })
        }
    }
}
