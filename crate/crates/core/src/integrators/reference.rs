use num_complex::Complex64;

use super::{Method, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{Gauge, SpectralField};

/// Largest admissible `dt · K · α · ‖u‖_∞` for the explicit stages.
const STAGE_LIMIT: f64 = 2.5;

fn sup_bound(u: &SpectralField) -> f64 {
    2.0 * u.positive().iter().map(|z| z.norm()).sum::<f64>()
}

struct Stepper<'a> {
    cfg: &'a SolverConfig,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
    dt: f64,
}

impl<'a> Stepper<'a> {
    fn new(cfg: &'a SolverConfig) -> Self {
        let dt = cfg.step();
        let sym = |k: usize, h: f64| {
            let kf = k as f64;
            Complex64::new(-cfg.epsilon * kf * kf * h, kf * kf * kf * h).exp()
        };
        let kb = cfg.grid.band();
        Self {
            cfg,
            full: (0..=kb).map(|k| sym(k, dt)).collect(),
            half: (0..=kb).map(|k| sym(k, dt / 2.0)).collect(),
            dt,
        }
    }

    /// `ik (u^α)^_k`.
    fn rhs(&self, u: &SpectralField) -> Result<SpectralField> {
        if self.cfg.linear {
            return Ok(SpectralField::zeros(u.grid(), Gauge::Physical));
        }
        let p = u.power(self.cfg.equation.power(), self.cfg.product)?;
        Ok(p.map_modes(|k, z| z * Complex64::new(0.0, k as f64)))
    }

    fn apply(&self, m: &[Complex64], u: &SpectralField) -> SpectralField {
        u.map_modes(|k, z| z * m[k as usize])
    }

    /// One Lawson RK4 step.
    fn step(&self, u: &SpectralField) -> Result<SpectralField> {
        let h = self.dt;
        let a = self.rhs(u)?;
        let u2 = self.apply(&self.half, &(u + &a.scale(h / 2.0)));
        let b = self.rhs(&u2)?;
        let u3 = &self.apply(&self.half, u) + &b.scale(h / 2.0);
        let c = self.rhs(&u3)?;
        let eu = self.apply(&self.full, u);
        let u4 = &eu + &self.apply(&self.half, &c).scale(h);
        let d = self.rhs(&u4)?;
        let ea = self.apply(&self.full, &a);
        let ebc = self.apply(&self.half, &(&b + &c));
        let incr = &(&ea + &ebc.scale(2.0)) + &d;
        Ok(&eu + &incr.scale(h / 6.0))
    }
}

/// Integrating-factor RK4 on the Galerkin system: the linear part
/// `ik³ - εk²` is propagated exactly, the interaction term explicitly.
pub fn reference_solve(phi: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if phi.band() != cfg.grid.band() {
        return Err(Error::GridMismatch { left: phi.band(), right: cfg.grid.band() });
    }
    let stepper = Stepper::new(cfg);
    let kb = cfg.grid.band() as f64;
    let alpha = cfg.equation.power() as f64;
    let check = |u: &SpectralField, t: f64| -> Result<()> {
        if !u.is_finite() {
            return Err(Error::BlowUp { t, norm: f64::INFINITY, limit: cfg.blowup });
        }
        let n = u.l2_norm();
        if n > cfg.blowup {
            return Err(Error::BlowUp { t, norm: n, limit: cfg.blowup });
        }
        if !cfg.linear {
            let amp = sup_bound(u).powf(alpha - 1.0);
            let stat = stepper.dt * kb * alpha * amp;
            if stat > STAGE_LIMIT {
                return Err(Error::UnresolvedStep(format!(
                    "dt = {:e} with K = {}, |u|_inf <= {:e} gives {stat:.3} > {STAGE_LIMIT}",
                    stepper.dt,
                    cfg.grid.band(),
                    sup_bound(u)
                )));
            }
        }
        Ok(())
    };
    let mut u = phi.clone().with_gauge(Gauge::Physical);
    check(&u, 0.0)?;
    let mut times = vec![0.0];
    let mut states = vec![u.clone()];
    let h = cfg.node_spacing();
    for j in 1..=cfg.nodes {
        for _ in 0..cfg.substeps {
            u = stepper.step(&u)?;
        }
        let t = j as f64 * h;
        check(&u, t)?;
        times.push(t);
        states.push(u.clone());
    }
    Ok(Trajectory {
        times,
        states,
        equation: cfg.equation,
        epsilon: cfg.epsilon,
        method: Method::Reference,
        picard: Vec::new(),
    })
}
