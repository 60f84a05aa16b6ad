//! Cumulative damped integrals `I_n = ∫_0^{t_n} e^{-λ(t_n-τ)} f(τ) dτ` on a
//! uniform grid.
//!
//! `f` is replaced by its piecewise quadratic (or linear) interpolant and the
//! exponential is integrated exactly, so stiff decay rates `λ = εk²` cost no
//! accuracy. At `λ = 0` the quadratic rule is composite Simpson at even nodes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum QuadratureRule {
    Trapezoid,
    #[default]
    Simpson,
}

/// `∫_0^1 e^{-μ(1-y)} y^m dy` for complex `μ`.
fn damped_moment(m: usize, mu: Complex64) -> Complex64 {
    if mu.norm() < 1.0 {
        // Σ_j (-μ)^j m! / (m+j+1)!
        let mut term = Complex64::new(1.0 / (m + 1) as f64, 0.0);
        let mut sum = term;
        for j in 1..40 {
            term *= -mu / (m + j + 1) as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        let mut g = if mu.im == 0.0 {
            Complex64::new(-(-mu.re).exp_m1() / mu.re, 0.0)
        } else {
            (1.0 - (-mu).exp()) / mu
        };
        for j in 1..=m {
            g = (1.0 - j as f64 * g) / mu;
        }
        g
    }
}

/// Weights of `∫_0^1 e^{-μ(1-y)} p(y) dy` where `p` interpolates at `nodes`.
fn interval_weights<const N: usize>(nodes: [f64; N], mu: Complex64) -> [Complex64; N] {
    let moments: Vec<Complex64> = (0..N).map(|m| damped_moment(m, mu)).collect();
    let mut out = [Complex64::new(0.0, 0.0); N];
    for (i, w) in out.iter_mut().enumerate() {
        // Monomial coefficients of the i-th Lagrange basis polynomial.
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for (j, &yj) in nodes.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut next = vec![0.0; poly.len() + 1];
            for (d, &c) in poly.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= yj * c;
            }
            poly = next;
            denom *= nodes[i] - yj;
        }
        *w = poly.iter().zip(&moments).map(|(c, g)| g * *c).sum::<Complex64>() / denom;
    }
    out
}

/// Precomputed weights for one decay rate.
#[derive(Debug, Clone, Copy)]
pub struct DampedWeights {
    rule: QuadratureRule,
    decay: Complex64,
    first: [Complex64; 3],
    second: [Complex64; 3],
    linear: [Complex64; 2],
}

impl DampedWeights {
    pub fn new(rule: QuadratureRule, lambda: f64, h: f64) -> Self {
        Self::with_rate(rule, Complex64::new(lambda, 0.0), h)
    }

    /// Complex rate `ν`: weights for `∫ e^{-ν(t_n-τ)} f(τ) dτ` with `Re ν >= 0`.
    /// An oscillation `e^{-iΩτ}` of the integrand can be absorbed this way
    /// with `ν = λ - iΩ`, leaving only the slowly varying factor to interpolate.
    pub fn with_rate(rule: QuadratureRule, rate: Complex64, h: f64) -> Self {
        let mu = rate * h;
        let scale = |w: [Complex64; 3]| w.map(|x| x * h);
        Self {
            rule,
            decay: (-mu).exp(),
            first: scale(interval_weights([0.0, 1.0, 2.0], mu)),
            second: scale(interval_weights([-1.0, 0.0, 1.0], mu)),
            linear: interval_weights([0.0, 1.0], mu).map(|x| x * h),
        }
    }

    /// `I_0 ..= I_M` for samples `f_0 ..= f_M`.
    pub fn cumulative(&self, f: &[Complex64]) -> Vec<Complex64> {
        let m = f.len().saturating_sub(1);
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        if m == 0 {
            return out;
        }
        let lin = |a: usize| f[a] * self.linear[0] + f[a + 1] * self.linear[1];
        let tri = |w: &[Complex64; 3], a: usize| f[a] * w[0] + f[a + 1] * w[1] + f[a + 2] * w[2];
        match self.rule {
            QuadratureRule::Trapezoid => {
                for n in 1..=m {
                    out[n] = out[n - 1] * self.decay + lin(n - 1);
                }
            }
            QuadratureRule::Simpson => {
                out[1] = if m >= 2 { tri(&self.first, 0) } else { lin(0) };
                for n in 2..=m {
                    out[n] = if n % 2 == 0 {
                        out[n - 2] * (self.decay * self.decay) + tri(&self.first, n - 2) * self.decay + tri(&self.second, n - 2)
                    } else {
                        out[n - 1] * self.decay + tri(&self.second, n - 2)
                    };
                }
            }
        }
        out
    }

    /// Only `I_M`.
    pub fn total(&self, f: &[Complex64]) -> Complex64 {
        *self.cumulative(f).last().unwrap_or(&Complex64::new(0.0, 0.0))
    }
}

/// Undamped cumulative integral of real samples.
pub fn cumulative_real(rule: QuadratureRule, h: f64, f: &[f64]) -> Vec<f64> {
    let z: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    DampedWeights::new(rule, 0.0, h).cumulative(&z).into_iter().map(|c| c.re).collect()
}
