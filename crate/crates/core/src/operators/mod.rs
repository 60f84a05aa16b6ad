//! Normal-form multilinear operators in the bounded gauge.
//!
//! Each operator is a lattice sum `Σ m(k; k_i) Π ŵ_{k_i} e^{-it Re Q}` where the
//! multiplier `m` carries the complex phases (with `iε`). Because every phase
//! is a dispersion defect, `e^{-it Re Q} Π ŵ_{k_i} = e^{-ik³t} Π û_{k_i}`, so the
//! sums are evaluated on physical-gauge coefficients and twisted once at the
//! end. Inputs may be in either gauge; outputs are twisted.
//!
//! Singular denominators are excluded by integer predicates on the lattice,
//! never by testing magnitudes. Merged indices (sums of two or three input
//! frequencies that stand for one input of a lower-order operator) are kept
//! inside the band, matching the Galerkin truncation.

pub mod dispersive;
mod engine;
pub mod probe;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{to_physical, Gauge, SpectralField};

use engine::{cubic_sum, pair_product, quad_sum, triple_product, Signed};

pub use probe::{estimate_difference_probe, estimate_probe, OperatorKind, ProbeEnsemble, ProbeReport, ProbeSpec};

/// Evaluation time, dissipation and output restriction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpContext {
    pub t: f64,
    pub epsilon: f64,
    /// Only modes with `|k| > min_output` are computed; others are zero.
    pub min_output: usize,
}

impl OpContext {
    pub fn new(t: f64, epsilon: f64) -> Self {
        Self { t, epsilon, min_output: 0 }
    }

    pub fn above(mut self, n: usize) -> Self {
        self.min_output = n;
        self
    }
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub(crate) fn inputs<const N: usize>(fields: [&SpectralField; N], t: f64) -> Result<(usize, [Signed; N])> {
    let kb = fields[0].band();
    for f in &fields[1..] {
        if f.band() != kb {
            return Err(Error::GridMismatch { left: kb, right: f.band() });
        }
    }
    Ok((kb, fields.map(|f| to_physical(f, t).signed())))
}

pub(crate) fn finish(template: &SpectralField, mut out: Vec<Complex64>, t: f64) -> SpectralField {
    for (k, c) in out.iter_mut().enumerate() {
        let k = k as f64;
        *c *= Complex64::from_polar(1.0, -k * k * k * t);
    }
    out[0] = Complex64::new(0.0, 0.0);
    SpectralField::from_positive(template.grid(), Gauge::Twisted, out).expect("operator output is finite")
}

#[inline]
fn cdiv(num: Complex64, den: Complex64) -> Complex64 {
    num * den.conj() / den.norm_sqr()
}

/// `Q1(k, a, b)` as a complex number (on the lattice `k = a + b`).
#[inline]
fn q1c(k: i64, a: i64, b: i64, eps: f64) -> Complex64 {
    let ab = (a * b) as f64;
    Complex64::new(3.0 * k as f64 * ab, 2.0 * eps * ab)
}

/// `Q2(k, a, b, c)` as a complex number.
#[inline]
fn q2c(a: i64, b: i64, c: i64, eps: f64) -> Complex64 {
    let phi = 3.0 * ((a + b) * (b + c) * (a + c)) as f64;
    Complex64::new(phi, 2.0 * eps * (a * b + b * c + a * c) as f64)
}

#[inline]
fn resonant(a: i64, b: i64, c: i64) -> bool {
    (a + b) == 0 || (b + c) == 0 || (a + c) == 0
}

/// Quadratic boundary operator `Σ k/Q1 · ŵ_{k1} ŵ_{k2}`.
pub fn a2(u: &SpectralField, v: &SpectralField, ctx: OpContext) -> Result<SpectralField> {
    let (kb, [a, b]) = inputs([u, v], ctx.t)?;
    let eps = ctx.epsilon;
    let out = quad_sum(kb, &a, &b, ctx.min_output, |k, k1, k2| {
        Some(cdiv(Complex64::new(k as f64, 0.0), q1c(k, k1, k2, eps)))
    });
    Ok(finish(u, out, ctx.t))
}

/// Cubic boundary operator over non-resonant triples,
/// multiplier `k(k1+k2) / (Q1(k, k1+k2, k3) Q2(k, k1, k2, k3))`.
pub fn a3(u: &SpectralField, v: &SpectralField, w: &SpectralField, ctx: OpContext) -> Result<SpectralField> {
    let (kb, [a, b, c]) = inputs([u, v, w], ctx.t)?;
    let eps = ctx.epsilon;
    let band = kb as i64;
    let out = cubic_sum(kb, &a, &b, &c, ctx.min_output, |k, k1, k2, k3| {
        let s = k1 + k2;
        if resonant(k1, k2, k3) || s.abs() > band {
            return None;
        }
        let num = Complex64::new((k * s) as f64, 0.0);
        Some(cdiv(num, q1c(k, s, k3, eps) * q2c(k1, k2, k3, eps)))
    });
    Ok(finish(u, out, ctx.t))
}

/// Resonant cubic remainder: the `R3` sum over resonant triples with
/// `k1 + k2 ≠ 0`, multiplier `ik(k1+k2) / Q1(k, k1+k2, k3)`.
///
/// On these triples `k2 = k` (with `k3 = -k1`) or `k1 = k` (with `k3 = -k2`),
/// so the sum costs `O(K)` per mode.
pub fn r3_0(u: &SpectralField, v: &SpectralField, w: &SpectralField, ctx: OpContext) -> Result<SpectralField> {
    let (kb, [a, b, c]) = inputs([u, v, w], ctx.t)?;
    let eps = ctx.epsilon;
    let out = resonant_cubic(kb, &a, &b, &c, ctx.min_output, |k, k1, k2, k3| {
        let s = k1 + k2;
        I * cdiv(Complex64::new((k * s) as f64, 0.0), q1c(k, s, k3, eps))
    });
    Ok(finish(u, out, ctx.t))
}

/// Sum over `{k1 + k3 = 0} ∪ {k2 + k3 = 0}` with `k1 + k2 ≠ 0` and
/// `|k1 + k2| <= K`.
pub(crate) fn resonant_cubic(
    kb: usize,
    a: &Signed,
    b: &Signed,
    c: &Signed,
    kmin: usize,
    m: impl Fn(i64, i64, i64, i64) -> Complex64,
) -> Vec<Complex64> {
    let band = kb as i64;
    let at = |x: &Signed, i: i64| x[(i + band) as usize];
    let mut out = vec![Complex64::new(0.0, 0.0); kb + 1];
    for k in (kmin as i64 + 1)..=band {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in -band..=band {
            if j == 0 {
                continue;
            }
            // k1 = j, k2 = k, k3 = -j
            let s = j + k;
            if s != 0 && s.abs() <= band {
                acc += m(k, j, k, -j) * at(a, j) * at(b, k) * at(c, -j);
            }
            // k1 = k, k2 = j, k3 = -j, skipping the triple already counted
            let s = k + j;
            if j != k && s != 0 && s.abs() <= band {
                acc += m(k, k, j, -j) * at(a, k) * at(b, j) * at(c, -j);
            }
        }
        out[k as usize] = acc;
    }
    out
}

/// Quartic term from differentiating a split first slot of `A3`:
/// triples `(k1+k2, k3, k4)`, multiplier
/// `ik(k1+k2+k3)(k1+k2) / (Q1(k, k1+k2+k3, k4) Q2(k, k1+k2, k3, k4))`.
pub fn a4_1(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    z: &SpectralField,
    ctx: OpContext,
) -> Result<SpectralField> {
    let (kb, [pu, pv, pw, pz]) = inputs([u, v, w, z], ctx.t)?;
    let eps = ctx.epsilon;
    let band = kb as i64;
    let uv = pair_product(kb, &pu, &pv);
    let out = cubic_sum(kb, &uv, &pw, &pz, ctx.min_output, |k, s, k3, k4| {
        let b = s + k3;
        if resonant(s, k3, k4) || b.abs() > band {
            return None;
        }
        let num = Complex64::new(0.0, (k * b * s) as f64);
        Some(cdiv(num, q1c(k, b, k4, eps) * q2c(s, k3, k4, eps)))
    });
    Ok(finish(u, out, ctx.t))
}

/// Quartic term from differentiating the unsplit slot of `A3`:
/// triples `(k1, k2, k3+k4)`, multiplier
/// `ik(k1+k2)(k3+k4) / (Q1(k, k1+k2, k3+k4) Q2(k, k1, k2, k3+k4))`.
pub fn a4_2(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    z: &SpectralField,
    ctx: OpContext,
) -> Result<SpectralField> {
    let (kb, [pu, pv, pw, pz]) = inputs([u, v, w, z], ctx.t)?;
    let eps = ctx.epsilon;
    let band = kb as i64;
    let wz = pair_product(kb, &pw, &pz);
    let out = cubic_sum(kb, &pu, &pv, &wz, ctx.min_output, |k, k1, k2, c| {
        let s = k1 + k2;
        if resonant(k1, k2, c) || s.abs() > band {
            return None;
        }
        let num = Complex64::new(0.0, (k * s * c) as f64);
        Some(cdiv(num, q1c(k, s, c, eps) * q2c(k1, k2, c, eps)))
    });
    Ok(finish(u, out, ctx.t))
}

/// `A2(v, v) + 2 A3(v, v, v)`.
pub fn a_total(v: &SpectralField, ctx: OpContext) -> Result<SpectralField> {
    let p = a2(v, v, ctx)?;
    let q = a3(v, v, v, ctx)?;
    Ok(&p + &q.scale(2.0))
}

/// `R3_0(v, v, v) + 2 A4_1(v, v, v, v) + A4_2(v, v, v, v)`.
pub fn b_total(v: &SpectralField, ctx: OpContext) -> Result<SpectralField> {
    let r = r3_0(v, v, v, ctx)?;
    let p = a4_1(v, v, v, v, ctx)?;
    let q = a4_2(v, v, v, v, ctx)?;
    Ok(&(&r + &p.scale(2.0)) + &q)
}

/// Diagonal resonant cubic term `-ik |ŵ_k|² ŵ_k`, polarised as
/// `-ik ŵ1_k conj(ŵ2_k) ŵ3_k`.
pub fn mkdv_resonant(u: &SpectralField, v: &SpectralField, w: &SpectralField, ctx: OpContext) -> Result<SpectralField> {
    let (kb, [a, b, c]) = inputs([u, v, w], ctx.t)?;
    let band = kb as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); kb + 1];
    for k in (ctx.min_output as i64 + 1)..=band {
        let i = |x: i64| (x + band) as usize;
        out[k as usize] = -I * k as f64 * a[i(k)] * b[i(-k)] * c[i(k)];
    }
    Ok(finish(u, out, ctx.t))
}

/// Full cubic interaction restricted to resonant triples,
/// `ik Σ_{resonant} ŵ_{k1} ŵ_{k2} ŵ_{k3}`, by inclusion-exclusion over the
/// three pairings. For a single field at `k ≠ 0` this is
/// `ik (3 M ŵ_k - 3 |ŵ_k|² ŵ_k)` with `M = Σ_j |ŵ_j|²`.
pub fn mkdv_gamma0(u: &SpectralField, v: &SpectralField, w: &SpectralField, ctx: OpContext) -> Result<SpectralField> {
    let (kb, [a, b, c]) = inputs([u, v, w], ctx.t)?;
    let band = kb as i64;
    let i = |x: i64| (x + band) as usize;
    let pair = |x: &Signed, y: &Signed| -> Complex64 {
        (-band..=band).filter(|&j| j != 0).map(|j| x[i(j)] * y[i(-j)]).sum()
    };
    let (ab, ac, bc) = (pair(&a, &b), pair(&a, &c), pair(&b, &c));
    let mut out = vec![Complex64::new(0.0, 0.0); kb + 1];
    for k in (ctx.min_output as i64 + 1)..=band {
        let branch = ab * c[i(k)] + ac * b[i(k)] + bc * a[i(k)];
        let overlap = a[i(-k)] * b[i(k)] * c[i(k)] + a[i(k)] * b[i(-k)] * c[i(k)] + a[i(k)] * b[i(k)] * c[i(-k)];
        out[k as usize] = I * k as f64 * (branch - overlap);
    }
    Ok(finish(u, out, ctx.t))
}

/// Cubic boundary operator `Σ_{non-resonant} k/Q2 · ŵ_{k1} ŵ_{k2} ŵ_{k3}`.
pub fn mkdv_n1(u: &SpectralField, v: &SpectralField, w: &SpectralField, ctx: OpContext) -> Result<SpectralField> {
    let (kb, [a, b, c]) = inputs([u, v, w], ctx.t)?;
    let eps = ctx.epsilon;
    let out = cubic_sum(kb, &a, &b, &c, ctx.min_output, |k, k1, k2, k3| {
        if resonant(k1, k2, k3) {
            return None;
        }
        Some(cdiv(Complex64::new(k as f64, 0.0), q2c(k1, k2, k3, eps)))
    });
    Ok(finish(u, out, ctx.t))
}

/// Quintic term: the first slot of `N1` replaced by its cubic interaction,
/// multiplier `ik k1 / Q2(k, k1, k2, k3)` with `k1 = j1 + j2 + j3` in band.
pub fn mkdv_n2(fields: [&SpectralField; 5], ctx: OpContext) -> Result<SpectralField> {
    let (kb, [p1, p2, p3, p4, p5]) = inputs(fields, ctx.t)?;
    let eps = ctx.epsilon;
    let inner = triple_product(kb, &p1, &p2, &p3);
    let out = cubic_sum(kb, &inner, &p4, &p5, ctx.min_output, |k, k1, k2, k3| {
        if resonant(k1, k2, k3) {
            return None;
        }
        Some(cdiv(Complex64::new(0.0, (k * k1) as f64), q2c(k1, k2, k3, eps)))
    });
    Ok(finish(fields[0], out, ctx.t))
}

/// Low-frequency interaction `ik (u^α)^_k` in the twisted gauge.
pub fn interaction(v: &SpectralField, alpha: u32, ctx: OpContext) -> Result<SpectralField> {
    let (kb, [a]) = inputs([v], ctx.t)?;
    let p = match alpha {
        2 => pair_product(kb, &a, &a),
        3 => triple_product(kb, &a, &a, &a),
        _ => return Err(Error::InvalidParameter(format!("unsupported power {alpha}"))),
    };
    let mut out: Vec<Complex64> = (0..=kb).map(|k| I * k as f64 * p[kb + k]).collect();
    for c in out.iter_mut().take(ctx.min_output + 1) {
        *c = Complex64::new(0.0, 0.0);
    }
    Ok(finish(v, out, ctx.t))
}
