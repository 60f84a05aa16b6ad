//! Band-limited 2π-periodic real fields stored by their Fourier coefficients.
//!
//! Convention: `f(x) = Σ_k f̂_k e^{ikx}` with `f̂_k = (1/2π)∫ e^{-ikx} f(x) dx`, so
//! `‖f‖²_{L²} = 2π Σ |f̂_k|²`. Only modes `0..=K` are stored; negative modes are
//! recovered by conjugation, which keeps every field real by construction.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Largest exponent allowed in a growing semigroup factor before we refuse.
const EXP_GUARD: f64 = 700.0;

/// Band limit `K` and the dealiasing limit applied after products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    band: usize,
    dealias: usize,
}

impl GridSpec {
    pub fn new(band: usize) -> Result<Self> {
        Self::with_dealias(band, band)
    }

    pub fn with_dealias(band: usize, dealias: usize) -> Result<Self> {
        if band == 0 {
            return Err(Error::EmptyBand);
        }
        if dealias > band {
            return Err(Error::BadDealias { dealias, band });
        }
        Ok(Self { band, dealias })
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn dealias(&self) -> usize {
        self.dealias
    }

    /// Number of stored signed modes, `2K + 1`.
    pub fn width(&self) -> usize {
        2 * self.band + 1
    }
}

/// Which picture a field is expressed in.
///
/// `Twisted` means the bounded interaction variable `e^{t∂³}u`, whose
/// coefficients are `e^{-ik³t} û_k`; moduli agree with the physical field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    Physical,
    Twisted,
}

/// Sobolev exponent together with the choice of weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub s: f64,
    pub homogeneous: bool,
}

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex { s: 0.0, homogeneous: false };

    pub fn new(s: f64) -> Self {
        Self { s, homogeneous: false }
    }

    pub fn homogeneous(s: f64) -> Self {
        Self { s, homogeneous: true }
    }

    /// The squared weight attached to mode `k`.
    #[inline]
    pub fn weight2(&self, k: i64) -> f64 {
        let k2 = (k * k) as f64;
        if self.homogeneous {
            if k == 0 {
                0.0
            } else {
                k2.powf(self.s)
            }
        } else {
            (1.0 + k2).powf(self.s)
        }
    }

    pub fn shifted(&self, ds: f64) -> Self {
        Self { s: self.s + ds, homogeneous: self.homogeneous }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemigroupParts {
    Full,
    DispersiveOnly,
    DissipativeOnly,
}

/// How products of fields are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ProductMethod {
    /// Direct convolution below the crossover band, FFT above it.
    #[default]
    Auto,
    Direct,
    Fft,
}

const DIRECT_CROSSOVER: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    gauge: Gauge,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec, gauge: Gauge) -> Self {
        Self { grid, gauge, coeffs: vec![Complex64::new(0.0, 0.0); grid.band + 1] }
    }

    /// Builds a field from its nonnegative modes `1..=K`. Entry 0 must be zero.
    pub fn from_positive(grid: GridSpec, gauge: Gauge, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.band + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                grid.band + 1,
                coeffs.len()
            )));
        }
        if coeffs[0].norm() != 0.0 {
            return Err(Error::NonzeroMean(coeffs[0].norm()));
        }
        for (k, c) in coeffs.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite(k as i64));
            }
        }
        Ok(Self { grid, gauge, coeffs })
    }

    /// Builds a field from a signed coefficient array of length `2K + 1`
    /// (index `k + K`), checking conjugate symmetry to `tol`.
    pub fn from_signed(grid: GridSpec, gauge: Gauge, full: &[Complex64], tol: f64) -> Result<Self> {
        let kb = grid.band;
        if full.len() != grid.width() {
            return Err(Error::InvalidParameter(format!(
                "expected {} signed coefficients, got {}",
                grid.width(),
                full.len()
            )));
        }
        if full[kb].norm() > tol {
            return Err(Error::NonzeroMean(full[kb].norm()));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); kb + 1];
        for k in 1..=kb {
            let p = full[kb + k];
            let m = full[kb - k];
            if (p - m.conj()).norm() > tol * (1.0 + p.norm()) {
                return Err(Error::NotConjugateSymmetric { mode: k as i64 });
            }
            coeffs[k] = p;
        }
        Self::from_positive(grid, gauge, coeffs)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn band(&self) -> usize {
        self.grid.band
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    /// Coefficients for modes `0..=K`.
    pub fn positive(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn positive_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at signed mode `k`; zero outside the band.
    #[inline]
    pub fn coeff(&self, k: i64) -> Complex64 {
        let a = k.unsigned_abs() as usize;
        if a > self.grid.band {
            return Complex64::new(0.0, 0.0);
        }
        if k >= 0 {
            self.coeffs[a]
        } else {
            self.coeffs[a].conj()
        }
    }

    /// Signed coefficient array of length `2K + 1`, index `k + K`.
    pub fn signed(&self) -> Vec<Complex64> {
        let kb = self.grid.band;
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * kb + 1];
        for k in 1..=kb {
            out[kb + k] = self.coeffs[k];
            out[kb - k] = self.coeffs[k].conj();
        }
        out
    }

    /// Applies `f(k, û_k)` to each positive mode. `f` must respect the real
    /// structure, i.e. `f(-k, conj z) = conj f(k, z)`.
    pub fn map_modes(&self, mut f: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for k in 1..=self.grid.band {
            out.coeffs[k] = f(k as i64, self.coeffs[k]);
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_modes(|_, z| z * c)
    }

    pub fn norm2_weighted(&self, idx: SobolevIndex) -> f64 {
        let sum: f64 = (1..=self.grid.band)
            .map(|k| idx.weight2(k as i64) * self.coeffs[k].norm_sqr())
            .sum();
        2.0 * TWO_PI * sum
    }

    pub fn l2_norm(&self) -> f64 {
        sobolev_norm(self, SobolevIndex::L2)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Point value `u(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let s: f64 = (1..=self.grid.band)
            .map(|k| (self.coeffs[k] * Complex64::from_polar(1.0, k as f64 * x)).re)
            .sum();
        2.0 * s
    }

    /// Samples on `n` equispaced points `x_j = 2πj/n`.
    pub fn to_grid(&self, n: usize) -> Vec<f64> {
        let kb = self.grid.band;
        if n < 2 * kb + 1 {
            return (0..n).map(|j| self.evaluate(TWO_PI * j as f64 / n as f64)).collect();
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for k in 1..=kb {
            buf[k] = self.coeffs[k];
            buf[n - k] = self.coeffs[k].conj();
        }
        fft_plan(n, true).process(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.band != other.grid.band {
            return Err(Error::GridMismatch { left: self.grid.band, right: other.grid.band });
        }
        Ok(())
    }

    /// Exact band-limited product, truncated to the band and then to the
    /// dealias limit.
    pub fn product(&self, other: &Self, method: ProductMethod) -> Result<Self> {
        self.check_same_grid(other)?;
        let kb = self.grid.band;
        let use_fft = match method {
            ProductMethod::Direct => false,
            ProductMethod::Fft => true,
            ProductMethod::Auto => kb > DIRECT_CROSSOVER,
        };
        let out = if use_fft {
            fft_power_product(&[self, other], kb)
        } else {
            let a = self.signed();
            let b = other.signed();
            convolve_positive(&a, &b, kb)
        };
        Ok(self.finish_product(out))
    }

    /// `u^alpha` for `alpha >= 1`.
    pub fn power(&self, alpha: u32, method: ProductMethod) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidParameter("power must be positive".into()));
        }
        let kb = self.grid.band;
        let use_fft = match method {
            ProductMethod::Direct => false,
            ProductMethod::Fft => true,
            ProductMethod::Auto => kb > DIRECT_CROSSOVER,
        };
        if use_fft && alpha > 1 {
            let factors: Vec<&Self> = (0..alpha).map(|_| self).collect();
            return Ok(self.finish_product(fft_power_product(&factors, kb)));
        }
        let mut acc = self.signed();
        let mut half = kb;
        for i in 1..alpha {
            let out_half = if i + 1 == alpha { kb } else { half + kb };
            acc = convolve_wide(&acc, half, &self.signed(), kb, out_half);
            half = out_half;
        }
        Ok(self.finish_product(acc[kb..].to_vec()))
    }

    fn finish_product(&self, mut coeffs: Vec<Complex64>) -> Self {
        coeffs[0] = Complex64::new(0.0, 0.0);
        for c in coeffs.iter_mut().skip(self.grid.dealias + 1) {
            *c = Complex64::new(0.0, 0.0);
        }
        Self { grid: self.grid, gauge: self.gauge, coeffs }
    }
}

/// Positive-mode part (`0..=K`) of the convolution of two signed arrays.
pub(crate) fn convolve_positive(a: &[Complex64], b: &[Complex64], kb: usize) -> Vec<Complex64> {
    let k = kb as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); kb + 1];
    for (m, slot) in out.iter_mut().enumerate() {
        let m = m as i64;
        let lo = (m - k).max(-k);
        let hi = k.min(m + k);
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in lo..=hi {
            acc += a[(k1 + k) as usize] * b[(m - k1 + k) as usize];
        }
        *slot = acc;
    }
    out
}

/// Convolution of signed arrays supported on `|k| <= ha` and `|k| <= hb`,
/// returned on `|k| <= out_half`.
pub(crate) fn convolve_wide(a: &[Complex64], ha: usize, b: &[Complex64], hb: usize, out_half: usize) -> Vec<Complex64> {
    let (ha_i, hb_i, oh) = (ha as i64, hb as i64, out_half as i64);
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * out_half + 1];
    for m in 0..=oh {
        let lo = (-ha_i).max(m - hb_i);
        let hi = ha_i.min(m + hb_i);
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in lo..=hi {
            acc += a[(k1 + ha_i) as usize] * b[(m - k1 + hb_i) as usize];
        }
        out[(oh + m) as usize] = acc;
        out[(oh - m) as usize] = acc.conj();
    }
    out
}

/// Signed-array convolution, returning a signed array over `-K..=K`.
pub(crate) fn convolve_signed(a: &[Complex64], b: &[Complex64], kb: usize) -> Vec<Complex64> {
    let pos = convolve_positive(a, b, kb);
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * kb + 1];
    for k in 0..=kb {
        out[kb + k] = pos[k];
        out[kb - k] = pos[k].conj();
    }
    out
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Pointwise product of several fields on a grid fine enough that no alias
/// reaches `|k| <= K`.
fn fft_power_product(factors: &[&SpectralField], kb: usize) -> Vec<Complex64> {
    let alpha = factors.len();
    let n = ((alpha + 1) * kb + 1).next_power_of_two();
    let inv = fft_plan(n, true);
    let mut prod = vec![1.0f64; n];
    for f in factors {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for k in 1..=kb {
            buf[k] = f.coeffs[k];
            buf[n - k] = f.coeffs[k].conj();
        }
        inv.process(&mut buf);
        for (p, z) in prod.iter_mut().zip(&buf) {
            *p *= z.re;
        }
    }
    let mut buf: Vec<Complex64> = prod.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    fft_plan(n, false).process(&mut buf);
    let scale = 1.0 / n as f64;
    (0..=kb).map(|k| buf[k] * scale).collect()
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid.band, rhs.grid.band, "grid mismatch");
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid.band, rhs.grid.band, "grid mismatch");
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

/// Builds a real field from a sparse signed-mode map. The map is symmetrised
/// as `(c_k + conj c_{-k}) / 2`; a nonzero mean or an out-of-band mode is an error.
pub fn make_field(coeffs: &BTreeMap<i64, Complex64>, grid: GridSpec) -> Result<SpectralField> {
    let kb = grid.band as i64;
    for (&k, c) in coeffs {
        if k.abs() > kb {
            return Err(Error::OutOfBand { mode: k, band: grid.band });
        }
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::NonFinite(k));
        }
        if k == 0 && c.norm() != 0.0 {
            return Err(Error::NonzeroMean(c.norm()));
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; grid.band + 1];
    for k in 1..=kb {
        let p = coeffs.get(&k).copied().unwrap_or(zero);
        let m = coeffs.get(&-k).copied().unwrap_or(zero);
        out[k as usize] = (p + m.conj()) * 0.5;
    }
    SpectralField::from_positive(grid, Gauge::Physical, out)
}

/// `A cos(m x)` as a field.
pub fn cosine(grid: GridSpec, mode: i64, amplitude: f64) -> Result<SpectralField> {
    let mut m = BTreeMap::new();
    m.insert(mode, Complex64::new(amplitude / 2.0, 0.0));
    m.insert(-mode, Complex64::new(amplitude / 2.0, 0.0));
    make_field(&m, grid)
}

/// Random real field with `|û_k| = amplitude · |k|^{-(s+1)}` and uniform
/// random phases. Phases are drawn mode by mode, so a larger band extends a
/// smaller one with the same seed.
pub fn random_sobolev_field(grid: GridSpec, s: f64, seed: u64, amplitude: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SpectralField::zeros(grid, Gauge::Physical);
    for k in 1..=grid.band {
        let theta: f64 = rng.gen_range(0.0..TWO_PI);
        let r = amplitude * (k as f64).powf(-(s + 1.0));
        out.coeffs[k] = Complex64::from_polar(r, theta);
    }
    out
}

/// Random-phase field supported on `lo <= |k| <= hi` with unit coefficients
/// before normalisation to unit `H^s` norm.
pub fn random_band_field(grid: GridSpec, lo: usize, hi: usize, idx: SobolevIndex, seed: u64) -> Result<SpectralField> {
    if lo == 0 || lo > hi || hi > grid.band {
        return Err(Error::InvalidParameter(format!("bad packet band [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SpectralField::zeros(grid, Gauge::Physical);
    for k in lo..=hi {
        let theta: f64 = rng.gen_range(0.0..TWO_PI);
        let r: f64 = rng.gen_range(0.5..1.0);
        out.coeffs[k] = Complex64::from_polar(r, theta);
    }
    let n = sobolev_norm(&out, idx);
    Ok(out.scale(1.0 / n))
}

pub fn sobolev_norm(f: &SpectralField, idx: SobolevIndex) -> f64 {
    f.norm2_weighted(idx).sqrt()
}

/// Keeps modes with `lo < |k| <= hi`.
pub fn project_band(f: &SpectralField, lo: usize, hi: usize) -> SpectralField {
    f.map_modes(|k, z| {
        let a = k as usize;
        if a > lo && a <= hi {
            z
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `P_{<=n}`.
pub fn project_low(f: &SpectralField, n: usize) -> SpectralField {
    project_band(f, 0, n)
}

/// `P_{>n}`.
pub fn project_high(f: &SpectralField, n: usize) -> SpectralField {
    project_band(f, n, usize::MAX)
}

/// `∂^order` for any signed order; negative orders act on the mean-free part.
pub fn derivative(f: &SpectralField, order: i32) -> SpectralField {
    f.map_modes(|k, z| z * Complex64::new(0.0, k as f64).powi(order))
}

pub fn inv_derivative(f: &SpectralField) -> SpectralField {
    derivative(f, -1)
}

/// Multiplier of `e^{t(∂³ - ε∂²)}` (restricted to `parts`) at mode `k`, in
/// the given direction.
pub fn semigroup_symbol(k: i64, t: f64, epsilon: f64, direction: Direction, parts: SemigroupParts) -> Complex64 {
    let kf = k as f64;
    let (disp, diss) = match parts {
        SemigroupParts::Full => (true, true),
        SemigroupParts::DispersiveOnly => (true, false),
        SemigroupParts::DissipativeOnly => (false, true),
    };
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Inverse => -1.0,
    };
    let re = if diss { sign * t * epsilon * kf * kf } else { 0.0 };
    let im = if disp { -sign * t * kf * kf * kf } else { 0.0 };
    Complex64::from_polar(re.exp(), im)
}

/// Applies `e^{±t(∂³ - ε∂²)}` or one of its factors. Refuses growing factors
/// that would overflow.
pub fn semigroup(
    f: &SpectralField,
    t: f64,
    epsilon: f64,
    direction: Direction,
    parts: SemigroupParts,
) -> Result<SpectralField> {
    if epsilon < 0.0 || !epsilon.is_finite() || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t = {t}, epsilon = {epsilon}")));
    }
    let kb = f.band() as f64;
    let sign = if direction == Direction::Forward { 1.0 } else { -1.0 };
    if parts != SemigroupParts::DispersiveOnly && sign * t * epsilon * kb * kb > EXP_GUARD {
        return Err(Error::SemigroupOverflow { t, epsilon, band: f.band() });
    }
    Ok(f.map_modes(|k, z| z * semigroup_symbol(k, t, epsilon, direction, parts)))
}

/// Physical field at time `t` into the twisted picture: `ŵ_k = e^{-ik³t} û_k`.
pub fn twist(f: &SpectralField, t: f64) -> SpectralField {
    let mut out = f.map_modes(|k, z| z * Complex64::from_polar(1.0, -(k * k * k) as f64 * t));
    out.gauge = Gauge::Twisted;
    out
}

/// Inverse of [`twist`].
pub fn untwist(f: &SpectralField, t: f64) -> SpectralField {
    let mut out = f.map_modes(|k, z| z * Complex64::from_polar(1.0, (k * k * k) as f64 * t));
    out.gauge = Gauge::Physical;
    out
}

/// Physical-gauge representative of `f` at time `t`.
pub fn to_physical(f: &SpectralField, t: f64) -> SpectralField {
    match f.gauge() {
        Gauge::Physical => f.clone(),
        Gauge::Twisted => untwist(f, t),
    }
}

/// Twisted-gauge representative of `f` at time `t`.
pub fn to_twisted(f: &SpectralField, t: f64) -> SpectralField {
    match f.gauge() {
        Gauge::Twisted => f.clone(),
        Gauge::Physical => twist(f, t),
    }
}
