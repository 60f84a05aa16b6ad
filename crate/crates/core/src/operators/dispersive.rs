//! The same operators at `ε = 0`, with multipliers simplified by hand.
//!
//! Used as an independent cross-check of the general path.

use num_complex::Complex64;

use super::engine::{cubic_sum, pair_product, quad_sum, triple_product};
use super::{finish, inputs, resonant_cubic, OpContext};
use crate::error::Result;
use crate::phase::phase_tilde;
use crate::spectral::SpectralField;

fn ctx0(t: f64, min_output: usize) -> OpContext {
    OpContext { t, epsilon: 0.0, min_output }
}

pub fn a2(u: &SpectralField, v: &SpectralField, t: f64, min_output: usize) -> Result<SpectralField> {
    let c = ctx0(t, min_output);
    let (kb, [a, b]) = inputs([u, v], c.t)?;
    let out = quad_sum(kb, &a, &b, c.min_output, |_, k1, k2| {
        Some(Complex64::new(1.0 / (3 * k1 * k2) as f64, 0.0))
    });
    Ok(finish(u, out, t))
}

pub fn a3(u: &SpectralField, v: &SpectralField, w: &SpectralField, t: f64, min_output: usize) -> Result<SpectralField> {
    let (kb, [a, b, c]) = inputs([u, v, w], t)?;
    let band = kb as i64;
    let out = cubic_sum(kb, &a, &b, &c, min_output, |_, k1, k2, k3| {
        let phi = phase_tilde(k1, k2, k3);
        if phi == 0 || (k1 + k2).abs() > band {
            return None;
        }
        Some(Complex64::new(1.0 / (3.0 * k3 as f64 * phi as f64), 0.0))
    });
    Ok(finish(u, out, t))
}

pub fn r3_0(u: &SpectralField, v: &SpectralField, w: &SpectralField, t: f64, min_output: usize) -> Result<SpectralField> {
    let (kb, [a, b, c]) = inputs([u, v, w], t)?;
    let out = resonant_cubic(kb, &a, &b, &c, min_output, |_, _, _, k3| Complex64::new(0.0, 1.0 / (3 * k3) as f64));
    Ok(finish(u, out, t))
}

pub fn a4_1(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    z: &SpectralField,
    t: f64,
    min_output: usize,
) -> Result<SpectralField> {
    let (kb, [pu, pv, pw, pz]) = inputs([u, v, w, z], t)?;
    let band = kb as i64;
    let uv = pair_product(kb, &pu, &pv);
    let out = cubic_sum(kb, &uv, &pw, &pz, min_output, |_, s, k3, k4| {
        let phi = phase_tilde(s, k3, k4);
        if phi == 0 || (s + k3).abs() > band {
            return None;
        }
        Some(Complex64::new(0.0, s as f64 / (3.0 * k4 as f64 * phi as f64)))
    });
    Ok(finish(u, out, t))
}

pub fn a4_2(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    z: &SpectralField,
    t: f64,
    min_output: usize,
) -> Result<SpectralField> {
    let (kb, [pu, pv, pw, pz]) = inputs([u, v, w, z], t)?;
    let band = kb as i64;
    let wz = pair_product(kb, &pw, &pz);
    let out = cubic_sum(kb, &pu, &pv, &wz, min_output, |_, k1, k2, c| {
        let phi = phase_tilde(k1, k2, c);
        if phi == 0 || (k1 + k2).abs() > band {
            return None;
        }
        Some(Complex64::new(0.0, 1.0 / (3.0 * phi as f64)))
    });
    Ok(finish(u, out, t))
}

pub fn mkdv_n1(u: &SpectralField, v: &SpectralField, w: &SpectralField, t: f64, min_output: usize) -> Result<SpectralField> {
    let (kb, [a, b, c]) = inputs([u, v, w], t)?;
    let out = cubic_sum(kb, &a, &b, &c, min_output, |k, k1, k2, k3| {
        let phi = phase_tilde(k1, k2, k3);
        (phi != 0).then(|| Complex64::new(k as f64 / phi as f64, 0.0))
    });
    Ok(finish(u, out, t))
}

pub fn mkdv_n2(fields: [&SpectralField; 5], t: f64, min_output: usize) -> Result<SpectralField> {
    let (kb, [p1, p2, p3, p4, p5]) = inputs(fields, t)?;
    let inner = triple_product(kb, &p1, &p2, &p3);
    let out = cubic_sum(kb, &inner, &p4, &p5, min_output, |k, k1, k2, k3| {
        let phi = phase_tilde(k1, k2, k3);
        (phi != 0).then(|| Complex64::new(0.0, (k * k1) as f64 / phi as f64))
    });
    Ok(finish(fields[0], out, t))
}
