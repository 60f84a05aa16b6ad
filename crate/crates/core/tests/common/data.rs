#![allow(dead_code)]

use kdvb_core::spectral::{sobolev_norm, Gauge, GridSpec, SobolevIndex, SpectralField};
use num_complex::Complex64;

/// Analytic data `û_k ∝ e^{-k/2} e^{0.7ik}` scaled to `‖φ‖_{idx} = norm`.
pub fn smooth(grid: GridSpec, idx: SobolevIndex, norm: f64) -> SpectralField {
    let c: Vec<Complex64> = (0..=grid.band())
        .map(|k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar((-(k as f64) / 2.0).exp(), 0.7 * k as f64)
            }
        })
        .collect();
    let f = SpectralField::from_positive(grid, Gauge::Physical, c).unwrap();
    let n = sobolev_norm(&f, idx);
    f.scale(norm / n)
}
