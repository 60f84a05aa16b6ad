//! Fixtures shared by the benchmarks under `benches/`.

use kdvb_core::spectral::random_sobolev_field;
use kdvb_core::{GridSpec, SpectralField};

/// Random field with `|û_k| ∝ k^{-1}` on `band` modes.
pub fn field(band: usize, seed: u64) -> SpectralField {
    random_sobolev_field(GridSpec::new(band).expect("band >= 1"), 0.0, seed, 0.1)
}
