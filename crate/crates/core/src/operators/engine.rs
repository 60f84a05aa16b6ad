use num_complex::Complex64;
use rayon::prelude::*;

use crate::spectral::{convolve_signed, convolve_wide};

/// Signed coefficient array over `-K..=K`, index `k + K`.
pub(crate) type Signed = Vec<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `Σ_{k1+k2=k} m(k,k1,k2) a_{k1} b_{k2}` for `K >= k > kmin`.
pub(crate) fn quad_sum<F>(kb: usize, a: &Signed, b: &Signed, kmin: usize, m: F) -> Vec<Complex64>
where
    F: Fn(i64, i64, i64) -> Option<Complex64> + Sync,
{
    let band = kb as i64;
    let per_mode = |k: i64| -> Complex64 {
        let mut acc = ZERO;
        for k1 in (-band).max(k - band)..=band.min(k + band) {
            let k2 = k - k1;
            if k1 == 0 || k2 == 0 {
                continue;
            }
            let ab = a[(k1 + band) as usize] * b[(k2 + band) as usize];
            if ab == ZERO {
                continue;
            }
            if let Some(w) = m(k, k1, k2) {
                acc += w * ab;
            }
        }
        acc
    };
    collect_modes(kb, kmin, per_mode)
}

/// `Σ_{k1+k2+k3=k} m(k,k1,k2,k3) a_{k1} b_{k2} c_{k3}` over nonzero indices.
pub(crate) fn cubic_sum<F>(kb: usize, a: &Signed, b: &Signed, c: &Signed, kmin: usize, m: F) -> Vec<Complex64>
where
    F: Fn(i64, i64, i64, i64) -> Option<Complex64> + Sync,
{
    let band = kb as i64;
    let per_mode = |k: i64| -> Complex64 {
        let mut acc = ZERO;
        for k1 in -band..=band {
            let x = a[(k1 + band) as usize];
            if k1 == 0 || x == ZERO {
                continue;
            }
            let lo = (-band).max(k - k1 - band);
            let hi = band.min(k - k1 + band);
            let mut inner = ZERO;
            for k2 in lo..=hi {
                let k3 = k - k1 - k2;
                if k2 == 0 || k3 == 0 {
                    continue;
                }
                let yz = b[(k2 + band) as usize] * c[(k3 + band) as usize];
                if yz == ZERO {
                    continue;
                }
                if let Some(w) = m(k, k1, k2, k3) {
                    inner += w * yz;
                }
            }
            acc += x * inner;
        }
        acc
    };
    collect_modes(kb, kmin, per_mode)
}

fn collect_modes(kb: usize, kmin: usize, per_mode: impl Fn(i64) -> Complex64 + Sync) -> Vec<Complex64> {
    let mut out = vec![ZERO; kb + 1];
    if kmin < kb {
        let vals: Vec<Complex64> = ((kmin + 1)..=kb).into_par_iter().map(|k| per_mode(k as i64)).collect();
        out[kmin + 1..].copy_from_slice(&vals);
    }
    out
}

/// `(a * b)` restricted to the band.
pub(crate) fn pair_product(kb: usize, a: &Signed, b: &Signed) -> Signed {
    convolve_signed(a, b, kb)
}

/// Exact `(a * b * c)` restricted to the band (no intermediate truncation).
pub(crate) fn triple_product(kb: usize, a: &Signed, b: &Signed, c: &Signed) -> Signed {
    let ab = convolve_wide(a, kb, b, kb, 2 * kb);
    convolve_wide(&ab, 2 * kb, c, kb, kb)
}
