//! Resonance functions on the frequency lattice.
//!
//! Every phase is `p(k) - Σ p(k_i)` with `p(k) = k³ + iεk²`. The real and the
//! `ε`-coefficient parts are kept as exact integers; `ε` enters only when a
//! complex value is requested.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `real + iε·dissipative`, both exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phase {
    pub real: i128,
    pub dissipative: i128,
}

impl Phase {
    #[inline]
    pub fn at(&self, epsilon: f64) -> Complex64 {
        Complex64::new(self.real as f64, epsilon * self.dissipative as f64)
    }

    #[inline]
    pub fn norm_sqr_at(&self, epsilon: f64) -> f64 {
        let r = self.real as f64;
        let d = epsilon * self.dissipative as f64;
        r * r + d * d
    }

    /// Whether the complex value vanishes for this `ε`.
    #[inline]
    pub fn vanishes(&self, epsilon: f64) -> bool {
        self.real == 0 && (self.dissipative == 0 || epsilon == 0.0)
    }
}

impl std::ops::Add for Phase {
    type Output = Phase;
    fn add(self, o: Phase) -> Phase {
        Phase { real: self.real + o.real, dissipative: self.dissipative + o.dissipative }
    }
}

/// `p(k) - Σ p(k_i)` without lattice checks.
#[inline]
pub fn dispersion_defect(k: i64, ks: &[i64]) -> Phase {
    let cube = |x: i64| (x as i128).pow(3);
    let sq = |x: i64| (x as i128).pow(2);
    Phase {
        real: cube(k) - ks.iter().map(|&x| cube(x)).sum::<i128>(),
        dissipative: sq(k) - ks.iter().map(|&x| sq(x)).sum::<i128>(),
    }
}

fn on_lattice(k: i64, ks: &[i64]) -> Result<()> {
    if ks.iter().sum::<i64>() != k {
        let mut v = vec![k];
        v.extend_from_slice(ks);
        return Err(Error::NotOnLattice(v));
    }
    Ok(())
}

/// `φ̃(k1,k2,k3) = 3(k1+k2)(k2+k3)(k1+k3)`.
#[inline]
pub fn phase_tilde(k1: i64, k2: i64, k3: i64) -> i128 {
    let (a, b, c) = ((k1 + k2) as i128, (k2 + k3) as i128, (k1 + k3) as i128);
    3 * a * b * c
}

pub fn q1_exact(k: i64, k1: i64, k2: i64) -> Result<Phase> {
    on_lattice(k, &[k1, k2])?;
    let (k, k1, k2) = (k as i128, k1 as i128, k2 as i128);
    Ok(Phase { real: 3 * k * k1 * k2, dissipative: 2 * k1 * k2 })
}

pub fn q2_exact(k: i64, k1: i64, k2: i64, k3: i64) -> Result<Phase> {
    on_lattice(k, &[k1, k2, k3])?;
    let (a, b, c) = (k1 as i128, k2 as i128, k3 as i128);
    Ok(Phase { real: phase_tilde(k1, k2, k3), dissipative: 2 * (a * b + b * c + a * c) })
}

/// Quartic phase obtained by splitting the first slot of a triple:
/// `Q2(k, k1+k2, k3, k4) + Q1(k1+k2, k1, k2)`.
pub fn q3_kdv_exact(k: i64, k1: i64, k2: i64, k3: i64, k4: i64) -> Result<Phase> {
    Ok(q2_exact(k, k1 + k2, k3, k4)? + q1_exact(k1 + k2, k1, k2)?)
}

/// Quintic phase obtained by splitting `k1 = j1 + j2 + j3`:
/// `Q2(k, k1, k2, k3) + Q2(k1, j1, j2, j3)`.
pub fn q3_mkdv_exact(k: i64, k1: i64, k2: i64, k3: i64, j: [i64; 3]) -> Result<Phase> {
    Ok(q2_exact(k, k1, k2, k3)? + q2_exact(k1, j[0], j[1], j[2])?)
}

pub fn q1(k: i64, k1: i64, k2: i64, epsilon: f64) -> Result<Complex64> {
    Ok(q1_exact(k, k1, k2)?.at(epsilon))
}

pub fn q2(k: i64, k1: i64, k2: i64, k3: i64, epsilon: f64) -> Result<Complex64> {
    Ok(q2_exact(k, k1, k2, k3)?.at(epsilon))
}

pub fn q3_kdv(k: i64, k1: i64, k2: i64, k3: i64, k4: i64, epsilon: f64) -> Result<Complex64> {
    Ok(q3_kdv_exact(k, k1, k2, k3, k4)?.at(epsilon))
}

pub fn q3_mkdv(k: i64, k1: i64, k2: i64, k3: i64, j: [i64; 3], epsilon: f64) -> Result<Complex64> {
    Ok(q3_mkdv_exact(k, k1, k2, k3, j)?.at(epsilon))
}

/// Constants standing in for `≪`, `≳` and `∼`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub c_much_less: f64,
    pub c_gtrsim: f64,
    pub c_sim: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { c_much_less: 0.1, c_gtrsim: 1.0, c_sim: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResonanceClass {
    Gamma0,
    Gamma1,
    Gamma21,
    Gamma22,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleReport {
    pub k: i64,
    pub ks: [i64; 3],
    pub phase_tilde: i128,
    pub k_max: i64,
    pub class: ResonanceClass,
    pub pair_sums: [i64; 3],
    /// `min |k_j + k_h|`.
    pub lambda: i64,
    /// Minimum of the pairwise products of `|k_j + k_h|`.
    pub big_lambda: i128,
}

#[inline]
pub fn k_max(k1: i64, k2: i64, k3: i64) -> i64 {
    (k1 + k2 + k3).abs().max(k1.abs()).max(k2.abs()).max(k3.abs())
}

#[inline]
fn classify_raw(phi: i128, km: i64, th: &Thresholds) -> ResonanceClass {
    if phi == 0 {
        return ResonanceClass::Gamma0;
    }
    let phi = phi.unsigned_abs() as f64;
    let km = km as f64;
    if phi <= th.c_much_less * km * km / 4.0 {
        ResonanceClass::Gamma1
    } else if phi < km.powf(15.0 / 7.0) {
        ResonanceClass::Gamma21
    } else {
        ResonanceClass::Gamma22
    }
}

pub fn classify_triple(k1: i64, k2: i64, k3: i64, th: &Thresholds) -> TripleReport {
    let phi = phase_tilde(k1, k2, k3);
    let km = k_max(k1, k2, k3);
    let pair_sums = [k1 + k2, k2 + k3, k1 + k3];
    let a = pair_sums.map(|x| x.unsigned_abs() as i128);
    TripleReport {
        k: k1 + k2 + k3,
        ks: [k1, k2, k3],
        phase_tilde: phi,
        k_max: km,
        class: classify_raw(phi, km, th),
        pair_sums,
        lambda: pair_sums.iter().map(|x| x.abs()).min().unwrap_or(0),
        big_lambda: (a[0] * a[1]).min(a[1] * a[2]).min(a[0] * a[2]),
    }
}

/// All nonzero `(k1, k2, k3)` in the band with `k1 + k2 + k3 = k`.
pub fn enumerate_triples(k: i64, band: usize) -> impl Iterator<Item = [i64; 3]> {
    let b = band as i64;
    (-b..=b).filter(|&x| x != 0).flat_map(move |k1| {
        let lo = (-b).max(k - k1 - b);
        let hi = b.min(k - k1 + b);
        (lo..=hi).filter_map(move |k2| {
            let k3 = k - k1 - k2;
            (k2 != 0 && k3 != 0).then_some([k1, k2, k3])
        })
    })
}

/// Triples of a given class.
pub fn enumerate_class(k: i64, band: usize, class: ResonanceClass, th: Thresholds) -> impl Iterator<Item = [i64; 3]> {
    enumerate_triples(k, band)
        .filter(move |t| classify_raw(phase_tilde(t[0], t[1], t[2]), k_max(t[0], t[1], t[2]), &th) == class)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    pub statement: String,
    pub checked: u64,
    pub violations: u64,
    /// Extremal value of the statistic the claim bounds.
    pub extremum: Option<f64>,
    pub counterexamples: Vec<Vec<i64>>,
}

impl Claim {
    fn new(name: &str, statement: &str) -> Self {
        Self {
            name: name.into(),
            statement: statement.into(),
            checked: 0,
            violations: 0,
            extremum: None,
            counterexamples: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, witness: &[i64]) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.counterexamples.len() < 8 {
                self.counterexamples.push(witness.to_vec());
            }
        }
    }

    fn track_min(&mut self, x: f64) {
        self.extremum = Some(self.extremum.map_or(x, |m| m.min(x)));
    }

    fn track_max(&mut self, x: f64) {
        self.extremum = Some(self.extremum.map_or(x, |m| m.max(x)));
    }

    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub convention: String,
    pub band: usize,
    pub epsilons: Vec<f64>,
    pub thresholds: Thresholds,
    pub class_counts: Vec<(ResonanceClass, u64)>,
    pub claims: Vec<Claim>,
}

impl LemmaReport {
    pub fn claim(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }
}

/// Exhaustive check of the lattice identities and lower bounds over the box
/// `|k_i| <= band`.
pub fn verify_phase_lemmas(band: usize, epsilons: &[f64], th: Thresholds) -> LemmaReport {
    let b = band as i64;
    let mut identity = Claim::new("phase_identity", "k^3 - k1^3 - k2^3 - k3^3 = 3(k1+k2)(k2+k3)(k1+k3)");
    let mut re_q2 = Claim::new("re_q2_is_phase_tilde", "Re Q2 = phi_tilde and Im Q2 = eps(k^2 - sum k_i^2)");
    let mut q1_bound = Claim::new("q1_lower_bound", "|Q1(k,k1,k2)| >= 3|k k1 k2|");
    let mut q2_bound = Claim::new("q2_lower_bound", "|Q2(k,k1,k2,k3)| >= |phi_tilde|");
    let mut gamma_bound = Claim::new("gamma_phase_vs_kmax", "|phi_tilde| >= 3 c_gtrsim k_max on Gamma");
    let mut gamma1_comparable = Claim::new(
        "gamma1_comparable",
        "on Gamma1 the largest and smallest of |k|,|k_i| are within c_sim",
    );
    let mut gamma21_pair = Claim::new(
        "gamma21_small_pair",
        "on Gamma21 some |k_j + k_h| <= c_much_less k_max^{5/7}",
    );
    let mut big_lambda = Claim::new("phase_vs_lambda", "|phi_tilde| >= 3 Lambda lambda on Gamma");
    let mut counts = [0u64; 4];

    for k1 in -b..=b {
        for k2 in -b..=b {
            let p1 = q1_exact(k1 + k2, k1, k2).expect("on lattice");
            let want = 3 * ((k1 + k2) as i128 * k1 as i128 * k2 as i128).abs();
            for &eps in epsilons {
                let lhs = p1.norm_sqr_at(eps);
                let rhs = (want as f64) * (want as f64);
                q1_bound.record(lhs >= rhs, &[k1 + k2, k1, k2]);
            }
            for k3 in -b..=b {
                let k = k1 + k2 + k3;
                let phi = phase_tilde(k1, k2, k3);
                let direct = (k as i128).pow(3) - (k1 as i128).pow(3) - (k2 as i128).pow(3) - (k3 as i128).pow(3);
                identity.record(direct == phi, &[k, k1, k2, k3]);

                let q = q2_exact(k, k1, k2, k3).expect("on lattice");
                let diss = (k as i128).pow(2) - (k1 as i128).pow(2) - (k2 as i128).pow(2) - (k3 as i128).pow(2);
                re_q2.record(q.real == phi && q.dissipative == diss, &[k, k1, k2, k3]);
                let phi_f = phi as f64;
                for &eps in epsilons {
                    q2_bound.record(q.norm_sqr_at(eps) >= phi_f * phi_f, &[k, k1, k2, k3]);
                }

                if k1 == 0 || k2 == 0 || k3 == 0 {
                    continue;
                }
                let rep = classify_triple(k1, k2, k3, &th);
                let idx = match rep.class {
                    ResonanceClass::Gamma0 => 0,
                    ResonanceClass::Gamma1 => 1,
                    ResonanceClass::Gamma21 => 2,
                    ResonanceClass::Gamma22 => 3,
                };
                counts[idx] += 1;
                if rep.class == ResonanceClass::Gamma0 {
                    continue;
                }
                let km = rep.k_max as f64;
                let aphi = phi.unsigned_abs() as f64;
                gamma_bound.track_min(aphi / km);
                gamma_bound.record(aphi >= 3.0 * th.c_gtrsim * km, &[k, k1, k2, k3]);
                let bl = (rep.big_lambda as f64) * rep.lambda as f64;
                big_lambda.track_min(aphi / bl);
                big_lambda.record(aphi >= 3.0 * bl, &[k, k1, k2, k3]);
                match rep.class {
                    ResonanceClass::Gamma1 => {
                        let mags = [k.abs(), k1.abs(), k2.abs(), k3.abs()];
                        let lo = *mags.iter().filter(|&&m| m > 0).min().unwrap() as f64;
                        let hi = *mags.iter().max().unwrap() as f64;
                        gamma1_comparable.track_max(hi / lo);
                        gamma1_comparable.record(hi <= th.c_sim * lo, &[k, k1, k2, k3]);
                    }
                    ResonanceClass::Gamma21 => {
                        let ratio = rep.lambda as f64 / km.powf(5.0 / 7.0);
                        gamma21_pair.track_max(ratio);
                        gamma21_pair.record(ratio <= th.c_much_less, &[k, k1, k2, k3]);
                    }
                    _ => {}
                }
            }
        }
    }

    LemmaReport {
        convention: "fourier: f = sum_k fhat_k e^{ikx}, fhat_k = (1/2pi) int e^{-ikx} f; p(k) = k^3 + i eps k^2".into(),
        band,
        epsilons: epsilons.to_vec(),
        thresholds: th,
        class_counts: vec![
            (ResonanceClass::Gamma0, counts[0]),
            (ResonanceClass::Gamma1, counts[1]),
            (ResonanceClass::Gamma21, counts[2]),
            (ResonanceClass::Gamma22, counts[3]),
        ],
        claims: vec![identity, re_q2, q1_bound, q2_bound, gamma_bound, big_lambda, gamma1_comparable, gamma21_pair],
    }
}
