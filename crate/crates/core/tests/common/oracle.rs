//! Brute-force lattice sums written straight from the operator definitions.
//!
//! Inputs are physical coefficient maps `û_{k}` at time `t`. The oracle moves
//! them to the interaction variable `v̂ = e^{t(-ik³ + εk²)} û`, applies the
//! defining sums with the full complex phases `e^{-itQ}`, and returns the
//! bounded representative `e^{-tεk²} (·)_k`. Only meant for tiny bands.

#![allow(dead_code)]

use num_complex::Complex64;

pub type Coeffs = Vec<Complex64>; // index k + K

fn p(k: i64, eps: f64) -> Complex64 {
    let k = k as f64;
    Complex64::new(k * k * k, eps * k * k)
}

/// `p(k) - Σ p(k_i)`.
fn defect(k: i64, ks: &[i64], eps: f64) -> Complex64 {
    ks.iter().fold(p(k, eps), |acc, &x| acc - p(x, eps))
}

fn pair_sums_nonzero(a: i64, b: i64, c: i64) -> bool {
    a + b != 0 && b + c != 0 && a + c != 0
}

pub struct Oracle {
    pub band: i64,
    pub t: f64,
    pub eps: f64,
}

impl Oracle {
    fn idx(&self, k: i64) -> usize {
        (k + self.band) as usize
    }

    fn inb(&self, k: i64) -> bool {
        k.abs() <= self.band && k != 0
    }

    fn to_v(&self, u: &Coeffs) -> Coeffs {
        (-self.band..=self.band)
            .map(|k| {
                let kf = k as f64;
                u[self.idx(k)] * Complex64::new(self.eps * kf * kf * self.t, -kf * kf * kf * self.t).exp()
            })
            .collect()
    }

    fn osc(&self, q: Complex64) -> Complex64 {
        (Complex64::new(0.0, -self.t) * q).exp()
    }

    fn bounded(&self, k: i64, z: Complex64) -> Complex64 {
        z * (-(self.eps * (k * k) as f64) * self.t).exp()
    }

    fn range(&self) -> std::ops::RangeInclusive<i64> {
        -self.band..=self.band
    }

    pub fn a2(&self, u: &Coeffs, v: &Coeffs, k: i64) -> Complex64 {
        let (u, v) = (self.to_v(u), self.to_v(v));
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in self.range() {
            let k2 = k - k1;
            if !self.inb(k1) || !self.inb(k2) {
                continue;
            }
            let q = defect(k, &[k1, k2], self.eps);
            acc += k as f64 / q * self.osc(q) * u[self.idx(k1)] * v[self.idx(k2)];
        }
        self.bounded(k, acc)
    }

    pub fn a3(&self, u: &Coeffs, v: &Coeffs, w: &Coeffs, k: i64) -> Complex64 {
        let (u, v, w) = (self.to_v(u), self.to_v(v), self.to_v(w));
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in self.range() {
            for k2 in self.range() {
                let k3 = k - k1 - k2;
                if !self.inb(k1) || !self.inb(k2) || !self.inb(k3) || !self.inb(k1 + k2) {
                    continue;
                }
                if !pair_sums_nonzero(k1, k2, k3) {
                    continue;
                }
                let q1 = defect(k, &[k1 + k2, k3], self.eps);
                let q2 = defect(k, &[k1, k2, k3], self.eps);
                let m = (k * (k1 + k2)) as f64 / (q1 * q2);
                acc += m * self.osc(q2) * u[self.idx(k1)] * v[self.idx(k2)] * w[self.idx(k3)];
            }
        }
        self.bounded(k, acc)
    }

    /// Resonant part of the cubic remainder, enumerated over all triples.
    pub fn r3_0(&self, u: &Coeffs, v: &Coeffs, w: &Coeffs, k: i64) -> Complex64 {
        let (u, v, w) = (self.to_v(u), self.to_v(v), self.to_v(w));
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in self.range() {
            for k2 in self.range() {
                let k3 = k - k1 - k2;
                if !self.inb(k1) || !self.inb(k2) || !self.inb(k3) || !self.inb(k1 + k2) {
                    continue;
                }
                if pair_sums_nonzero(k1, k2, k3) {
                    continue;
                }
                let q1 = defect(k, &[k1 + k2, k3], self.eps);
                let q2 = defect(k, &[k1, k2, k3], self.eps);
                let m = Complex64::new(0.0, (k * (k1 + k2)) as f64) / q1;
                acc += m * self.osc(q2) * u[self.idx(k1)] * v[self.idx(k2)] * w[self.idx(k3)];
            }
        }
        self.bounded(k, acc)
    }

    pub fn a4_1(&self, u: &Coeffs, v: &Coeffs, w: &Coeffs, z: &Coeffs, k: i64) -> Complex64 {
        let (u, v, w, z) = (self.to_v(u), self.to_v(v), self.to_v(w), self.to_v(z));
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in self.range() {
            for k2 in self.range() {
                for k3 in self.range() {
                    let k4 = k - k1 - k2 - k3;
                    let s = k1 + k2;
                    if ![k1, k2, k3, k4, s, s + k3].iter().all(|&x| self.inb(x)) {
                        continue;
                    }
                    if !pair_sums_nonzero(s, k3, k4) {
                        continue;
                    }
                    let q1 = defect(k, &[s + k3, k4], self.eps);
                    let q2 = defect(k, &[s, k3, k4], self.eps);
                    let q3 = defect(k, &[k1, k2, k3, k4], self.eps);
                    let m = Complex64::new(0.0, (k * (s + k3) * s) as f64) / (q1 * q2);
                    acc += m * self.osc(q3) * u[self.idx(k1)] * v[self.idx(k2)] * w[self.idx(k3)] * z[self.idx(k4)];
                }
            }
        }
        self.bounded(k, acc)
    }

    pub fn a4_2(&self, u: &Coeffs, v: &Coeffs, w: &Coeffs, z: &Coeffs, k: i64) -> Complex64 {
        let (u, v, w, z) = (self.to_v(u), self.to_v(v), self.to_v(w), self.to_v(z));
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in self.range() {
            for k2 in self.range() {
                for k3 in self.range() {
                    let k4 = k - k1 - k2 - k3;
                    let (s, c) = (k1 + k2, k3 + k4);
                    if ![k1, k2, k3, k4, s, c].iter().all(|&x| self.inb(x)) {
                        continue;
                    }
                    if !pair_sums_nonzero(k1, k2, c) {
                        continue;
                    }
                    let q1 = defect(k, &[s, c], self.eps);
                    let q2 = defect(k, &[k1, k2, c], self.eps);
                    let q3 = defect(k, &[k1, k2, k3, k4], self.eps);
                    let m = Complex64::new(0.0, (k * s * c) as f64) / (q1 * q2);
                    acc += m * self.osc(q3) * u[self.idx(k1)] * v[self.idx(k2)] * w[self.idx(k3)] * z[self.idx(k4)];
                }
            }
        }
        self.bounded(k, acc)
    }

    pub fn n1(&self, u: &Coeffs, v: &Coeffs, w: &Coeffs, k: i64) -> Complex64 {
        let (u, v, w) = (self.to_v(u), self.to_v(v), self.to_v(w));
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in self.range() {
            for k2 in self.range() {
                let k3 = k - k1 - k2;
                if !self.inb(k1) || !self.inb(k2) || !self.inb(k3) || !pair_sums_nonzero(k1, k2, k3) {
                    continue;
                }
                let q2 = defect(k, &[k1, k2, k3], self.eps);
                acc += k as f64 / q2 * self.osc(q2) * u[self.idx(k1)] * v[self.idx(k2)] * w[self.idx(k3)];
            }
        }
        self.bounded(k, acc)
    }

    pub fn n2(&self, f: [&Coeffs; 5], k: i64) -> Complex64 {
        let g: Vec<Coeffs> = f.iter().map(|x| self.to_v(x)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for j1 in self.range() {
            for j2 in self.range() {
                for j3 in self.range() {
                    let k1 = j1 + j2 + j3;
                    for k2 in self.range() {
                        let k3 = k - k1 - k2;
                        if ![j1, j2, j3, k1, k2, k3].iter().all(|&x| self.inb(x)) || !pair_sums_nonzero(k1, k2, k3) {
                            continue;
                        }
                        let q2 = defect(k, &[k1, k2, k3], self.eps);
                        let q3 = defect(k, &[j1, j2, j3, k2, k3], self.eps);
                        let m = Complex64::new(0.0, (k * k1) as f64) / q2;
                        acc += m
                            * self.osc(q3)
                            * g[0][self.idx(j1)]
                            * g[1][self.idx(j2)]
                            * g[2][self.idx(j3)]
                            * g[3][self.idx(k2)]
                            * g[4][self.idx(k3)];
                    }
                }
            }
        }
        self.bounded(k, acc)
    }

    /// Full cubic interaction over resonant triples.
    pub fn gamma0(&self, u: &Coeffs, v: &Coeffs, w: &Coeffs, k: i64) -> Complex64 {
        let (u, v, w) = (self.to_v(u), self.to_v(v), self.to_v(w));
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in self.range() {
            for k2 in self.range() {
                let k3 = k - k1 - k2;
                if !self.inb(k1) || !self.inb(k2) || !self.inb(k3) || pair_sums_nonzero(k1, k2, k3) {
                    continue;
                }
                let q2 = defect(k, &[k1, k2, k3], self.eps);
                acc += Complex64::new(0.0, k as f64) * self.osc(q2) * u[self.idx(k1)] * v[self.idx(k2)] * w[self.idx(k3)];
            }
        }
        self.bounded(k, acc)
    }

    /// Diagonal resonant term `-ik e^{tε(k² - k1² - k2² - k3²)} û_k v̂_{-k} ŵ_k`.
    pub fn resonant(&self, u: &Coeffs, v: &Coeffs, w: &Coeffs, k: i64) -> Complex64 {
        let (u, v, w) = (self.to_v(u), self.to_v(v), self.to_v(w));
        let kf = k as f64;
        let growth = (self.t * self.eps * (kf * kf - 3.0 * kf * kf)).exp();
        let z = Complex64::new(0.0, -kf) * growth * u[self.idx(k)] * v[self.idx(-k)] * w[self.idx(k)];
        self.bounded(k, z)
    }
}
