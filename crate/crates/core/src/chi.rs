//! The fixed radial cut-off χ and its derivatives, plus the χ-dependent
//! constants C_χ(b) used by the cut-off integral.
//!
//! χ(ξ) = h(4(|ξ|-1/4)) with h(t) = φ(t)/(φ(t)+φ(1-t)), φ(t) = e^{-1/t} for
//! t > 0 and 0 otherwise. So χ = 0 for |ξ| ≤ 1/4, χ = 1 for |ξ| ≥ 1/2, and
//! the transition is smooth and monotone. Every lattice point ξ ∈ ℤⁿ∖{0}
//! satisfies |ξ| ≥ 1, hence χ(ξ) = 1 there.

use crate::quad::integrate_real;
use crate::scalar::{Rat, rat_to_f64};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

/// (φ, φ', φ'') at t.
fn phi_d2(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let v = (-1.0 / t).exp();
    if v == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let t2 = t * t;
    let d1 = v / t2;
    let d2 = v * (1.0 / (t2 * t2) - 2.0 / (t2 * t));
    (v, d1, d2)
}

/// (h, h', h'') at t for h = φ(t)/(φ(t)+φ(1-t)).
fn h_d2(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (a, ap, app) = phi_d2(t);
    let (b0, b0p, b0pp) = phi_d2(1.0 - t);
    let b = b0;
    let bp = -b0p;
    let bpp = b0pp;
    let s = a + b;
    let sp = ap + bp;
    let num1 = ap * b - a * bp;
    let h = a / s;
    let hp = num1 / (s * s);
    let hpp = ((app * b - a * bpp) * s - 2.0 * num1 * sp) / (s * s * s);
    (h, hp, hpp)
}

/// χ as a function of the radius r = |ξ|.
pub fn chi_r(r: f64) -> f64 {
    h_d2(4.0 * r - 1.0).0
}

/// dχ/dr.
pub fn chi_r_d1(r: f64) -> f64 {
    4.0 * h_d2(4.0 * r - 1.0).1
}

/// d²χ/dr².
pub fn chi_r_d2(r: f64) -> f64 {
    16.0 * h_d2(4.0 * r - 1.0).2
}

pub fn chi(xi: &[f64]) -> f64 {
    chi_r(xi.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// ∂_j χ(ξ) = χ'(|ξ|)·ξ_j/|ξ|.
pub fn chi_grad(xi: &[f64], j: usize) -> f64 {
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r <= 0.25 || r >= 0.5 {
        return 0.0;
    }
    chi_r_d1(r) * xi[j] / r
}

static C_CHI_CACHE: Lazy<Mutex<HashMap<(String, usize), f64>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// C_χ(b) := ∫_0^{1/2} χ(r) r^{b+n-1} dr (the integrand vanishes on
/// [0, 1/4]). Adaptive quadrature, relative error ≤ 1e-14; cached.
pub fn c_chi(b: &Rat, n: usize) -> f64 {
    let key = (b.to_string(), n);
    if let Some(v) = C_CHI_CACHE.lock().unwrap().get(&key) {
        return *v;
    }
    let e = rat_to_f64(b) + n as f64 - 1.0;
    let (v, _) = integrate_real(&|r| chi_r(r) * r.powf(e), 0.25, 0.5, 1e-15, 1e-18);
    C_CHI_CACHE.lock().unwrap().insert(key, v);
    v
}

/// ∫_0^∞ χ'(r) r^s dr (support [1/4, 1/2]).
pub fn chi_prime_moment(s: f64) -> f64 {
    let (v, _) = integrate_real(&|r| chi_r_d1(r) * r.powf(s), 0.25, 0.5, 1e-15, 1e-18);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    #[test]
    fn plateau_and_support() {
        assert_eq!(chi_r(0.2), 0.0);
        assert_eq!(chi_r(0.25), 0.0);
        assert_eq!(chi_r(0.5), 1.0);
        assert_eq!(chi_r(1.3), 1.0);
        let mid = chi_r(0.375); // h(1/2) = 1/2 by symmetry
        assert!((mid - 0.5).abs() < 1e-14);
        // monotone on the transition
        let mut prev = 0.0;
        for i in 0..=100 {
            let r = 0.25 + 0.25 * i as f64 / 100.0;
            let v = chi_r(r);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &r in &[0.3, 0.35, 0.4, 0.45, 0.48] {
            let h = 1e-6;
            let fd1 = (chi_r(r + h) - chi_r(r - h)) / (2.0 * h);
            assert!((fd1 - chi_r_d1(r)).abs() < 1e-6, "r={r}");
            let fd2 = (chi_r_d1(r + h) - chi_r_d1(r - h)) / (2.0 * h);
            assert!((fd2 - chi_r_d2(r)).abs() < 1e-5, "r={r}");
        }
    }

    #[test]
    fn chi_prime_integrates_to_one() {
        // ∫ χ' dr = χ(1/2) - χ(1/4) = 1
        assert!((chi_prime_moment(0.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn c_chi_against_midpoint_reference() {
        let b = rat_int(-2);
        let v = c_chi(&b, 2);
        let mut reference = 0.0;
        let m = 400_000;
        let lo = 0.25;
        let hi = 0.5;
        let dx = (hi - lo) / m as f64;
        for i in 0..m {
            let r = lo + (i as f64 + 0.5) * dx;
            reference += chi_r(r) / r * dx;
        }
        assert!((v - reference).abs() < 1e-10, "{v} vs {reference}");
    }
}
