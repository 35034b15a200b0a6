//! Sparse multivariate polynomials with exact `Scalar` coefficients.
//!
//! Monomials are exponent vectors; the map is ordered so equality of the
//! canonical form is structural equality.

use crate::scalar::{C64, Scalar};
use num_traits::Zero;
use std::collections::BTreeMap;

pub type MultiIndex = Vec<u32>;

#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Poly {
    pub dim: usize,
    terms: BTreeMap<MultiIndex, Scalar>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Scalar) -> Self {
        let mut p = Poly::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Poly::constant(dim, Scalar::one())
    }

    /// The coordinate polynomial ξ_j (0-based j).
    pub fn var(dim: usize, j: usize) -> Self {
        assert!(j < dim);
        let mut idx = vec![0u32; dim];
        idx[j] = 1;
        let mut p = Poly::zero(dim);
        p.add_term(idx, Scalar::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, idx: MultiIndex, c: Scalar) {
        debug_assert_eq!(idx.len(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().add(&c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.dim, other.dim);
        let mut r = self.clone();
        for (idx, c) in &other.terms {
            r.add_term(idx.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(i, c)| (i.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.dim);
        }
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(i, c)| (i.clone(), c.mul(s))).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.dim, other.dim);
        let mut r = Poly::zero(self.dim);
        for (i1, c1) in &self.terms {
            for (i2, c2) in &other.terms {
                let idx: MultiIndex = i1.iter().zip(i2).map(|(a, b)| a + b).collect();
                r.add_term(idx, c1.mul(c2));
            }
        }
        r
    }

    /// Multiply by |ξ|² = Σ ξ_j².
    pub fn times_r2(&self) -> Poly {
        let mut r = Poly::zero(self.dim);
        for (idx, c) in &self.terms {
            for j in 0..self.dim {
                let mut i2 = idx.clone();
                i2[j] += 2;
                r.add_term(i2, c.clone());
            }
        }
        r
    }

    pub fn partial(&self, j: usize) -> Poly {
        assert!(j < self.dim);
        let mut r = Poly::zero(self.dim);
        for (idx, c) in &self.terms {
            if idx[j] == 0 {
                continue;
            }
            let mut i2 = idx.clone();
            i2[j] -= 1;
            r.add_term(i2, c.mul_rat(&crate::scalar::rat_int(idx[j] as i64)));
        }
        r
    }

    pub fn laplacian(&self) -> Poly {
        let mut r = Poly::zero(self.dim);
        for j in 0..self.dim {
            r = r.add(&self.partial(j).partial(j));
        }
        r
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|i| i.iter().sum()).max()
    }

    /// True when every monomial has total degree exactly `d` (the zero
    /// polynomial is homogeneous of every degree).
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|i| i.iter().sum::<u32>() == d)
    }

    pub fn eval_c64(&self, x: &[f64]) -> C64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = C64::zero();
        for (idx, c) in &self.terms {
            let mut m = 1.0f64;
            for (e, xi) in idx.iter().zip(x) {
                m *= xi.powi(*e as i32);
            }
            acc += c.to_c64() * m;
        }
        acc
    }

    /// Substitute a numeric value for coordinate `j`, producing a polynomial
    /// in the remaining dim-1 coordinates with the exact value power folded
    /// in only when `v` is ±1 (the cases used by row reductions).
    pub fn substitute_pm1(&self, j: usize, v: i64) -> Poly {
        assert!(v == 1 || v == -1);
        let mut r = Poly::zero(self.dim - 1);
        for (idx, c) in &self.terms {
            let e = idx[j];
            let sign = if v == -1 && e % 2 == 1 { Scalar::from_int(-1) } else { Scalar::one() };
            let mut i2: MultiIndex = Vec::with_capacity(self.dim - 1);
            for (t, ee) in idx.iter().enumerate() {
                if t != j {
                    i2.push(*ee);
                }
            }
            r.add_term(i2, c.mul(&sign));
        }
        r
    }

    /// Σ |coeff| over all terms, as f64. Rigorous enough for tail bounds
    /// (each scalar is converted with ≤1 ulp slack, inflated by 2^-40).
    pub fn coeff_l1_norm(&self) -> f64 {
        let slack = 1.0 + 1e-12;
        self.terms.values().map(|c| c.to_c64().norm() * slack).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    #[test]
    fn ring_basics() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let p = x.add(&y).mul(&x.sub(&y)); // x² - y²
        assert!(p.is_homogeneous(2));
        let lap = p.laplacian();
        assert!(lap.is_zero());
        let q = x.mul(&x); // x²
        assert_eq!(q.laplacian(), Poly::constant(2, Scalar::from_int(2)));
    }

    #[test]
    fn euler_for_polys() {
        // Σ ξ_j ∂_j P = d·P for homogeneous P
        let x = Poly::var(3, 0);
        let z = Poly::var(3, 2);
        let p = x.mul(&x).mul(&z); // x²z, degree 3
        let mut e = Poly::zero(3);
        for j in 0..3 {
            e = e.add(&Poly::var(3, j).mul(&p.partial(j)));
        }
        assert_eq!(e, p.scale(&Scalar::from_rat(rat_int(3))));
    }

    #[test]
    fn eval_matches() {
        let x = Poly::var(2, 0);
        let p = x.mul(&x).times_r2(); // x²(x²+y²)
        let v = p.eval_c64(&[2.0, 1.0]);
        assert!((v.re - 4.0 * 5.0).abs() < 1e-12);
    }
}
