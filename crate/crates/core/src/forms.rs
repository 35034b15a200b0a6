//! Homogeneous and log-polyhomogeneous differential forms on ℝⁿ∖{0}.
//!
//! A form of homogeneity a and form degree p stores coefficients (indexed by
//! strictly increasing 0-based index sets) that are homogeneous functions of
//! degree a-p, so pullback under scaling multiplies the whole form by λ^a.
//! Sphere forms are never represented intrinsically: the trivialization
//! ℝ₊×S^{n-1} is realized through r = |ξ| and the Liouville field.

use crate::error::{CtError, CtResult};
use crate::homog::{HomogFn, LogHomogFn, ResidueValue};
use crate::scalar::{Rat, Scalar, rat_int};
use num_traits::Zero;
use std::collections::BTreeMap;

pub type IndexSet = Vec<u8>;

fn check_index_set(idx: &IndexSet, dim: usize, p: usize) -> bool {
    idx.len() == p && idx.windows(2).all(|w| w[0] < w[1]) && idx.iter().all(|&i| (i as usize) < dim)
}

/// Sign of inserting index j into the sorted set (count of entries < j),
/// or None if j already present.
fn insert_index(idx: &IndexSet, j: u8) -> Option<(IndexSet, i64)> {
    if idx.contains(&j) {
        return None;
    }
    let pos = idx.iter().filter(|&&i| i < j).count();
    let mut out = idx.clone();
    out.insert(pos, j);
    let sign = if pos % 2 == 0 { 1 } else { -1 };
    Some((out, sign))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HomogForm {
    pub dim: usize,
    pub form_degree: usize,
    pub homogeneity: Rat,
    coeffs: BTreeMap<IndexSet, HomogFn>,
}

impl HomogForm {
    pub fn zero(dim: usize, form_degree: usize, homogeneity: Rat) -> Self {
        HomogForm { dim, form_degree, homogeneity, coeffs: BTreeMap::new() }
    }

    /// f·dξ_I (0-based I, strictly increasing). The homogeneity is
    /// deg f + |I|.
    pub fn from_term(idx: IndexSet, f: HomogFn) -> CtResult<Self> {
        let dim = f.dim;
        let p = idx.len();
        if !check_index_set(&idx, dim, p) {
            return Err(CtError::InvalidInput(format!("bad index set {idx:?}")));
        }
        let homogeneity = f.degree.clone() + rat_int(p as i64);
        let mut w = HomogForm::zero(dim, p, homogeneity);
        w.insert(idx, f);
        Ok(w)
    }

    /// The standard volume form dξ_0∧…∧dξ_{n-1}.
    pub fn volume(dim: usize) -> Self {
        let idx: IndexSet = (0..dim as u8).collect();
        HomogForm::from_term(idx, HomogFn::radial(dim, rat_int(0), Scalar::one())).unwrap()
    }

    /// r^{-1}dr = Σ_j ξ_j|ξ|^{-2} dξ_j, homogeneity 0.
    pub fn r_inv_dr(dim: usize) -> Self {
        let mut w = HomogForm::zero(dim, 1, rat_int(0));
        for j in 0..dim {
            w.insert(
                vec![j as u8],
                HomogFn::coordinate(dim, j).times_radial_pow(&rat_int(-2)),
            );
        }
        w
    }

    fn insert(&mut self, idx: IndexSet, f: HomogFn) {
        if f.is_zero() {
            return;
        }
        debug_assert_eq!(f.degree, self.homogeneity.clone() - rat_int(self.form_degree as i64));
        match self.coeffs.entry(idx) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().add(&f).expect("matching degrees");
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(f);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&IndexSet, &HomogFn)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, idx: &IndexSet) -> Option<&HomogFn> {
        self.coeffs.get(idx)
    }

    pub fn add(&self, other: &HomogForm) -> CtResult<HomogForm> {
        if self.dim != other.dim {
            return Err(CtError::DimMismatch(self.dim, other.dim));
        }
        if self.form_degree != other.form_degree || self.homogeneity != other.homogeneity {
            return Err(CtError::DegreeMismatch(
                format!("({}, {})", self.form_degree, self.homogeneity),
                format!("({}, {})", other.form_degree, other.homogeneity),
            ));
        }
        let mut r = self.clone();
        for (i, f) in &other.coeffs {
            r.insert(i.clone(), f.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, other: &HomogForm) -> CtResult<HomogForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> HomogForm {
        HomogForm {
            dim: self.dim,
            form_degree: self.form_degree,
            homogeneity: self.homogeneity.clone(),
            coeffs: self.coeffs.iter().map(|(i, f)| (i.clone(), f.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> HomogForm {
        HomogForm {
            dim: self.dim,
            form_degree: self.form_degree,
            homogeneity: self.homogeneity.clone(),
            coeffs: self.coeffs.iter().map(|(i, f)| (i.clone(), f.scale(s))).collect(),
        }
    }

    /// Exterior derivative; raises form degree, preserves homogeneity.
    pub fn d(&self) -> HomogForm {
        let mut r = HomogForm::zero(self.dim, self.form_degree + 1, self.homogeneity.clone());
        for (idx, f) in &self.coeffs {
            for j in 0..self.dim {
                let df = f.partial(j);
                if df.is_zero() {
                    continue;
                }
                if let Some((nidx, sign)) = insert_index(idx, j as u8) {
                    r.insert(nidx, df.scale(&Scalar::from_int(sign)));
                }
            }
        }
        r
    }

    /// Interior product with the Liouville field 𝒳 = Σ ξ_j ∂_j.
    pub fn contract_liouville(&self) -> HomogForm {
        assert!(self.form_degree >= 1, "contraction needs form degree ≥ 1");
        let mut r = HomogForm::zero(self.dim, self.form_degree - 1, self.homogeneity.clone());
        for (idx, f) in &self.coeffs {
            for (pos, &i) in idx.iter().enumerate() {
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                let mut nidx = idx.clone();
                nidx.remove(pos);
                let g = f
                    .mul(&HomogFn::coordinate(self.dim, i as usize))
                    .unwrap()
                    .scale(&Scalar::from_int(sign));
                r.insert(nidx, g);
            }
        }
        r
    }

    pub fn wedge(&self, other: &HomogForm) -> CtResult<HomogForm> {
        if self.dim != other.dim {
            return Err(CtError::DimMismatch(self.dim, other.dim));
        }
        let mut r = HomogForm::zero(
            self.dim,
            self.form_degree + other.form_degree,
            self.homogeneity.clone() + other.homogeneity.clone(),
        );
        for (i1, f1) in &self.coeffs {
            'outer: for (i2, f2) in &other.coeffs {
                // merge i1 ++ i2 with permutation sign
                let mut idx = i1.clone();
                let mut sign = 1i64;
                for &j in i2 {
                    match insert_index(&idx, j) {
                        None => continue 'outer,
                        Some((ni, s)) => {
                            // moving j from the right end: it passes all
                            // entries greater than j currently in idx
                            let gt = idx.iter().filter(|&&t| t > j).count();
                            let _ = s;
                            idx = ni;
                            if gt % 2 == 1 {
                                sign = -sign;
                            }
                        }
                    }
                }
                r.insert(idx, f1.mul(f2)?.scale(&Scalar::from_int(sign)));
            }
        }
        Ok(r)
    }

    /// β = (1/a)·ι_𝒳ω for closed ω of homogeneity a ≠ 0; dβ = ω exactly.
    pub fn euler_primitive(&self) -> CtResult<HomogForm> {
        if !self.d().is_zero() {
            return Err(CtError::NotClosed);
        }
        if self.homogeneity.is_zero() {
            return Err(CtError::ZeroHomogeneity);
        }
        let inv = Scalar::from_rat(Rat::from(num_bigint::BigInt::from(1)) / self.homogeneity.clone());
        Ok(self.contract_liouville().scale(&inv))
    }

    /// Split ω ∈ Ω^p𝒫⁰ as ω = r^{-1}dr∧T + E with ι_𝒳T = ι_𝒳E = 0.
    pub fn split_degree_zero(&self) -> CtResult<(HomogForm, HomogForm)> {
        if !self.homogeneity.is_zero() {
            return Err(CtError::InvalidInput(format!(
                "split_degree_zero needs homogeneity 0, got {}",
                self.homogeneity
            )));
        }
        let t = self.contract_liouville();
        let e = self.sub(&HomogForm::r_inv_dr(self.dim).wedge(&t)?)?;
        Ok((t, e))
    }

    /// ∫_{S^{n-1}} i*β for an (n-1)-form β, as an exact multiple of Area_n.
    ///
    /// With β = Σ_j (-1)^j b_j dξ_0∧…∧(dξ_j omitted)∧…∧dξ_{n-1}, the
    /// integral is the sphere integral of Σ_j ξ_j b_j, i.e. Area_n times the
    /// constant-harmonic coefficient of that function.
    pub fn sphere_integral(&self) -> CtResult<ResidueValue> {
        let n = self.dim;
        if self.form_degree != n - 1 {
            return Err(CtError::InvalidInput(format!(
                "sphere_integral needs an (n-1)-form, got degree {}",
                self.form_degree
            )));
        }
        let mut g: Option<HomogFn> = None;
        for (idx, f) in &self.coeffs {
            // idx = all of 0..n except j
            let j = (0..n as u8).find(|t| !idx.contains(t)).unwrap();
            let sign = if (j as usize) % 2 == 0 { 1 } else { -1 };
            let term = f
                .mul(&HomogFn::coordinate(n, j as usize))
                .unwrap()
                .scale(&Scalar::from_int(sign));
            g = Some(match g {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
        let coeff = g.map(|g| g.constant_harmonic_coeff()).unwrap_or_else(Scalar::zero);
        Ok(ResidueValue { dim: n, coeff })
    }

    /// For f of degree -n with res(f) = 0, a homogeneous primitive β with
    /// dβ = f·vol, assembled from the derivative decomposition.
    pub fn primitive_of_volume_multiple(f: &HomogFn) -> CtResult<HomogForm> {
        let n = f.dim;
        let sigma = f.decompose_derivatives()?;
        let mut beta = HomogForm::zero(
            n,
            n - 1,
            f.degree.clone() + rat_int(n as i64),
        );
        for (j, s) in sigma.into_iter().enumerate() {
            if s.is_zero() {
                continue;
            }
            let idx: IndexSet = (0..n as u8).filter(|&t| t != j as u8).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            beta.insert(idx, s.scale(&Scalar::from_int(sign)));
        }
        Ok(beta)
    }
}

/// Log-polyhomogeneous forms: coefficients are log-homogeneous functions of
/// shared (degree, log depth).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LogHomogForm {
    pub dim: usize,
    pub form_degree: usize,
    pub homogeneity: Rat,
    pub log_depth: usize,
    coeffs: BTreeMap<IndexSet, LogHomogFn>,
}

impl LogHomogForm {
    pub fn zero(dim: usize, form_degree: usize, homogeneity: Rat, log_depth: usize) -> Self {
        LogHomogForm { dim, form_degree, homogeneity, log_depth, coeffs: BTreeMap::new() }
    }

    pub fn from_term(idx: IndexSet, f: LogHomogFn) -> CtResult<Self> {
        let dim = f.dim;
        let p = idx.len();
        if !check_index_set(&idx, dim, p) {
            return Err(CtError::InvalidInput(format!("bad index set {idx:?}")));
        }
        let homogeneity = f.degree.clone() + rat_int(p as i64);
        let mut w = LogHomogForm::zero(dim, p, homogeneity, f.log_depth());
        w.insert(idx, f);
        Ok(w)
    }

    fn insert(&mut self, idx: IndexSet, f: LogHomogFn) {
        if f.is_zero() {
            return;
        }
        let f = if f.log_depth() < self.log_depth {
            let mut g = f;
            while g.log_depth() < self.log_depth {
                g.parts.push(HomogFn::zero(self.dim, g.degree.clone()));
            }
            g
        } else {
            f
        };
        if f.log_depth() > self.log_depth {
            self.log_depth = f.log_depth();
            let coeffs = std::mem::take(&mut self.coeffs);
            for (i, g) in coeffs {
                self.insert(i, g);
            }
        }
        match self.coeffs.entry(idx) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().add(&f).expect("matching degrees");
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(f);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|f| f.is_zero())
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&IndexSet, &LogHomogFn)> {
        self.coeffs.iter()
    }

    pub fn add(&self, other: &LogHomogForm) -> CtResult<LogHomogForm> {
        let mut r = self.clone();
        r.log_depth = r.log_depth.max(other.log_depth);
        for (i, f) in &other.coeffs {
            r.insert(i.clone(), f.clone());
        }
        Ok(r)
    }

    pub fn neg(&self) -> LogHomogForm {
        LogHomogForm {
            dim: self.dim,
            form_degree: self.form_degree,
            homogeneity: self.homogeneity.clone(),
            log_depth: self.log_depth,
            coeffs: self.coeffs.iter().map(|(i, f)| (i.clone(), f.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> LogHomogForm {
        LogHomogForm {
            dim: self.dim,
            form_degree: self.form_degree,
            homogeneity: self.homogeneity.clone(),
            log_depth: self.log_depth,
            coeffs: self.coeffs.iter().map(|(i, f)| (i.clone(), f.scale(s))).collect(),
        }
    }

    pub fn d(&self) -> LogHomogForm {
        let mut r =
            LogHomogForm::zero(self.dim, self.form_degree + 1, self.homogeneity.clone(), self.log_depth);
        for (idx, f) in &self.coeffs {
            for j in 0..self.dim {
                let df = f.partial(j);
                if df.is_zero() {
                    continue;
                }
                if let Some((nidx, sign)) = insert_index(idx, j as u8) {
                    r.insert(nidx, df.scale(&Scalar::from_int(sign)));
                }
            }
        }
        r
    }

    pub fn contract_liouville(&self) -> LogHomogForm {
        assert!(self.form_degree >= 1);
        let mut r =
            LogHomogForm::zero(self.dim, self.form_degree - 1, self.homogeneity.clone(), self.log_depth);
        for (idx, f) in &self.coeffs {
            for (pos, &i) in idx.iter().enumerate() {
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                let mut nidx = idx.clone();
                nidx.remove(pos);
                let g = f
                    .mul_homog(&HomogFn::coordinate(self.dim, i as usize))
                    .unwrap()
                    .scale(&Scalar::from_int(sign));
                r.insert(nidx, g);
            }
        }
        r
    }

    /// Lower the log degree: Σ ω_m log^m ↦ Σ m·ω_m log^{m-1}.
    fn log_lower(&self) -> LogHomogForm {
        let mut r = LogHomogForm::zero(
            self.dim,
            self.form_degree,
            self.homogeneity.clone(),
            self.log_depth.saturating_sub(1),
        );
        for (idx, f) in &self.coeffs {
            let mut parts = Vec::new();
            for m in 1..=f.log_depth() {
                parts.push(f.parts[m].scale(&Scalar::from_int(m as i64)));
            }
            if parts.is_empty() {
                continue;
            }
            if let Ok(g) = LogHomogFn::new(parts) {
                r.insert(idx.clone(), g);
            }
        }
        r
    }

    /// Primitive of a closed log form of homogeneity a ≠ 0, by downward
    /// recursion on log degree with the Euler kernel ι_𝒳/a.
    pub fn euler_primitive(&self) -> CtResult<LogHomogForm> {
        if !self.d().is_zero() {
            return Err(CtError::NotClosed);
        }
        if self.homogeneity.is_zero() {
            return Err(CtError::ZeroHomogeneity);
        }
        let inv = Scalar::from_rat(Rat::from(num_bigint::BigInt::from(1)) / self.homogeneity.clone());
        let mut beta = LogHomogForm::zero(
            self.dim,
            self.form_degree.saturating_sub(1),
            self.homogeneity.clone(),
            self.log_depth,
        );
        let mut rem = self.clone();
        for _ in 0..=self.log_depth {
            if rem.is_zero() {
                break;
            }
            let b = rem.contract_liouville().scale(&inv);
            beta = beta.add(&b)?;
            // d b = rem + (1/a)·log_lower(rem)  ⇒  new rem = -(1/a)·log_lower(rem)
            rem = rem.log_lower().scale(&inv.neg());
        }
        Ok(beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_i64;

    fn c(dim: usize, j: usize) -> HomogFn {
        HomogFn::coordinate(dim, j)
    }

    #[test]
    fn d_examples() {
        // d((ξ₀dξ₁ - ξ₁dξ₀)/2) = dξ₀∧dξ₁
        let half = Scalar::from_rat(rat_i64(1, 2));
        let w = HomogForm::from_term(vec![1], c(2, 0).scale(&half))
            .unwrap()
            .add(&HomogForm::from_term(vec![0], c(2, 1).scale(&half.neg())).unwrap())
            .unwrap();
        let dw = w.d();
        assert_eq!(dw, HomogForm::volume(2).scale(&Scalar::one()));
        // d(r^{-1}dr) = 0
        assert!(HomogForm::r_inv_dr(2).d().is_zero());
        assert!(HomogForm::r_inv_dr(3).d().is_zero());
    }

    #[test]
    fn d_squared_zero() {
        let f = c(3, 0).mul(&c(3, 1)).unwrap().times_radial_pow(&rat_i64(-5, 2));
        let w = HomogForm::from_term(vec![0, 2], f).unwrap();
        assert!(w.d().d().is_zero());
    }

    #[test]
    fn contraction_examples() {
        // ι_𝒳(dξ₀∧dξ₁) = ξ₀dξ₁ - ξ₁dξ₀
        let vol = HomogForm::volume(2);
        let t = vol.contract_liouville();
        assert_eq!(t.coeff(&vec![1]).unwrap(), &c(2, 0));
        assert_eq!(t.coeff(&vec![0]).unwrap(), &c(2, 1).neg());
        // ι∘ι = 0
        assert!(t.contract_liouville().is_zero());
    }

    #[test]
    fn euler_primitive_recovers() {
        // ω = f dξ₀∧dξ₁, f = ξ₀|ξ|^{-2}, homogeneity 1
        let f = c(2, 0).times_radial_pow(&rat_int(-2));
        let w = HomogForm::from_term(vec![0, 1], f).unwrap();
        assert_eq!(w.homogeneity, rat_int(1));
        let b = w.euler_primitive().unwrap();
        assert_eq!(b.d(), w);
        // top-degree forms are closed; homogeneity 2 volume
        let vol = HomogForm::volume(2);
        let b = vol.euler_primitive().unwrap();
        assert_eq!(b.d(), vol);
    }

    #[test]
    fn euler_identity_on_closed_forms() {
        // d(ι_𝒳 ω) = a·ω for closed ω
        let f = c(3, 2).times_radial_pow(&rat_i64(-7, 2));
        let w = HomogForm::from_term(vec![0, 1, 2], f).unwrap(); // top degree, closed
        let a = w.homogeneity.clone();
        let lhs = w.contract_liouville().d();
        let rhs = w.scale(&Scalar::from_rat(a));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cartan_on_degree_zero() {
        // d(ι_𝒳ω) = -ι_𝒳(dω) for homogeneity-0 forms
        let f = c(2, 0).times_radial_pow(&rat_int(-2)); // degree -1, form deg 1 → homog 0
        let w = HomogForm::from_term(vec![1], f).unwrap();
        assert!(w.homogeneity.is_zero());
        let lhs = w.contract_liouville().d();
        let rhs = w.d().contract_liouville().neg();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn split_reconstructs() {
        // ω = f dξ₀∧dξ₁ with f = |ξ|^{-2}: T = f(ξ₀dξ₁-ξ₁dξ₀), E = 0
        let f = HomogFn::radial(2, rat_int(-2), Scalar::one());
        let w = HomogForm::from_term(vec![0, 1], f.clone()).unwrap();
        let (t, e) = w.split_degree_zero().unwrap();
        assert!(e.is_zero());
        assert!(t.contract_liouville().is_zero());
        let recomb = HomogForm::r_inv_dr(2).wedge(&t).unwrap().add(&e).unwrap();
        assert_eq!(recomb, w);
        // ω = r^{-1}dr: (T, E) = (1, 0)
        let rdr = HomogForm::r_inv_dr(2);
        let (t, e) = rdr.split_degree_zero().unwrap();
        assert!(e.is_zero());
        assert_eq!(
            t.coeff(&vec![]).unwrap(),
            &HomogFn::radial(2, rat_int(0), Scalar::one())
        );
    }

    #[test]
    fn sphere_integrals() {
        // ι_𝒳(dξ₀∧dξ₁) integrates to Area₂ = 2π
        let b = HomogForm::volume(2).contract_liouville();
        let v = b.sphere_integral().unwrap();
        assert!((v.to_f64() - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        // f·ι_𝒳vol with f = |ξ|^{-2} → 2π, consistent with homog residue
        let f = HomogFn::radial(2, rat_int(-2), Scalar::one());
        let fb = b.scale(&Scalar::one());
        let fb = HomogForm {
            dim: 2,
            form_degree: 1,
            homogeneity: fb.homogeneity.clone() + f.degree.clone(),
            coeffs: fb.coeffs.iter().map(|(i, g)| (i.clone(), g.mul(&f).unwrap())).collect(),
        };
        let v = fb.sphere_integral().unwrap();
        assert!((v.to_f64() - f.residue().to_f64()).abs() < 1e-13);
        // exact forms integrate to zero: β = dγ
        let gamma = HomogForm::from_term(
            vec![],
            c(2, 0).mul(&c(2, 1)).unwrap().times_radial_pow(&rat_int(-1)),
        )
        .unwrap();
        let beta = gamma.d();
        // need an (n-1)-form: n=2 ⇒ 1-form ✓
        assert!(beta.sphere_integral().unwrap().is_zero());
    }

    #[test]
    fn constructive_residue_criterion() {
        // res(f) = 0 ⇒ β with dβ = f·vol, exactly
        let f = c(2, 0).times_radial_pow(&rat_int(-3)); // deg -2 = -n, odd harmonic
        let beta = HomogForm::primitive_of_volume_multiple(&f).unwrap();
        let expect = HomogForm::from_term(vec![0, 1], f).unwrap();
        assert_eq!(beta.d(), expect);
        // res ≠ 0 ⇒ obstruction
        let g = HomogFn::radial(2, rat_int(-2), Scalar::one());
        assert!(HomogForm::primitive_of_volume_multiple(&g).is_err());
    }

    #[test]
    fn log_euler_primitive() {
        // closed log form of nonzero homogeneity: f·vol with
        // f = |ξ|^{-1}log|ξ| (n=2), homogeneity 1
        let f = LogHomogFn::new(vec![
            HomogFn::zero(2, rat_int(-1)),
            HomogFn::radial(2, rat_int(-1), Scalar::one()),
        ])
        .unwrap();
        let w = LogHomogForm::from_term(vec![0, 1], f).unwrap();
        assert_eq!(w.homogeneity, rat_int(1));
        let b = w.euler_primitive().unwrap();
        let db = b.d();
        // compare coefficientwise
        let diff = db.add(&w.neg()).unwrap();
        assert!(diff.is_zero(), "dβ = ω for log forms");
    }
}
