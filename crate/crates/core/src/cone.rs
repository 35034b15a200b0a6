//! Functions and differential forms on the symplectic cone T*𝕋ⁿ∖0.
//!
//! A `ConeFn` is a finite trigonometric sum Σ_k e^{ik·x} f_k(ξ) whose fiber
//! parts f_k are homogeneous of one common degree; the ℝ₊-action scales the
//! fibers only. `ConeForm` is the exterior algebra over the 2n coordinates
//! (x_1..x_n, ξ_1..ξ_n) with `ConeFn` coefficients; it carries the
//! symplectic form ω = Σ dξ_i∧dx_i, Hamiltonian fields, and the Liouville
//! contraction used by the symplectic residue and the bracket machinery.

use crate::error::{CtError, CtResult};
use crate::homog::HomogFn;
use crate::scalar::{C64, CRat, Rat, Scalar, rat_int};
use num_traits::Zero;
use std::collections::BTreeMap;

pub type ModeKey = Vec<i64>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConeFn {
    /// base dimension n (the torus dimension; the cone has dimension 2n)
    pub dim: usize,
    pub degree: Rat,
    modes: BTreeMap<ModeKey, HomogFn>,
}

impl ConeFn {
    pub fn zero(dim: usize, degree: Rat) -> Self {
        ConeFn { dim, degree, modes: BTreeMap::new() }
    }

    pub fn from_mode(k: ModeKey, f: HomogFn) -> Self {
        assert_eq!(k.len(), f.dim);
        let mut c = ConeFn::zero(f.dim, f.degree.clone());
        c.insert(k, f);
        c
    }

    /// x-independent cone function.
    pub fn from_fiber(f: HomogFn) -> Self {
        let k = vec![0i64; f.dim];
        ConeFn::from_mode(k, f)
    }

    /// e^{ik·x}·|ξ|^degree
    pub fn exp_mode(dim: usize, k: ModeKey, degree: Rat) -> Self {
        ConeFn::from_mode(k, HomogFn::radial(dim, degree, Scalar::one()))
    }

    /// cos(x_i)·|ξ|^degree
    pub fn cos_x(dim: usize, i: usize, degree: Rat) -> Self {
        let half = Scalar::from_rat(crate::scalar::rat_i64(1, 2));
        let mut kp = vec![0i64; dim];
        kp[i] = 1;
        let mut km = vec![0i64; dim];
        km[i] = -1;
        let f = HomogFn::radial(dim, degree.clone(), half.clone());
        let mut c = ConeFn::from_mode(kp, f.clone());
        c.insert(km, f);
        c
    }

    /// sin(x_i)·|ξ|^degree
    pub fn sin_x(dim: usize, i: usize, degree: Rat) -> Self {
        // sin = (e^{ix} - e^{-ix})/(2i)
        let c = Scalar::from_crat(CRat::new(Rat::zero(), crate::scalar::rat_i64(-1, 2)));
        let mut kp = vec![0i64; dim];
        kp[i] = 1;
        let mut km = vec![0i64; dim];
        km[i] = -1;
        let f = HomogFn::radial(dim, degree.clone(), c);
        let mut s = ConeFn::from_mode(kp, f.clone());
        s.insert(km, f.neg());
        s
    }

    fn insert(&mut self, k: ModeKey, f: HomogFn) {
        if f.is_zero() {
            return;
        }
        debug_assert_eq!(f.degree, self.degree);
        match self.modes.entry(k) {
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
        self.modes.is_empty()
    }

    pub fn modes(&self) -> impl Iterator<Item = (&ModeKey, &HomogFn)> {
        self.modes.iter()
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    /// The k = 0 fiber part (what survives averaging over the torus).
    pub fn zero_mode(&self) -> HomogFn {
        let k = vec![0i64; self.dim];
        self.modes
            .get(&k)
            .cloned()
            .unwrap_or_else(|| HomogFn::zero(self.dim, self.degree.clone()))
    }

    pub fn add(&self, other: &ConeFn) -> CtResult<ConeFn> {
        if self.dim != other.dim {
            return Err(CtError::DimMismatch(self.dim, other.dim));
        }
        if self.degree != other.degree {
            return Err(CtError::DegreeMismatch(
                self.degree.to_string(),
                other.degree.to_string(),
            ));
        }
        let mut r = self.clone();
        for (k, f) in &other.modes {
            r.insert(k.clone(), f.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, other: &ConeFn) -> CtResult<ConeFn> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ConeFn {
        ConeFn {
            dim: self.dim,
            degree: self.degree.clone(),
            modes: self.modes.iter().map(|(k, f)| (k.clone(), f.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> ConeFn {
        if s.is_zero() {
            return ConeFn::zero(self.dim, self.degree.clone());
        }
        ConeFn {
            dim: self.dim,
            degree: self.degree.clone(),
            modes: self.modes.iter().map(|(k, f)| (k.clone(), f.scale(s))).collect(),
        }
    }

    pub fn mul(&self, other: &ConeFn) -> CtResult<ConeFn> {
        if self.dim != other.dim {
            return Err(CtError::DimMismatch(self.dim, other.dim));
        }
        let mut r = ConeFn::zero(self.dim, self.degree.clone() + other.degree.clone());
        for (k1, f1) in &self.modes {
            for (k2, f2) in &other.modes {
                let k: ModeKey = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                r.insert(k, f1.mul(f2)?);
            }
        }
        Ok(r)
    }

    pub fn times_radial_pow(&self, t: &Rat) -> ConeFn {
        ConeFn {
            dim: self.dim,
            degree: self.degree.clone() + t,
            modes: self.modes.iter().map(|(k, f)| (k.clone(), f.times_radial_pow(t))).collect(),
        }
    }

    /// ∂_{x_i}: multiplies mode k by i·k_i.
    pub fn dx(&self, i: usize) -> ConeFn {
        let mut r = ConeFn::zero(self.dim, self.degree.clone());
        for (k, f) in &self.modes {
            if k[i] == 0 {
                continue;
            }
            let c = Scalar::from_crat(CRat::new(Rat::zero(), rat_int(k[i])));
            r.insert(k.clone(), f.scale(&c));
        }
        r
    }

    /// ∂_{ξ_i}: exact fiber derivative, lowers the degree by 1.
    pub fn dxi(&self, i: usize) -> ConeFn {
        let mut r = ConeFn::zero(self.dim, self.degree.clone() - rat_int(1));
        for (k, f) in &self.modes {
            r.insert(k.clone(), f.partial(i));
        }
        r
    }

    /// {f, g} = Σ_i ∂_{ξ_i}f·∂_{x_i}g - ∂_{x_i}f·∂_{ξ_i}g; exact, degree
    /// deg f + deg g - 1.
    pub fn poisson(&self, other: &ConeFn) -> CtResult<ConeFn> {
        if self.dim != other.dim {
            return Err(CtError::DimMismatch(self.dim, other.dim));
        }
        let mut r = ConeFn::zero(
            self.dim,
            self.degree.clone() + other.degree.clone() - rat_int(1),
        );
        for i in 0..self.dim {
            r = r.add(&self.dxi(i).mul(&other.dx(i))?)?;
            r = r.sub(&self.dx(i).mul(&other.dxi(i))?)?;
        }
        Ok(r)
    }

    pub fn eval_c64(&self, x: &[f64], xi: &[f64]) -> C64 {
        let mut acc = C64::zero();
        for (k, f) in &self.modes {
            let phase: f64 = k.iter().zip(x).map(|(ki, xi)| *ki as f64 * xi).sum();
            acc += C64::new(0.0, phase).exp() * f.eval_c64(xi);
        }
        acc
    }

    /// Σ over modes of the fiber coefficient norms; with |ξ| ≥ 1 this bounds
    /// |f(x, ξ)| ≤ norm·|ξ|^degree.
    pub fn coeff_l1_norm(&self) -> f64 {
        self.modes.values().map(|f| f.coeff_l1_norm()).sum()
    }

    /// Largest |k_i| over supported modes.
    pub fn max_mode(&self) -> i64 {
        self.modes
            .keys()
            .flat_map(|k| k.iter().map(|t| t.abs()))
            .max()
            .unwrap_or(0)
    }
}

// ---------------------------------------------------------------------------
// forms on the cone

/// Index slots: 0..n are dx_1..dx_n, n..2n are dξ_1..dξ_n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConeForm {
    pub dim: usize,
    pub form_degree: usize,
    coeffs: BTreeMap<Vec<u8>, ConeFn>,
}

impl ConeForm {
    pub fn zero(dim: usize, form_degree: usize) -> Self {
        ConeForm { dim, form_degree, coeffs: BTreeMap::new() }
    }

    pub fn from_term(dim: usize, idx: Vec<u8>, f: ConeFn) -> CtResult<Self> {
        if idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&i| i as usize >= 2 * dim) {
            return Err(CtError::InvalidInput(format!("bad cone index set {idx:?}")));
        }
        let mut w = ConeForm::zero(dim, idx.len());
        w.insert(idx, f);
        Ok(w)
    }

    fn insert(&mut self, idx: Vec<u8>, f: ConeFn) {
        if f.is_zero() {
            return;
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
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Vec<u8>, &ConeFn)> {
        self.coeffs.iter()
    }

    pub fn add(&self, other: &ConeForm) -> CtResult<ConeForm> {
        if self.dim != other.dim || self.form_degree != other.form_degree {
            return Err(CtError::InvalidInput("cone form shape mismatch".into()));
        }
        let mut r = self.clone();
        for (i, f) in &other.coeffs {
            r.insert(i.clone(), f.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, other: &ConeForm) -> CtResult<ConeForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ConeForm {
        ConeForm {
            dim: self.dim,
            form_degree: self.form_degree,
            coeffs: self.coeffs.iter().map(|(i, f)| (i.clone(), f.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> ConeForm {
        ConeForm {
            dim: self.dim,
            form_degree: self.form_degree,
            coeffs: self.coeffs.iter().map(|(i, f)| (i.clone(), f.scale(s))).collect(),
        }
    }

    fn partial(&self, f: &ConeFn, slot: usize) -> ConeFn {
        if slot < self.dim {
            f.dx(slot)
        } else {
            f.dxi(slot - self.dim)
        }
    }

    pub fn d(&self) -> ConeForm {
        let mut r = ConeForm::zero(self.dim, self.form_degree + 1);
        for (idx, f) in &self.coeffs {
            for slot in 0..2 * self.dim {
                let j = slot as u8;
                if idx.contains(&j) {
                    continue;
                }
                let df = self.partial(f, slot);
                if df.is_zero() {
                    continue;
                }
                let pos = idx.iter().filter(|&&t| t < j).count();
                let mut nidx = idx.clone();
                nidx.insert(pos, j);
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                r.insert(nidx, df.scale(&Scalar::from_int(sign)));
            }
        }
        r
    }

    pub fn wedge(&self, other: &ConeForm) -> CtResult<ConeForm> {
        let mut r = ConeForm::zero(self.dim, self.form_degree + other.form_degree);
        for (i1, f1) in &self.coeffs {
            'outer: for (i2, f2) in &other.coeffs {
                let mut idx = i1.clone();
                let mut sign = 1i64;
                for &j in i2 {
                    if idx.contains(&j) {
                        continue 'outer;
                    }
                    let gt = idx.iter().filter(|&&t| t > j).count();
                    let pos = idx.iter().filter(|&&t| t < j).count();
                    idx.insert(pos, j);
                    if gt % 2 == 1 {
                        sign = -sign;
                    }
                }
                r.insert(idx, f1.mul(f2)?.scale(&Scalar::from_int(sign)));
            }
        }
        Ok(r)
    }

    /// Interior product with the vector field X = Σ components[s]·∂_s
    /// (slot order: ∂_{x_1}..∂_{x_n}, ∂_{ξ_1}..∂_{ξ_n}).
    pub fn contract(&self, components: &[ConeFn]) -> CtResult<ConeForm> {
        assert_eq!(components.len(), 2 * self.dim);
        let mut r = ConeForm::zero(self.dim, self.form_degree - 1);
        for (idx, f) in &self.coeffs {
            for (pos, &i) in idx.iter().enumerate() {
                let comp = &components[i as usize];
                if comp.is_zero() {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                let mut nidx = idx.clone();
                nidx.remove(pos);
                r.insert(nidx, f.mul(comp)?.scale(&Scalar::from_int(sign)));
            }
        }
        Ok(r)
    }

    /// ι_𝒳 with the Liouville field 𝒳 = Σ ξ_i ∂_{ξ_i}.
    pub fn contract_liouville(&self) -> CtResult<ConeForm> {
        let n = self.dim;
        let mut comps = Vec::with_capacity(2 * n);
        for _ in 0..n {
            comps.push(ConeFn::zero(n, rat_int(1)));
        }
        for i in 0..n {
            comps.push(ConeFn::from_fiber(HomogFn::coordinate(n, i)));
        }
        self.contract(&comps)
    }

    /// ω = Σ_i dξ_i∧dx_i = Σ_i -(dx_i∧dξ_i).
    pub fn symplectic(dim: usize) -> ConeForm {
        let mut w = ConeForm::zero(dim, 2);
        for i in 0..dim {
            let c = ConeFn::from_fiber(HomogFn::radial(dim, rat_int(0), Scalar::from_int(-1)));
            w.insert(vec![i as u8, (dim + i) as u8], c);
        }
        w
    }

    /// ω^k by repeated wedging.
    pub fn symplectic_power(dim: usize, k: usize) -> ConeForm {
        let w = ConeForm::symplectic(dim);
        let mut acc = if k == 0 {
            ConeForm::from_term(dim, vec![], ConeFn::from_fiber(HomogFn::radial(dim, rat_int(0), Scalar::one()))).unwrap()
        } else {
            w.clone()
        };
        for _ in 1..k {
            acc = acc.wedge(&w).unwrap();
        }
        acc
    }

    pub fn coeff(&self, idx: &[u8]) -> Option<&ConeFn> {
        self.coeffs.get(idx)
    }

    /// Numeric value of a coefficient at (x, ξ); absent coefficients are 0.
    pub fn coeff_eval(&self, idx: &[u8], x: &[f64], xi: &[f64]) -> C64 {
        self.coeffs
            .get(idx)
            .map(|f| f.eval_c64(x, xi))
            .unwrap_or_else(C64::zero)
    }
}

/// Hamiltonian vector field of f, defined by ι_{X_f}ω = -df for
/// ω = Σ dξ_i∧dx_i: X_f = Σ ∂_{ξ_i}f·∂_{x_i} - ∂_{x_i}f·∂_{ξ_i}.
pub fn hamiltonian_field(f: &ConeFn) -> Vec<ConeFn> {
    let n = f.dim;
    let mut comps = Vec::with_capacity(2 * n);
    for i in 0..n {
        comps.push(f.dxi(i));
    }
    for i in 0..n {
        comps.push(f.dx(i).neg());
    }
    comps
}

/// Base degree of a field X = Σ a_i∂_{x_i} + b_i∂_{ξ_i} with homogeneous
/// weights: deg b_i = δ, deg a_i = δ - 1 (Hamiltonian fields of 𝒫^δ).
fn field_base_degree(x: &[ConeFn]) -> Rat {
    let n = x.len() / 2;
    for (t, c) in x.iter().enumerate() {
        if !c.is_zero() {
            return if t < n { c.degree.clone() + rat_int(1) } else { c.degree.clone() };
        }
    }
    rat_int(0)
}

/// Commutator of vector fields: [X,Y]^s = Σ_t X^t ∂_t Y^s - Y^t ∂_t X^s.
pub fn field_commutator(x: &[ConeFn], y: &[ConeFn]) -> CtResult<Vec<ConeFn>> {
    let two_n = x.len();
    let n = two_n / 2;
    let partial = |f: &ConeFn, slot: usize| -> ConeFn {
        if slot < n {
            f.dx(slot)
        } else {
            f.dxi(slot - n)
        }
    };
    let base = field_base_degree(x) + field_base_degree(y) - rat_int(1);
    let mut out = Vec::with_capacity(two_n);
    for s in 0..two_n {
        let deg_s = if s < n { base.clone() - rat_int(1) } else { base.clone() };
        let mut acc = ConeFn::zero(n, deg_s);
        for t in 0..two_n {
            if !x[t].is_zero() && !y[s].is_zero() {
                acc = acc.add(&x[t].mul(&partial(&y[s], t))?)?;
            }
            if !y[t].is_zero() && !x[s].is_zero() {
                acc = acc.sub(&y[t].mul(&partial(&x[s], t))?)?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_coordinate_examples() {
        // {ξ₁, cos x₁} = -sin x₁
        let xi1 = ConeFn::from_fiber(HomogFn::coordinate(2, 0));
        let cos1 = ConeFn::cos_x(2, 0, rat_int(0));
        let b = xi1.poisson(&cos1).unwrap();
        let expect = ConeFn::sin_x(2, 0, rat_int(0)).neg();
        assert_eq!(b, expect);
        // {ξ₁, e^{ix₁}} = i e^{ix₁}
        let e1 = ConeFn::exp_mode(2, vec![1, 0], rat_int(0));
        let b = xi1.poisson(&e1).unwrap();
        assert_eq!(b, e1.scale(&Scalar::i()));
        // antisymmetry on a nontrivial pair
        let f = ConeFn::cos_x(2, 1, rat_int(1));
        let g = ConeFn::from_fiber(HomogFn::coordinate(2, 1).times_radial_pow(&rat_int(-2)));
        let fg = f.poisson(&g).unwrap();
        let gf = g.poisson(&f).unwrap();
        assert_eq!(fg, gf.neg());
        assert!(f.poisson(&f).unwrap().is_zero());
    }

    #[test]
    fn jacobi_and_leibniz() {
        let f = ConeFn::cos_x(2, 0, rat_int(1));
        let g = ConeFn::from_fiber(HomogFn::coordinate(2, 1));
        let h = ConeFn::sin_x(2, 1, rat_int(0));
        // Jacobi: {f,{g,h}} + {g,{h,f}} + {h,{f,g}} = 0
        let t1 = f.poisson(&g.poisson(&h).unwrap()).unwrap();
        let t2 = g.poisson(&h.poisson(&f).unwrap()).unwrap();
        let t3 = h.poisson(&f.poisson(&g).unwrap()).unwrap();
        let total = t1.add(&t2).unwrap().add(&t3).unwrap();
        assert!(total.is_zero());
        // Leibniz: {f, gh} = {f,g}h + g{f,h}
        let gh = g.mul(&h).unwrap();
        let lhs = f.poisson(&gh).unwrap();
        let rhs = f.poisson(&g).unwrap().mul(&h).unwrap().add(&g.mul(&f.poisson(&h).unwrap()).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn symplectic_form_and_hamiltonian() {
        // ι_{X_f}ω = -df, coefficientwise
        let f = ConeFn::cos_x(2, 0, rat_int(1));
        let xf = hamiltonian_field(&f);
        let omega = ConeForm::symplectic(2);
        let lhs = omega.contract(&xf).unwrap();
        // -df as a 1-form
        let mut rhs = ConeForm::zero(2, 1);
        for s in 0..4 {
            let df = if s < 2 { f.dx(s) } else { f.dxi(s - 2) };
            if !df.is_zero() {
                rhs.insert(vec![s as u8], df.neg());
            }
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn wod_identity() {
        // {f,g}·ω^n = n·df∧dg∧ω^{n-1} = d(g·ι_{X_f}ω^n)
        let n = 2;
        let f = ConeFn::cos_x(n, 0, rat_int(1));
        let g = ConeFn::from_fiber(HomogFn::coordinate(n, 1).times_radial_pow(&rat_int(-1)));
        let omega_n = ConeForm::symplectic_power(n, n);
        let bracket = f.poisson(&g).unwrap();
        let lhs = omega_n
            .coeffs()
            .map(|(i, c)| (i.clone(), c.mul(&bracket).unwrap()))
            .collect::<Vec<_>>();
        let mut lhs_form = ConeForm::zero(n, 2 * n);
        for (i, c) in lhs {
            lhs_form.insert(i, c);
        }
        // middle: n·df∧dg∧ω^{n-1}
        let df = {
            let mut w = ConeForm::zero(n, 1);
            for s in 0..2 * n {
                let d = if s < n { f.dx(s) } else { f.dxi(s - n) };
                if !d.is_zero() {
                    w.insert(vec![s as u8], d);
                }
            }
            w
        };
        let dg = {
            let mut w = ConeForm::zero(n, 1);
            for s in 0..2 * n {
                let d = if s < n { g.dx(s) } else { g.dxi(s - n) };
                if !d.is_zero() {
                    w.insert(vec![s as u8], d);
                }
            }
            w
        };
        let mid = df
            .wedge(&dg)
            .unwrap()
            .wedge(&ConeForm::symplectic_power(n, n - 1))
            .unwrap()
            .scale(&Scalar::from_int(n as i64));
        assert_eq!(lhs_form, mid);
        // right: d(g·ι_{X_f}ω^n)
        let xf = hamiltonian_field(&f);
        let inner = omega_n.contract(&xf).unwrap();
        let g_inner = ConeForm {
            dim: n,
            form_degree: inner.form_degree,
            coeffs: inner
                .coeffs()
                .map(|(i, c)| (i.clone(), c.mul(&g).unwrap()))
                .collect(),
        };
        assert_eq!(lhs_form, g_inner.d());
    }

    #[test]
    fn field_commutator_matches_bracket() {
        // X_{{f,g}} = [X_f, X_g]
        let f = ConeFn::sin_x(2, 0, rat_int(1));
        let g = ConeFn::cos_x(2, 1, rat_int(0));
        let xf = hamiltonian_field(&f);
        let xg = hamiltonian_field(&g);
        let comm = field_commutator(&xf, &xg).unwrap();
        let xfg = hamiltonian_field(&f.poisson(&g).unwrap());
        for s in 0..4 {
            assert_eq!(comm[s], xfg[s], "component {s}");
        }
    }
}
