//! The symplectic cone T*𝕋ⁿ∖0: symplectic residue, spanning frames, and the
//! constructive decomposition of a homogeneous function into Poisson
//! brackets. Exact Poisson arithmetic lives on `ConeFn` (see [`crate::cone`]);
//! this module adds the numeric grid machinery (pointwise frame solves,
//! spectral differentiation, reconstruction checks) at desk scale n = 2.

use crate::cone::{ConeFn, ConeForm};
use crate::error::{CtError, CtResult};
use crate::homog::HomogFn;
use crate::scalar::{C64, Rat, Scalar, area_sphere, factorial, rat_int, rat_to_f64};
use num_traits::Zero;
use rustfft::FftPlanner;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// symplectic residue

/// Exact symplectic residue on T*𝕋ⁿ∖0 with volume form ω^n:
/// zero unless deg f = -n, else n!·(2π)ⁿ·Area_n·(constant-harmonic
/// coefficient of the zero x-mode). Orientation fixed so that
/// res(|ξ|^{-n}) > 0 (for n = 2 this gives res(|ξ|^{-2}) = 16π³).
pub fn symplectic_residue(f: &ConeFn) -> Scalar {
    let n = f.dim;
    if f.degree != rat_int(-(n as i64)) {
        return Scalar::zero();
    }
    let c0 = f.zero_mode().constant_harmonic_coeff();
    if c0.is_zero() {
        return Scalar::zero();
    }
    // n!·(2π)ⁿ·Area_n
    let two_pi_n = Scalar::pi_sqrt_pow(
        num_complex::Complex::new(Rat::from(num_bigint::BigInt::from(2u32).pow(n as u32)), Rat::zero()),
        2 * n as i32,
    );
    let unit = Scalar::from_rat(Rat::from(factorial(n as u32)))
        .mul(&two_pi_n)
        .mul(&area_sphere(n));
    c0.mul(&unit)
}

/// Brute-force quadrature of the defining integral ∫_Z i*_Z(f·ι_𝒳ω²) for
/// n = 2, used as an independent oracle. The pullback is evaluated on the
/// parametrization (x₁, x₂, θ) ↦ (x₁, x₂, cosθ, sinθ); trapezoid sums are
/// exact for trigonometric polynomials once the grid resolves all modes.
pub fn symplectic_residue_quadrature(f: &ConeFn, grid: usize) -> CtResult<C64> {
    if f.dim != 2 {
        return Err(CtError::Unsupported("quadrature oracle is n = 2 only".into()));
    }
    let omega2 = ConeForm::symplectic_power(2, 2);
    let f_omega2 = mul_form(&omega2, f)?;
    let beta = f_omega2.contract_liouville()?;
    // tangent vectors of the parametrization in (x1, x2, ξ1, ξ2)
    let mut total = C64::zero();
    let h = 2.0 * std::f64::consts::PI / grid as f64;
    for i1 in 0..grid {
        for i2 in 0..grid {
            for it in 0..grid {
                let x = [i1 as f64 * h, i2 as f64 * h];
                let th = it as f64 * h;
                let xi = [th.cos(), th.sin()];
                let tangents = [
                    [1.0, 0.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0, 0.0],
                    [0.0, 0.0, -th.sin(), th.cos()],
                ];
                let mut node = C64::zero();
                for (idx, c) in beta.coeffs() {
                    // det of the 3×3 minor picking components idx
                    let mut m = [[0.0f64; 3]; 3];
                    for (r, t) in tangents.iter().enumerate() {
                        for (cix, &slot) in idx.iter().enumerate() {
                            m[r][cix] = t[slot as usize];
                        }
                    }
                    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
                    if det != 0.0 {
                        node += c.eval_c64(&x, &xi) * det;
                    }
                }
                total += node;
            }
        }
    }
    // (x₁, x₂, θ) ordering integrates ι_𝒳ω² to -2(2π)³ on f = |ξ|^{-2};
    // the fixed orientation makes the residue positive.
    Ok(-total * h * h * h)
}

fn mul_form(w: &ConeForm, f: &ConeFn) -> CtResult<ConeForm> {
    let mut out = ConeForm::zero(w.dim, w.form_degree);
    for (idx, c) in w.coeffs() {
        out = out.add(&ConeForm::from_term(w.dim, idx.clone(), c.mul(f)?)?)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// spanning frames

/// The 3n spanning functions of degree l: for l ≠ 0
/// {|ξ|^l cos x_i, |ξ|^l sin x_i, ξ_i|ξ|^{l-1}}, and for l = 0
/// {cos x_i, sin x_i, ξ_i/|ξ|}. Their differentials span the cotangent
/// space (resp. the cotangent space of S*𝕋ⁿ when l = 0).
pub fn spanning_set(dim: usize, l: &Rat) -> Vec<ConeFn> {
    assert!(dim >= 2);
    let mut out = Vec::with_capacity(3 * dim);
    for i in 0..dim {
        out.push(ConeFn::cos_x(dim, i, l.clone()));
    }
    for i in 0..dim {
        out.push(ConeFn::sin_x(dim, i, l.clone()));
    }
    for i in 0..dim {
        out.push(ConeFn::from_fiber(
            HomogFn::coordinate(dim, i).times_radial_pow(&(l.clone() - rat_int(1))),
        ));
    }
    out
}

/// Differential of g at (x, ξ) as a real 4-vector (n = 2 layout:
/// ∂x₁, ∂x₂, ∂ξ₁, ∂ξ₂); the spanning functions are real-valued.
fn differential_at(g: &ConeFn, x: &[f64], xi: &[f64]) -> [f64; 4] {
    let mut d = [0.0f64; 4];
    for s in 0..2 {
        d[s] = g.dx(s).eval_c64(x, xi).re;
        d[2 + s] = g.dxi(s).eval_c64(x, xi).re;
    }
    d
}

/// Verify the full-rank postcondition of `spanning_set` on a grid:
/// rank 2n for l ≠ 0, rank 2n-1 tangentially to S*𝕋ⁿ for l = 0.
/// Surfaced as `RankDeficient` (would indicate an implementation bug).
pub fn verify_spanning_rank(dim: usize, l: &Rat, nodes: usize) -> CtResult<f64> {
    if dim != 2 {
        return Err(CtError::Unsupported("rank verification grid is n = 2 only".into()));
    }
    let set = spanning_set(dim, l);
    let tangential = l.is_zero();
    let nx = (nodes as f64).powf(1.0 / 3.0).ceil() as usize;
    let mut min_sigma = f64::INFINITY;
    let mut worst = vec![0.0; 3];
    let h = 2.0 * std::f64::consts::PI / nx as f64;
    for i1 in 0..nx {
        for i2 in 0..nx {
            for it in 0..nx {
                let x = [i1 as f64 * h + 0.13, i2 as f64 * h + 0.07];
                let th = it as f64 * h + 0.19;
                let xi = [th.cos(), th.sin()];
                let rows: Vec<[f64; 4]> = set.iter().map(|g| differential_at(g, &x, &xi)).collect();
                let sigma = if tangential {
                    // project onto tangent directions of S*: ∂x₁, ∂x₂, ∂θ
                    let tang = [
                        [1.0, 0.0, 0.0, 0.0],
                        [0.0, 1.0, 0.0, 0.0],
                        [0.0, 0.0, -xi[1], xi[0]],
                    ];
                    let mut m = nalgebra::DMatrix::<f64>::zeros(rows.len(), 3);
                    for (r, row) in rows.iter().enumerate() {
                        for (c, t) in tang.iter().enumerate() {
                            m[(r, c)] = row.iter().zip(t).map(|(a, b)| a * b).sum();
                        }
                    }
                    m.svd(false, false).singular_values.min()
                } else {
                    let mut m = nalgebra::DMatrix::<f64>::zeros(rows.len(), 4);
                    for (r, row) in rows.iter().enumerate() {
                        for c in 0..4 {
                            m[(r, c)] = row[c];
                        }
                    }
                    m.svd(false, false).singular_values.min()
                };
                if sigma < min_sigma {
                    min_sigma = sigma;
                    worst = vec![x[0], x[1], th];
                }
            }
        }
    }
    if min_sigma < 1e-8 {
        return Err(CtError::RankDeficient { node: worst, sigma_min: min_sigma });
    }
    Ok(min_sigma)
}

// ---------------------------------------------------------------------------
// grid functions

/// Sample grid on 𝕋²×S¹ with degree-homogeneous radial extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub nx: usize,
    pub ntheta: usize,
}

impl GridSpec {
    pub fn new(nx: usize, ntheta: usize) -> Self {
        GridSpec { nx, ntheta }
    }
}

/// Complex samples on the product grid (equispaced x on 𝕋², equispaced
/// angles on the fiber circle), with homogeneity degree for the radial
/// extension f(x, rθ) = r^degree·f(x, θ).
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub degree: Rat,
    pub values: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(spec: GridSpec, degree: Rat) -> Self {
        GridFunction { spec, degree, values: vec![C64::zero(); spec.nx * spec.nx * spec.ntheta] }
    }

    #[inline]
    pub fn idx(&self, i1: usize, i2: usize, it: usize) -> usize {
        (i1 * self.spec.nx + i2) * self.spec.ntheta + it
    }

    pub fn node(&self, i1: usize, i2: usize, it: usize) -> ([f64; 2], f64) {
        let hx = 2.0 * std::f64::consts::PI / self.spec.nx as f64;
        let ht = 2.0 * std::f64::consts::PI / self.spec.ntheta as f64;
        ([i1 as f64 * hx, i2 as f64 * hx], it as f64 * ht)
    }

    pub fn sample<F: Fn(&[f64; 2], f64) -> C64>(spec: GridSpec, degree: Rat, f: F) -> Self {
        let mut g = GridFunction::zeros(spec, degree);
        for i1 in 0..spec.nx {
            for i2 in 0..spec.nx {
                for it in 0..spec.ntheta {
                    let (x, th) = g.node(i1, i2, it);
                    let v = f(&x, th);
                    let id = g.idx(i1, i2, it);
                    g.values[id] = v;
                }
            }
        }
        g
    }

    pub fn sample_cone_fn(spec: GridSpec, f: &ConeFn) -> Self {
        GridFunction::sample(spec, f.degree.clone(), |x, th| {
            f.eval_c64(&x[..], &[th.cos(), th.sin()])
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Spectral derivative along axis 0 (x₁), 1 (x₂) or 2 (θ).
    pub fn spectral_derivative(&self, axis: usize) -> GridFunction {
        let mut out = self.clone();
        let n1 = self.spec.nx;
        let nt = self.spec.ntheta;
        let len = match axis {
            0 | 1 => n1,
            _ => nt,
        };
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);
        let mut line = vec![C64::zero(); len];
        let mut apply = |values: &mut Vec<C64>, stride: usize, base: usize| {
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = values[base + t * stride];
            }
            fft.process(&mut line);
            for (t, v) in line.iter_mut().enumerate() {
                let k = if t <= len / 2 { t as i64 } else { t as i64 - len as i64 };
                // drop the unmatched Nyquist mode of the derivative
                let k = if 2 * t == len { 0 } else { k };
                *v *= C64::new(0.0, k as f64) / len as f64;
            }
            ifft.process(&mut line);
            for (t, v) in line.iter().enumerate() {
                values[base + t * stride] = *v;
            }
        };
        match axis {
            0 => {
                for i2 in 0..n1 {
                    for it in 0..nt {
                        apply(&mut out.values, n1 * nt, i2 * nt + it);
                    }
                }
            }
            1 => {
                for i1 in 0..n1 {
                    for it in 0..nt {
                        apply(&mut out.values, nt, i1 * n1 * nt + it);
                    }
                }
            }
            _ => {
                for i1 in 0..n1 {
                    for i2 in 0..n1 {
                        apply(&mut out.values, 1, (i1 * n1 + i2) * nt);
                    }
                }
            }
        }
        out
    }

    /// ∂_{ξ_i} on the sphere r = 1 through the homogeneous extension:
    /// ∂_{ξ₁} = m cosθ·F - sinθ·F_θ, ∂_{ξ₂} = m sinθ·F + cosθ·F_θ.
    pub fn xi_derivatives(&self) -> (GridFunction, GridFunction) {
        let ftheta = self.spectral_derivative(2);
        let m = rat_to_f64(&self.degree);
        let mut d1 = GridFunction::zeros(self.spec, self.degree.clone() - rat_int(1));
        let mut d2 = d1.clone();
        for i1 in 0..self.spec.nx {
            for i2 in 0..self.spec.nx {
                for it in 0..self.spec.ntheta {
                    let (_, th) = self.node(i1, i2, it);
                    let id = self.idx(i1, i2, it);
                    let f = self.values[id];
                    let ft = ftheta.values[id];
                    d1.values[id] = f * m * th.cos() - ft * th.sin();
                    d2.values[id] = f * m * th.sin() + ft * th.cos();
                }
            }
        }
        (d1, d2)
    }

    /// CSV export: x1,x2,theta,re,im per node.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x1,x2,theta,re,im\n");
        for i1 in 0..self.spec.nx {
            for i2 in 0..self.spec.nx {
                for it in 0..self.spec.ntheta {
                    let (x, th) = self.node(i1, i2, it);
                    let v = self.values[self.idx(i1, i2, it)];
                    s.push_str(&format!("{},{},{},{:.17e},{:.17e}\n", x[0], x[1], th, v.re, v.im));
                }
            }
        }
        s
    }

    /// Lift to an exact `ConeFn` by 3-D discrete Fourier transform, with
    /// angular modes mapped to harmonic fiber parts
    /// e^{iκθ} ↦ (ξ₁ ± iξ₂)^{|κ|}·|ξ|^{deg∓|κ|}. Coefficients are lifted
    /// dyadically (exactly); modes below `keep_rel`·max are dropped.
    pub fn to_cone_fn(&self, keep_rel: f64) -> ConeFn {
        let n1 = self.spec.nx;
        let nt = self.spec.ntheta;
        // full 3-D DFT via repeated 1-D FFTs
        let mut data = self.values.clone();
        let mut planner = FftPlanner::new();
        for (axis, len) in [(0usize, n1), (1, n1), (2, nt)] {
            let fft = planner.plan_fft_forward(len);
            let mut line = vec![C64::zero(); len];
            let lines: Vec<(usize, usize)> = match axis {
                0 => {
                    let mut v = Vec::new();
                    for i2 in 0..n1 {
                        for it in 0..nt {
                            v.push((n1 * nt, i2 * nt + it));
                        }
                    }
                    v
                }
                1 => {
                    let mut v = Vec::new();
                    for i1 in 0..n1 {
                        for it in 0..nt {
                            v.push((nt, i1 * n1 * nt + it));
                        }
                    }
                    v
                }
                _ => {
                    let mut v = Vec::new();
                    for i1 in 0..n1 {
                        for i2 in 0..n1 {
                            v.push((1, (i1 * n1 + i2) * nt));
                        }
                    }
                    v
                }
            };
            for (stride, base) in lines {
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + t * stride];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    data[base + t * stride] = *v / len as f64;
                }
            }
        }
        let max_mag = data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let cut = max_mag * keep_rel;
        let mut modes: BTreeMap<Vec<i64>, BTreeMap<i64, C64>> = BTreeMap::new();
        for i1 in 0..n1 {
            for i2 in 0..n1 {
                for it in 0..nt {
                    let c = data[(i1 * n1 + i2) * nt + it];
                    if c.norm() <= cut || c.norm() == 0.0 {
                        continue;
                    }
                    let k1 = wrap_freq(i1, n1);
                    let k2 = wrap_freq(i2, n1);
                    let kt = wrap_freq(it, nt);
                    modes.entry(vec![k1, k2]).or_default().insert(kt, c);
                }
            }
        }
        let mut out = ConeFn::zero(2, self.degree.clone());
        for (k, angular) in modes {
            let mut fiber = HomogFn::zero(2, self.degree.clone());
            for (kappa, c) in angular {
                fiber = fiber.add(&harmonic_from_angular_mode(kappa, &self.degree).scale(
                    &Scalar::from_c64_dyadic(c),
                )).unwrap();
            }
            if !fiber.is_zero() {
                out = out.add(&ConeFn::from_mode(k, fiber)).unwrap();
            }
        }
        out
    }
}

fn wrap_freq(i: usize, len: usize) -> i64 {
    if i <= len / 2 { i as i64 } else { i as i64 - len as i64 }
}

/// e^{iκθ} extended homogeneously of the given degree:
/// κ ≥ 0 → (ξ₁+iξ₂)^κ |ξ|^{deg-κ}, κ < 0 → (ξ₁-iξ₂)^{|κ|}|ξ|^{deg-|κ|};
/// the angular factors are harmonic in n = 2.
pub fn harmonic_from_angular_mode(kappa: i64, degree: &Rat) -> HomogFn {
    let a = kappa.unsigned_abs() as usize;
    let i = Scalar::i();
    let mut p = crate::poly::Poly::one(2);
    let x = crate::poly::Poly::var(2, 0);
    let y = crate::poly::Poly::var(2, 1);
    let z = if kappa >= 0 { x.add(&y.scale(&i)) } else { x.sub(&y.scale(&i)) };
    for _ in 0..a {
        p = p.mul(&z);
    }
    HomogFn::from_poly_radial(&p, degree.clone() - rat_int(a as i64)).unwrap()
}

// ---------------------------------------------------------------------------
// bracket decomposition

pub struct BracketDecomposition {
    /// Pairs (g_j exact, f_j grid) with Σ_j {g_j, f_j} ≈ f.
    pub pairs: Vec<(ConeFn, GridFunction)>,
    pub achieved_error: f64,
}

/// Numeric exterior algebra at a point of ℝ⁴ used for the pointwise solves.
#[derive(Clone, Debug)]
struct NumForm {
    /// degree-p coefficients on sorted index tuples of {0,1,2,3}
    coeffs: BTreeMap<Vec<u8>, C64>,
}

impl NumForm {
    fn zero() -> Self {
        NumForm { coeffs: BTreeMap::new() }
    }

    fn one_form(v: [C64; 4]) -> Self {
        let mut f = NumForm::zero();
        for (i, c) in v.into_iter().enumerate() {
            if c.norm() > 0.0 {
                f.coeffs.insert(vec![i as u8], c);
            }
        }
        f
    }

    fn insert(&mut self, idx: Vec<u8>, c: C64) {
        if c.norm() == 0.0 {
            return;
        }
        *self.coeffs.entry(idx).or_insert_with(C64::zero) += c;
    }

    fn wedge(&self, other: &NumForm) -> NumForm {
        let mut out = NumForm::zero();
        for (i1, c1) in &self.coeffs {
            'outer: for (i2, c2) in &other.coeffs {
                let mut idx = i1.clone();
                let mut sign = 1.0;
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
                out.insert(idx, c1 * c2 * sign);
            }
        }
        out
    }

    fn get(&self, idx: &[u8]) -> C64 {
        self.coeffs.get(idx).copied().unwrap_or_else(C64::zero)
    }
}

const LAMBDA3_BASIS: [[u8; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

/// Constant matrix of θ ↦ θ∧ω^{n-1} from Λ¹ to Λ³ (n = 2), samplable once.
fn wedge_omega_matrix() -> [[f64; 4]; 4] {
    // ω = dξ₁∧dx₁ + dξ₂∧dx₂ in slots (x1,x2,ξ1,ξ2) = (0,1,2,3):
    // ω = -(dx₁∧dξ₁) - (dx₂∧dξ₂) → coefficients -1 on (0,2) and (1,3)
    let mut m = [[0.0f64; 4]; 4];
    for (col, slot) in (0..4).enumerate() {
        let theta = NumForm::one_form({
            let mut v = [C64::zero(); 4];
            v[slot] = C64::new(1.0, 0.0);
            v
        });
        let mut omega = NumForm::zero();
        omega.insert(vec![0, 2], C64::new(-1.0, 0.0));
        omega.insert(vec![1, 3], C64::new(-1.0, 0.0));
        let w = theta.wedge(&omega);
        for (row, basis) in LAMBDA3_BASIS.iter().enumerate() {
            m[row][col] = w.get(basis).re;
        }
    }
    m
}

fn solve4(m: &[[f64; 4]; 4], rhs: [C64; 4]) -> [C64; 4] {
    // Gaussian elimination with partial pivoting on the real matrix
    let mut a = [[0.0f64; 4]; 4];
    let mut b = rhs;
    for (ra, rm) in a.iter_mut().zip(m.iter()) {
        *ra = *rm;
    }
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for row in (col + 1)..4 {
            let f = a[row][col] / d;
            for c in col..4 {
                a[row][c] -= f * a[col][c];
            }
            b[row] = b[row] - b[col] * f;
        }
    }
    let mut x = [C64::zero(); 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for c in (row + 1)..4 {
            acc -= x[c] * a[row][c];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Least squares c = argmin ‖A c - y‖ for a real matrix A (rows ≥ cols) and
/// complex rhs, with a pseudo-inverse threshold on small singular values.
fn lsq_real_complex(a: &nalgebra::DMatrix<f64>, y: &[C64], svd_tol: f64) -> Vec<C64> {
    let re = nalgebra::DVector::<f64>::from_iterator(y.len(), y.iter().map(|v| v.re));
    let im = nalgebra::DVector::<f64>::from_iterator(y.len(), y.iter().map(|v| v.im));
    let svd = a.clone().svd(true, true);
    let xr = svd.solve(&re, svd_tol).expect("svd solve");
    let xi = svd.solve(&im, svd_tol).expect("svd solve");
    (0..a.ncols()).map(|i| C64::new(xr[i], xi[i])).collect()
}

/// Decompose f ∈ 𝒫^{l+m-1} as Σ_j {g_j, f_j} with g_j from the degree-l
/// spanning frame (or degree-m by symmetry when l = 0 ≠ m) and grid
/// coefficients f_j; the l = m = 0 case runs the degree-0 frame route.
pub fn bracket_decompose(
    f: &ConeFn,
    l: &Rat,
    m: &Rat,
    grid: GridSpec,
    tol: f64,
) -> CtResult<BracketDecomposition> {
    let n = f.dim;
    if n != 2 {
        return Err(CtError::Unsupported("bracket_decompose is desk scale n = 2".into()));
    }
    let want = l.clone() + m.clone() - rat_int(1);
    if f.degree != want {
        return Err(CtError::DegreeMismatch(want.to_string(), f.degree.to_string()));
    }
    if f.is_zero() {
        return Ok(BracketDecomposition { pairs: Vec::new(), achieved_error: 0.0 });
    }
    let minus_n = rat_int(-(n as i64));
    if f.degree == minus_n {
        let res = symplectic_residue(f);
        if !res.is_zero() {
            return Err(CtError::ResidueObstruction { residue: res.render(12) });
        }
    }

    if l.is_zero() && m.is_zero() {
        return bracket_decompose_degree_zero(f, grid, tol);
    }
    // symmetry: if l = 0 the frame carries degree m instead
    let frame_deg = if l.is_zero() { m.clone() } else { l.clone() };
    let frame = spanning_set(n, &frame_deg);
    let coeff_deg = f.degree.clone() - frame_deg.clone() + rat_int(1);

    // β with dβ = f·ω^n
    let omega_n = ConeForm::symplectic_power(n, n);
    let f_omega = mul_form(&omega_n, f)?;
    let beta_nodes = if f.degree != minus_n {
        let denom = rat_to_f64(&(f.degree.clone() + rat_int(n as i64)));
        let beta = f_omega.contract_liouville()?;
        beta_node_values(&beta, grid, 1.0 / denom)
    } else {
        beta_nodes_spectral(f, grid)?
    };

    // pointwise: solve θ∧ω = -β/n, then express θ over the frame
    let wm = wedge_omega_matrix();
    let nx = grid.nx;
    let nt = grid.ntheta;
    let mut coeff_grids: Vec<GridFunction> = (0..frame.len())
        .map(|_| GridFunction::zeros(grid, coeff_deg.clone()))
        .collect();
    let hx = 2.0 * std::f64::consts::PI / nx as f64;
    let ht = 2.0 * std::f64::consts::PI / nt as f64;
    for i1 in 0..nx {
        for i2 in 0..nx {
            for it in 0..nt {
                let x = [i1 as f64 * hx, i2 as f64 * hx];
                let th = it as f64 * ht;
                let xi = [th.cos(), th.sin()];
                let node = (i1 * nx + i2) * nt + it;
                let rhs_form = &beta_nodes[node];
                let rhs = [
                    -rhs_form[0] / n as f64,
                    -rhs_form[1] / n as f64,
                    -rhs_form[2] / n as f64,
                    -rhs_form[3] / n as f64,
                ];
                let theta = solve4(&wm, rhs);
                // frame differentials at the node
                let mut a = nalgebra::DMatrix::<f64>::zeros(4, frame.len());
                for (col, g) in frame.iter().enumerate() {
                    let d = differential_at(g, &x, &xi);
                    for row in 0..4 {
                        a[(row, col)] = d[row];
                    }
                }
                let c = lsq_real_complex(&a, &theta, 1e-8);
                // θ = Σ c_j dg_j → store c_j
                for (j, cj) in c.into_iter().enumerate() {
                    let id = coeff_grids[j].idx(i1, i2, it);
                    coeff_grids[j].values[id] = cj;
                }
            }
        }
    }

    // Whichever degree the frame carries, it sits in the first bracket
    // slot: f·ω^n = Σ d(f_j ι_{X_{g_j}}ω^n) = Σ {g_j, f_j}·ω^n.
    let pairs: Vec<(ConeFn, GridFunction)> = frame.into_iter().zip(coeff_grids).collect();
    let err = reconstruction_error(f, &pairs, grid)?;
    if err > tol {
        return Err(CtError::ToleranceNotMet { achieved: err, required: tol });
    }
    Ok(BracketDecomposition { pairs, achieved_error: err })
}

/// l = m = 0: f ∈ 𝒫^{-1}; write f·α = Σ f_i dg_i over the degree-0 frame
/// (α = ι_𝒳ω = Σξ_i dx_i) and return pairs (g_i, -f_i/(n-1)).
fn bracket_decompose_degree_zero(
    f: &ConeFn,
    grid: GridSpec,
    tol: f64,
) -> CtResult<BracketDecomposition> {
    let n = f.dim;
    let frame = spanning_set(n, &rat_int(0));
    let nx = grid.nx;
    let nt = grid.ntheta;
    let mut coeff_grids: Vec<GridFunction> =
        (0..frame.len()).map(|_| GridFunction::zeros(grid, rat_int(0))).collect();
    let hx = 2.0 * std::f64::consts::PI / nx as f64;
    let ht = 2.0 * std::f64::consts::PI / nt as f64;
    for i1 in 0..nx {
        for i2 in 0..nx {
            for it in 0..nt {
                let x = [i1 as f64 * hx, i2 as f64 * hx];
                let th = it as f64 * ht;
                let xi = [th.cos(), th.sin()];
                let fv = f.eval_c64(&x, &xi);
                // rhs: f·α with α = ξ₁dx₁ + ξ₂dx₂
                let rhs = [fv * xi[0], fv * xi[1], C64::zero(), C64::zero()];
                let mut a = nalgebra::DMatrix::<f64>::zeros(4, frame.len());
                for (col, g) in frame.iter().enumerate() {
                    let d = differential_at(g, &x, &xi);
                    for row in 0..4 {
                        a[(row, col)] = d[row];
                    }
                }
                let c = lsq_real_complex(&a, &rhs, 1e-8);
                for (j, cj) in c.into_iter().enumerate() {
                    let id = coeff_grids[j].idx(i1, i2, it);
                    // f = 1/(n-1) Σ {f_i, g_i} = Σ {g_i, -f_i/(n-1)}
                    coeff_grids[j].values[id] = -cj / (n as f64 - 1.0);
                }
            }
        }
    }
    let pairs: Vec<(ConeFn, GridFunction)> = frame.into_iter().zip(coeff_grids).collect();
    let err = reconstruction_error(f, &pairs, grid)?;
    if err > tol {
        return Err(CtError::ToleranceNotMet { achieved: err, required: tol });
    }
    Ok(BracketDecomposition { pairs, achieved_error: err })
}

/// Node values of a 3-form's Λ³-coefficients.
fn beta_node_values(beta: &ConeForm, grid: GridSpec, scale: f64) -> Vec<[C64; 4]> {
    let nx = grid.nx;
    let nt = grid.ntheta;
    let mut out = vec![[C64::zero(); 4]; nx * nx * nt];
    let hx = 2.0 * std::f64::consts::PI / nx as f64;
    let ht = 2.0 * std::f64::consts::PI / nt as f64;
    for i1 in 0..nx {
        for i2 in 0..nx {
            for it in 0..nt {
                let x = [i1 as f64 * hx, i2 as f64 * hx];
                let th = it as f64 * ht;
                let xi = [th.cos(), th.sin()];
                let node = (i1 * nx + i2) * nt + it;
                for (row, basis) in LAMBDA3_BASIS.iter().enumerate() {
                    out[node][row] = beta.coeff_eval(basis, &x, &xi) * scale;
                }
            }
        }
    }
    out
}

/// Degree -n case: dβ = f·ω^n via the base splitting. With η-part zero,
/// β = -r^{-1}dr∧π*γ where d_Zγ = τ := i*_Z(ι_𝒳(fω^n)) is solved
/// spectrally on Z ≅ 𝕋³ (residue zero ⇔ τ has mean zero).
fn beta_nodes_spectral(f: &ConeFn, grid: GridSpec) -> CtResult<Vec<[C64; 4]>> {
    let n = f.dim;
    let omega_n = ConeForm::symplectic_power(n, n);
    let f_omega = mul_form(&omega_n, f)?;
    let iota = f_omega.contract_liouville()?;
    // τ = t·dx₁∧dx₂∧dθ on the parametrized Z
    let nx = grid.nx;
    let nt = grid.ntheta;
    let mut tvals = GridFunction::zeros(grid, rat_int(0));
    let hx = 2.0 * std::f64::consts::PI / nx as f64;
    let ht = 2.0 * std::f64::consts::PI / nt as f64;
    for i1 in 0..nx {
        for i2 in 0..nx {
            for it in 0..nt {
                let x = [i1 as f64 * hx, i2 as f64 * hx];
                let th = it as f64 * ht;
                let xi = [th.cos(), th.sin()];
                let tangents = [
                    [1.0, 0.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0, 0.0],
                    [0.0, 0.0, -th.sin(), th.cos()],
                ];
                let mut node = C64::zero();
                for (idx, c) in iota.coeffs() {
                    let mut mm = [[0.0f64; 3]; 3];
                    for (r, t) in tangents.iter().enumerate() {
                        for (cix, &slot) in idx.iter().enumerate() {
                            mm[r][cix] = t[slot as usize];
                        }
                    }
                    let det = mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1])
                        - mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0])
                        + mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]);
                    if det != 0.0 {
                        node += c.eval_c64(&x, &xi) * det;
                    }
                }
                let id = tvals.idx(i1, i2, it);
                tvals.values[id] = node;
            }
        }
    }
    // spectral solve dγ = τ on 𝕋³: γ = a dx₂∧dθ + b dθ∧dx₁ + c dx₁∧dx₂,
    // ∂₁a + ∂₂b + ∂_θ c = t
    let (ga, gb, gc) = solve_potential_t3(&tvals)?;
    // β = -r^{-1}dr ∧ π*γ evaluated at r = 1 nodes:
    // r^{-1}dr = ξ₁dξ₁ + ξ₂dξ₂ (slots 2,3); π*dx_i = dx_i;
    // π*dθ = -ξ₂dξ₁ + ξ₁dξ₂ at r = 1.
    let mut out = vec![[C64::zero(); 4]; nx * nx * nt];
    for i1 in 0..nx {
        for i2 in 0..nx {
            for it in 0..nt {
                let th = it as f64 * ht;
                let xi = [th.cos(), th.sin()];
                let node = (i1 * nx + i2) * nt + it;
                let id = (i1 * nx + i2) * nt + it;
                let rdr = NumForm::one_form([
                    C64::zero(),
                    C64::zero(),
                    C64::new(xi[0], 0.0),
                    C64::new(xi[1], 0.0),
                ]);
                let dx1 = NumForm::one_form([C64::new(1.0, 0.0), C64::zero(), C64::zero(), C64::zero()]);
                let dx2 = NumForm::one_form([C64::zero(), C64::new(1.0, 0.0), C64::zero(), C64::zero()]);
                let dth = NumForm::one_form([
                    C64::zero(),
                    C64::zero(),
                    C64::new(-xi[1], 0.0),
                    C64::new(xi[0], 0.0),
                ]);
                let mut gamma = dx2.wedge(&dth);
                gamma = scale_numform(&gamma, ga.values[id]);
                let t2 = scale_numform(&dth.wedge(&dx1), gb.values[id]);
                let t3 = scale_numform(&dx1.wedge(&dx2), gc.values[id]);
                let gamma = add_numform(&add_numform(&gamma, &t2), &t3);
                let beta = scale_numform(&rdr.wedge(&gamma), C64::new(-1.0, 0.0));
                for (row, basis) in LAMBDA3_BASIS.iter().enumerate() {
                    out[node][row] = beta.get(basis);
                }
            }
        }
    }
    Ok(out)
}

fn scale_numform(f: &NumForm, c: C64) -> NumForm {
    let mut out = NumForm::zero();
    for (i, v) in &f.coeffs {
        out.insert(i.clone(), v * c);
    }
    out
}

fn add_numform(a: &NumForm, b: &NumForm) -> NumForm {
    let mut out = a.clone();
    for (i, v) in &b.coeffs {
        out.insert(i.clone(), *v);
    }
    out
}

/// Solve ∂₁a + ∂₂b + ∂_θc = t on 𝕋³ spectrally (t must have mean ≈ 0).
fn solve_potential_t3(t: &GridFunction) -> CtResult<(GridFunction, GridFunction, GridFunction)> {
    let nx = t.spec.nx;
    let nt = t.spec.ntheta;
    // forward 3-D DFT
    let mut data = t.values.clone();
    fft3(&mut data, nx, nt, false);
    let norm = (nx * nx * nt) as f64;
    let mean = data[0] / norm;
    if mean.norm() > 1e-6 * (1.0 + t.sup_norm()) {
        return Err(CtError::ResidueObstruction { residue: format!("{:.3e}", mean.norm()) });
    }
    let mut ahat = vec![C64::zero(); data.len()];
    let mut bhat = vec![C64::zero(); data.len()];
    let mut chat = vec![C64::zero(); data.len()];
    for i1 in 0..nx {
        for i2 in 0..nx {
            for it in 0..nt {
                let id = (i1 * nx + i2) * nt + it;
                let k1 = wrap_freq(i1, nx) as f64;
                let k2 = wrap_freq(i2, nx) as f64;
                let kt = wrap_freq(it, nt) as f64;
                let k2sum = k1 * k1 + k2 * k2 + kt * kt;
                if k2sum == 0.0 {
                    continue;
                }
                let th = data[id] / norm;
                // (ik·v) = t̂ with v ∝ k
                let base = th / C64::new(0.0, k2sum);
                ahat[id] = base * k1;
                bhat[id] = base * k2;
                chat[id] = base * kt;
            }
        }
    }
    fft3(&mut ahat, nx, nt, true);
    fft3(&mut bhat, nx, nt, true);
    fft3(&mut chat, nx, nt, true);
    let mk = |v: Vec<C64>| GridFunction { spec: t.spec, degree: rat_int(0), values: v };
    Ok((mk(ahat), mk(bhat), mk(chat)))
}

fn fft3(data: &mut [C64], nx: usize, nt: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    for (axis, len) in [(0usize, nx), (1, nx), (2, nt)] {
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let mut line = vec![C64::zero(); len];
        let lines: Vec<(usize, usize)> = match axis {
            0 => (0..nx)
                .flat_map(|i2| (0..nt).map(move |it| (nx * nt, i2 * nt + it)))
                .collect(),
            1 => (0..nx)
                .flat_map(|i1| (0..nt).map(move |it| (nt, i1 * nx * nt + it)))
                .collect(),
            _ => (0..nx)
                .flat_map(|i1| (0..nx).map(move |i2| (1, (i1 * nx + i2) * nt)))
                .collect(),
        };
        for (stride, base) in lines {
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = data[base + t * stride];
            }
            fft.process(&mut line);
            for (t, v) in line.iter().enumerate() {
                data[base + t * stride] = *v;
            }
        }
    }
}

/// Sup-norm relative error of Σ_j {g_j, f_j} against f on the grid, with
/// exact derivatives of g_j and spectral derivatives of f_j.
pub fn reconstruction_error(
    f: &ConeFn,
    pairs: &[(ConeFn, GridFunction)],
    grid: GridSpec,
) -> CtResult<f64> {
    let target = GridFunction::sample_cone_fn(grid, f);
    let scale = target.sup_norm().max(1e-30);
    let mut recon = GridFunction::zeros(grid, f.degree.clone());
    for (g, c) in pairs {
        let gx: Vec<GridFunction> = (0..2)
            .map(|i| GridFunction::sample_cone_fn(grid, &g.dx(i)))
            .collect();
        let gxi: Vec<GridFunction> = (0..2)
            .map(|i| GridFunction::sample_cone_fn(grid, &g.dxi(i)))
            .collect();
        let cx1 = c.spectral_derivative(0);
        let cx2 = c.spectral_derivative(1);
        let (cxi1, cxi2) = c.xi_derivatives();
        for id in 0..recon.values.len() {
            // {g, c} = Σ_i ∂ξ_i g·∂x_i c - ∂x_i g·∂ξ_i c
            recon.values[id] += gxi[0].values[id] * cx1.values[id]
                + gxi[1].values[id] * cx2.values[id]
                - gx[0].values[id] * cxi1.values[id]
                - gx[1].values[id] * cxi2.values[id];
        }
    }
    let mut err: f64 = 0.0;
    for id in 0..recon.values.len() {
        err = err.max((recon.values[id] - target.values[id]).norm());
    }
    Ok(err / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_i64;

    #[test]
    fn symplectic_residue_constant() {
        // res(|ξ|^{-2}) = 16π³ on T*𝕋²∖0
        let f = ConeFn::from_fiber(HomogFn::radial(2, rat_int(-2), Scalar::one()));
        let r = symplectic_residue(&f);
        let expect = 16.0 * std::f64::consts::PI.powi(3);
        assert!((r.to_f64() - expect).abs() < 1e-10);
        // nonzero x-mode → 0
        let g = ConeFn::exp_mode(2, vec![1, 0], rat_int(-2));
        assert!(symplectic_residue(&g).is_zero());
        // wrong degree → 0
        let h = ConeFn::from_fiber(HomogFn::radial(2, rat_int(-1), Scalar::one()));
        assert!(symplectic_residue(&h).is_zero());
    }

    #[test]
    fn residue_quadrature_oracle_matches() {
        let f = ConeFn::from_fiber(HomogFn::radial(2, rat_int(-2), Scalar::one()));
        let q = symplectic_residue_quadrature(&f, 16).unwrap();
        assert!((q.re - 16.0 * std::f64::consts::PI.powi(3)).abs() < 1e-8, "{q}");
        // mixed mode/harmonic input
        let g = ConeFn::cos_x(2, 0, rat_int(-2))
            .add(&f.scale(&Scalar::from_rat(rat_i64(3, 7))))
            .unwrap()
            .add(&ConeFn::from_mode(
                vec![0, 0],
                HomogFn::coordinate(2, 0).times_radial_pow(&rat_int(-3)),
            ))
            .unwrap();
        let exact = symplectic_residue(&g).to_f64();
        let q = symplectic_residue_quadrature(&g, 24).unwrap();
        assert!((q.re - exact).abs() < 1e-8, "{} vs {exact}", q.re);
    }

    #[test]
    fn bracket_residue_vanishes() {
        // res({f,g}) = 0 exactly for exact pairs with deg sum -n+1
        let f = ConeFn::cos_x(2, 0, rat_int(0));
        let g = ConeFn::from_fiber(HomogFn::coordinate(2, 1).times_radial_pow(&rat_int(-2)));
        let b = f.poisson(&g).unwrap();
        assert_eq!(b.degree, rat_int(-2));
        assert!(symplectic_residue(&b).is_zero());
    }

    #[test]
    fn spanning_rank() {
        for l in [rat_int(1), rat_int(0), rat_int(-1), rat_i64(1, 2)] {
            let sigma = verify_spanning_rank(2, &l, 1000).unwrap();
            assert!(sigma > 1e-8, "l={l}: σ_min={sigma}");
        }
    }

    #[test]
    fn grid_lift_roundtrip() {
        // sample an exact cone function, lift back, compare
        let f = ConeFn::cos_x(2, 0, rat_i64(-3, 2))
            .add(&ConeFn::from_fiber(
                HomogFn::coordinate(2, 0).times_radial_pow(&rat_i64(-5, 2)),
            ))
            .unwrap();
        let g = GridFunction::sample_cone_fn(GridSpec::new(8, 16), &f);
        let lifted = g.to_cone_fn(1e-10);
        assert_eq!(lifted.degree, f.degree);
        for (x, th) in [([0.3f64, 1.1], 0.7f64), ([2.0, 0.1], 2.9)] {
            let xi = [th.cos(), th.sin()];
            let a = f.eval_c64(&x, &xi);
            let b = lifted.eval_c64(&x, &xi);
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn spectral_derivative_exact_for_trig() {
        let f = ConeFn::sin_x(2, 0, rat_int(0));
        let g = GridFunction::sample_cone_fn(GridSpec::new(8, 8), &f);
        let d = g.spectral_derivative(0);
        let expect = GridFunction::sample_cone_fn(GridSpec::new(8, 8), &f.dx(0));
        for id in 0..d.values.len() {
            assert!((d.values[id] - expect.values[id]).norm() < 1e-13);
        }
    }

    #[test]
    fn bracket_decompose_forward_case() {
        // f = {g, h} with g ∈ 𝒫¹, h ∈ 𝒫⁰ exact; reconstruct at tolerance
        let g = ConeFn::cos_x(2, 0, rat_int(1));
        let h = ConeFn::sin_x(2, 1, rat_int(0));
        let f = g.poisson(&h).unwrap();
        let dec = bracket_decompose(&f, &rat_int(1), &rat_int(0), GridSpec::new(16, 32), 1e-6).unwrap();
        assert!(dec.achieved_error <= 1e-6, "err = {}", dec.achieved_error);
    }

    #[test]
    fn bracket_decompose_degree_zero_case() {
        // l = m = 0: f = cos x₁·ξ₁|ξ|^{-2} ∈ 𝒫^{-1}
        let f = ConeFn::cos_x(2, 0, rat_int(0))
            .mul(&ConeFn::from_fiber(
                HomogFn::coordinate(2, 0).times_radial_pow(&rat_int(-2)),
            ))
            .unwrap();
        let dec = bracket_decompose(&f, &rat_int(0), &rat_int(0), GridSpec::new(16, 32), 1e-5).unwrap();
        assert!(dec.achieved_error <= 1e-5, "err = {}", dec.achieved_error);
    }

    #[test]
    fn bracket_decompose_residue_obstruction() {
        let f = ConeFn::from_fiber(HomogFn::radial(2, rat_int(-2), Scalar::one()));
        // deg f = -2 = l+m-1 with l = 0, m = -1
        let r = bracket_decompose(&f, &rat_int(0), &rat_int(-1), GridSpec::new(8, 16), 1e-5);
        assert!(matches!(r, Err(CtError::ResidueObstruction { .. })));
    }

    #[test]
    fn bracket_decompose_minus_n_case() {
        // forward-built f = {g, h}, deg f = -2 = -n (l = 0, m = -1):
        // exercised through the spectral 𝕋³ primitive
        let g = ConeFn::cos_x(2, 0, rat_int(0));
        let h = ConeFn::from_fiber(HomogFn::coordinate(2, 1).times_radial_pow(&rat_int(-2)));
        let f = g.poisson(&h).unwrap();
        assert_eq!(f.degree, rat_int(-2));
        let dec = bracket_decompose(&f, &rat_int(0), &rat_int(-1), GridSpec::new(16, 32), 1e-5).unwrap();
        assert!(dec.achieved_error <= 1e-5, "err = {}", dec.achieved_error);
    }
}
