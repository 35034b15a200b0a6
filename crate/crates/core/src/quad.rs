//! Adaptive 1-D quadrature (Gauss–Kronrod 7/15) for smooth integrands.
//!
//! Deterministic: fixed node tables, fixed splitting order, so repeated runs
//! are bit-identical.

use crate::scalar::C64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = C64::new(0.0, 0.0);
    let mut gauss = C64::new(0.0, 0.0);
    for i in 0..8 {
        let x = XGK[i];
        if i == 7 {
            let v = f(c);
            kron += v * WGK[7];
            gauss += v * WG[3];
        } else {
            let v1 = f(c - h * x);
            let v2 = f(c + h * x);
            kron += (v1 + v2) * WGK[i];
            if i % 2 == 1 {
                gauss += (v1 + v2) * WG[i / 2];
            }
        }
    }
    kron *= h;
    gauss *= h;
    let err = (kron - gauss).norm();
    (kron, err)
}

/// Adaptive integration of `f` over [a, b]. Returns (value, error estimate).
/// Splits until |err| ≤ max(abs_tol, rel_tol·|value|) or the depth cap.
pub fn integrate<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> (C64, f64) {
    fn go<F: Fn(f64) -> C64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        depth: usize,
        acc: &mut C64,
        err_acc: &mut f64,
    ) {
        let (v, e) = gk15(f, a, b);
        if e <= tol || depth >= 40 || (b - a) < 1e-300 {
            *acc += v;
            *err_acc += e;
            return;
        }
        let m = 0.5 * (a + b);
        go(f, a, m, tol * 0.5, depth + 1, acc, err_acc);
        go(f, m, b, tol * 0.5, depth + 1, acc, err_acc);
    }
    // first pass to scale the tolerance
    let (rough, _) = gk15(f, a, b);
    let tol = abs_tol.max(rel_tol * rough.norm());
    let mut acc = C64::new(0.0, 0.0);
    let mut err = 0.0;
    go(f, a, b, tol, 0, &mut acc, &mut err);
    (acc, err)
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> (f64, f64) {
    let (v, e) = integrate(&|x| C64::new(f(x), 0.0), a, b, rel_tol, abs_tol);
    (v.re, e)
}

/// ∫_{-∞}^{∞} f for integrands with at-least-exponential decay, via the
/// substitution x = scale·sinh(w) over a finite w-window.
pub fn integrate_line<F: Fn(f64) -> C64>(f: &F, scale: f64, rel_tol: f64, abs_tol: f64) -> (C64, f64) {
    integrate_line_w(f, scale, 40.0, rel_tol, abs_tol)
}

/// Line integral with an explicit sinh-window. For |f| ~ |x|^b (b < -1) the
/// transformed integrand decays like e^{(b+1)|w|}; pick w_max ≳ 36/|b+1|.
pub fn integrate_line_w<F: Fn(f64) -> C64>(
    f: &F,
    scale: f64,
    w_max: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> (C64, f64) {
    let g = |w: f64| {
        let x = scale * w.sinh();
        f(x) * (scale * w.cosh())
    };
    integrate(&g, -w_max, w_max, rel_tol, abs_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let (v, _) = integrate_real(&|x| x * x * x + 2.0 * x, 0.0, 1.0, 1e-14, 1e-16);
        assert!((v - 1.25).abs() < 1e-14);
    }

    #[test]
    fn gaussian_line() {
        let (v, _) = integrate_line(&|x| C64::new((-x * x).exp(), 0.0), 1.0, 1e-13, 1e-15);
        assert!((v.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oscillatory() {
        let (v, _) = integrate_real(&|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-13, 1e-15);
        let exact = (1.0 - (10.0 * std::f64::consts::PI).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-12);
    }
}
