//! Exact coefficient arithmetic.
//!
//! All exact quantities in this crate live in the ring Q(i)[√π, 1/√π]:
//! finite sums Σ_p c_p (√π)^p with Gaussian-rational c_p and integer p
//! (possibly negative). This covers Gaussian-rational symbol coefficients,
//! sphere areas 2π^{n/2}/Γ(n/2), Gaussian moments, and half-integer Gamma
//! values, so residues and Schwartz-decomposition leading terms stay exact.
//!
//! π is transcendental, hence the representation is canonical and equality
//! is decidable. Decimal rendering uses a 110-digit rational approximation
//! of π, so any requested precision up to ~100 significant digits is exact
//! to the contract.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Rat = BigRational;
pub type CRat = Complex<BigRational>;
pub type C64 = Complex<f64>;

/// π with 110 correct digits after the decimal point.
const PI_DIGITS: &str = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899862803482534211706798214808651";

/// Euler–Mascheroni constant, 50 digits. Used by regularized lattice sums.
pub const EULER_GAMMA: f64 = 0.5772156649015328606065120900824024310421593359399;

pub fn rat_i64(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from(BigInt::from(p))
}

/// Exact conversion: every finite f64 is a dyadic rational.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fallback for extreme numerator/denominator sizes.
        let s = x.to_string();
        s.parse::<f64>().unwrap_or(f64::NAN)
    })
}

/// π as an exact rational approximation (absolute error < 10^-108).
pub fn pi_rat() -> Rat {
    let digits: String = PI_DIGITS.chars().filter(|c| *c != '.').collect();
    let num: BigInt = digits.parse().unwrap();
    let den = BigInt::from(10u32).pow((digits.len() - 1) as u32);
    Rat::new(num, den)
}

/// √π by Newton iteration on rationals, good to ~50 digits.
pub fn sqrt_pi_rat() -> Rat {
    let pi = pi_rat();
    let mut x = rat_from_f64(std::f64::consts::PI.sqrt());
    for _ in 0..6 {
        x = (&x + &pi / &x) / rat_int(2);
        // Truncate to keep denominators bounded; 2^400 ≈ 120 digits.
        x = truncate_rat(&x, 400);
    }
    x
}

fn truncate_rat(x: &Rat, bits: u32) -> Rat {
    let scale = BigInt::from(1u32) << bits;
    let scaled = (x * Rat::from(scale.clone())).round();
    scaled / Rat::from(scale)
}

/// Parse "p/q" or "p" (optionally signed) into a rational.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| format!("bad rational: {s}"))?;
        let den: BigInt = q.trim().parse().map_err(|_| format!("bad rational: {s}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator: {s}"));
        }
        Ok(Rat::new(num, den))
    } else {
        let num: BigInt = s.parse().map_err(|_| format!("bad rational: {s}"))?;
        Ok(Rat::from(num))
    }
}

pub fn rat_to_string(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Element of Q(i)[√π, 1/√π]: map from power of √π to Gaussian-rational.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Scalar {
    terms: BTreeMap<i32, CRat>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_rat(Rat::one())
    }

    pub fn i() -> Self {
        Scalar::from_crat(CRat::new(Rat::zero(), Rat::one()))
    }

    pub fn from_rat(r: Rat) -> Self {
        Scalar::from_crat(CRat::new(r, Rat::zero()))
    }

    pub fn from_int(p: i64) -> Self {
        Scalar::from_rat(rat_int(p))
    }

    pub fn from_crat(c: CRat) -> Self {
        let mut s = Scalar::zero();
        if !c.is_zero() {
            s.terms.insert(0, c);
        }
        s
    }

    /// Exact lift of a complex double (every finite f64 is dyadic rational).
    pub fn from_c64_dyadic(c: C64) -> Self {
        Scalar::from_crat(CRat::new(rat_from_f64(c.re), rat_from_f64(c.im)))
    }

    /// c · (√π)^half_pow
    pub fn pi_sqrt_pow(c: CRat, half_pow: i32) -> Self {
        let mut s = Scalar::zero();
        if !c.is_zero() {
            s.terms.insert(half_pow, c);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&p| p == 0)
    }

    /// The Gaussian-rational part at √π-power 0 (coefficient of π^0).
    pub fn rational_part(&self) -> CRat {
        self.terms.get(&0).cloned().unwrap_or_else(|| CRat::new(Rat::zero(), Rat::zero()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i32, &CRat)> {
        self.terms.iter()
    }

    fn insert(&mut self, p: i32, c: CRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(p) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().clone() + c;
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

    pub fn add(&self, other: &Scalar) -> Scalar {
        let mut r = self.clone();
        for (p, c) in &other.terms {
            r.insert(*p, c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(p, c)| (*p, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let mut r = Scalar::zero();
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                r.insert(p1 + p2, c1 * c2);
            }
        }
        r
    }

    pub fn mul_rat(&self, r: &Rat) -> Scalar {
        if r.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (*p, CRat::new(c.re.clone() * r, c.im.clone() * r)))
                .collect(),
        }
    }

    pub fn mul_crat(&self, m: &CRat) -> Scalar {
        if m.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(p, c)| (*p, c * m)).collect(),
        }
    }

    pub fn div_rat(&self, r: &Rat) -> Scalar {
        assert!(!r.is_zero(), "division by zero rational");
        self.mul_rat(&(Rat::one() / r))
    }

    /// Divide by a single-term scalar c·(√π)^p. Panics on multi-term divisor.
    pub fn div_monomial(&self, other: &Scalar) -> Scalar {
        assert_eq!(other.terms.len(), 1, "divisor must be a monomial in √π");
        let (p, c) = other.terms.iter().next().unwrap();
        let inv = CRat::new(Rat::one(), Rat::zero()) / c.clone();
        Scalar {
            terms: self.terms.iter().map(|(q, d)| (q - p, d * &inv)).collect(),
        }
    }

    pub fn conj(&self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect(),
        }
    }

    pub fn to_c64(&self) -> C64 {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut acc = C64::new(0.0, 0.0);
        for (p, c) in &self.terms {
            let w = sqrt_pi.powi(*p);
            acc += C64::new(rat_to_f64(&c.re) * w, rat_to_f64(&c.im) * w);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.to_c64().re
    }

    /// High-precision rational approximations of (re, im).
    pub fn approx_crat(&self) -> (Rat, Rat) {
        let sp = sqrt_pi_rat();
        let mut re = Rat::zero();
        let mut im = Rat::zero();
        for (p, c) in &self.terms {
            let w = rat_pow(&sp, *p);
            re += c.re.clone() * &w;
            im += c.im.clone() * &w;
        }
        (re, im)
    }

    /// Render to `digits` significant decimal digits. Pure-real values render
    /// as a plain decimal, complex ones as "re + im i".
    pub fn render(&self, digits: usize) -> String {
        let (re, im) = self.approx_crat();
        if im.is_zero() {
            decimal_string(&re, digits)
        } else {
            format!("{} + {} i", decimal_string(&re, digits), decimal_string(&im, digits))
        }
    }
}

pub fn rat_pow(x: &Rat, p: i32) -> Rat {
    if p == 0 {
        return Rat::one();
    }
    let mut acc = Rat::one();
    let base = if p > 0 { x.clone() } else { Rat::one() / x };
    for _ in 0..p.abs() {
        acc *= &base;
    }
    acc
}

/// Decimal expansion of a rational with `sig` significant digits.
pub fn decimal_string(x: &Rat, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    // Find exponent e with 10^e <= ax < 10^(e+1).
    let mut e: i64 = 0;
    let ten = rat_int(10);
    let mut t = ax.clone();
    while t >= ten {
        t /= &ten;
        e += 1;
    }
    while t < Rat::one() {
        t *= &ten;
        e -= 1;
    }
    // digits of ax * 10^(sig-1-e), rounded
    let shift = sig as i64 - 1 - e;
    let scaled = if shift >= 0 {
        ax * rat_pow(&ten, shift as i32)
    } else {
        ax / rat_pow(&ten, (-shift) as i32)
    };
    let int = scaled.round().to_integer();
    let mut ds = int.to_string();
    // rounding may have produced one extra digit
    let mut e = e;
    if ds.len() > sig {
        ds.truncate(sig);
        e += 1;
    }
    let mantissa = if ds.len() > 1 {
        format!("{}.{}", &ds[..1], &ds[1..])
    } else {
        ds.clone()
    };
    let body = if (-4..6).contains(&e) {
        // plain notation for moderate exponents
        plain_decimal(&ds, e)
    } else {
        format!("{mantissa}e{e}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn plain_decimal(digits: &str, e: i64) -> String {
    if e >= 0 {
        let e = e as usize;
        if e + 1 >= digits.len() {
            format!("{}{}", digits, "0".repeat(e + 1 - digits.len()))
        } else {
            format!("{}.{}", &digits[..e + 1], &digits[e + 1..])
        }
    } else {
        format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(p, c)| {
                let cs = if c.im.is_zero() {
                    rat_to_string(&c.re)
                } else if c.re.is_zero() {
                    format!("{}i", rat_to_string(&c.im))
                } else {
                    format!("({}+{}i)", rat_to_string(&c.re), rat_to_string(&c.im))
                };
                match p {
                    0 => cs,
                    2 => format!("{cs}·π"),
                    -2 => format!("{cs}·π^-1"),
                    p if p % 2 == 0 => format!("{cs}·π^{}", p / 2),
                    p => format!("{cs}·π^({p}/2)"),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Γ(j/2) for j ≥ 1 as an exact scalar.
/// Γ(m) = (m-1)!; Γ(m + 1/2) = (2m)!/(4^m m!) √π.
pub fn gamma_half(j: u32) -> Scalar {
    assert!(j >= 1);
    if j % 2 == 0 {
        let m = j / 2;
        Scalar::from_rat(Rat::from(factorial(m - 1)))
    } else {
        let m = (j - 1) / 2;
        let num = factorial(2 * m);
        let den = BigInt::from(4u32).pow(m) * factorial(m);
        Scalar::pi_sqrt_pow(CRat::new(Rat::new(num, den), Rat::zero()), 1)
    }
}

pub fn factorial(m: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=m {
        acc *= BigInt::from(k);
    }
    acc
}

/// Surface area of S^{n-1}: 2 π^{n/2} / Γ(n/2). Always a rational times an
/// integer power of π.
pub fn area_sphere(n: usize) -> Scalar {
    // 2 π^{n/2} = 2·(√π)^n
    let num = Scalar::pi_sqrt_pow(CRat::new(rat_int(2), Rat::zero()), n as i32);
    num.div_monomial(&gamma_half(n as u32))
}

/// ∫_R x^p e^{-x²} dx: zero for odd p, Γ((p+1)/2) for even p.
pub fn gaussian_moment(p: u32) -> Scalar {
    if p % 2 == 1 {
        Scalar::zero()
    } else {
        gamma_half(p + 1)
    }
}

/// ∫_{S^{n-1}} θ^β dθ = 2 Π_i Γ((β_i+1)/2) / Γ((n+|β|)/2) when all β_i are
/// even, zero otherwise.
pub fn sphere_monomial_moment(beta: &[u32]) -> Scalar {
    if beta.iter().any(|b| b % 2 == 1) {
        return Scalar::zero();
    }
    let n = beta.len() as u32;
    let total: u32 = beta.iter().sum();
    let mut num = Scalar::from_int(2);
    for b in beta {
        num = num.mul(&gamma_half(b + 1));
    }
    num.div_monomial(&gamma_half(n + total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits_consistent() {
        let pi = pi_rat();
        assert!((rat_to_f64(&pi) - std::f64::consts::PI).abs() < 1e-15);
        let sp = sqrt_pi_rat();
        let err = (&sp * &sp - pi).abs();
        assert!(err < rat_pow(&rat_int(10), -40).abs());
    }

    #[test]
    fn scalar_ring_ops() {
        let a = Scalar::pi_sqrt_pow(CRat::new(rat_i64(1, 2), Rat::zero()), 2); // π/2
        let b = Scalar::pi_sqrt_pow(CRat::new(rat_int(3), Rat::zero()), -1); // 3/√π
        let p = a.mul(&b); // (3/2)·√π
        let expect = Scalar::pi_sqrt_pow(CRat::new(rat_i64(3, 2), Rat::zero()), 1);
        assert_eq!(p, expect);
        assert!(a.sub(&a).is_zero());
        assert!((p.to_f64() - 1.5 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn areas() {
        // Area(S^1) = 2π, Area(S^2) = 4π, Area(S^3) = 2π².
        assert!((area_sphere(2).to_f64() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((area_sphere(3).to_f64() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((area_sphere(4).to_f64() - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn sphere_moments() {
        // ∫_{S¹} θ₁² dθ = π
        let m = sphere_monomial_moment(&[2, 0]);
        assert!((m.to_f64() - std::f64::consts::PI).abs() < 1e-12);
        // odd moment vanishes
        assert!(sphere_monomial_moment(&[1, 2]).is_zero());
        // ∫_{S²} 1 = 4π
        assert!((sphere_monomial_moment(&[0, 0, 0]).to_f64() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn rendering() {
        let x = parse_rat("1/3").unwrap();
        assert_eq!(decimal_string(&x, 10), "0.3333333333");
        let two_pi = area_sphere(2);
        let s = two_pi.render(32);
        assert!(s.starts_with("6.2831853071795864769252867665590"));
    }

    #[test]
    fn parse_roundtrip() {
        let r = parse_rat("-7/4").unwrap();
        assert_eq!(rat_to_string(&r), "-7/4");
        assert_eq!(rat_to_string(&parse_rat("5").unwrap()), "5");
    }
}
