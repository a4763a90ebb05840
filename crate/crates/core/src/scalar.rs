//! Exact and floating scalar arithmetic.
//!
//! Coefficients of expansions and entries of representation matrices are
//! kept exact whenever the data permits it. The exact domain is the
//! cyclotomic rationals: a [`CycQ`] is an element of Q(zeta_N) stored as a
//! polynomial of degree < phi(N) in zeta_N = e^(2 pi i / N). Rationals are
//! the N = 1 case and Gaussian rationals the N = 4 case. The [`Scalar`]
//! wrapper unifies exact values with complex floating values; arithmetic
//! promotes to floating as soon as either operand is floating, or when a
//! cyclotomic order would exceed [`MAX_CYCLOTOMIC_ORDER`].
//!
//! Conventions:
//! * zeta_N denotes e^(2 pi i / N); `root_of_unity(p/q)` is e^(2 pi i p/q).
//! * Exact values are normalized: an element whose polynomial is constant
//!   is stored with order 1, so plain rationals stay cheap.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::integer::Integer;
use num::rational::{BigRational, Ratio};
use num::traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Mutex;
use std::sync::OnceLock;

/// Largest cyclotomic order kept exact. Orders arise as lcms of root-of-unity
/// denominators; past this bound arithmetic falls back to floating point.
pub const MAX_CYCLOTOMIC_ORDER: u32 = 240;

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    Ratio::new(big(n), big(d))
}

pub fn rat_int(n: i64) -> BigRational {
    Ratio::from_integer(big(n))
}

/// Fractional part in [0, 1).
pub fn frac_mod1(r: &BigRational) -> BigRational {
    let f = r.floor();
    r - f
}

/// Nearest rational p/q with q <= max_den, accepted when within tol of x.
/// The least such denominator wins, so snapped values are canonical.
pub fn snap_rational(x: f64, max_den: u32, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    for q in 1..=max_den {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() <= tol {
            return Some(Ratio::new(BigInt::from(p as i64), BigInt::from(q)));
        }
    }
    None
}

/// Parses "p/q" or "p". Accepts an optional leading sign on p.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Ratio::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().ok()?;
            Some(Ratio::from_integer(n))
        }
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn poly_trim(p: &mut Vec<BigRational>) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of a modulo the monic polynomial m.
fn poly_rem(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    debug_assert!(m.last().map(|c| c.is_one()).unwrap_or(false));
    let mut r: Vec<BigRational> = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r.last().unwrap().clone();
        let shift = r.len() - 1 - dm;
        for k in 0..dm {
            let t = &lead * &m[k];
            r[shift + k] -= t;
        }
        r.pop();
        poly_trim(&mut r);
    }
    r
}

/// Quotient and remainder of a by a not-necessarily-monic divisor.
fn poly_divmod(a: &[BigRational], d: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r: Vec<BigRational> = a.to_vec();
    poly_trim(&mut r);
    let mut d = d.to_vec();
    poly_trim(&mut d);
    assert!(!d.is_empty(), "division by zero polynomial");
    let dd = d.len() - 1;
    let lead = d[dd].clone();
    if r.len() <= dd {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - dd];
    while r.len() > dd {
        let c = r.last().unwrap() / &lead;
        let shift = r.len() - 1 - dd;
        q[shift] = c.clone();
        for k in 0..=dd {
            let t = &c * &d[k];
            r[shift + k] -= t;
        }
        poly_trim(&mut r);
        if r.len() <= dd {
            break;
        }
    }
    poly_trim(&mut q);
    (q, r)
}

/// Cyclotomic polynomial Phi_N as integer coefficients in rational form,
/// computed by dividing x^N - 1 by Phi_d for proper divisors d of N.
fn cyclotomic_poly(n: u32) -> Vec<BigRational> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<BigRational>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let result = if n == 1 {
        vec![rat_int(-1), rat_int(1)]
    } else {
        // x^n - 1
        let mut num = vec![BigRational::zero(); (n + 1) as usize];
        num[0] = rat_int(-1);
        num[n as usize] = rat_int(1);
        let mut p = num;
        for d in 1..n {
            if n % d == 0 {
                let phi_d = cyclotomic_poly(d);
                let (q, r) = poly_divmod(&p, &phi_d);
                debug_assert!(r.is_empty());
                p = q;
            }
        }
        p
    };
    cache.lock().unwrap().insert(n, result.clone());
    result
}

fn euler_phi(n: u32) -> u32 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// An element of the cyclotomic field Q(zeta_order), stored as a polynomial
/// in zeta_order of degree < phi(order).
#[derive(Clone, PartialEq, Eq)]
pub struct CycQ {
    order: u32,
    /// Coefficients c[k] of zeta^k; length <= phi(order), trailing zeros trimmed.
    coeffs: Vec<BigRational>,
}

impl CycQ {
    pub fn zero() -> Self {
        CycQ {
            order: 1,
            coeffs: Vec::new(),
        }
    }

    pub fn one() -> Self {
        CycQ::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        if r.is_zero() {
            return CycQ::zero();
        }
        CycQ {
            order: 1,
            coeffs: vec![r],
        }
    }

    pub fn from_int(n: i64) -> Self {
        CycQ::from_rational(rat_int(n))
    }

    /// i = zeta_4.
    pub fn gaussian(re: BigRational, im: BigRational) -> Self {
        let mut v = CycQ::from_rational(re);
        if !im.is_zero() {
            let i = CycQ::root_of_unity(&rat(1, 4)).unwrap();
            v = v.add(&i.scale(&im));
        }
        v
    }

    /// e^(2 pi i r) for rational r. None if the reduced denominator exceeds
    /// [`MAX_CYCLOTOMIC_ORDER`].
    pub fn root_of_unity(r: &BigRational) -> Option<Self> {
        let r = frac_mod1(r);
        let q = r.denom().to_u32()?;
        if q > MAX_CYCLOTOMIC_ORDER {
            return None;
        }
        let p = (r.numer() % BigInt::from(q)).to_u32()?;
        let phi = euler_phi(q) as usize;
        let mut coeffs = vec![BigRational::zero(); (p as usize) + 1];
        coeffs[p as usize] = BigRational::one();
        let modulus = cyclotomic_poly(q);
        let mut coeffs = poly_rem(&coeffs, &modulus);
        poly_trim(&mut coeffs);
        debug_assert!(coeffs.len() <= phi);
        let mut v = CycQ { order: q, coeffs };
        v.normalize();
        Some(v)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn from_parts(order: u32, coeffs: Vec<BigRational>) -> Option<Self> {
        if order == 0 || order > MAX_CYCLOTOMIC_ORDER {
            return None;
        }
        if coeffs.len() > euler_phi(order) as usize {
            return None;
        }
        let mut v = CycQ { order, coeffs };
        poly_trim(&mut v.coeffs);
        v.normalize();
        Some(v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The value as a rational if the stored polynomial is constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    fn normalize(&mut self) {
        poly_trim(&mut self.coeffs);
        if self.coeffs.len() <= 1 && self.order != 1 {
            self.order = 1;
        }
    }

    /// Re-express in Q(zeta_m) for order | m.
    fn embed(&self, m: u32) -> CycQ {
        if self.order == m {
            return self.clone();
        }
        debug_assert!(m % self.order == 0);
        let step = (m / self.order) as usize;
        if self.coeffs.is_empty() {
            return CycQ {
                order: m,
                coeffs: Vec::new(),
            };
        }
        let mut raw = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            raw[k * step] = c.clone();
        }
        let coeffs = poly_rem(&raw, &cyclotomic_poly(m));
        CycQ { order: m, coeffs }
    }

    fn common_order(&self, other: &CycQ) -> Option<u32> {
        let m = self.order.lcm(&other.order);
        if m > MAX_CYCLOTOMIC_ORDER {
            None
        } else {
            Some(m)
        }
    }

    pub fn add(&self, other: &CycQ) -> CycQ {
        self.try_add(other).expect("cyclotomic order overflow in add")
    }

    pub fn try_add(&self, other: &CycQ) -> Option<CycQ> {
        let m = self.common_order(other)?;
        let a = self.embed(m);
        let b = other.embed(m);
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut coeffs = vec![BigRational::zero(); n];
        for (k, c) in a.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        for (k, c) in b.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        let mut v = CycQ { order: m, coeffs };
        v.normalize();
        Some(v)
    }

    pub fn neg(&self) -> CycQ {
        CycQ {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, other: &CycQ) -> CycQ {
        self.add(&other.neg())
    }

    pub fn try_mul(&self, other: &CycQ) -> Option<CycQ> {
        if self.is_zero() || other.is_zero() {
            return Some(CycQ::zero());
        }
        let m = self.common_order(other)?;
        let a = self.embed(m);
        let b = other.embed(m);
        let prod = poly_mul(&a.coeffs, &b.coeffs);
        let coeffs = poly_rem(&prod, &cyclotomic_poly(m));
        let mut v = CycQ { order: m, coeffs };
        v.normalize();
        Some(v)
    }

    pub fn mul(&self, other: &CycQ) -> CycQ {
        self.try_mul(other).expect("cyclotomic order overflow in mul")
    }

    pub fn scale(&self, r: &BigRational) -> CycQ {
        if r.is_zero() {
            return CycQ::zero();
        }
        let mut v = CycQ {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        };
        v.normalize();
        v
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in
    /// Q[x] / (Phi_order). None for zero.
    pub fn inv(&self) -> Option<CycQ> {
        if self.is_zero() {
            return None;
        }
        if let Some(r) = self.as_rational() {
            return Some(CycQ::from_rational(r.recip()));
        }
        let modulus = cyclotomic_poly(self.order);
        // Extended Euclid: find u with u * self = 1 mod Phi.
        let mut r0 = modulus.clone();
        let mut r1 = self.coeffs.clone();
        let mut s0: Vec<BigRational> = Vec::new();
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divmod(&r0, &r1);
            let qs = poly_mul(&q, &s1);
            let mut s = s0.clone();
            if s.len() < qs.len() {
                s.resize(qs.len(), BigRational::zero());
            }
            for (k, c) in qs.iter().enumerate() {
                s[k] -= c;
            }
            poly_trim(&mut s);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 = gcd, a nonzero constant since Phi is irreducible.
        if r0.len() != 1 {
            return None;
        }
        let g = r0[0].clone();
        let coeffs: Vec<BigRational> = s0.iter().map(|c| c / &g).collect();
        let coeffs = poly_rem(&coeffs, &modulus);
        let mut v = CycQ {
            order: self.order,
            coeffs,
        };
        v.normalize();
        Some(v)
    }

    /// Complex conjugate: the automorphism zeta -> zeta^(order-1).
    pub fn conj(&self) -> CycQ {
        if self.order == 1 {
            return self.clone();
        }
        let m = self.order;
        let modulus = cyclotomic_poly(m);
        let mut acc = CycQ::zero();
        // Horner on zeta^(m-1) would lose exactness of structure; substitute directly.
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (k as u64 * (m as u64 - 1) % m as u64) as usize;
            let mut mono = vec![BigRational::zero(); e + 1];
            mono[e] = c.clone();
            let mono = poly_rem(&mono, &modulus);
            acc = acc.add(&CycQ { order: m, coeffs: mono });
        }
        acc.normalize();
        acc
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        let base = 2.0 * PI / self.order as f64;
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let ang = base * k as f64;
                z += Complex64::new(ang.cos(), ang.sin()) * rational_to_f64(c);
            }
        }
        z
    }

    pub fn pow(&self, e: u32) -> CycQ {
        let mut acc = CycQ::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Debug for CycQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", format_rational(&r));
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                if k == 0 {
                    format_rational(c)
                } else {
                    format!("{}*z{}^{}", format_rational(c), self.order, k)
                }
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// A scalar that is either exact (cyclotomic rational) or complex floating.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(CycQ),
    Float(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(CycQ::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(CycQ::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(CycQ::from_int(n))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Exact(CycQ::from_rational(r))
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Scalar::Float(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Self {
        Scalar::Float(z)
    }

    /// e^(2 pi i r): exact when the denominator is within the cyclotomic
    /// order bound, floating otherwise.
    pub fn root_of_unity(r: &BigRational) -> Self {
        match CycQ::root_of_unity(r) {
            Some(c) => Scalar::Exact(c),
            None => {
                let x = 2.0 * PI * rational_to_f64(&frac_mod1(r));
                Scalar::Float(Complex64::new(x.cos(), x.sin()))
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(c) => c.is_zero(),
            Scalar::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(c) => c.to_complex(),
            Scalar::Float(z) => *z,
        }
    }

    pub fn norm(&self) -> f64 {
        self.to_complex().norm()
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => match a.try_add(b) {
                Some(c) => Scalar::Exact(c),
                None => Scalar::Float(a.to_complex() + b.to_complex()),
            },
            _ => Scalar::Float(self.to_complex() + other.to_complex()),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.neg()),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => match a.try_mul(b) {
                Some(c) => Scalar::Exact(c),
                None => Scalar::Float(a.to_complex() * b.to_complex()),
            },
            _ => Scalar::Float(self.to_complex() * other.to_complex()),
        }
    }

    pub fn scale_rational(&self, r: &BigRational) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.scale(r)),
            Scalar::Float(z) => Scalar::Float(z * rational_to_f64(r)),
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Exact(a) => a.inv().map(Scalar::Exact),
            Scalar::Float(z) => {
                if z.norm() == 0.0 {
                    None
                } else {
                    Some(Scalar::Float(z.inv()))
                }
            }
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.conj()),
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }

    /// Exact equality where both are exact; otherwise distance below tol.
    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => match a.try_add(&b.neg()) {
                Some(d) => d.is_zero(),
                None => (a.to_complex() - b.to_complex()).norm() <= tol,
            },
            _ => (self.to_complex() - other.to_complex()).norm() <= tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polys() {
        // Phi_1 = x - 1, Phi_4 = x^2 + 1, Phi_12 = x^4 - x^2 + 1, Phi_24 = x^8 - x^4 + 1
        assert_eq!(cyclotomic_poly(4), vec![rat_int(1), rat_int(0), rat_int(1)]);
        assert_eq!(
            cyclotomic_poly(12),
            vec![rat_int(1), rat_int(0), rat_int(-1), rat_int(0), rat_int(1)]
        );
        let p24 = cyclotomic_poly(24);
        assert_eq!(p24.len(), 9);
        assert_eq!(p24[0], rat_int(1));
        assert_eq!(p24[4], rat_int(-1));
        assert_eq!(p24[8], rat_int(1));
    }

    #[test]
    fn roots_of_unity_multiply() {
        let a = CycQ::root_of_unity(&rat(1, 3)).unwrap();
        let b = CycQ::root_of_unity(&rat(1, 4)).unwrap();
        let c = a.mul(&b);
        let expect = CycQ::root_of_unity(&rat(7, 12)).unwrap();
        assert_eq!(c, expect);
        // (zeta_12)^12 = 1
        let z = CycQ::root_of_unity(&rat(1, 12)).unwrap();
        assert_eq!(z.pow(12), CycQ::one());
    }

    #[test]
    fn inverse_and_conjugate() {
        let z = CycQ::root_of_unity(&rat(5, 24)).unwrap();
        let zi = z.inv().unwrap();
        assert_eq!(z.mul(&zi), CycQ::one());
        assert_eq!(z.conj(), CycQ::root_of_unity(&rat(19, 24)).unwrap());
        let g = CycQ::gaussian(rat(3, 2), rat(-1, 5));
        let gi = g.inv().unwrap();
        assert_eq!(g.mul(&gi), CycQ::one());
        let d = (g.to_complex() - Complex64::new(1.5, -0.2)).norm();
        assert!(d < 1e-15);
    }

    #[test]
    fn promotion_to_float() {
        let a = Scalar::root_of_unity(&rat(1, 7));
        assert!(a.is_exact());
        let b = Scalar::root_of_unity(&rat(1, 241));
        assert!(!b.is_exact());
        let c = a.mul(&b);
        assert!(!c.is_exact());
        let expect = 2.0 * PI * (1.0 / 7.0 + 1.0 / 241.0);
        assert!((c.to_complex() - Complex64::new(expect.cos(), expect.sin())).norm() < 1e-14);
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(format_rational(&rat(3, 4)), "3/4");
        assert_eq!(format_rational(&rat_int(-7)), "-7");
        assert_eq!(parse_rational("-5/8"), Some(rat(-5, 8)));
        assert_eq!(parse_rational("12"), Some(rat_int(12)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
