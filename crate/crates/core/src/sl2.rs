//! Exact 2x2 matrices, the modular group action, and word decomposition.
//!
//! Group elements carry exact rational entries; elements of SL2(Z) are the
//! integral ones with determinant 1. The extended upper half-plane boundary
//! is represented by [`ExtendedPoint`]: a reduced fraction p/q or infinity,
//! encoded as a coprime pair (p, q) with q >= 0 and infinity = (1, 0).
//!
//! Conventions:
//! * T = [[1,1],[0,1]], S = [[0,-1],[1,0]]; S^2 = -I, (ST)^3 = -I.
//! * The Moebius action is (a tau + b)/(c tau + d); the automorphy factor
//!   is j(g, tau) = c tau + d.
//! * `word_decompose` writes g = +/- T^(q1) S T^(q2) S ... T^(qn), the
//!   run-length form used to evaluate representations on arbitrary elements.

use crate::error::{Error, Result};
use crate::scalar::{format_rational, rat_int, rational_to_f64};
use num::bigint::BigInt;
use num::complex::Complex64;
use num::integer::Integer;
use num::rational::{BigRational, Ratio};
use num::traits::{One, Signed, Zero};
use std::fmt;

/// Row-major 2x2 matrix with exact rational entries.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat2 {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

impl Mat2 {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(rat_int(a), rat_int(b), rat_int(c), rat_int(d))
    }

    pub fn one() -> Self {
        Mat2::from_i64(1, 0, 0, 1)
    }

    /// T^n.
    pub fn t_pow(n: i64) -> Self {
        Mat2::from_i64(1, n, 0, 1)
    }

    pub fn s() -> Self {
        Mat2::from_i64(0, -1, 1, 0)
    }

    pub fn det(&self) -> BigRational {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigRational {
        &self.a + &self.d
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    pub fn neg(&self) -> Mat2 {
        Mat2::new(-&self.a, -&self.b, -&self.c, -&self.d)
    }

    /// Inverse; requires nonzero determinant.
    pub fn inv(&self) -> Result<Mat2> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::Singular(format!("{:?} has determinant 0", self)));
        }
        Ok(Mat2::new(
            &self.d / &det,
            -&self.b / &det,
            -&self.c / &det,
            &self.a / &det,
        ))
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    pub fn is_pm_one(&self) -> bool {
        self.is_one() || self.neg().is_one()
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer() && self.c.is_integer() && self.d.is_integer()
    }

    /// Checks integrality and determinant 1.
    pub fn check_unimodular(&self) -> Result<()> {
        if !self.is_integral() {
            return Err(Error::NotIntegral(format!("{:?}", self)));
        }
        if !self.det().is_one() {
            return Err(Error::NotUnimodular(format!(
                "{:?} has determinant {}",
                self,
                format_rational(&self.det())
            )));
        }
        Ok(())
    }

    /// Entries reduced mod n, for congruence keys. Requires integrality.
    pub fn entries_mod(&self, n: u32) -> Option<[u32; 4]> {
        if !self.is_integral() {
            return None;
        }
        let m = BigInt::from(n);
        let red = |r: &BigRational| -> u32 {
            let v = r.numer().mod_floor(&m);
            // mod_floor of a positive modulus fits u32 by construction
            let (_, digits) = v.to_u32_digits();
            digits.first().copied().unwrap_or(0)
        };
        Some([red(&self.a), red(&self.b), red(&self.c), red(&self.d)])
    }

    /// Moebius action on the extended boundary; exact.
    pub fn apply_ext(&self, p: &ExtendedPoint) -> ExtendedPoint {
        let num = &self.a * &p.num_rat() + &self.b * &p.den_rat();
        let den = &self.c * &p.num_rat() + &self.d * &p.den_rat();
        ExtendedPoint::from_fraction(&num, &den)
    }

    /// Moebius action on a complex point.
    pub fn apply_complex(&self, tau: Complex64) -> Complex64 {
        let a = rational_to_f64(&self.a);
        let b = rational_to_f64(&self.b);
        let c = rational_to_f64(&self.c);
        let d = rational_to_f64(&self.d);
        (a * tau + b) / (c * tau + d)
    }

    /// j(g, tau) = c tau + d.
    pub fn automorphy_factor(&self, tau: Complex64) -> Complex64 {
        rational_to_f64(&self.c) * tau + rational_to_f64(&self.d)
    }

    /// True when |trace| = 2 and the element is not +/- I.
    pub fn is_parabolic(&self) -> bool {
        if self.is_pm_one() {
            return false;
        }
        let t = self.trace();
        t.abs() == rat_int(2)
    }

    /// Unique fixed point of a parabolic element on the extended boundary.
    pub fn parabolic_fixed_point(&self) -> Result<ExtendedPoint> {
        if !self.is_parabolic() {
            return Err(Error::NotParabolic(format!("{:?}", self)));
        }
        if self.c.is_zero() {
            return Ok(ExtendedPoint::infinity());
        }
        // (a - d) / (2c), the double root of c x^2 + (d - a) x - b.
        let num = &self.a - &self.d;
        let den = rat_int(2) * &self.c;
        Ok(ExtendedPoint::from_fraction(&num, &den))
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            format_rational(&self.a),
            format_rational(&self.b),
            format_rational(&self.c),
            format_rational(&self.d)
        )
    }
}

/// A point of P^1(Q): a reduced fraction p/q with q >= 0, or infinity (1, 0).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExtendedPoint {
    p: BigInt,
    q: BigInt,
}

impl ExtendedPoint {
    pub fn infinity() -> Self {
        ExtendedPoint {
            p: BigInt::one(),
            q: BigInt::zero(),
        }
    }

    pub fn from_integers(p: i64, q: i64) -> Self {
        ExtendedPoint::reduce(BigInt::from(p), BigInt::from(q))
    }

    pub fn from_rational(r: &BigRational) -> Self {
        ExtendedPoint::reduce(r.numer().clone(), r.denom().clone())
    }

    /// From an unreduced fraction of rationals (num/den), den possibly zero.
    pub fn from_fraction(num: &BigRational, den: &BigRational) -> Self {
        // (n1/d1) / (n2/d2) = (n1 d2) / (n2 d1)
        let p = num.numer() * den.denom();
        let q = den.numer() * num.denom();
        ExtendedPoint::reduce(p, q)
    }

    fn reduce(p: BigInt, q: BigInt) -> Self {
        if q.is_zero() {
            assert!(!p.is_zero(), "0/0 is not a point of P^1");
            return ExtendedPoint::infinity();
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / &g, q / &g);
        if q.is_negative() {
            p = -p;
            q = -q;
        }
        ExtendedPoint { p, q }
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    pub fn numerator(&self) -> &BigInt {
        &self.p
    }

    pub fn denominator(&self) -> &BigInt {
        &self.q
    }

    fn num_rat(&self) -> BigRational {
        Ratio::from_integer(self.p.clone())
    }

    fn den_rat(&self) -> BigRational {
        Ratio::from_integer(self.q.clone())
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_infinity() {
            None
        } else {
            Some(Ratio::new(self.p.clone(), self.q.clone()))
        }
    }

    /// Sort key: infinity first, then by (denominator, numerator).
    pub fn sort_key(&self) -> (BigInt, BigInt) {
        if self.is_infinity() {
            (BigInt::zero(), BigInt::zero())
        } else {
            (self.q.clone(), self.p.clone())
        }
    }

    /// An element of SL2(Z) sending infinity to this point. For p/q the
    /// first column is (p, q); for infinity the identity.
    pub fn matrix_to_here(&self) -> Mat2 {
        if self.is_infinity() {
            return Mat2::one();
        }
        // Solve p s - q r = 1.
        let e = self.p.extended_gcd(&self.q);
        debug_assert!(e.gcd.is_one() || (-&e.gcd).is_one());
        let (mut s, mut r) = (e.x, -e.y);
        if !e.gcd.is_one() {
            s = -s;
            r = -r;
        }
        Mat2::new(
            Ratio::from_integer(self.p.clone()),
            Ratio::from_integer(r),
            Ratio::from_integer(self.q.clone()),
            Ratio::from_integer(s),
        )
    }
}

impl fmt::Debug for ExtendedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            write!(f, "oo")
        } else if self.q.is_one() {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl fmt::Display for ExtendedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Alphabet of the word decomposition.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gen {
    T,
    S,
}

/// g = sign * product of factors, factors in left-to-right order, runs of T
/// carrying signed exponents and S appearing with exponent 1.
#[derive(Clone, Debug)]
pub struct Word {
    pub negate: bool,
    pub factors: Vec<(Gen, i64)>,
}

impl Word {
    /// Rebuilds the matrix; used as the exactness oracle for the decomposition.
    pub fn to_matrix(&self) -> Mat2 {
        let mut m = Mat2::one();
        for (g, e) in &self.factors {
            match g {
                Gen::T => m = m.mul(&Mat2::t_pow(*e)),
                Gen::S => {
                    debug_assert_eq!(*e, 1);
                    m = m.mul(&Mat2::s());
                }
            }
        }
        if self.negate {
            m = m.neg();
        }
        m
    }
}

/// Writes g in the form +/- T^(q1) S T^(q2) S ... by the Euclidean algorithm
/// on the first column. Exponents are chosen by rounding to the nearest
/// integer so the second entry strictly decreases in absolute value.
pub fn word_decompose(g: &Mat2) -> Result<Word> {
    g.check_unimodular()?;
    let mut m = g.clone();
    let mut factors: Vec<(Gen, i64)> = Vec::new();
    let two = BigInt::from(2);
    while !m.c.is_zero() {
        let a = m.a.numer().clone();
        let c = m.c.numer().clone();
        // Nearest-integer quotient: floor((2a + c) / (2c)).
        let q = (&a * &two + &c).div_floor(&(&c * &two));
        let qi = i64::try_from(&q).map_err(|_| {
            Error::InvalidInput(format!("word exponent {} does not fit in i64", q))
        })?;
        if qi != 0 {
            factors.push((Gen::T, qi));
        }
        factors.push((Gen::S, 1));
        // S^(-1) T^(-q) m = [[c, d], [qc - a, qd - b]]
        let t_inv = Mat2::t_pow(-qi);
        let s_inv = Mat2::s().inv().unwrap();
        m = s_inv.mul(&t_inv.mul(&m));
    }
    // m = [[u, b], [0, u]] with u = +/- 1.
    let negate = m.a.numer().is_negative();
    let b = if negate { -m.b.numer() } else { m.b.numer().clone() };
    if !b.is_zero() {
        let bi = i64::try_from(&b).map_err(|_| {
            Error::InvalidInput(format!("word exponent {} does not fit in i64", b))
        })?;
        factors.push((Gen::T, bi));
    }
    Ok(Word { negate, factors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num::traits::ToPrimitive;

    #[test]
    fn relations() {
        let s = Mat2::s();
        let t = Mat2::t_pow(1);
        assert_eq!(s.mul(&s), Mat2::one().neg());
        let st = s.mul(&t);
        assert_eq!(st.mul(&st).mul(&st), Mat2::one().neg());
    }

    #[test]
    fn extended_points_reduce() {
        assert_eq!(
            ExtendedPoint::from_integers(6, -4),
            ExtendedPoint::from_integers(-3, 2)
        );
        assert_eq!(ExtendedPoint::from_integers(5, 0), ExtendedPoint::infinity());
        let half = ExtendedPoint::from_integers(1, 2);
        assert_eq!(half.numerator().to_i64(), Some(1));
        assert_eq!(half.denominator().to_i64(), Some(2));
    }

    #[test]
    fn mobius_on_boundary() {
        let s = Mat2::s();
        let zero = ExtendedPoint::from_integers(0, 1);
        assert_eq!(s.apply_ext(&ExtendedPoint::infinity()), zero);
        assert_eq!(s.apply_ext(&zero), ExtendedPoint::infinity());
        let g = Mat2::from_i64(2, 1, 3, 2);
        let x = ExtendedPoint::from_integers(1, 2);
        // (2*(1/2)+1)/(3*(1/2)+2) = 2/(7/2) = 4/7
        assert_eq!(g.apply_ext(&x), ExtendedPoint::from_integers(4, 7));
    }

    #[test]
    fn matrix_to_cusp() {
        for (p, q) in [(0i64, 1i64), (1, 2), (-3, 5), (7, 11)] {
            let pt = ExtendedPoint::from_integers(p, q);
            let m = pt.matrix_to_here();
            m.check_unimodular().unwrap();
            assert_eq!(m.apply_ext(&ExtendedPoint::infinity()), pt);
        }
        assert!(ExtendedPoint::infinity().matrix_to_here().is_one());
    }

    #[test]
    fn parabolic_classification() {
        let t5 = Mat2::t_pow(5);
        assert!(t5.is_parabolic());
        assert_eq!(t5.parabolic_fixed_point().unwrap(), ExtendedPoint::infinity());
        // Conjugate of T by S fixes S(oo) = 0.
        let s = Mat2::s();
        let g = s.mul(&Mat2::t_pow(1)).mul(&s.inv().unwrap());
        assert!(g.is_parabolic());
        assert_eq!(
            g.parabolic_fixed_point().unwrap(),
            ExtendedPoint::from_integers(0, 1)
        );
        assert!(!Mat2::one().is_parabolic());
        assert!(!Mat2::one().neg().is_parabolic());
        assert!(!Mat2::s().is_parabolic());
    }

    #[test]
    fn word_roundtrip() {
        let cases = [
            Mat2::from_i64(2, 1, 3, 2),
            Mat2::from_i64(0, -1, 1, 0),
            Mat2::from_i64(-1, 0, 0, -1),
            Mat2::from_i64(1, 7, 0, 1),
            Mat2::from_i64(-2, -1, -5, -3),
            Mat2::from_i64(47, 13, 18, 5),
        ];
        for g in cases {
            let w = word_decompose(&g).unwrap();
            assert_eq!(w.to_matrix(), g, "word failed for {:?}", g);
        }
    }

    #[test]
    fn word_rejects_non_elements() {
        assert!(word_decompose(&Mat2::from_i64(2, 0, 0, 1)).is_err());
        let half = Mat2::new(rat(1, 2), rat_int(0), rat_int(0), rat_int(2));
        assert!(word_decompose(&half).is_err());
    }
}
