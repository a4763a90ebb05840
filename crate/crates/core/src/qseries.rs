//! Truncated logarithmic q-expansions with exact coefficients.
//!
//! A series here is a finite sum of terms
//!
//!   c * q_p^(n + mu) * l^(j'),   q_p = e^(2 pi i tau / p),   l = tau / p,
//!
//! with rational exponent offset mu in [0, 1), integer n, log power j', and
//! a coefficient vector c of a fixed dimension. Terms are stored by channel
//! (mu, j') and integer index n. Every series carries an inclusive bound
//! `valid_to`: coefficients of q_p-exponent at most `valid_to` are complete,
//! anything beyond is dropped. Arithmetic propagates the tightest consistent
//! bound, so truncation errors can never masquerade as zeros.
//!
//! The log variable is normalized to tau / p rather than tau so that the
//! phases and mixing factors produced by rescaling and argument shifts stay
//! rational, keeping exact coefficients exact.

use crate::error::{Error, Result};
use crate::cmat::SMat;
use crate::scalar::{frac_mod1, rat, rat_int, rational_to_f64, Scalar};
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Channel key: exponent offset in [0, 1) and log power.
pub type Channel = (BigRational, u32);

/// A vector-valued logarithmic q-expansion at a fixed period.
#[derive(Clone, Debug)]
pub struct LogQSeries {
    period: BigRational,
    dim: usize,
    channels: BTreeMap<Channel, BTreeMap<i64, Vec<Scalar>>>,
    valid_to: BigRational,
}

impl LogQSeries {
    pub fn zero(period: BigRational, dim: usize, valid_to: BigRational) -> LogQSeries {
        assert!(period > BigRational::zero(), "period must be positive");
        assert!(dim > 0);
        LogQSeries {
            period,
            dim,
            channels: BTreeMap::new(),
            valid_to,
        }
    }

    /// The constant series 1 (dimension 1).
    pub fn one(period: BigRational, valid_to: BigRational) -> LogQSeries {
        let mut s = LogQSeries::zero(period, 1, valid_to);
        s.add_term(&rat_int(0), 0, vec![Scalar::one()]);
        s
    }

    pub fn period(&self) -> &BigRational {
        &self.period
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valid_to(&self) -> &BigRational {
        &self.valid_to
    }

    pub fn is_zero(&self) -> bool {
        self.channels.is_empty()
    }

    /// True when every stored coefficient is exact.
    pub fn is_exact(&self) -> bool {
        self.channels
            .values()
            .flat_map(|m| m.values())
            .all(|v| v.iter().all(Scalar::is_exact))
    }

    /// Adds c * q_p^x * l^(j') to the series. The exponent is split as
    /// x = n + mu with mu in [0, 1). Terms beyond `valid_to` are ignored.
    pub fn add_term(&mut self, x: &BigRational, jp: u32, coeff: Vec<Scalar>) {
        assert_eq!(coeff.len(), self.dim, "coefficient dimension mismatch");
        if x > &self.valid_to {
            return;
        }
        let mu = frac_mod1(x);
        let n = (x - &mu).to_integer().to_i64().expect("exponent overflow");
        let slot = self
            .channels
            .entry((mu, jp))
            .or_default()
            .entry(n)
            .or_insert_with(|| vec![Scalar::zero(); self.dim]);
        let mut all_zero = true;
        for (s, c) in slot.iter_mut().zip(coeff) {
            *s = s.add(&c);
            all_zero &= s.is_zero();
        }
        if all_zero {
            self.remove_zero_at(&frac_mod1(x), jp, n);
        }
    }

    fn remove_zero_at(&mut self, mu: &BigRational, jp: u32, n: i64) {
        let key = (mu.clone(), jp);
        let empty = match self.channels.get_mut(&key) {
            Some(m) => {
                if m.get(&n).map(|v| v.iter().all(Scalar::is_zero)) == Some(true) {
                    m.remove(&n);
                }
                m.is_empty()
            }
            None => false,
        };
        if empty {
            self.channels.remove(&key);
        }
    }

    /// Coefficient vector of q_p^(n + mu) l^(j'), if stored.
    pub fn coeff(&self, mu: &BigRational, jp: u32, n: i64) -> Option<&[Scalar]> {
        self.channels
            .get(&(frac_mod1(mu), jp))
            .and_then(|m| m.get(&n))
            .map(Vec::as_slice)
    }

    /// Coefficient vector of q_p^x l^(j'), zero-filled when absent; errors
    /// past the validity bound.
    pub fn coeff_at(&self, x: &BigRational, jp: u32) -> Result<Vec<Scalar>> {
        if x > &self.valid_to {
            return Err(Error::TruncationUnderflow(format!(
                "coefficient at exponent {} requested beyond validity bound {}",
                x, self.valid_to
            )));
        }
        let mu = frac_mod1(x);
        let n = (x - &mu)
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::InvalidInput("exponent out of i64 range".into()))?;
        Ok(match self.coeff(&mu, jp, n) {
            Some(v) => v.to_vec(),
            None => vec![Scalar::zero(); self.dim],
        })
    }

    /// Iterates (mu, j', n, coefficients) over all stored terms.
    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, u32, i64, &[Scalar])> {
        self.channels.iter().flat_map(|((mu, jp), m)| {
            m.iter().map(move |(n, c)| (mu, *jp, *n, c.as_slice()))
        })
    }

    pub fn channel_keys(&self) -> Vec<Channel> {
        self.channels.keys().cloned().collect()
    }

    /// Largest log power present.
    pub fn log_order(&self) -> u32 {
        self.channels.keys().map(|(_, jp)| *jp).max().unwrap_or(0)
    }

    /// Least q_p-exponent with a nonzero coefficient.
    pub fn min_exponent(&self) -> Option<BigRational> {
        self.channels
            .iter()
            .flat_map(|((mu, _), m)| m.keys().map(move |n| rat_int(*n) + mu))
            .min()
    }

    fn prune(&mut self) {
        let bound = self.valid_to.clone();
        let mut dead = Vec::new();
        for (key, m) in self.channels.iter_mut() {
            m.retain(|n, c| {
                rat_int(*n) + &key.0 <= bound && !c.iter().all(Scalar::is_zero)
            });
            if m.is_empty() {
                dead.push(key.clone());
            }
        }
        for key in dead {
            self.channels.remove(&key);
        }
    }

    /// Lowers the validity bound, discarding terms beyond it.
    pub fn truncate(&mut self, valid_to: BigRational) {
        if valid_to < self.valid_to {
            self.valid_to = valid_to;
            self.prune();
        }
    }

    pub fn scale(&self, c: &Scalar) -> LogQSeries {
        let mut out = self.clone();
        for m in out.channels.values_mut() {
            for v in m.values_mut() {
                for s in v.iter_mut() {
                    *s = s.mul(c);
                }
            }
        }
        out.prune();
        out
    }

    pub fn neg(&self) -> LogQSeries {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn add(&self, other: &LogQSeries) -> Result<LogQSeries> {
        if self.period != other.period || self.dim != other.dim {
            return Err(Error::DimensionMismatch(
                "sum requires matching period and dimension".into(),
            ));
        }
        let mut out = self.clone();
        out.valid_to = self.valid_to.clone().min(other.valid_to.clone());
        out.prune();
        for (mu, jp, n, c) in other.terms() {
            out.add_term(&(rat_int(n) + mu), jp, c.to_vec());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LogQSeries) -> Result<LogQSeries> {
        self.add(&other.neg())
    }

    /// Product. One factor must have dimension 1; it multiplies the other
    /// componentwise. Exponents add, log powers add, and the validity bound
    /// is the tightest consistent with both truncations.
    pub fn mul(&self, other: &LogQSeries) -> Result<LogQSeries> {
        if self.period != other.period {
            return Err(Error::DimensionMismatch("product requires matching periods".into()));
        }
        let (scalar, vector) = if self.dim == 1 {
            (self, other)
        } else if other.dim == 1 {
            (other, self)
        } else {
            return Err(Error::DimensionMismatch(
                "one product factor must have dimension 1".into(),
            ));
        };
        let xmin_s = scalar.min_exponent().unwrap_or_else(BigRational::zero);
        let xmin_v = vector.min_exponent().unwrap_or_else(BigRational::zero);
        let valid_to = (self.valid_to.clone() + &xmin_v).min(other.valid_to.clone() + &xmin_s);
        let mut out = LogQSeries::zero(self.period.clone(), vector.dim, valid_to);
        for (mu1, j1, n1, c1) in scalar.terms() {
            let f = &c1[0];
            if f.is_zero() {
                continue;
            }
            let x1 = rat_int(n1) + mu1;
            for (mu2, j2, n2, c2) in vector.terms() {
                let x = &x1 + &(rat_int(n2) + mu2);
                if x > out.valid_to {
                    continue;
                }
                out.add_term(&x, j1 + j2, c2.iter().map(|s| s.mul(f)).collect());
            }
        }
        Ok(out)
    }

    /// Integer power of a dimension-1 series by repeated squaring.
    pub fn pow(&self, e: u32) -> Result<LogQSeries> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch("power requires dimension 1".into()));
        }
        let mut acc = LogQSeries::one(self.period.clone(), self.valid_to.clone());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Reciprocal of a dimension-1 log-free series whose least-exponent
    /// coefficient is invertible: 1 / (a_0 q^x0 (1 + u)) is expanded by the
    /// geometric recursion b_k = -(1/a_0) sum a_(x0+t) b_(k-t).
    pub fn invert(&self) -> Result<LogQSeries> {
        if self.dim != 1 || self.log_order() > 0 {
            return Err(Error::InvalidInput(
                "inversion requires a log-free dimension-1 series".into(),
            ));
        }
        let x0 = self
            .min_exponent()
            .ok_or_else(|| Error::Singular("cannot invert the zero series".into()))?;
        let lead = self.coeff_at(&x0, 0)?[0].clone();
        let lead_inv = lead
            .inv()
            .ok_or_else(|| Error::Singular("leading coefficient is not invertible".into()))?;
        let valid_to = &self.valid_to - &x0 - &x0;
        if valid_to < -&x0 {
            return Err(Error::TruncationUnderflow(
                "series too short to invert at this truncation".into(),
            ));
        }
        // Work against offsets from x0: a(t) = coeff of q^(x0+t), t on the
        // lattice of exponent differences, which here is integral after
        // channel-wise reading; gather terms by t.
        let mut a: BTreeMap<BigRational, Scalar> = BTreeMap::new();
        for (mu, _, n, c) in self.terms() {
            let t = rat_int(n) + mu - &x0;
            if !t.is_integer() {
                // Mixed offsets: fall back to the slow lattice (denominator
                // of the offsets), still exact.
                return self.invert_general();
            }
            a.insert(t, c[0].clone());
        }
        let t_max = (&valid_to + &x0).floor();
        let t_max = t_max
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::InvalidInput("truncation out of i64 range".into()))?;
        let mut b: Vec<Scalar> = Vec::with_capacity((t_max.max(0) + 1) as usize);
        b.push(lead_inv.clone());
        for k in 1..=t_max.max(0) {
            let mut acc = Scalar::zero();
            for t in 1..=k {
                if let Some(at) = a.get(&rat_int(t)) {
                    acc = acc.add(&at.mul(&b[(k - t) as usize]));
                }
            }
            b.push(acc.neg().mul(&lead_inv));
        }
        let mut out = LogQSeries::zero(self.period.clone(), 1, valid_to);
        for (k, c) in b.into_iter().enumerate() {
            out.add_term(&(rat_int(k as i64) - &x0), 0, vec![c]);
        }
        out.prune();
        Ok(out)
    }

    /// Inversion over a non-integral exponent lattice: clears denominators
    /// by temporarily passing to the finer lattice of a larger period.
    fn invert_general(&self) -> Result<LogQSeries> {
        let mut den: num::BigInt = num::BigInt::from(1);
        for ((mu, _), _) in self.channels.iter() {
            den = num::integer::lcm(den, mu.denom().clone());
        }
        let fine = self.rescale(&(self.period.clone() * BigRational::from_integer(den)));
        let inv = fine.invert()?;
        Ok(inv.rescale(&self.period))
    }

    /// Reinterprets the series against a new period. Exponents scale by
    /// p_new / p_old and log coefficients pick up the matching power, so the
    /// function of tau is unchanged.
    pub fn rescale(&self, new_period: &BigRational) -> LogQSeries {
        assert!(new_period > &BigRational::zero());
        let ratio = new_period / &self.period;
        let mut out = LogQSeries::zero(
            new_period.clone(),
            self.dim,
            &self.valid_to * &ratio,
        );
        for (mu, jp, n, c) in self.terms() {
            let x = (rat_int(n) + mu) * &ratio;
            let f = num::pow::pow(ratio.clone(), jp as usize);
            out.add_term(&x, jp, c.iter().map(|s| s.scale_rational(&f)).collect());
        }
        out
    }

    /// Substitutes tau -> r tau for rational r > 0, keeping the stored
    /// period. Exponents scale by r and log coefficients pick up r^j', so
    /// the result represents tau -> f(r tau) on the same lattice label.
    pub fn compose_scale(&self, r: &BigRational) -> LogQSeries {
        assert!(r > &BigRational::zero());
        let mut out = LogQSeries::zero(
            self.period.clone(),
            self.dim,
            &self.valid_to * r,
        );
        for (mu, jp, n, c) in self.terms() {
            let x = (rat_int(n) + mu) * r;
            let f = num::pow::pow(r.clone(), jp as usize);
            out.add_term(&x, jp, c.iter().map(|s| s.scale_rational(&f)).collect());
        }
        out
    }

    /// Shifts every exponent by x (multiplication by the monomial q_p^x).
    pub fn shift_exponents(&self, x: &BigRational) -> LogQSeries {
        let mut out = LogQSeries::zero(
            self.period.clone(),
            self.dim,
            &self.valid_to + x,
        );
        for (mu, jp, n, c) in self.terms() {
            out.add_term(&(rat_int(n) + mu + x), jp, c.to_vec());
        }
        out
    }

    /// Substitutes tau -> tau + s for rational s. Each term picks up the
    /// exact phase e^(2 pi i (n + mu) s / p) and spreads its log power
    /// downward through the binomial expansion of ((tau + s)/p)^J.
    pub fn shift_argument(&self, s: &BigRational) -> LogQSeries {
        let mut out = LogQSeries::zero(self.period.clone(), self.dim, self.valid_to.clone());
        let sp = s / &self.period;
        for (mu, jcap, n, c) in self.terms() {
            let x = rat_int(n) + mu;
            let phase = Scalar::root_of_unity(&frac_mod1(&(&x * &sp)));
            for jp in 0..=jcap {
                let choose = binomial(jcap as i64, jp as i64);
                let f = num::pow::pow(sp.clone(), (jcap - jp) as usize) * choose;
                if f.is_zero() {
                    continue;
                }
                let factor = phase.scale_rational(&f);
                out.add_term(&x, jp, c.iter().map(|v| v.mul(&factor)).collect());
            }
        }
        out.prune();
        out
    }

    /// Applies a linear map to every coefficient vector.
    pub fn apply_linear(&self, map: &SMat) -> Result<LogQSeries> {
        if map.cols != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "map expects dimension {}, series has {}",
                map.cols, self.dim
            )));
        }
        let mut out = LogQSeries::zero(self.period.clone(), map.rows, self.valid_to.clone());
        for (mu, jp, n, c) in self.terms() {
            let mut v = vec![Scalar::zero(); map.rows];
            for (i, vi) in v.iter_mut().enumerate() {
                for (j, cj) in c.iter().enumerate() {
                    *vi = vi.add(&map[(i, j)].mul(cj));
                }
            }
            out.add_term(&(rat_int(n) + mu), jp, v);
        }
        out.prune();
        Ok(out)
    }

    /// Extracts one component as a dimension-1 series.
    pub fn component(&self, k: usize) -> LogQSeries {
        assert!(k < self.dim);
        let mut out = LogQSeries::zero(self.period.clone(), 1, self.valid_to.clone());
        for (mu, jp, n, c) in self.terms() {
            out.add_term(&(rat_int(n) + mu), jp, vec![c[k].clone()]);
        }
        out.prune();
        out
    }

    /// Stacks series over the same period into one higher-dimensional
    /// series; the validity bound is the tightest of the parts.
    pub fn stack(parts: &[LogQSeries]) -> Result<LogQSeries> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot stack zero series".into()))?;
        let period = first.period.clone();
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let valid_to = parts
            .iter()
            .map(|p| p.valid_to.clone())
            .min()
            .unwrap();
        let mut out = LogQSeries::zero(period.clone(), dim, valid_to);
        let mut offset = 0;
        for p in parts {
            if p.period != period {
                return Err(Error::DimensionMismatch("stack requires one common period".into()));
            }
            for (mu, jp, n, c) in p.terms() {
                let mut v = vec![Scalar::zero(); dim];
                v[offset..offset + p.dim].clone_from_slice(c);
                out.add_term(&(rat_int(n) + mu), jp, v);
            }
            offset += p.dim;
        }
        Ok(out)
    }

    /// Evaluates the truncated series at tau (upper half-plane), returning
    /// the value vector and a crude geometric bound on the dropped tail.
    pub fn evaluate(&self, tau: Complex64) -> (Vec<Complex64>, f64) {
        let p = rational_to_f64(&self.period);
        let l = tau / p;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut top_mag = 0.0f64;
        for (mu, jp, n, c) in self.terms() {
            let x = n as f64 + rational_to_f64(mu);
            let factor = (Complex64::new(0.0, 2.0 * PI) * l * x).exp() * l.powu(jp);
            for (o, s) in out.iter_mut().zip(c) {
                *o += factor * s.to_complex();
            }
            let mag = c.iter().map(Scalar::norm).fold(0.0, f64::max);
            top_mag = top_mag.max(mag);
        }
        let qmag = (Complex64::new(0.0, 2.0 * PI) * l).exp().norm();
        let tail = if qmag < 1.0 {
            let lead = qmag.powf(rational_to_f64(&self.valid_to) + 1.0);
            top_mag.max(1.0) * lead / (1.0 - qmag)
                * (l.norm().max(1.0)).powi(self.log_order() as i32)
        } else {
            f64::INFINITY
        };
        (out, tail)
    }

    /// Componentwise comparison across the union of stored terms, restricted
    /// to the common validity range.
    pub fn approx_eq(&self, other: &LogQSeries, tol: f64) -> bool {
        if self.period != other.period || self.dim != other.dim {
            return false;
        }
        let bound = self.valid_to.clone().min(other.valid_to.clone());
        let mut keys: Vec<(BigRational, u32, i64)> = Vec::new();
        for (mu, jp, n, _) in self.terms().chain(other.terms()) {
            if rat_int(n) + mu <= bound {
                keys.push((mu.clone(), jp, n));
            }
        }
        keys.sort();
        keys.dedup();
        let zero = vec![Scalar::zero(); self.dim];
        for (mu, jp, n) in keys {
            let a = self.coeff(&mu, jp, n).unwrap_or(&zero);
            let b = other.coeff(&mu, jp, n).unwrap_or(&zero);
            for (x, y) in a.iter().zip(b) {
                if !x.approx_eq(y, tol) {
                    return false;
                }
            }
        }
        true
    }
}

fn binomial(n: i64, k: i64) -> BigRational {
    if k < 0 || k > n {
        return BigRational::zero();
    }
    let mut num = rat_int(1);
    for i in 0..k {
        num = num * rat_int(n - i) / rat_int(i + 1);
    }
    num
}

/// Dedekind eta to an integer power e != 0, truncated so that exponents up
/// to e/24 + n_terms are complete. Built from the pentagonal number series
/// for the product (1 - q)(1 - q^2)... and, for negative powers, from the
/// geometric inversion recursion.
pub fn eta_power_series(e: i64, n_terms: i64) -> Result<LogQSeries> {
    if e == 0 || n_terms < 0 {
        return Err(Error::InvalidInput("eta power must be nonzero at nonnegative truncation".into()));
    }
    let ae = e.unsigned_abs() as u32;
    let base = pentagonal_series(n_terms);
    let positive = base.pow(ae)?.shift_exponents(&rat(e.abs(), 24));
    if e > 0 {
        Ok(positive)
    } else {
        positive.invert()
    }
}

/// The pentagonal number expansion of prod (1 - q^n): exponents k(3k - 1)/2
/// with signs (-1)^k, complete through q^n_terms.
fn pentagonal_series(n_terms: i64) -> LogQSeries {
    let mut s = LogQSeries::zero(rat_int(1), 1, rat_int(n_terms));
    let mut k: i64 = 0;
    loop {
        let mut hit = false;
        for kk in [k, -k] {
            let x = kk * (3 * kk - 1) / 2;
            if x <= n_terms {
                hit = true;
                let sign = if kk.rem_euclid(2) == 0 { 1 } else { -1 };
                s.add_term(&rat_int(x), 0, vec![Scalar::from_int(sign)]);
            }
            if kk == 0 {
                break;
            }
        }
        if !hit {
            break;
        }
        k += 1;
    }
    s
}

/// The discriminant form: eta^24, with expansion q - 24 q^2 + 252 q^3 - ...
pub fn delta_series(n_terms: i64) -> Result<LogQSeries> {
    eta_power_series(24, n_terms)
}

/// Independent check value: prod_(n=1..N) (1 - q^n)^24 expanded literally,
/// one sparse binomial at a time, complete through q^N.
pub fn eta24_literal_product(n_terms: i64) -> LogQSeries {
    let mut acc = LogQSeries::one(rat_int(1), rat_int(n_terms));
    for n in 1..=n_terms {
        let mut factor = LogQSeries::one(rat_int(1), rat_int(n_terms));
        factor.add_term(&rat_int(n), 0, vec![Scalar::from_int(-1)]);
        for _ in 0..24 {
            acc = acc.mul(&factor).expect("dimension-1 product");
        }
    }
    acc.shift_exponents(&rat_int(1))
}

/// Normalized Eisenstein series E_k for k = 4 or 6:
/// E_4 = 1 + 240 sum sigma_3(n) q^n, E_6 = 1 - 504 sum sigma_5(n) q^n.
pub fn eisenstein_series(k: u32, n_terms: i64) -> Result<LogQSeries> {
    let (c, pw): (i64, u32) = match k {
        4 => (240, 3),
        6 => (-504, 5),
        _ => return Err(Error::InvalidInput("only E4 and E6 are provided".into())),
    };
    let mut s = LogQSeries::one(rat_int(1), rat_int(n_terms));
    for n in 1..=n_terms {
        let sigma: num::BigInt = (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| num::BigInt::from(d).pow(pw))
            .sum();
        let coeff = BigRational::from_integer(sigma * c);
        s.add_term(&rat_int(n), 0, vec![Scalar::from_rational(coeff)]);
    }
    Ok(s)
}

/// The modular j-function E_4^3 / Delta = q^(-1) + 744 + 196884 q + ...
pub fn j_series(n_terms: i64) -> Result<LogQSeries> {
    let e4 = eisenstein_series(4, n_terms + 2)?;
    let delta = delta_series(n_terms + 2)?;
    e4.pow(3)?.mul(&delta.invert()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1(s: &LogQSeries, n: i64) -> Scalar {
        s.coeff_at(&rat_int(n), 0).unwrap()[0].clone()
    }

    #[test]
    fn delta_opening_coefficients() {
        let d = delta_series(8).unwrap();
        let expect: [(i64, i64); 7] = [
            (1, 1),
            (2, -24),
            (3, 252),
            (4, -1472),
            (5, 4830),
            (6, -6048),
            (7, -16744),
        ];
        for (n, v) in expect {
            assert!(c1(&d, n).approx_eq(&Scalar::from_int(v), 0.0), "tau({})", n);
        }
        assert!(d.is_exact());
    }

    #[test]
    fn pentagonal_matches_literal_product() {
        let a = delta_series(32).unwrap();
        let b = eta24_literal_product(32);
        let bound = a.valid_to().clone().min(b.valid_to().clone());
        assert!(bound >= rat_int(30));
        assert!(a.approx_eq(&b, 0.0));
    }

    #[test]
    fn eta_at_i() {
        // eta(i) = Gamma(1/4) / (2 pi^(3/4)).
        let s = eta_power_series(1, 40).unwrap();
        let (v, tail) = s.evaluate(Complex64::new(0.0, 1.0));
        assert!(tail < 1e-20);
        assert!((v[0] - Complex64::new(0.768225422326057, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inversion_roundtrip() {
        let e2 = eta_power_series(2, 30).unwrap();
        let em2 = eta_power_series(-2, 30).unwrap();
        let prod = e2.mul(&em2).unwrap();
        let one = LogQSeries::one(rat_int(1), prod.valid_to().clone());
        assert!(prod.approx_eq(&one, 0.0));
        assert!(prod.is_exact());
    }

    #[test]
    fn shift_by_one_multiplies_eta_square_by_zeta12() {
        // eta(tau + 1)^2 = e^(2 pi i / 12) eta(tau)^2.
        let s = eta_power_series(2, 20).unwrap();
        let shifted = s.shift_argument(&rat_int(1));
        let phased = s.scale(&Scalar::root_of_unity(&rat(1, 12)));
        assert!(shifted.approx_eq(&phased, 0.0));
    }

    #[test]
    fn shift_is_additive_and_mixes_logs() {
        // Build l * eta^2 and shift: channels must mix binomially.
        let s = eta_power_series(2, 16).unwrap();
        let mut logged = LogQSeries::zero(rat_int(1), 1, s.valid_to().clone());
        for (mu, jp, n, c) in s.terms() {
            logged.add_term(&(rat_int(n) + mu), jp + 1, c.to_vec());
        }
        let a = logged.shift_argument(&rat(1, 2)).shift_argument(&rat(1, 3));
        let b = logged.shift_argument(&rat(5, 6));
        assert!(a.approx_eq(&b, 0.0));
        assert_eq!(b.log_order(), 1);
        // Numeric cross-check: shifted series evaluated at tau equals the
        // original evaluated at tau + 5/6.
        let tau = Complex64::new(0.21, 0.9);
        let (lhs, _) = b.evaluate(tau);
        let (rhs, _) = logged.evaluate(tau + Complex64::new(5.0 / 6.0, 0.0));
        assert!((lhs[0] - rhs[0]).norm() < 1e-12);
    }

    #[test]
    fn rescale_preserves_values() {
        let s = eta_power_series(-4, 24).unwrap();
        let r = s.rescale(&rat_int(6));
        assert_eq!(r.period(), &rat_int(6));
        let tau = Complex64::new(0.05, 1.3);
        let (a, _) = s.evaluate(tau);
        let (b, _) = r.evaluate(tau);
        assert!((a[0] - b[0]).norm() < 1e-10 * a[0].norm());
        let back = r.rescale(&rat_int(1));
        assert!(back.approx_eq(&s, 0.0));
    }

    #[test]
    fn product_validity_accounts_for_poles() {
        let d = delta_series(10).unwrap();
        let dinv = d.invert().unwrap();
        assert_eq!(dinv.min_exponent(), Some(rat_int(-1)));
        // Delta is complete to 11, so 1/Delta is complete to 11 - 2 = 9.
        assert_eq!(dinv.valid_to(), &rat_int(9));
        let prod = d.mul(&dinv).unwrap();
        assert!(prod.approx_eq(&LogQSeries::one(rat_int(1), prod.valid_to().clone()), 0.0));
        assert_eq!(prod.valid_to(), &rat_int(10));
    }

    #[test]
    fn j_function_opening_coefficients() {
        let j = j_series(4).unwrap();
        assert!(c1(&j, -1).approx_eq(&Scalar::from_int(1), 0.0));
        assert!(c1(&j, 0).approx_eq(&Scalar::from_int(744), 0.0));
        assert!(c1(&j, 1).approx_eq(&Scalar::from_int(196884), 0.0));
        assert!(c1(&j, 2).approx_eq(&Scalar::from_int(21493760), 0.0));
    }

    #[test]
    fn eisenstein_opening_coefficients() {
        let e4 = eisenstein_series(4, 3).unwrap();
        assert!(c1(&e4, 1).approx_eq(&Scalar::from_int(240), 0.0));
        assert!(c1(&e4, 2).approx_eq(&Scalar::from_int(2160), 0.0));
        let e6 = eisenstein_series(6, 2).unwrap();
        assert!(c1(&e6, 1).approx_eq(&Scalar::from_int(-504), 0.0));
        assert!(c1(&e6, 2).approx_eq(&Scalar::from_int(-16632), 0.0));
    }

    #[test]
    fn coefficients_past_validity_error() {
        let d = delta_series(5).unwrap();
        assert!(matches!(
            d.coeff_at(&rat_int(7), 0),
            Err(Error::TruncationUnderflow(_))
        ));
    }

    #[test]
    fn fractional_lattice_inversion() {
        // eta^2 sits on a shifted integer lattice 1/12 + Z.
        let e2 = eta_power_series(2, 20).unwrap();
        let direct = eta_power_series(-2, 20).unwrap();
        let inv = e2.invert().unwrap();
        let bound = inv.valid_to().clone().min(direct.valid_to().clone());
        let mut a = inv.clone();
        a.truncate(bound.clone());
        let mut b = direct.clone();
        b.truncate(bound);
        assert!(a.approx_eq(&b, 0.0));
        // 1 + q^(1/2) mixes offsets 0 and 1/2, forcing the finer lattice.
        let mut f = LogQSeries::one(rat_int(1), rat_int(8));
        f.add_term(&rat(1, 2), 0, vec![Scalar::one()]);
        let finv = f.invert().unwrap();
        let prod = f.mul(&finv).unwrap();
        assert!(prod.approx_eq(&LogQSeries::one(rat_int(1), prod.valid_to().clone()), 0.0));
        assert!(finv
            .coeff_at(&rat(3, 2), 0)
            .unwrap()[0]
            .approx_eq(&Scalar::from_int(-1), 0.0));
    }

    #[test]
    fn stack_and_component_roundtrip() {
        let a = eta_power_series(2, 10).unwrap();
        let b = eta_power_series(4, 10).unwrap();
        let s = LogQSeries::stack(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.component(0).approx_eq(&a, 0.0));
        assert!(s.component(1).approx_eq(&b, 0.0));
    }
}
