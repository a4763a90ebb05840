//! Vector-valued automorphic forms stored through their cusp expansions,
//! weight reduction by powers of eta, and the lift from a finite-index
//! subgroup to the full modular group together with its verification
//! reports.
//!
//! A [`VVAF`] of weight k for a subgroup H with representation rho holds one
//! [`LogQSeries`] per cusp class: S_i = X|_k A_i of period h_i, so that
//! S_i(tau + h_i) = rho(t_i) S_i(tau). That translation equation is checked
//! on construction; a form that fails it is rejected, which makes every
//! downstream identity a statement about validated data.
//!
//! Lifting runs at weight 0. The reduction X0 = X eta^(-2k) carries the
//! representation rho tensor nu^(-k) and expands cuspwise as
//! S0_i = zeta_12^(-k phi(A_i)) S_i eta^(-2k), phi the exponent of nu. The
//! lift stacks the coset translates X0|g_(i,j)^(-1) = S0_i(tau - j) in flat
//! coset order; relabeled to the period-1 lattice each term q_h^(N + mu)
//! lands at the exponent (N + mu)/h_i, so the lifted coefficients interleave
//! the source coefficients. The weight-k lift is the stack multiplied back
//! by eta^(2k) under the induced representation twisted by nu^k.
//!
//! Two independent code paths compute every lifted coefficient: the series
//! pipeline (shift_argument, rescale, stack) and direct index arithmetic
//! ([`LiftedVVAF::lifted_coefficient`]); their agreement, the spectral
//! support law at each cusp, pole-order bookkeeping, evaluation against the
//! source, and the functional equation are each exposed as a report.

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::induction::{predict_spectrum, split_exponent, InducedRep};
use crate::qseries::{eta_power_series, LogQSeries};
use crate::rep::{eta_exponent, jordan_analyze, AmbientRep, JordanOptions, SubgroupRep};
use crate::scalar::{format_rational, frac_mod1, rat, rat_int, Scalar};
use crate::sl2::Mat2;
use crate::subgroup::{enumerate, random_word, CosetSystem, Subgroup, DEFAULT_MAX_INDEX};
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::{One, ToPrimitive, Zero};
use rand::Rng;
use std::sync::Arc;

/// Relative tolerance for the translation equation at construction.
const PERIODICITY_TOL: f64 = 1e-8;
/// Relative tolerance for the three-point affine check during assembly.
const AFFINE_TOL: f64 = 1e-8;
/// Normalized determinant threshold for component independence.
const INDEPENDENCE_TOL: f64 = 1e-8;

/// Growth classification derived from the stored principal parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormFlags {
    /// Finite principal part at every cusp; always true for stored data.
    pub weakly_holomorphic: bool,
    /// No cusp expansion has a negative exponent.
    pub holomorphic: bool,
    /// Every cusp expansion starts at a strictly positive exponent.
    pub cusp_form: bool,
}

/// A vector-valued automorphic form, given by one expansion per cusp class.
#[derive(Clone)]
pub struct VVAF {
    pub weight: i64,
    pub rep: SubgroupRep,
    pub sys: Arc<CosetSystem>,
    /// S_i = X|_k A_i, period h_i, in the order of `sys.cusps`.
    pub cusp_series: Vec<LogQSeries>,
    pub flags: FormFlags,
}

impl VVAF {
    /// Builds a form and validates it: dimensions, periods, and the
    /// translation equation S_i(tau + h_i) = rho(t_i) S_i(tau) per cusp.
    pub fn new(
        weight: i64,
        rep: SubgroupRep,
        sys: Arc<CosetSystem>,
        cusp_series: Vec<LogQSeries>,
    ) -> Result<VVAF> {
        let flags = classify(&cusp_series);
        let form = VVAF {
            weight,
            rep,
            sys,
            cusp_series,
            flags,
        };
        form.validate()?;
        Ok(form)
    }

    fn validate(&self) -> Result<()> {
        if self.cusp_series.len() != self.sys.cusps.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cusp expansions supplied for {} cusp classes",
                self.cusp_series.len(),
                self.sys.cusps.len()
            )));
        }
        let m = self.rep.dim();
        for (i, cusp) in self.sys.cusps.iter().enumerate() {
            let s = &self.cusp_series[i];
            if s.dim() != m {
                return Err(Error::DimensionMismatch(format!(
                    "expansion at cusp {} has dimension {}, representation has {}",
                    i,
                    s.dim(),
                    m
                )));
            }
            if s.period() != &rat_int(cusp.width as i64) {
                return Err(Error::InvalidInput(format!(
                    "expansion at cusp {} stored at period {}, width is {}",
                    i,
                    format_rational(s.period()),
                    cusp.width
                )));
            }
            let image = self.rep.evaluate(&cusp.stabilizer)?;
            let lhs = s.shift_argument(&rat_int(cusp.width as i64));
            let rhs = s.apply_linear(&image)?;
            if !rel_close(&lhs, &rhs, PERIODICITY_TOL)? {
                return Err(Error::Inconsistent(format!(
                    "expansion at cusp {} violates its translation equation",
                    i
                )));
            }
        }
        Ok(())
    }

    /// Pole order -min exponent per cusp, in local q_(h_i) exponent units;
    /// None for an identically zero expansion.
    pub fn pole_orders(&self) -> Vec<Option<BigRational>> {
        self.cusp_series
            .iter()
            .map(|s| s.min_exponent().map(|x| -x))
            .collect()
    }

    /// X0 = X eta^(-2k), weight 0, representation rho tensor nu^(-k).
    /// Cuspwise: S0_i = zeta_12^(-k phi(A_i)) S_i (eta^(-2k) at period h_i).
    pub fn reduce_weight(&self) -> Result<VVAF> {
        if self.weight == 0 {
            return Ok(self.clone());
        }
        let series = self.eta_multiplied(-self.weight)?;
        VVAF::new(0, self.rep.twist_nu(-self.weight), self.sys.clone(), series)
    }

    /// Multiplies a weight-0 form by eta^(2k), recovering weight k with
    /// representation rho tensor nu^k. Inverse of [`VVAF::reduce_weight`]
    /// through the common truncation bound.
    pub fn unreduce_weight(&self, k: i64) -> Result<VVAF> {
        if self.weight != 0 {
            return Err(Error::InvalidInput(
                "weight restoration starts from a weight-0 form".into(),
            ));
        }
        if k == 0 {
            return Ok(self.clone());
        }
        let series = self.eta_multiplied(k)?;
        VVAF::new(k, self.rep.twist_nu(k), self.sys.clone(), series)
    }

    /// Cuspwise product with zeta_12^(e phi(A_i)) eta^(2e).
    fn eta_multiplied(&self, e: i64) -> Result<Vec<LogQSeries>> {
        let mut series = Vec::with_capacity(self.cusp_series.len());
        for (i, cusp) in self.sys.cusps.iter().enumerate() {
            let s = &self.cusp_series[i];
            let h = rat_int(cusp.width as i64);
            let phase = Scalar::root_of_unity(&rat(
                (e * eta_exponent(&cusp.scaling)?).rem_euclid(12),
                12,
            ));
            let n_eta = eta_truncation_for(s, cusp.width);
            let eta = eta_power_series(2 * e, n_eta)?.rescale(&h);
            series.push(s.mul(&eta)?.scale(&phase));
        }
        Ok(series)
    }

    /// Value of the stored expansion at a point near the cusp; the second
    /// entry bounds the dropped tail.
    pub fn eval_expansion(&self, cusp: usize, tau: Complex64) -> (Vec<Complex64>, f64) {
        self.cusp_series[cusp].evaluate(tau)
    }

    /// X(tau) for any tau in the upper half-plane: reduce tau = delta tau0
    /// to the standard fundamental domain, split delta^(-1) into its coset,
    /// and read the matching conjugate expansion:
    /// X(tau) = j(delta, tau0)^k rho(delta g_s) S_i(tau0 - j).
    pub fn eval_anywhere(&self, tau: Complex64) -> Result<(Vec<Complex64>, f64)> {
        let (delta, tau0) = fundamental_domain_reduce(tau)?;
        let s = self.sys.coset_of(&delta.inv()?)?;
        let (ci, j) = self.sys.block_of[s];
        let member = delta.mul(&self.sys.reps[s]);
        debug_assert!(self.sys.contains(&member).unwrap_or(false));
        let rho = self.rep.evaluate(&member)?.to_cmat();
        let (vals, tail) = self.cusp_series[ci].evaluate(tau0 - Complex64::new(j as f64, 0.0));
        let jf = delta.automorphy_factor(tau0).powi(self.weight as i32);
        let out: Vec<Complex64> = rho.mul_vec(&vals).iter().map(|z| z * jf).collect();
        let tail_out = tail * jf.norm() * rho.max_abs().max(1.0) * self.rep.dim() as f64;
        Ok((out, tail_out))
    }

    /// Samples the functional equation X(gamma tau) = j(gamma, tau)^k
    /// rho(gamma) X(tau) at random subgroup members and random tau with
    /// Im tau in [1, 2.5].
    pub fn functional_equation_report<R: Rng>(
        &self,
        rng: &mut R,
        samples: usize,
        tol: f64,
    ) -> Result<FunctionalEquationReport> {
        let mut max_rel: f64 = 0.0;
        let mut max_tail: f64 = 0.0;
        for s in 0..samples {
            let len = 3 + (s % 10);
            let gamma = if self.sys.index() == 1 {
                random_word(rng, len)
            } else {
                self.sys.random_member(rng, len)
            };
            let tau = Complex64::new(rng.random_range(-0.49..0.49), rng.random_range(1.0..2.5));
            let (lhs, t1) = self.eval_anywhere(gamma.apply_complex(tau))?;
            let (xs, t2) = self.eval_anywhere(tau)?;
            let jf = gamma.automorphy_factor(tau).powi(self.weight as i32);
            let rho = self.rep.evaluate(&gamma)?.to_cmat();
            let rhs: Vec<Complex64> = rho.mul_vec(&xs).iter().map(|z| z * jf).collect();
            let scale = rhs.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
            let err = lhs
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max)
                / scale;
            max_rel = max_rel.max(err);
            max_tail = max_tail.max(t1.max(t2 * jf.norm()) / scale);
        }
        Ok(FunctionalEquationReport {
            samples,
            max_rel_residual: max_rel,
            max_tail,
            tol,
            ok: max_rel <= tol,
        })
    }

    /// The weight-k logarithmic form (tau, 1) eta^(2(k+1)) for the full
    /// group, carried by the defining representation tensor nu^(k+1). Its
    /// first component is the log channel l = tau of the eta power.
    pub fn tau_one(k: i64, n_terms: i64) -> Result<VVAF> {
        let full = full_group_system();
        let e = 2 * (k + 1);
        let base = if e == 0 {
            LogQSeries::one(rat_int(1), rat_int(n_terms))
        } else {
            eta_power_series(e, n_terms)?
        };
        let mut series = LogQSeries::zero(rat_int(1), 2, base.valid_to().clone());
        for (mu, jp, n, c) in base.terms() {
            debug_assert_eq!(jp, 0);
            let x = rat_int(n) + mu;
            series.add_term(&x, 1, vec![c[0].clone(), Scalar::zero()]);
            series.add_term(&x, 0, vec![Scalar::zero(), c[0].clone()]);
        }
        let rep = AmbientRep::defining().twist(&AmbientRep::eta_character(k + 1));
        VVAF::new(k, SubgroupRep::Restricted(rep), full, vec![series])
    }

    /// The weight-0 form (eta(tau)/eta(level tau))^(2 power) on gamma0 of
    /// level 2 or 3, under its eta-ratio character. The expansion at the
    /// cusp 0 is the closed form level^power (eta(tau)/eta(tau/level))^(2
    /// power).
    pub fn eta_ratio_form(level: u32, power: i64, n_terms: i64) -> Result<VVAF> {
        if level != 2 && level != 3 {
            return Err(Error::InvalidInput(
                "eta-ratio forms are built in for levels 2 and 3".into(),
            ));
        }
        if power == 0 {
            return Err(Error::InvalidInput("eta-ratio power must be nonzero".into()));
        }
        let sys = Arc::new(enumerate(Subgroup::Gamma0(level), DEFAULT_MAX_INDEX)?);
        let nl = rat_int(level as i64);
        let up = eta_power_series(2 * power, n_terms)?;
        let down = eta_power_series(-2 * power, n_terms)?;
        let s_inf = up.mul(&down.compose_scale(&nl))?;
        let s_zero = up
            .rescale(&nl)
            .mul(&down.compose_scale(&nl.recip()).rescale(&nl))?
            .scale(&Scalar::from_rational(rational_power(&nl, power)));
        VVAF::new(
            0,
            SubgroupRep::EtaRatio { level, power },
            sys,
            vec![s_inf, s_zero],
        )
    }

    /// The constant vector 1 under the trivial character.
    pub fn constant_one(sys: Arc<CosetSystem>, n_terms: i64) -> Result<VVAF> {
        let series = sys
            .cusps
            .iter()
            .map(|c| {
                LogQSeries::one(
                    rat_int(c.width as i64),
                    rat_int(n_terms * c.width as i64),
                )
            })
            .collect();
        VVAF::new(0, SubgroupRep::Restricted(AmbientRep::trivial(1)), sys, series)
    }

    /// Restricts a form on the full group to a subgroup: the expansion at
    /// cusp i is rho(A_i) applied to the infinity expansion, relabeled to
    /// period h_i.
    pub fn restrict(&self, sys: Arc<CosetSystem>) -> Result<VVAF> {
        if self.sys.index() != 1 {
            return Err(Error::InvalidInput(
                "restriction starts from a form on the full group".into(),
            ));
        }
        let amb = match &self.rep {
            SubgroupRep::Restricted(a) => a.clone(),
            _ => {
                return Err(Error::InvalidInput(
                    "restriction requires generator images for the ambient group".into(),
                ))
            }
        };
        let e = &self.cusp_series[0];
        let mut series = Vec::with_capacity(sys.cusps.len());
        for cusp in sys.cusps.iter() {
            let img = amb.evaluate(&cusp.scaling)?;
            series.push(e.apply_linear(&img)?.rescale(&rat_int(cusp.width as i64)));
        }
        VVAF::new(self.weight, SubgroupRep::Restricted(amb), sys, series)
    }
}

impl std::fmt::Debug for VVAF {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "VVAF {{ weight {}, dim {}, {} cusps on {} }}",
            self.weight,
            self.rep.dim(),
            self.cusp_series.len(),
            self.sys.subgroup.family_name()
        )
    }
}

#[derive(Clone, Debug)]
pub struct FunctionalEquationReport {
    pub samples: usize,
    pub max_rel_residual: f64,
    pub max_tail: f64,
    pub tol: f64,
    pub ok: bool,
}

fn classify(series: &[LogQSeries]) -> FormFlags {
    let mut holomorphic = true;
    let mut cusp_form = true;
    for s in series {
        if let Some(x) = s.min_exponent() {
            if x < BigRational::zero() {
                holomorphic = false;
            }
            if x <= BigRational::zero() {
                cusp_form = false;
            }
        }
    }
    FormFlags {
        weakly_holomorphic: true,
        holomorphic,
        cusp_form,
    }
}

/// Componentwise comparison with per-term relative scaling; exact series
/// cancel exactly and never enter the tolerance.
fn rel_close(a: &LogQSeries, b: &LogQSeries, tol: f64) -> Result<bool> {
    let d = a.sub(b)?;
    for (mu, jp, n, c) in d.terms() {
        let dn = c.iter().map(Scalar::norm).fold(0.0f64, f64::max);
        let an = coeff_norm(a, mu, jp, n);
        let bn = coeff_norm(b, mu, jp, n);
        if dn > tol * an.max(bn).max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// (max relative deviation over the common range, exact equality).
fn series_deviation(a: &LogQSeries, b: &LogQSeries) -> Result<(f64, bool)> {
    let d = a.sub(b)?;
    let mut max = 0.0f64;
    for (mu, jp, n, c) in d.terms() {
        let dn = c.iter().map(Scalar::norm).fold(0.0f64, f64::max);
        let an = coeff_norm(a, mu, jp, n);
        let bn = coeff_norm(b, mu, jp, n);
        max = max.max(dn / an.max(bn).max(1.0));
    }
    let exact = a.is_exact() && b.is_exact() && d.is_zero();
    Ok((max, exact))
}

fn coeff_norm(s: &LogQSeries, mu: &BigRational, jp: u32, n: i64) -> f64 {
    s.coeff(mu, jp, n)
        .map(|v| v.iter().map(Scalar::norm).fold(0.0f64, f64::max))
        .unwrap_or(0.0)
}

fn eta_truncation_for(s: &LogQSeries, width: u32) -> i64 {
    let h = rat_int(width as i64);
    let lo = s
        .min_exponent()
        .unwrap_or_else(BigRational::zero)
        .min(BigRational::zero());
    let need = (s.valid_to() - &lo) / &h;
    need.ceil().to_integer().to_i64().unwrap_or(8).max(4) + 2
}

fn rational_power(b: &BigRational, e: i64) -> BigRational {
    let p = num::pow::pow(b.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

fn binom(n: i64, k: i64) -> BigRational {
    if k < 0 || k > n {
        return BigRational::zero();
    }
    let mut out = rat_int(1);
    for i in 0..k {
        out = out * rat_int(n - i) / rat_int(i + 1);
    }
    out
}

/// The coset system of the full group: one coset, one cusp of width 1.
pub fn full_group_system() -> Arc<CosetSystem> {
    Arc::new(enumerate(Subgroup::Full, DEFAULT_MAX_INDEX).expect("the full group enumerates"))
}

/// tau = delta tau0 with tau0 in the standard fundamental domain.
pub fn fundamental_domain_reduce(tau: Complex64) -> Result<(Mat2, Complex64)> {
    if !(tau.im > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidInput(
            "evaluation point must lie in the upper half-plane".into(),
        ));
    }
    let s_inv = Mat2::s().inv()?;
    let mut t = tau;
    let mut delta = Mat2::one();
    for _ in 0..10_000 {
        let n = t.re.round();
        if n.abs() > 1e15 {
            return Err(Error::InvalidInput(
                "evaluation point too far from the imaginary axis".into(),
            ));
        }
        if n != 0.0 {
            t -= Complex64::new(n, 0.0);
            delta = delta.mul(&Mat2::t_pow(n as i64));
        }
        if t.norm() >= 1.0 - 1e-15 {
            return Ok((delta, t));
        }
        delta = delta.mul(&s_inv);
        t = -Complex64::new(1.0, 0.0) / t;
    }
    Err(Error::Inconsistent(
        "fundamental domain reduction did not terminate".into(),
    ))
}

fn spread_taus(count: usize, base_im: f64) -> Vec<Complex64> {
    (0..count)
        .map(|p| {
            let f = p as f64;
            Complex64::new(
                -0.45 + 0.9 * (f * 0.618_033_988_749_894_9).fract(),
                base_im + 0.37 * (f * 0.414_213_562_373_095_1).fract(),
            )
        })
        .collect()
}

fn constant_series(period: &BigRational, valid_to: &BigRational, c: &Scalar) -> LogQSeries {
    let mut s = LogQSeries::zero(period.clone(), 1, valid_to.clone());
    s.add_term(&BigRational::zero(), 0, vec![c.clone()]);
    s
}

fn block_slice(series: &LogQSeries, start: usize, len: usize) -> Result<LogQSeries> {
    let parts: Vec<LogQSeries> = (start..start + len).map(|t| series.component(t)).collect();
    LogQSeries::stack(&parts)
}

/// A form on the full group assembled from a subgroup form, kept with its
/// provenance: the source, both weight-0 reductions, and the induced
/// representation the lift transforms under.
#[derive(Clone)]
pub struct LiftedVVAF {
    /// The weight-k lift, representation induced-then-twisted by nu^k.
    pub form: VVAF,
    /// The weight-0 lift of the reduced source.
    pub reduced: VVAF,
    pub source: VVAF,
    pub source_reduced: VVAF,
    /// Induction of the reduced representation; its coset system is the
    /// source subgroup's.
    pub ind: InducedRep,
    /// eta^(2k) at period 1 when the weight is nonzero.
    pub eta_factor: Option<LogQSeries>,
}

impl LiftedVVAF {
    /// Lifts a form: reduce to weight 0, stack the conjugate expansions
    /// S0_i(tau - j) over the flat coset order on the period-1 lattice, and
    /// multiply back by eta^(2k). Each conjugate expansion passes a
    /// three-point evaluation check before entering the stack, and the
    /// width identity g t_i g^(-1) = T^(h_i) is asserted for every
    /// representative.
    pub fn assemble_lift(source: &VVAF) -> Result<LiftedVVAF> {
        let sys = source.sys.clone();
        for (ci, cusp) in sys.cusps.iter().enumerate() {
            for j in 0..cusp.width as usize {
                let g = &sys.reps[cusp.offset + j];
                let conj = g.mul(&cusp.stabilizer).mul(&g.inv()?);
                if !conj.mul(&Mat2::t_pow(-(cusp.width as i64))).is_one() {
                    return Err(Error::Inconsistent(format!(
                        "stabilizer of cusp class {} does not conjugate to the width-{} translation",
                        ci, cusp.width
                    )));
                }
            }
        }
        let source_reduced = source.reduce_weight()?;
        let ind = InducedRep::new(sys.clone(), source_reduced.rep.clone());
        let check_taus = [
            Complex64::new(0.21, 1.9),
            Complex64::new(-0.33, 2.2),
            Complex64::new(0.08, 2.6),
        ];
        let mut parts = Vec::with_capacity(sys.index());
        for (ci, cusp) in sys.cusps.iter().enumerate() {
            let s0 = &source_reduced.cusp_series[ci];
            for j in 0..cusp.width as i64 {
                let shifted = s0.shift_argument(&rat_int(-j));
                for &tau in &check_taus {
                    let (a, ta) = shifted.evaluate(tau);
                    let (b, tb) = s0.evaluate(tau - Complex64::new(j as f64, 0.0));
                    let scale = b.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
                    let err = a
                        .iter()
                        .zip(&b)
                        .map(|(x, y)| (x - y).norm())
                        .fold(0.0f64, f64::max);
                    if err > AFFINE_TOL * scale + ta + tb {
                        return Err(Error::Inconsistent(format!(
                            "conjugate expansion ({}, {}) fails its affine consistency check",
                            ci, j
                        )));
                    }
                }
                parts.push(shifted.rescale(&rat_int(1)));
            }
        }
        let assembled = LogQSeries::stack(&parts)?;
        let full = full_group_system();
        let ambient = ind.as_ambient()?;
        let reduced = VVAF::new(
            0,
            SubgroupRep::Restricted(ambient.clone()),
            full.clone(),
            vec![assembled.clone()],
        )?;
        let k = source.weight;
        let (form, eta_factor) = if k == 0 {
            (reduced.clone(), None)
        } else {
            let n_eta = eta_truncation_for(&assembled, 1);
            let eta = eta_power_series(2 * k, n_eta)?;
            let series = assembled.mul(&eta)?;
            let form = VVAF::new(
                k,
                SubgroupRep::Restricted(ambient).twist_nu(k),
                full,
                vec![series],
            )?;
            (form, Some(eta))
        };
        Ok(LiftedVVAF {
            form,
            reduced,
            source: source.clone(),
            source_reduced,
            ind,
            eta_factor,
        })
    }

    /// (cusp class, j) of a flat component block.
    pub fn component_label(&self, flat: usize) -> (usize, usize) {
        self.ind.sys.block_of[flat]
    }

    /// Coefficient X^(i,j)[mu, jp, n] of the conjugate expansion
    /// S0_i(tau - j), computed by index arithmetic alone:
    /// sum over J >= jp of S0_i[mu, J, n] e^(-2 pi i (n + mu) j / h)
    /// C(J, jp) (-j/h)^(J - jp).
    fn conjugate_coefficient(
        &self,
        cusp: usize,
        j: u32,
        mu: &BigRational,
        jp: u32,
        n_src: i64,
    ) -> Result<Vec<Scalar>> {
        let s0 = &self.source_reduced.cusp_series[cusp];
        let h = self.ind.sys.cusps[cusp].width;
        let x = rat_int(n_src) + mu;
        if &x > s0.valid_to() {
            return Err(Error::TruncationUnderflow(format!(
                "coefficient at exponent {} requested beyond validity bound {}",
                format_rational(&x),
                format_rational(s0.valid_to())
            )));
        }
        let m = s0.dim();
        let mut out = vec![Scalar::zero(); m];
        let sp = rat(-(j as i64), h as i64);
        let phase = Scalar::root_of_unity(&frac_mod1(&(&x * &sp)));
        for jcap in jp..=s0.log_order() {
            let c = match s0.coeff(mu, jcap, n_src) {
                Some(c) => c,
                None => continue,
            };
            let f = binom(jcap as i64, jp as i64)
                * num::pow::pow(sp.clone(), (jcap - jp) as usize);
            if f.is_zero() {
                continue;
            }
            let factor = phase.scale_rational(&f);
            for (o, cv) in out.iter_mut().zip(c) {
                *o = o.add(&cv.mul(&factor));
            }
        }
        Ok(out)
    }

    /// Lifted coefficient of component block (cusp, j) in its diagonal
    /// channel: the value at exponent n + (j + mu)/h_i and log power jp is
    /// h_i^(-jp) X^(i,j)[mu, jp, n h_i + j], reading the interleaved source
    /// index directly.
    pub fn lifted_coefficient(
        &self,
        cusp: usize,
        j: u32,
        mu: &BigRational,
        jp: u32,
        n: i64,
    ) -> Result<Vec<Scalar>> {
        let h = self.ind.sys.cusps[cusp].width;
        if j >= h {
            return Err(Error::InvalidInput(format!(
                "component shift {} outside width {}",
                j, h
            )));
        }
        if mu < &BigRational::zero() || mu >= &BigRational::one() {
            return Err(Error::InvalidInput(
                "exponent class must lie in [0, 1)".into(),
            ));
        }
        let raw = self.conjugate_coefficient(cusp, j, mu, jp, n * h as i64 + j as i64)?;
        let scale = rational_power(&rat(1, h as i64), jp as i64);
        Ok(raw.iter().map(|c| c.scale_rational(&scale)).collect())
    }

    /// Compares every stored coefficient of the assembled stack against the
    /// index-arithmetic path, over the union of stored and predicted keys,
    /// and checks the exponent channels against the predicted spectrum.
    pub fn interleaving_report(
        &self,
        opts: &JordanOptions,
        tol: f64,
    ) -> Result<InterleavingReport> {
        let assembled = &self.reduced.cusp_series[0];
        let m = self.ind.block_dim();
        let mut keys_checked = 0usize;
        let mut max_dev = 0.0f64;
        for (ci, cusp) in self.ind.sys.cusps.iter().enumerate() {
            let h = cusp.width;
            let s0 = &self.source_reduced.cusp_series[ci];
            let mut keys: Vec<(BigRational, u32, i64)> = Vec::new();
            for (mu_t, jp, nt, _) in assembled.terms() {
                keys.push((mu_t.clone(), jp, nt));
            }
            for (mu, jcap, nsrc, _) in s0.terms() {
                let a = nsrc.rem_euclid(h as i64);
                let nt = (nsrc - a) / h as i64;
                let mu_t = (rat_int(a) + mu) / rat_int(h as i64);
                if rat_int(nt) + &mu_t > *assembled.valid_to() {
                    continue;
                }
                for jp in 0..=jcap {
                    keys.push((mu_t.clone(), jp, nt));
                }
            }
            keys.sort();
            keys.dedup();
            let hscale: Vec<BigRational> = (0..=assembled.log_order())
                .map(|jp| rational_power(&rat(1, h as i64), jp as i64))
                .collect();
            for j in 0..h as usize {
                let off = (cusp.offset + j) * m;
                for (mu_t, jp, nt) in &keys {
                    let z = mu_t * rat_int(h as i64);
                    let a = z.floor();
                    let mu = &z - &a;
                    let a = a.to_integer().to_i64().unwrap();
                    let nsrc = nt * h as i64 + a;
                    if rat_int(nsrc) + &mu > *s0.valid_to() {
                        continue;
                    }
                    let raw = self.conjugate_coefficient(ci, j as u32, &mu, *jp, nsrc)?;
                    let zero = Scalar::zero();
                    let stored = assembled.coeff(mu_t, *jp, *nt);
                    keys_checked += 1;
                    for (t, rawc) in raw.iter().enumerate() {
                        let expected = rawc.scale_rational(&hscale[*jp as usize]);
                        let got = stored.map(|v| &v[off + t]).unwrap_or(&zero);
                        let dn = (got.to_complex() - expected.to_complex()).norm();
                        let scale = got.norm().max(expected.norm()).max(1.0);
                        max_dev = max_dev.max(dn / scale);
                    }
                }
            }
        }
        let exact = assembled.is_exact()
            && self
                .source_reduced
                .cusp_series
                .iter()
                .all(LogQSeries::is_exact)
            && max_dev == 0.0;
        let pred = predict_spectrum(&self.ind, opts)?;
        let mut all_snapped = true;
        let mut predicted: Vec<BigRational> = Vec::new();
        for spec in &pred {
            for class in &spec.classes {
                match &class.exponent {
                    Some(e) => predicted.push(e.clone()),
                    None => all_snapped = false,
                }
            }
        }
        predicted.sort();
        predicted.dedup();
        let mut got_classes: Vec<BigRational> = assembled
            .channel_keys()
            .iter()
            .map(|(mu, _)| mu.clone())
            .collect();
        got_classes.sort();
        got_classes.dedup();
        let lattice_contained = got_classes
            .iter()
            .all(|c| predicted.binary_search(c).is_ok())
            || !all_snapped;
        let lattice_equal =
            lattice_contained && all_snapped && predicted.len() == got_classes.len();
        Ok(InterleavingReport {
            keys_checked,
            max_deviation: max_dev,
            exact,
            lattice_contained,
            lattice_equal,
            tol,
            ok: max_dev <= tol && lattice_contained,
        })
    }

    /// Spectral support law at each cusp: stack the conjugate expansions,
    /// transform each coefficient by the inverse Jordan basis of the
    /// companion block, and require rows of eigenvalue class
    /// e^(2 pi i (mu_v + a)/h) to vanish except on terms with class mu_v
    /// and index congruent to a mod h. Violations are scaled by the
    /// coefficient magnitude.
    pub fn vanishing_report(&self, opts: &JordanOptions, tol: f64) -> Result<VanishingReport> {
        let mut per_cusp = Vec::new();
        let mut global: f64 = 0.0;
        for (ci, cusp) in self.ind.sys.cusps.iter().enumerate() {
            let h = cusp.width;
            let s0 = &self.source_reduced.cusp_series[ci];
            let stackv: Vec<LogQSeries> = (0..h as i64)
                .map(|j| s0.shift_argument(&rat_int(-j)))
                .collect();
            let v = LogQSeries::stack(&stackv)?;
            let block = self.ind.companion_block(ci)?;
            let analysis = jordan_analyze(&block, opts)?;
            let p_inv = analysis.p.inverse()?;
            let mut splits = Vec::with_capacity(analysis.classes.len());
            for class in &analysis.classes {
                let e = class.exponent.clone().ok_or_else(|| {
                    Error::IllConditioned(
                        "companion eigenvalue exponent did not snap to a rational".into(),
                    )
                })?;
                splits.push(split_exponent(&e, h));
            }
            let mut terms = 0usize;
            let mut maxv: f64 = 0.0;
            for (mu, _jp, n, c) in v.terms() {
                let cv: Vec<Complex64> = c.iter().map(Scalar::to_complex).collect();
                let w = p_inv.mul_vec(&cv);
                let scale = cv.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
                let a_term = n.rem_euclid(h as i64) as u32;
                for (r, wr) in w.iter().enumerate() {
                    let (mv, av) = &splits[analysis.col_class[r]];
                    if mv != mu || *av != a_term {
                        maxv = maxv.max(wr.norm() / scale);
                    }
                }
                terms += 1;
            }
            global = global.max(maxv);
            per_cusp.push(CuspVanishing {
                cusp: ci,
                width: h,
                terms,
                max_violation: maxv,
            });
        }
        Ok(VanishingReport {
            per_cusp,
            max_violation: global,
            tol,
            ok: global <= tol,
        })
    }

    /// Pole-order bookkeeping: each component block of the weight-0 lift
    /// starts exactly at (min exponent of S0_i)/h_i, the lifted order is
    /// the worst of those, and growth flags propagate from the reduced
    /// source to the reduced lift.
    pub fn cuspidal_report(&self) -> Result<CuspidalReport> {
        let assembled = &self.reduced.cusp_series[0];
        let m = self.ind.block_dim();
        let mut source_orders = Vec::new();
        let mut relation_ok = true;
        let mut predicted: Option<BigRational> = None;
        for cusp in self.ind.sys.cusps.iter() {
            let h = rat_int(cusp.width as i64);
            let ci = source_orders.len();
            let s0 = &self.source_reduced.cusp_series[ci];
            let src_min = s0.min_exponent();
            source_orders.push(src_min.clone().map(|x| -x));
            let expected = src_min.clone().map(|x| x / &h);
            for j in 0..cusp.width as usize {
                let off = (cusp.offset + j) * m;
                let block = block_slice(assembled, off, m)?;
                if block.min_exponent() != expected {
                    relation_ok = false;
                }
            }
            if let Some(x) = &src_min {
                let cand = -(x / &h);
                predicted = Some(match predicted {
                    None => cand,
                    Some(p) => p.max(cand),
                });
            }
        }
        let lifted_order = assembled.min_exponent().map(|x| -x);
        let order_matches_prediction = lifted_order == predicted;
        let sf = self.source_reduced.flags;
        let lf = self.reduced.flags;
        let holomorphy_propagated = !sf.holomorphic || lf.holomorphic;
        let cusp_form_propagated = !sf.cusp_form || lf.cusp_form;
        let ok =
            relation_ok && order_matches_prediction && holomorphy_propagated && cusp_form_propagated;
        Ok(CuspidalReport {
            source_orders,
            lifted_order,
            relation_ok,
            order_matches_prediction,
            holomorphy_propagated,
            cusp_form_propagated,
            ok,
        })
    }

    /// Evaluates every component of the weight-k lift against the
    /// independent path eta^(2k)(tau) X0(g_(i,j)^(-1) tau), where X0 runs
    /// through fundamental-domain reduction instead of the assembly.
    pub fn oracle_report(&self, taus: &[Complex64], tol: f64) -> Result<OracleReport> {
        let m = self.ind.block_dim();
        let mut max_rel: f64 = 0.0;
        let mut max_tail: f64 = 0.0;
        for &tau in taus {
            let (lift_vals, t0) = self.form.cusp_series[0].evaluate(tau);
            max_tail = max_tail.max(t0);
            let eta_val = match &self.eta_factor {
                None => Complex64::new(1.0, 0.0),
                Some(eta) => {
                    let (v, te) = eta.evaluate(tau);
                    max_tail = max_tail.max(te);
                    v[0]
                }
            };
            for (r, g) in self.ind.sys.reps.iter().enumerate() {
                let z = g.inv()?.apply_complex(tau);
                let (direct, t1) = self.source_reduced.eval_anywhere(z)?;
                max_tail = max_tail.max(t1);
                for t in 0..m {
                    let expected = direct[t] * eta_val;
                    let got = lift_vals[r * m + t];
                    let rel = (got - expected).norm() / expected.norm().max(1.0);
                    max_rel = max_rel.max(rel);
                }
            }
        }
        Ok(OracleReport {
            samples: taus.len(),
            components: self.ind.dim(),
            max_rel_error: max_rel,
            max_tail,
            tol,
            ok: max_rel <= tol,
        })
    }

    /// Wronskian-style independence test: evaluate the component stack at
    /// dim sample points, normalize each component column, and take the
    /// determinant.
    pub fn independence_report(&self, tol: f64) -> Result<IndependenceReport> {
        let assembled = &self.reduced.cusp_series[0];
        let d = assembled.dim();
        let taus = spread_taus(d, 0.9);
        let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(d);
        for &tau in &taus {
            let (vals, _) = assembled.evaluate(tau);
            rows.push(vals);
        }
        for c in 0..d {
            let norm = rows.iter().map(|r| r[c].norm()).fold(0.0f64, f64::max);
            if norm == 0.0 {
                return Ok(IndependenceReport {
                    dim: d,
                    normalized_determinant: 0.0,
                    tol,
                    independent: false,
                });
            }
            for row in rows.iter_mut() {
                row[c] /= norm;
            }
        }
        let det = CMat::from_rows(&rows).determinant().norm();
        Ok(IndependenceReport {
            dim: d,
            normalized_determinant: det,
            tol,
            independent: det > tol,
        })
    }

    /// Recovers the source reduction: the j = 0 slice of each cusp block,
    /// relabeled back to period h_i.
    pub fn unlift(&self) -> Result<VVAF> {
        let assembled = &self.reduced.cusp_series[0];
        let m = self.ind.block_dim();
        let mut series = Vec::with_capacity(self.ind.sys.cusps.len());
        for cusp in self.ind.sys.cusps.iter() {
            let s = block_slice(assembled, cusp.offset * m, m)?
                .rescale(&rat_int(cusp.width as i64));
            series.push(s);
        }
        VVAF::new(0, self.ind.rho.clone(), self.ind.sys.clone(), series)
    }

    /// Unlift, re-lift, and compare both the recovered source and the
    /// re-assembled stack against the originals.
    pub fn roundtrip_report(&self, tol: f64) -> Result<RoundtripReport> {
        let unl = self.unlift()?;
        let relift = LiftedVVAF::assemble_lift(&unl)?;
        let (mut max_dev, mut exact) =
            series_deviation(&relift.reduced.cusp_series[0], &self.reduced.cusp_series[0])?;
        for (i, s) in unl.cusp_series.iter().enumerate() {
            let (d, e) = series_deviation(s, &self.source_reduced.cusp_series[i])?;
            max_dev = max_dev.max(d);
            exact = exact && e;
        }
        Ok(RoundtripReport {
            max_deviation: max_dev,
            exact,
            tol,
            ok: max_dev <= tol,
        })
    }
}

impl std::fmt::Debug for LiftedVVAF {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "LiftedVVAF {{ weight {}, {} components from {} }}",
            self.form.weight,
            self.ind.dim(),
            self.ind.sys.subgroup.family_name()
        )
    }
}

#[derive(Clone, Debug)]
pub struct InterleavingReport {
    pub keys_checked: usize,
    pub max_deviation: f64,
    pub exact: bool,
    pub lattice_contained: bool,
    pub lattice_equal: bool,
    pub tol: f64,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct CuspVanishing {
    pub cusp: usize,
    pub width: u32,
    pub terms: usize,
    pub max_violation: f64,
}

#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub per_cusp: Vec<CuspVanishing>,
    pub max_violation: f64,
    pub tol: f64,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct CuspidalReport {
    /// -min exponent of the reduced source per cusp, local units.
    pub source_orders: Vec<Option<BigRational>>,
    /// -min exponent of the weight-0 lift at infinity.
    pub lifted_order: Option<BigRational>,
    pub relation_ok: bool,
    pub order_matches_prediction: bool,
    pub holomorphy_propagated: bool,
    pub cusp_form_propagated: bool,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub samples: usize,
    pub components: usize,
    pub max_rel_error: f64,
    pub max_tail: f64,
    pub tol: f64,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct IndependenceReport {
    pub dim: usize,
    pub normalized_determinant: f64,
    pub tol: f64,
    pub independent: bool,
}

#[derive(Clone, Debug)]
pub struct RoundtripReport {
    pub max_deviation: f64,
    pub exact: bool,
    pub tol: f64,
    pub ok: bool,
}

/// Lifts (tau, 1) eta^(2(k+1)) restricted to gamma0 of the given level and
/// makes its components linearly independent. The plain restriction lifts
/// to a stack of rank 2, so the source is multiplied by a separating
/// product prod_r (f - f(g_r^(-1) tau0))^(n_r) over the cosets, f the
/// weight-0 eta quotient generating the function field of the subgroup;
/// distinct vanishing orders n_r at tau0 force independence, and the
/// determinant test is the arbiter.
pub fn induced_tau_one(level: u32, k: i64, n_terms: i64) -> Result<LiftedVVAF> {
    let sys = Arc::new(enumerate(Subgroup::Gamma0(level), DEFAULT_MAX_INDEX)?);
    let base = VVAF::tau_one(k, n_terms)?.restrict(sys.clone())?;
    let lifted = LiftedVVAF::assemble_lift(&base)?;
    if lifted.independence_report(INDEPENDENCE_TOL)?.independent {
        return Ok(lifted);
    }
    let power = match level {
        2 => 12,
        3 => 6,
        _ => {
            return Err(Error::InvalidInput(format!(
                "no separating eta quotient is built in for level {}",
                level
            )))
        }
    };
    let f = VVAF::eta_ratio_form(level, power, n_terms + 3 * sys.index() as i64 + 4)?;
    let tau0 = Complex64::new(0.29, 1.21);
    let mut shifts = Vec::with_capacity(sys.index());
    for g in sys.reps.iter() {
        let (v, _) = f.eval_anywhere(g.inv()?.apply_complex(tau0))?;
        shifts.push(Scalar::from_complex(v[0]));
    }
    for t in 1..=3u32 {
        let mut series = Vec::with_capacity(sys.cusps.len());
        for (ci, cusp) in sys.cusps.iter().enumerate() {
            let fi = &f.cusp_series[ci];
            let mut factor = LogQSeries::one(rat_int(cusp.width as i64), fi.valid_to().clone());
            for (r, c) in shifts.iter().enumerate() {
                let n_r = t as usize * r;
                if n_r == 0 {
                    continue;
                }
                let pole_term = fi.sub(&constant_series(fi.period(), fi.valid_to(), c))?;
                factor = factor.mul(&pole_term.pow(n_r as u32)?)?;
            }
            series.push(factor.mul(&base.cusp_series[ci])?);
        }
        let repaired = VVAF::new(k, base.rep.clone(), sys.clone(), series)?;
        let lifted = LiftedVVAF::assemble_lift(&repaired)?;
        if lifted.independence_report(INDEPENDENCE_TOL)?.independent {
            return Ok(lifted);
        }
    }
    Err(Error::Inconsistent(
        "component independence could not be established by pole-order separation".into(),
    ))
}
