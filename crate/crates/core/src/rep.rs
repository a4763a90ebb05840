//! Finite-dimensional representations: ambient representations of SL2(Z)
//! given by generator images, subgroup representations, and the spectral
//! analysis of translation images.
//!
//! An [`AmbientRep`] stores rho(T) and rho(S) and evaluates on arbitrary
//! elements through the word decomposition, so rho(g1 g2) = rho(g1) rho(g2)
//! holds by construction and entries stay exact while the images are exact.
//! A [`SubgroupRep`] is defined only on members of a subgroup: either the
//! restriction of an ambient representation or the character by which a
//! quotient of eta functions transforms.
//!
//! [`jordan_analyze`] computes the Jordan structure of a matrix whose
//! eigenvalues are expected on the unit circle: eigenvalue clustering,
//! block sizes from rank sequences, chain bases from nested nullspaces, and
//! a full similarity residual check. Matrices with exact entries in a small
//! cyclotomic field first confirm their structure exactly. Eigenvalue
//! arguments are snapped to rationals to recover exponents; an eigenvalue
//! e^(2 pi i mu) of rho(T) corresponds to expansion exponents in mu + Z.

use crate::cmat::{CMat, SMat};
use crate::error::{Error, Result};
use crate::scalar::{frac_mod1, rat, snap_rational, CycQ, Scalar};
use crate::sl2::{word_decompose, Gen, Mat2};
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::ToPrimitive;
use std::f64::consts::PI;

/// Relation tolerance when validating floating generator images.
const RELATION_TOL: f64 = 1e-12;

/// A representation of SL2(Z) by the images of T and S.
#[derive(Clone, Debug)]
pub struct AmbientRep {
    t: SMat,
    s: SMat,
    t_inv: SMat,
}

impl AmbientRep {
    /// Validates the defining relations S^4 = 1 and (ST)^3 = S^2.
    pub fn from_images(t: SMat, s: SMat) -> Result<AmbientRep> {
        let n = t.rows;
        if t.cols != n || s.rows != n || s.cols != n {
            return Err(Error::DimensionMismatch(format!(
                "generator images must be square and equal-sized, got {}x{} and {}x{}",
                t.rows, t.cols, s.rows, s.cols
            )));
        }
        let s2 = s.mul(&s);
        let s4 = s2.mul(&s2);
        if !s4.approx_eq(&SMat::identity(n), RELATION_TOL) {
            return Err(Error::InvalidInput(
                "generator images violate S^4 = 1".into(),
            ));
        }
        let st = s.mul(&t);
        let st3 = st.mul(&st).mul(&st);
        if !st3.approx_eq(&s2, RELATION_TOL) {
            return Err(Error::InvalidInput(
                "generator images violate (S T)^3 = S^2".into(),
            ));
        }
        let t_inv = t.inverse().map_err(|_| {
            Error::InvalidInput("image of T is singular".into())
        })?;
        Ok(AmbientRep { t, s, t_inv })
    }

    pub fn dim(&self) -> usize {
        self.t.rows
    }

    pub fn t_image(&self) -> &SMat {
        &self.t
    }

    pub fn s_image(&self) -> &SMat {
        &self.s
    }

    /// The one-dimensional trivial representation.
    pub fn trivial(dim: usize) -> AmbientRep {
        AmbientRep {
            t: SMat::identity(dim),
            s: SMat::identity(dim),
            t_inv: SMat::identity(dim),
        }
    }

    /// The defining representation: T and S act by their own matrices.
    pub fn defining() -> AmbientRep {
        let t = SMat::from_fn(2, 2, |i, j| Scalar::from_int([[1, 1], [0, 1]][i][j]));
        let s = SMat::from_fn(2, 2, |i, j| Scalar::from_int([[0, -1], [1, 0]][i][j]));
        AmbientRep::from_images(t, s).expect("the defining matrices satisfy the relations")
    }

    /// nu^e, the e-th power of the multiplier character of the square of the
    /// eta function: nu(T) = zeta_12, nu(S) = zeta_12^9 = -i, nu(-1) = -1.
    pub fn eta_character(e: i64) -> AmbientRep {
        let one = |r: BigRational| -> SMat {
            let mut m = SMat::zeros(1, 1);
            m[(0, 0)] = Scalar::root_of_unity(&r);
            m
        };
        let e = e.rem_euclid(12);
        AmbientRep {
            t: one(rat(e, 12)),
            s: one(rat(9 * e, 12)),
            t_inv: one(rat(-e, 12)),
        }
    }

    pub fn direct_sum(parts: &[&AmbientRep]) -> AmbientRep {
        let dim: usize = parts.iter().map(|p| p.dim()).sum();
        let place = |pick: fn(&AmbientRep) -> &SMat| -> SMat {
            let mut m = SMat::zeros(dim, dim);
            let mut off = 0;
            for p in parts {
                let b = pick(p);
                for i in 0..p.dim() {
                    for j in 0..p.dim() {
                        m[(off + i, off + j)] = b[(i, j)].clone();
                    }
                }
                off += p.dim();
            }
            m
        };
        AmbientRep {
            t: place(|p| &p.t),
            s: place(|p| &p.s),
            t_inv: place(|p| &p.t_inv),
        }
    }

    /// Tensor with a one-dimensional representation.
    pub fn twist(&self, chi: &AmbientRep) -> AmbientRep {
        assert_eq!(chi.dim(), 1, "twist requires a character");
        AmbientRep {
            t: self.t.scale(&chi.t[(0, 0)]),
            s: self.s.scale(&chi.s[(0, 0)]),
            t_inv: self.t_inv.scale(&chi.t_inv[(0, 0)]),
        }
    }

    /// rho(g), exact while the images are exact.
    pub fn evaluate(&self, g: &Mat2) -> Result<SMat> {
        let w = word_decompose(g)?;
        let mut m = SMat::identity(self.dim());
        for (gen, e) in &w.factors {
            match gen {
                Gen::T => {
                    let base = if *e >= 0 { &self.t } else { &self.t_inv };
                    m = m.mul(&base.pow(e.unsigned_abs()));
                }
                Gen::S => m = m.mul(&self.s),
            }
        }
        if w.negate {
            // rho(-1) = rho(S)^2.
            m = m.mul(&self.s).mul(&self.s);
        }
        Ok(m)
    }

    pub fn evaluate_complex(&self, g: &Mat2) -> Result<CMat> {
        Ok(self.evaluate(g)?.to_cmat())
    }
}

/// A representation of a finite-index subgroup.
#[derive(Clone, Debug)]
pub enum SubgroupRep {
    /// Restriction of an ambient representation to the subgroup.
    Restricted(AmbientRep),
    /// The character of gamma0(level) by which (eta(tau)/eta(level tau))^(2 power)
    /// transforms; weight 0, values in the 12th roots of unity.
    EtaRatio { level: u32, power: i64 },
    /// A representation tensored with nu^power, nu the eta-square multiplier.
    Twisted {
        base: Box<SubgroupRep>,
        nu_power: i64,
    },
}

impl SubgroupRep {
    pub fn dim(&self) -> usize {
        match self {
            SubgroupRep::Restricted(r) => r.dim(),
            SubgroupRep::EtaRatio { .. } => 1,
            SubgroupRep::Twisted { base, .. } => base.dim(),
        }
    }

    /// Tensor with nu^e. Ambient restrictions absorb the twist into their
    /// generator images; other representations stack a twist wrapper.
    pub fn twist_nu(&self, e: i64) -> SubgroupRep {
        let e = e.rem_euclid(12);
        if e == 0 {
            return self.clone();
        }
        match self {
            SubgroupRep::Restricted(r) => {
                SubgroupRep::Restricted(r.twist(&AmbientRep::eta_character(e)))
            }
            SubgroupRep::Twisted { base, nu_power } => base.twist_nu(nu_power + e),
            other => SubgroupRep::Twisted {
                base: Box::new(other.clone()),
                nu_power: e,
            },
        }
    }

    /// Value on a subgroup member. Callers are responsible for membership;
    /// the eta-ratio character additionally requires level | c and checks it.
    pub fn evaluate(&self, h: &Mat2) -> Result<SMat> {
        match self {
            SubgroupRep::Restricted(r) => r.evaluate(h),
            SubgroupRep::Twisted { base, nu_power } => {
                let phase = Scalar::root_of_unity(&rat(
                    (nu_power * eta_exponent(h)?).rem_euclid(12),
                    12,
                ));
                Ok(base.evaluate(h)?.scale(&phase))
            }
            SubgroupRep::EtaRatio { level, power } => {
                let n = *level as i64;
                if !(&h.c / crate::scalar::rat_int(n)).is_integer() {
                    return Err(Error::NotInSubgroup(format!(
                        "{:?} is outside gamma0({})",
                        h, level
                    )));
                }
                // chi(g) = zeta_12^(power (phi(g) - phi(g_N))) with
                // g_N = [[a, N b], [c/N, d]], phi the exponent of nu.
                let gn = Mat2::new(
                    h.a.clone(),
                    &h.b * crate::scalar::rat_int(n),
                    &h.c / crate::scalar::rat_int(n),
                    h.d.clone(),
                );
                let e = (power * (eta_exponent(h)? - eta_exponent(&gn)?)).rem_euclid(12);
                let mut m = SMat::zeros(1, 1);
                m[(0, 0)] = Scalar::root_of_unity(&rat(e, 12));
                Ok(m)
            }
        }
    }
}

/// phi(g) in Z/12: the exponent of the multiplier character nu of the
/// square of eta, nu(g) = zeta_12^phi(g). Computed additively over the word
/// of g from phi(T) = 1, phi(S) = 9, phi(-1) = 6.
pub fn eta_exponent(g: &Mat2) -> Result<i64> {
    let w = word_decompose(g)?;
    let mut e: i64 = if w.negate { 6 } else { 0 };
    for (gen, q) in &w.factors {
        match gen {
            Gen::T => e += q.rem_euclid(12),
            Gen::S => e += 9,
        }
        e = e.rem_euclid(12);
    }
    Ok(e)
}

/// One eigenvalue class of a Jordan analysis.
#[derive(Clone, Debug)]
pub struct EigenClass {
    /// Eigenvalue, exact when the exponent snapped to a rational.
    pub value: Scalar,
    /// mu in [0, 1) with value = e^(2 pi i mu), when recognized.
    pub exponent: Option<BigRational>,
    /// Jordan block sizes, descending. Their sum is the algebraic multiplicity.
    pub block_sizes: Vec<usize>,
}

impl EigenClass {
    pub fn multiplicity(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn max_block(&self) -> usize {
        self.block_sizes.first().copied().unwrap_or(0)
    }
}

/// Jordan decomposition m = p j p^(-1) with columns of p grouped by class,
/// each chain ordered so j carries the eigenvalue on the diagonal and ones
/// on the superdiagonal.
#[derive(Clone, Debug)]
pub struct JordanAnalysis {
    pub classes: Vec<EigenClass>,
    pub p: CMat,
    pub j: CMat,
    /// Column -> class index.
    pub col_class: Vec<usize>,
    /// Block sizes came from exact rank computations.
    pub exact_structure: bool,
}

impl JordanAnalysis {
    /// A translation image is logarithmic when any block exceeds size 1.
    pub fn is_logarithmic(&self) -> bool {
        self.classes.iter().any(|c| c.max_block() > 1)
    }

    /// Column index of the leading vector of each Jordan chain, paired with
    /// the class index. Chains sit in consecutive columns and each starts
    /// with its true eigenvector, so these columns are the eigenvectors of
    /// the analyzed matrix.
    pub fn chain_starts(&self) -> Vec<(usize, usize)> {
        let mut starts = Vec::new();
        let mut col = 0usize;
        for (ci, class) in self.classes.iter().enumerate() {
            for &size in &class.block_sizes {
                starts.push((ci, col));
                col += size;
            }
        }
        starts
    }
}

#[derive(Clone, Copy, Debug)]
pub struct JordanOptions {
    /// Eigenvalues within this distance merge into one class.
    pub cluster_radius: f64,
    /// Relative cutoff for numerical ranks and nullspaces.
    pub rank_tol: f64,
    /// Acceptance threshold for the similarity residual.
    pub residual_tol: f64,
    /// Reject eigenvalues off the unit circle (distance above 1e-6).
    pub require_unitary: bool,
    /// Largest denominator tried when snapping exponents.
    pub snap_max_denominator: u32,
    /// Absolute tolerance for exponent snapping.
    pub snap_tol: f64,
}

impl Default for JordanOptions {
    fn default() -> Self {
        JordanOptions {
            cluster_radius: 1e-8,
            rank_tol: 1e-9,
            residual_tol: 1e-9,
            require_unitary: true,
            snap_max_denominator: 240,
            snap_tol: 1e-8,
        }
    }
}

const UNIT_CIRCLE_TOL: f64 = 1e-6;
const EXACT_PATH_MAX_DIM: usize = 16;

/// Jordan structure of a square matrix. Exact entries of dimension at most
/// 16 in a small cyclotomic field first confirm candidate eigenvalues
/// exactly; otherwise, and whenever the exact candidates do not exhaust the
/// spectrum, the numerical path runs.
pub fn jordan_analyze(m: &SMat, opts: &JordanOptions) -> Result<JordanAnalysis> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    if n == 0 {
        return Ok(JordanAnalysis {
            classes: Vec::new(),
            p: CMat::zeros(0, 0),
            j: CMat::zeros(0, 0),
            col_class: Vec::new(),
            exact_structure: true,
        });
    }
    if m.is_exact() && n <= EXACT_PATH_MAX_DIM {
        if let Some(classes) = exact_structure_pass(m) {
            return finish_with_chains(m, classes, true, opts);
        }
    }
    let classes = numeric_structure_pass(m, opts)?;
    finish_with_chains(m, classes, false, opts)
}

/// Field degree budget for the exact pass. Shifting by a candidate forces
/// every exact rank into the compositum of the entry field and the
/// candidate's field, and elimination cost grows rapidly with phi of the
/// combined order.
const EXACT_PATH_MAX_ORDER: u32 = 24;

/// Proposes candidate eigenvalues from one numeric eigensolve, snapped to
/// rational arguments, then confirms them by exact rank sequences; succeeds
/// only if the confirmed multiplicities exhaust the spectrum. The snap is
/// deliberately loose: the exact ranks are the arbiter, and a spurious
/// candidate merely wastes one rank while a missed one fails the pass over
/// to the numeric path.
fn exact_structure_pass(m: &SMat) -> Option<Vec<EigenClass>> {
    let n = m.rows;
    let mut order: u32 = 1;
    for i in 0..n {
        for j in 0..n {
            if let Scalar::Exact(c) = &m[(i, j)] {
                order = num::integer::lcm(order, c.order());
            }
        }
    }
    let eigs = m.to_cmat().eigenvalues().ok()?;
    let mut cands: Vec<BigRational> = Vec::new();
    for e in &eigs {
        if (e.norm() - 1.0).abs() > 1e-3 {
            return None;
        }
        let arg = (e.im.atan2(e.re) / (2.0 * PI)).rem_euclid(1.0);
        let mu = frac_mod1(&snap_rational(arg, EXACT_PATH_MAX_ORDER, 1e-3)?);
        order = num::integer::lcm(order, mu.denom().to_u32()?);
        if order > EXACT_PATH_MAX_ORDER {
            return None;
        }
        if !cands.contains(&mu) {
            cands.push(mu);
        }
    }
    let mut classes = Vec::new();
    let mut total = 0usize;
    for mu in cands {
        let lambda = Scalar::Exact(CycQ::root_of_unity(&mu).unwrap());
        let shifted = SMat::from_fn(n, n, |i, j| {
            if i == j {
                m[(i, j)].sub(&lambda)
            } else {
                m[(i, j)].clone()
            }
        });
        // Rank sequence of powers until it stabilizes.
        let mut ranks = vec![n];
        let mut power = SMat::identity(n);
        loop {
            power = power.mul(&shifted);
            let r = power.exact_rank()?;
            if r == *ranks.last().unwrap() {
                break;
            }
            ranks.push(r);
            if ranks.len() > n + 1 {
                break;
            }
        }
        if ranks.len() == 1 {
            continue;
        }
        let sizes = sizes_from_ranks(&ranks);
        total += sizes.iter().sum::<usize>();
        classes.push(EigenClass {
            value: lambda,
            exponent: Some(mu),
            block_sizes: sizes,
        });
    }
    if total == n {
        Some(classes)
    } else {
        None
    }
}

/// d_p = r_(p-1) - r_p counts blocks of size >= p; sizes follow by differencing.
fn sizes_from_ranks(ranks: &[usize]) -> Vec<usize> {
    let mut d: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
    d.push(0);
    let mut sizes = Vec::new();
    for p in 0..d.len() - 1 {
        for _ in 0..d[p].saturating_sub(d[p + 1]) {
            sizes.push(p + 1);
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// A Jordan block of size p scatters its eigenvalue by roughly
/// machine-eps^(1/p) under the QR iteration, so clustering retries at
/// growing radii until the rank sequences account for every cluster.
fn numeric_structure_pass(m: &SMat, opts: &JordanOptions) -> Result<Vec<EigenClass>> {
    let mut radius = opts.cluster_radius;
    let mut last = None;
    while radius <= 2e-3 {
        match numeric_structure_at(m, opts, radius) {
            Ok(classes) => return Ok(classes),
            // A defective block scatters its eigenvalue off the unit circle
            // by eps^(1/size), so a failed unitarity check is retried at a
            // larger radius, where the cluster center lands back on the
            // circle.
            Err(e @ (Error::IllConditioned(_) | Error::NonUnitaryEigenvalue { .. })) => {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
        radius *= 10.0;
    }
    Err(last.unwrap_or_else(|| Error::IllConditioned("clustering exhausted all radii".into())))
}

fn numeric_structure_at(m: &SMat, opts: &JordanOptions, radius: f64) -> Result<Vec<EigenClass>> {
    let n = m.rows;
    let mc = m.to_cmat();
    let eigs = mc.eigenvalues()?;

    // Greedy clustering.
    let mut centers: Vec<(Complex64, usize)> = Vec::new();
    for e in &eigs {
        match centers.iter_mut().find(|(c, _)| (e - *c).norm() <= radius) {
            Some((c, k)) => {
                *c = (*c * (*k as f64) + e) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => centers.push((*e, 1)),
        }
    }
    // Separation: clusters must be unambiguous at this radius.
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let d = (centers[i].0 - centers[j].0).norm();
            if d < 10.0 * radius {
                return Err(Error::IllConditioned(format!(
                    "eigenvalue clusters separated by {:.3e} at radius {:.3e}",
                    d, radius
                )));
            }
        }
    }

    let mut classes = Vec::new();
    for (center, mult) in centers {
        let dist = (center.norm() - 1.0).abs();
        if opts.require_unitary && dist > UNIT_CIRCLE_TOL {
            return Err(Error::NonUnitaryEigenvalue {
                value: format!("{:.12}{:+.12}i", center.re, center.im),
                distance: dist,
                tolerance: UNIT_CIRCLE_TOL,
            });
        }
        // Snapping onto the unit circle and onto rational exponents only
        // applies to eigenvalues that are plausibly unitary.
        let on_circle = dist <= UNIT_CIRCLE_TOL;
        let lam = if on_circle { center / center.norm() } else { center };
        let exponent = if on_circle {
            let arg = (lam.im.atan2(lam.re) / (2.0 * PI)).rem_euclid(1.0);
            snap_rational(arg, opts.snap_max_denominator, opts.snap_tol).map(|r| frac_mod1(&r))
        } else {
            None
        };
        let value = match &exponent {
            Some(mu) => Scalar::root_of_unity(mu),
            None => Scalar::from_complex(lam),
        };
        let lam_c = value.to_complex();

        // Rank sequence of (M - lambda)^p, each power measured against the
        // scale ||M - lambda||^p rather than its own possibly-noise pivots.
        let shifted = mc.shift_diag(-lam_c);
        let shifted_scale = shifted.frobenius_norm().max(1e-300);
        let mut ranks = vec![n];
        let mut power = CMat::identity(n);
        let mut scale = 1.0f64;
        for _ in 0..=n {
            power = power.mul(&shifted);
            scale *= shifted_scale;
            let r = power.rank_scaled(opts.rank_tol, scale);
            if r == *ranks.last().unwrap() {
                break;
            }
            ranks.push(r);
        }
        let sizes = sizes_from_ranks(&ranks);
        let found: usize = sizes.iter().sum();
        if found != mult {
            return Err(Error::IllConditioned(format!(
                "eigenvalue {:.6}{:+.6}i: rank sequence sees multiplicity {} but clustering sees {}",
                lam_c.re, lam_c.im, found, mult
            )));
        }
        classes.push(EigenClass {
            value,
            exponent,
            block_sizes: sizes,
        });
    }
    Ok(classes)
}

/// Builds Jordan chains for the given class structure and verifies the
/// similarity m p = p j within the residual tolerance.
fn finish_with_chains(
    m: &SMat,
    mut classes: Vec<EigenClass>,
    exact_structure: bool,
    opts: &JordanOptions,
) -> Result<JordanAnalysis> {
    let n = m.rows;
    let mc = m.to_cmat();
    // Deterministic class order: by exponent when known, else by argument.
    classes.sort_by(|a, b| {
        let ka = class_sort_key(a);
        let kb = class_sort_key(b);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut p = CMat::zeros(n, n);
    let mut j = CMat::zeros(n, n);
    let mut col_class = Vec::with_capacity(n);
    let mut col = 0usize;

    for (ci, class) in classes.iter().enumerate() {
        let lam = class.value.to_complex();
        let shifted = mc.shift_diag(-lam);
        let shifted_scale = shifted.frobenius_norm().max(1e-300);
        let deepest = class.max_block();
        // Nested nullspaces V_1 subset ... subset V_deepest, each power
        // measured against ||M - lambda||^p; a full-size nilpotent part
        // makes the power numerically zero, where its own pivots are noise.
        let mut nulls: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(deepest);
        let mut power = CMat::identity(n);
        let mut scale = 1.0f64;
        for _ in 0..deepest {
            power = power.mul(&shifted);
            scale *= shifted_scale;
            nulls.push(power.nullspace_scaled(opts.rank_tol, scale));
        }
        //

        // Chains, longest first. `span` tracks V_(p-1) plus the level-p
        // tails of chains already chosen.
        let mut chains: Vec<Vec<Vec<Complex64>>> = Vec::new();
        for p_len in (1..=deepest).rev() {
            let want = class.block_sizes.iter().filter(|&&s| s == p_len).count();
            if want == 0 {
                continue;
            }
            let mut span: Vec<Vec<Complex64>> = Vec::new();
            if p_len >= 2 {
                for v in &nulls[p_len - 2] {
                    gs_insert(&mut span, v.clone());
                }
            }
            for chain in &chains {
                // The vector of this chain lying in V_(p_len).
                let idx = chain.len().saturating_sub(p_len);
                gs_insert(&mut span, chain[idx].clone());
            }
            let mut got = 0usize;
            for cand in &nulls[p_len - 1] {
                if got == want {
                    break;
                }
                let mut v = cand.clone();
                if !gs_insert(&mut span, v.clone()) {
                    continue;
                }
                // Build the chain [N^(p-1) u, ..., N u, u].
                let mut chain = vec![v.clone()];
                for _ in 1..p_len {
                    v = shifted.mul_vec(&v);
                    chain.push(v.clone());
                }
                chain.reverse();
                chains.push(chain);
                got += 1;
            }
            if got != want {
                return Err(Error::IllConditioned(format!(
                    "found {} of {} Jordan chains of length {} for an eigenvalue class",
                    got, want, p_len
                )));
            }
        }
        for chain in &chains {
            let start = col;
            for v in chain {
                for (i, x) in v.iter().enumerate() {
                    p[(i, col)] = *x;
                }
                j[(col, col)] = lam;
                if col > start {
                    j[(col - 1, col)] = Complex64::new(1.0, 0.0);
                }
                col_class.push(ci);
                col += 1;
            }
        }
    }
    if col != n {
        return Err(Error::IllConditioned(format!(
            "Jordan chains span {} of {} dimensions",
            col, n
        )));
    }

    // Similarity residual, relative to the matrix scale.
    let scale = mc.frobenius_norm().max(1.0);
    let resid = mc.mul(&p).sub(&p.mul(&j)).frobenius_norm() / scale;
    if resid > opts.residual_tol {
        return Err(Error::IllConditioned(format!(
            "Jordan similarity residual {:.3e} exceeds {:.3e}",
            resid, opts.residual_tol
        )));
    }
    // And p must actually be invertible.
    p.inverse().map_err(|_| {
        Error::IllConditioned("Jordan basis is numerically singular".into())
    })?;

    Ok(JordanAnalysis {
        classes,
        p,
        j,
        col_class,
        exact_structure,
    })
}

fn class_sort_key(c: &EigenClass) -> (f64, f64) {
    match &c.exponent {
        Some(mu) => (mu.to_f64().unwrap_or(0.0), 0.0),
        None => {
            let z = c.value.to_complex();
            let a = z.im.atan2(z.re) / (2.0 * PI);
            (a.rem_euclid(1.0), z.norm())
        }
    }
}

/// Gram-Schmidt insertion; returns false when the vector is inside the span.
fn gs_insert(span: &mut Vec<Vec<Complex64>>, mut v: Vec<Complex64>) -> bool {
    let orig: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if orig == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for u in span.iter() {
            let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, u) in v.iter_mut().zip(u) {
                *x -= dot * u;
            }
        }
    }
    let left: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if left <= 1e-7 * orig {
        return false;
    }
    for x in v.iter_mut() {
        *x /= left;
    }
    span.push(v);
    true
}

/// Classification of a translation image.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TranslationKind {
    /// Diagonalizable with unit-circle eigenvalues.
    Admissible,
    /// Unit-circle eigenvalues but nontrivial Jordan blocks.
    Logarithmic,
}

/// Classifies rho(T): admissible when diagonalizable, logarithmic when a
/// Jordan block of size two or more appears.
pub fn classify_translation(rep: &AmbientRep, opts: &JordanOptions) -> Result<(TranslationKind, JordanAnalysis)> {
    let analysis = jordan_analyze(rep.t_image(), opts)?;
    let kind = if analysis.is_logarithmic() {
        TranslationKind::Logarithmic
    } else {
        TranslationKind::Admissible
    };
    Ok((kind, analysis))
}

/// Measured polynomial growth of ||rho(g)|| against ||g||.
#[derive(Clone, Copy, Debug)]
pub struct GrowthEstimate {
    /// Least alpha on a quarter-integer grid for which the large-||g|| half
    /// of the samples stays below the small-||g|| half after dividing by
    /// ||g||^alpha.
    pub alpha: f64,
    /// Least-squares slope of log ||rho(g)|| against log ||g||.
    pub slope: f64,
}

/// Samples random words and estimates the growth exponent of the
/// representation. Words are resampled so the matrix norms spread over
/// several decades.
pub fn norm_growth_probe<R: rand::Rng>(
    rep: &AmbientRep,
    rng: &mut R,
    samples: usize,
) -> Result<GrowthEstimate> {
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(samples);
    for i in 0..samples {
        let len = 3 + (i % 18);
        let g = crate::subgroup::random_word(rng, len);
        let gn = g.to_cmat_entries_norm();
        if gn <= 1.5 {
            continue;
        }
        let img = rep.evaluate_complex(&g)?;
        let rn = img.frobenius_norm().max(1e-300);
        points.push((gn.ln(), rn.ln()));
    }
    if points.len() < 8 {
        return Err(Error::InvalidInput(
            "growth probe needs more usable samples".into(),
        ));
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let half = points.len() / 2;
    let mut alpha = f64::NAN;
    let mut a = 0.0;
    while a <= 2.0 + 1e-9 {
        let peak = |pts: &[(f64, f64)]| -> f64 {
            pts.iter().map(|(x, y)| y - a * x).fold(f64::MIN, f64::max)
        };
        if peak(&points[half..]) <= peak(&points[..half]) + 1e-9 {
            alpha = a;
            break;
        }
        a += 0.25;
    }
    // Least-squares slope.
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(GrowthEstimate { alpha, slope })
}

impl Mat2 {
    fn to_cmat_entries_norm(&self) -> f64 {
        use crate::scalar::rational_to_f64;
        let v = [
            rational_to_f64(&self.a),
            rational_to_f64(&self.b),
            rational_to_f64(&self.c),
            rational_to_f64(&self.d),
        ];
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;
    use rand::SeedableRng;

    /// The standard two-dimensional representation rho(g) = g itself.
    fn defining_rep() -> AmbientRep {
        let t = SMat::from_fn(2, 2, |i, j| {
            Scalar::from_int([[1, 1], [0, 1]][i][j])
        });
        let s = SMat::from_fn(2, 2, |i, j| {
            Scalar::from_int([[0, -1], [1, 0]][i][j])
        });
        AmbientRep::from_images(t, s).unwrap()
    }

    #[test]
    fn word_evaluation_matches_matrix() {
        let rho = defining_rep();
        let g = Mat2::from_i64(47, 13, 18, 5);
        let img = rho.evaluate(&g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = [[47.0, 13.0], [18.0, 5.0]][i][j];
                assert!((img[(i, j)].to_complex().re - want).abs() < 1e-12);
                assert!(img[(i, j)].is_exact());
            }
        }
    }

    #[test]
    fn relation_validation() {
        let t = SMat::identity(2);
        let mut s = SMat::identity(2);
        s[(0, 0)] = Scalar::from_int(2);
        assert!(AmbientRep::from_images(t, s).is_err());
    }

    #[test]
    fn eta_character_is_homomorphism() {
        let nu = AmbientRep::eta_character(1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let g1 = crate::subgroup::random_word(&mut rng, 8);
            let g2 = crate::subgroup::random_word(&mut rng, 8);
            let lhs = nu.evaluate(&g1.mul(&g2)).unwrap();
            let rhs = nu.evaluate(&g1).unwrap().mul(&nu.evaluate(&g2).unwrap());
            assert!(lhs.approx_eq(&rhs, 1e-12));
        }
        // nu(-1) = -1 and nu(T) = zeta_12.
        let m1 = nu.evaluate(&Mat2::one().neg()).unwrap();
        assert!((m1[(0, 0)].to_complex() - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        let t = nu.evaluate(&Mat2::t_pow(1)).unwrap();
        let want = Complex64::new((PI / 6.0).cos(), (PI / 6.0).sin());
        assert!((t[(0, 0)].to_complex() - want).norm() < 1e-14);
    }

    #[test]
    fn eta_exponent_values() {
        assert_eq!(eta_exponent(&Mat2::t_pow(1)).unwrap(), 1);
        assert_eq!(eta_exponent(&Mat2::s()).unwrap(), 9);
        assert_eq!(eta_exponent(&Mat2::one().neg()).unwrap(), 6);
        assert_eq!(eta_exponent(&Mat2::one()).unwrap(), 0);
    }

    #[test]
    fn eta_ratio_character_is_multiplicative_on_gamma0() {
        let sys = crate::subgroup::enumerate(crate::subgroup::Subgroup::Gamma0(2), 64).unwrap();
        for v in [1i64, 4, -3] {
            let chi = SubgroupRep::EtaRatio { level: 2, power: v };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
            for _ in 0..25 {
                let h1 = sys.random_member(&mut rng, 9);
                let h2 = sys.random_member(&mut rng, 9);
                let lhs = chi.evaluate(&h1.mul(&h2)).unwrap();
                let rhs = chi.evaluate(&h1).unwrap().mul(&chi.evaluate(&h2).unwrap());
                assert!(lhs.approx_eq(&rhs, 1e-12), "v = {}", v);
            }
        }
        let chi = SubgroupRep::EtaRatio { level: 2, power: 1 };
        assert!(chi.evaluate(&Mat2::s()).is_err());
    }

    #[test]
    fn jordan_diagonalizable_exact() {
        // rho(T) of nu: a single exact eigenvalue zeta_12.
        let nu = AmbientRep::eta_character(1);
        let a = jordan_analyze(nu.t_image(), &JordanOptions::default()).unwrap();
        assert!(a.exact_structure);
        assert_eq!(a.classes.len(), 1);
        assert_eq!(a.classes[0].exponent, Some(rat(1, 12)));
        assert_eq!(a.classes[0].block_sizes, vec![1]);
        assert!(!a.is_logarithmic());
    }

    #[test]
    fn jordan_defective_exact() {
        // The defining representation: rho(T) = [[1,1],[0,1]], one 2-block at 1.
        let rho = defining_rep();
        let a = jordan_analyze(rho.t_image(), &JordanOptions::default()).unwrap();
        assert!(a.exact_structure);
        assert_eq!(a.classes.len(), 1);
        assert_eq!(a.classes[0].block_sizes, vec![2]);
        assert_eq!(a.classes[0].exponent, Some(rat_int(0)));
        assert!(a.is_logarithmic());
        // Chains satisfy the similarity.
        let mc = rho.t_image().to_cmat();
        let resid = mc.mul(&a.p).sub(&a.p.mul(&a.j)).frobenius_norm();
        assert!(resid < 1e-12);
    }

    #[test]
    fn jordan_numeric_mixed_blocks() {
        // Non-exact entries force the numerical path: J = diag(J_2(i), 1).
        let i = Complex64::new(0.0, 1.0);
        let jm = CMat::from_rows(&[
            vec![i, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), i, Complex64::new(0.0, 0.0)],
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        ]);
        let q = CMat::from_rows(&[
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.3, 0.1),
                Complex64::new(-0.2, 0.0),
            ],
            vec![
                Complex64::new(0.0, 0.4),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            vec![
                Complex64::new(0.2, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        ]);
        let m = q.mul(&jm).mul(&q.inverse().unwrap());
        let sm = SMat::from_fn(3, 3, |r, c| Scalar::from_complex(m[(r, c)]) );
        let a = jordan_analyze(&sm, &JordanOptions::default()).unwrap();
        assert!(!a.exact_structure);
        let mut sizes: Vec<Vec<usize>> = a.classes.iter().map(|c| c.block_sizes.clone()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![vec![1], vec![2]]);
        // Exponents snapped to 0 and 1/4.
        let mut exps: Vec<BigRational> = a
            .classes
            .iter()
            .map(|c| c.exponent.clone().unwrap())
            .collect();
        exps.sort();
        assert_eq!(exps, vec![rat_int(0), rat(1, 4)]);
    }

    #[test]
    fn jordan_rejects_nonunitary() {
        let mut m = SMat::identity(2);
        m[(0, 0)] = Scalar::from_f64(1.5, 0.0);
        let err = jordan_analyze(&m, &JordanOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonUnitaryEigenvalue { .. }));
        let mut opts = JordanOptions::default();
        opts.require_unitary = false;
        assert!(jordan_analyze(&m, &opts).is_ok());
    }

    #[test]
    fn growth_of_characters_and_defining() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let nu = AmbientRep::eta_character(5);
        let g = norm_growth_probe(&nu, &mut rng, 160).unwrap();
        assert!(g.alpha.abs() < 1e-9, "character grows: {:?}", g);
        assert!(g.slope.abs() < 0.1);
        let rho = defining_rep();
        let g = norm_growth_probe(&rho, &mut rng, 160).unwrap();
        assert!((g.alpha - 1.0).abs() < 1e-9, "defining rep: {:?}", g);
        assert!((g.slope - 1.0).abs() < 0.15);
    }

    #[test]
    fn direct_sum_and_twist() {
        let nu = AmbientRep::eta_character(2);
        let triv = AmbientRep::trivial(2);
        let sum = AmbientRep::direct_sum(&[&nu, &triv]);
        assert_eq!(sum.dim(), 3);
        let tw = triv.twist(&nu);
        let g = Mat2::from_i64(2, 1, 3, 2);
        let a = tw.evaluate(&g).unwrap();
        let b = nu.evaluate(&g).unwrap();
        for i in 0..2 {
            assert!(a[(i, i)].approx_eq(&b[(0, 0)], 1e-13));
        }
    }
}
