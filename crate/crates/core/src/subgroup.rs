//! Finite-index subgroups of SL2(Z): membership, left-coset enumeration,
//! cusp classes, widths, and scaling matrices.
//!
//! All subgroups here contain -I. The built-in congruence families are the
//! preimages in SL2(Z) of their images in PSL2(Z): `Gamma0(n)` is the usual
//! group, `Gamma1(n)` and `Principal(n)` denote +/- Gamma_1(n) and
//! +/- Gamma(n). Arbitrary subgroups are described by a table of how T and S
//! permute the left cosets.
//!
//! Conventions, used throughout the crate:
//! * Cosets are left cosets g H, compared by g1^(-1) g2 in H.
//! * T acts on cosets by left multiplication; its orbits are in bijection
//!   with the cusp classes of H, the orbit of gH corresponding to the cusp
//!   g^(-1)(oo). The orbit size is the classical width h of the cusp.
//! * Each cusp class i carries a scaling matrix A_i in SL2(Z) with
//!   A_i(oo) = cusp_i, and the flattened coset representatives are
//!   g_(i,j) = T^j A_i^(-1), j = 0..h_i-1, blocks ordered with the cusp at
//!   infinity first and the rest by (denominator, numerator) of the cusp.
//! * The rational scaling matrix [[c, -1], [1, 0]] for a finite cusp
//!   c = p/q maps oo to c with determinant 1 but rational entries; measured
//!   through it the cusp width is q^2 h. Both normalizations are exposed,
//!   the integral one drives all computation.

use crate::error::{Error, Result};
use crate::scalar::rat_int;
use crate::sl2::{word_decompose, ExtendedPoint, Gen, Mat2};
use num::rational::BigRational;
use num::traits::ToPrimitive;
use rand::Rng;
use std::collections::HashMap;
use std::fmt;

/// Hard ceiling on coset enumeration.
pub const DEFAULT_MAX_INDEX: usize = 16384;

/// How T and S permute the left cosets of a subgroup; index 0 is the coset
/// of the identity. This is the generic description of a finite-index
/// subgroup containing -I.
#[derive(Clone, Debug)]
pub struct CosetAction {
    t: Vec<usize>,
    s: Vec<usize>,
    /// Cycle structure of t: (cycle id, position in cycle) per index.
    t_cycle: Vec<(usize, usize)>,
    t_cycle_len: Vec<usize>,
}

impl CosetAction {
    /// Validates that (t, s) defines a transitive SL2(Z)-action fixing 0
    /// under -I: both are permutations, s^4 = id, (s t)^3 = s^2, s^2(0) = 0.
    pub fn new(t: Vec<usize>, s: Vec<usize>) -> Result<Self> {
        let n = t.len();
        if n == 0 || s.len() != n {
            return Err(Error::InvalidInput(
                "coset action needs two permutations of equal positive length".into(),
            ));
        }
        for perm in [&t, &s] {
            let mut seen = vec![false; n];
            for &x in perm {
                if x >= n || seen[x] {
                    return Err(Error::InvalidInput(format!(
                        "coset action table is not a permutation of 0..{}",
                        n
                    )));
                }
                seen[x] = true;
            }
        }
        let compose = |f: &[usize], g: &[usize]| -> Vec<usize> {
            (0..n).map(|i| f[g[i]]).collect()
        };
        let s2 = compose(&s, &s);
        let s4 = compose(&s2, &s2);
        if s4 != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidInput("coset action violates S^4 = 1".into()));
        }
        let st = compose(&s, &t);
        let st3 = compose(&st, &compose(&st, &st));
        if st3 != s2 {
            return Err(Error::InvalidInput(
                "coset action violates (S T)^3 = S^2".into(),
            ));
        }
        if s2[0] != 0 {
            return Err(Error::InvalidInput(
                "coset action does not absorb -I (S^2 must fix the identity coset)".into(),
            ));
        }
        // Transitivity.
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let t_inv = invert_perm(&t);
        let s_inv = invert_perm(&s);
        while let Some(i) = stack.pop() {
            for next in [t[i], s[i], t_inv[i], s_inv[i]] {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        if seen.iter().any(|&b| !b) {
            return Err(Error::InvalidInput(
                "coset action is not transitive; the table describes several orbits".into(),
            ));
        }
        let (t_cycle, t_cycle_len) = cycle_structure(&t);
        Ok(CosetAction {
            t,
            s,
            t_cycle,
            t_cycle_len,
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn t_table(&self) -> &[usize] {
        &self.t
    }

    pub fn s_table(&self) -> &[usize] {
        &self.s
    }

    /// Coset of T^e g_i H.
    fn apply_t_pow(&self, i: usize, e: i64) -> usize {
        let (cid, pos) = self.t_cycle[i];
        let len = self.t_cycle_len[cid] as i64;
        let shift = e.rem_euclid(len) as usize;
        // Walk forward within the cycle.
        let mut j = i;
        let _ = pos;
        for _ in 0..shift {
            j = self.t[j];
        }
        j
    }

    /// Coset index of g H, by running the word of g through the table.
    pub fn coset_of_matrix(&self, g: &Mat2) -> Result<usize> {
        let w = word_decompose(g)?;
        let mut i = 0usize;
        // Apply factors right to left: coset(x w') = sigma_x(coset(w')).
        for (gen, e) in w.factors.iter().rev() {
            match gen {
                Gen::T => i = self.apply_t_pow(i, *e),
                Gen::S => i = self.s[i],
            }
        }
        if w.negate {
            i = self.s[self.s[i]];
        }
        Ok(i)
    }
}

fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

fn cycle_structure(p: &[usize]) -> (Vec<(usize, usize)>, Vec<usize>) {
    let n = p.len();
    let mut info = vec![(usize::MAX, 0usize); n];
    let mut lens = Vec::new();
    for start in 0..n {
        if info[start].0 != usize::MAX {
            continue;
        }
        let cid = lens.len();
        let mut i = start;
        let mut pos = 0usize;
        loop {
            info[i] = (cid, pos);
            pos += 1;
            i = p[i];
            if i == start {
                break;
            }
        }
        lens.push(pos);
    }
    (info, lens)
}

/// A finite-index subgroup of SL2(Z) containing -I.
#[derive(Clone, Debug)]
pub enum Subgroup {
    /// SL2(Z) itself.
    Full,
    /// Lower-left entry divisible by n.
    Gamma0(u32),
    /// +/- (diagonal = 1 mod n, lower-left = 0 mod n).
    Gamma1(u32),
    /// +/- (congruent to the identity mod n).
    Principal(u32),
    /// Arbitrary subgroup via its coset table.
    Table(CosetAction),
}

impl Subgroup {
    pub fn contains(&self, g: &Mat2) -> Result<bool> {
        g.check_unimodular()?;
        match self {
            Subgroup::Full => Ok(true),
            Subgroup::Gamma0(n) => {
                let [_, _, c, _] = g.entries_mod(*n).unwrap();
                Ok(c == 0)
            }
            Subgroup::Gamma1(n) => {
                let [a, _, c, d] = g.entries_mod(*n).unwrap();
                let one = 1 % n;
                let neg = (n - 1) % n;
                Ok(c == 0 && ((a == one && d == one) || (a == neg && d == neg)))
            }
            Subgroup::Principal(n) => {
                let [a, b, c, d] = g.entries_mod(*n).unwrap();
                let one = 1 % n;
                let neg = (n - 1) % n;
                Ok(b == 0 && c == 0 && ((a == one && d == one) || (a == neg && d == neg)))
            }
            Subgroup::Table(act) => Ok(act.coset_of_matrix(g)? == 0),
        }
    }

    /// Canonical left-coset key for the congruence families; None for tables.
    fn congruence_key(&self, g: &Mat2) -> Option<Vec<u32>> {
        match self {
            Subgroup::Full => Some(Vec::new()),
            Subgroup::Gamma0(n) => {
                let [a, _, c, _] = g.entries_mod(*n)?;
                Some(canon_column_up_to_units(a, c, *n))
            }
            Subgroup::Gamma1(n) => {
                let [a, _, c, _] = g.entries_mod(*n)?;
                let p = [a % n, c % n];
                let q = [(n - a) % n, (n - c) % n];
                Some(p.min(q).to_vec())
            }
            Subgroup::Principal(n) => {
                let e = g.entries_mod(*n)?;
                let p: Vec<u32> = e.iter().map(|x| x % n).collect();
                let q: Vec<u32> = e.iter().map(|x| (n - x) % n).collect();
                Some(p.min(q))
            }
            Subgroup::Table(_) => None,
        }
    }

    pub fn family_name(&self) -> String {
        match self {
            Subgroup::Full => "full".into(),
            Subgroup::Gamma0(n) => format!("gamma0({})", n),
            Subgroup::Gamma1(n) => format!("gamma1({})", n),
            Subgroup::Principal(n) => format!("principal({})", n),
            Subgroup::Table(a) => format!("table({} cosets)", a.len()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Subgroup::Gamma0(n) | Subgroup::Gamma1(n) | Subgroup::Principal(n) if *n == 0 => {
                Err(Error::InvalidInput("congruence level must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Lexicographically least (lambda a, lambda c) mod n over units lambda.
fn canon_column_up_to_units(a: u32, c: u32, n: u32) -> Vec<u32> {
    if n <= 1 {
        return vec![0, 0];
    }
    let mut best: Option<[u32; 2]> = None;
    for l in 1..n {
        if gcd_u32(l, n) != 1 {
            continue;
        }
        let cand = [
            ((l as u64 * a as u64) % n as u64) as u32,
            ((l as u64 * c as u64) % n as u64) as u32,
        ];
        if best.map(|b| cand < b).unwrap_or(true) {
            best = Some(cand);
        }
    }
    best.unwrap().to_vec()
}

fn gcd_u32(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// One cusp class of the subgroup.
#[derive(Clone)]
pub struct CuspClass {
    /// Representative point, chosen least under (denominator, numerator),
    /// infinity first.
    pub point: ExtendedPoint,
    /// Classical width: the T-orbit size of the class's cosets.
    pub width: u32,
    /// A in SL2(Z) with A(oo) = point, sign-fixed so the bottom row is
    /// lexicographically positive.
    pub scaling: Mat2,
    /// [[c, -1], [1, 0]] for a finite cusp c, identity at infinity.
    pub rational_scaling: Mat2,
    /// Width measured through `rational_scaling`: q^2 * width for c = p/q.
    pub rational_width: BigRational,
    /// Parabolic generator of the stabilizer: A T^width A^(-1), in H.
    pub stabilizer: Mat2,
    /// Flat index of g_(i,0) in the coset representative list.
    pub offset: usize,
}

impl fmt::Debug for CuspClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CuspClass {{ point: {:?}, width: {}, offset: {} }}",
            self.point, self.width, self.offset
        )
    }
}

/// A fully enumerated subgroup: flat coset representatives grouped by cusp
/// class, with constant-time coset location.
pub struct CosetSystem {
    pub subgroup: Subgroup,
    pub cusps: Vec<CuspClass>,
    /// g_(i,j) = T^j A_i^(-1), flattened in cusp order.
    pub reps: Vec<Mat2>,
    /// Flat index -> (cusp class, j).
    pub block_of: Vec<(usize, usize)>,
    /// sigma_T on flat indices: flat index of T g_r H.
    pub t_perm: Vec<usize>,
    key_map: HashMap<Vec<u32>, usize>,
    table_map: Vec<usize>,
}

impl CosetSystem {
    pub fn index(&self) -> usize {
        self.reps.len()
    }

    /// Flat coset index of g H.
    pub fn coset_of(&self, g: &Mat2) -> Result<usize> {
        g.check_unimodular()?;
        match &self.subgroup {
            Subgroup::Table(act) => {
                let raw = act.coset_of_matrix(g)?;
                Ok(self.table_map[raw])
            }
            sub => {
                let key = sub.congruence_key(g).unwrap();
                self.key_map.get(&key).copied().ok_or_else(|| {
                    Error::Inconsistent(format!(
                        "coset key {:?} missing from enumeration of {}",
                        key,
                        sub.family_name()
                    ))
                })
            }
        }
    }

    /// Flat index of T^e g_r H.
    pub fn translate(&self, r: usize, e: i64) -> usize {
        let mut i = r;
        let m = e.rem_euclid(self.cycle_len(r) as i64);
        for _ in 0..m {
            i = self.t_perm[i];
        }
        i
    }

    fn cycle_len(&self, r: usize) -> u32 {
        self.cusps[self.block_of[r].0].width
    }

    /// Membership in the subgroup.
    pub fn contains(&self, g: &Mat2) -> Result<bool> {
        self.subgroup.contains(g)
    }

    /// gamma -> g_r^(-1) gamma, a member of the subgroup in gamma's coset.
    pub fn project_member(&self, gamma: &Mat2) -> Result<Mat2> {
        let r = self.coset_of(gamma)?;
        let h = self.reps[r].inv()?.mul(gamma);
        debug_assert!(self.contains(&h).unwrap_or(false));
        Ok(h)
    }

    /// Uniform-ish random element of the subgroup: a random word in the
    /// ambient group projected into H by its coset representative.
    pub fn random_member<R: Rng>(&self, rng: &mut R, word_len: usize) -> Mat2 {
        let g = random_word(rng, word_len);
        self.project_member(&g).expect("projection cannot fail on group elements")
    }

    /// Least n >= 1 with g^n in H, searched up to `bound`.
    pub fn smallest_power_inside(&self, g: &Mat2, bound: u32) -> Result<u32> {
        let mut p = g.clone();
        for n in 1..=bound {
            if self.contains(&p)? {
                return Ok(n);
            }
            p = p.mul(g);
        }
        Err(Error::Inconsistent(format!(
            "no power of {:?} up to {} landed in {}",
            g,
            bound,
            self.subgroup.family_name()
        )))
    }
}

impl fmt::Debug for CosetSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CosetSystem {{ {}, index {}, cusps {:?} }}",
            self.subgroup.family_name(),
            self.index(),
            self.cusps
        )
    }
}

pub fn random_word<R: Rng>(rng: &mut R, len: usize) -> Mat2 {
    let mut g = Mat2::one();
    for _ in 0..len {
        match rng.random_range(0..3u32) {
            0 => g = g.mul(&Mat2::t_pow(1)),
            1 => g = g.mul(&Mat2::t_pow(-1)),
            _ => g = g.mul(&Mat2::s()),
        }
    }
    g
}

/// Enumerates the left cosets of the subgroup and organizes them into cusp
/// classes. Fails with `CosetBoundExceeded` if the index exceeds max_index.
pub fn enumerate(subgroup: Subgroup, max_index: usize) -> Result<CosetSystem> {
    subgroup.validate()?;

    // Breadth-first enumeration with deterministic neighbor order.
    let mut raw_reps: Vec<Mat2> = vec![Mat2::one()];
    let mut raw_key: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut raw_of_table: Vec<usize> = Vec::new();
    let locate_raw = |g: &Mat2,
                      raw_key: &HashMap<Vec<u32>, usize>,
                      sub: &Subgroup|
     -> Result<Option<usize>> {
        match sub {
            Subgroup::Table(act) => {
                let raw = act.coset_of_matrix(g)?;
                Ok(Some(raw))
            }
            s => Ok(raw_key.get(&s.congruence_key(g).unwrap()).copied()),
        }
    };

    match &subgroup {
        Subgroup::Table(act) => {
            // Table already fixes the raw indexing; find a representative per index.
            let n = act.len();
            if n > max_index {
                return Err(Error::CosetBoundExceeded { bound: max_index });
            }
            let mut found: Vec<Option<Mat2>> = vec![None; n];
            found[0] = Some(Mat2::one());
            let mut queue = std::collections::VecDeque::from([0usize]);
            let mut remaining = n - 1;
            while let Some(i) = queue.pop_front() {
                if remaining == 0 {
                    break;
                }
                let g = found[i].clone().unwrap();
                for (next, mat) in [
                    (act.t[i], Mat2::t_pow(1).mul(&g)),
                    (invert_perm(&act.t)[i], Mat2::t_pow(-1).mul(&g)),
                    (act.s[i], Mat2::s().mul(&g)),
                ] {
                    if found[next].is_none() {
                        found[next] = Some(mat);
                        remaining -= 1;
                        queue.push_back(next);
                    }
                }
            }
            raw_reps = found
                .into_iter()
                .map(|o| o.expect("transitive action reaches every coset"))
                .collect();
            raw_of_table = (0..n).collect();
        }
        sub => {
            raw_key.insert(sub.congruence_key(&Mat2::one()).unwrap(), 0);
            let mut queue = std::collections::VecDeque::from([0usize]);
            while let Some(i) = queue.pop_front() {
                let g = raw_reps[i].clone();
                for mat in [
                    Mat2::t_pow(1).mul(&g),
                    Mat2::t_pow(-1).mul(&g),
                    Mat2::s().mul(&g),
                ] {
                    let key = sub.congruence_key(&mat).unwrap();
                    if !raw_key.contains_key(&key) {
                        if raw_reps.len() >= max_index {
                            return Err(Error::CosetBoundExceeded { bound: max_index });
                        }
                        raw_key.insert(key, raw_reps.len());
                        queue.push_back(raw_reps.len());
                        raw_reps.push(mat);
                    }
                }
            }
        }
    }

    let n = raw_reps.len();

    // T-orbits on raw cosets.
    let t = Mat2::t_pow(1);
    let mut sigma = vec![0usize; n];
    for i in 0..n {
        let ti = t.mul(&raw_reps[i]);
        sigma[i] = locate_raw(&ti, &raw_key, &subgroup)?.ok_or_else(|| {
            Error::Inconsistent("translate left enumerated coset set".into())
        })?;
    }

    let mut orbit_id = vec![usize::MAX; n];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if orbit_id[start] != usize::MAX {
            continue;
        }
        let mut orbit = Vec::new();
        let mut i = start;
        loop {
            orbit_id[i] = orbits.len();
            orbit.push(i);
            i = sigma[i];
            if i == start {
                break;
            }
        }
        orbits.push(orbit);
    }

    // Pick per orbit the representative with the least cusp point.
    struct OrbitPick {
        point: ExtendedPoint,
        width: u32,
    }
    // Canonical representative per class: least denominator, then
    // nonnegative before negative numerator, then least magnitude. The
    // search walks candidate points and tests class membership through the
    // coset of matrix_to_here(x)^(-1); numerators are periodic mod
    // h_oo * q under the translation stabilizer, so |p| <= h_oo * q covers
    // every class that meets denominator q.
    let h_infinity = orbits[orbit_id[0]].len() as i64;
    let mut picks: Vec<OrbitPick> = Vec::with_capacity(orbits.len());
    for (oid, orbit) in orbits.iter().enumerate() {
        let width = orbit.len() as u32;
        if oid == orbit_id[0] {
            picks.push(OrbitPick {
                point: ExtendedPoint::infinity(),
                width,
            });
            continue;
        }
        // Least denominator among the enumerated candidates bounds the search.
        let q_bound = orbit
            .iter()
            .map(|&r| {
                raw_reps[r]
                    .inv()
                    .unwrap()
                    .apply_ext(&ExtendedPoint::infinity())
                    .denominator()
                    .to_i64()
                    .expect("cusp denominators stay small")
            })
            .min()
            .unwrap();
        let mut found: Option<ExtendedPoint> = None;
        'search: for q in 1..=q_bound {
            let span = h_infinity * q;
            let mut numerators: Vec<i64> = Vec::new();
            for m in 0..=span {
                numerators.push(m);
                if m != 0 {
                    numerators.push(-m);
                }
            }
            for p in numerators {
                if gcd_u64(p.unsigned_abs(), q as u64) != 1 {
                    continue;
                }
                let pt = ExtendedPoint::from_integers(p, q);
                let b_inv = pt.matrix_to_here().inv()?;
                if let Some(raw) = locate_raw(&b_inv, &raw_key, &subgroup)? {
                    if orbit_id[raw] == oid {
                        found = Some(pt);
                        break 'search;
                    }
                }
            }
        }
        let point = found.ok_or_else(|| {
            Error::Inconsistent("cusp class search missed its own candidate".into())
        })?;
        picks.push(OrbitPick { point, width });
    }
    let mut order: Vec<usize> = (0..picks.len()).collect();
    order.sort_by_key(|&o| picks[o].point.sort_key());

    // Assemble flat representatives g_(i,j) = T^j A_i^(-1).
    let mut cusps: Vec<CuspClass> = Vec::with_capacity(order.len());
    let mut reps: Vec<Mat2> = Vec::with_capacity(n);
    let mut block_of: Vec<(usize, usize)> = Vec::with_capacity(n);
    for (ci, &o) in order.iter().enumerate() {
        let pick = &picks[o];
        let mut a = pick.point.matrix_to_here();
        // Sign-fix: bottom row lexicographically positive.
        let neg = {
            use num::traits::{Signed, Zero};
            let c = &a.c;
            c.is_negative() || (c.is_zero() && a.d.is_negative())
        };
        if neg {
            a = a.neg();
        }
        let a_inv = a.inv()?;
        let offset = reps.len();
        for j in 0..pick.width {
            reps.push(Mat2::t_pow(j as i64).mul(&a_inv));
            block_of.push((ci, j as usize));
        }
        let stabilizer = a.mul(&Mat2::t_pow(pick.width as i64)).mul(&a_inv);
        debug_assert!(subgroup.contains(&stabilizer)?);
        let (rational_scaling, rational_width) = match pick.point.to_rational() {
            None => (Mat2::one(), rat_int(pick.width as i64)),
            Some(c) => {
                let q = c.denom().clone();
                let m = Mat2::new(c.clone(), rat_int(-1), rat_int(1), rat_int(0));
                let w = BigRational::from_integer(&q * &q) * rat_int(pick.width as i64);
                (m, w)
            }
        };
        cusps.push(CuspClass {
            point: pick.point.clone(),
            width: pick.width,
            scaling: a,
            rational_scaling,
            rational_width,
            stabilizer,
            offset,
        });
    }

    // Flat key map and T-permutation.
    let mut key_map = HashMap::new();
    let mut table_map = vec![0usize; raw_of_table.len()];
    match &subgroup {
        Subgroup::Table(act) => {
            for (flat, g) in reps.iter().enumerate() {
                let raw = act.coset_of_matrix(g)?;
                table_map[raw] = flat;
            }
        }
        sub => {
            for (flat, g) in reps.iter().enumerate() {
                key_map.insert(sub.congruence_key(g).unwrap(), flat);
            }
            if key_map.len() != n {
                return Err(Error::Inconsistent(
                    "coset keys collided while flattening".into(),
                ));
            }
        }
    }

    let mut sys = CosetSystem {
        subgroup,
        cusps,
        reps,
        block_of,
        t_perm: Vec::new(),
        key_map,
        table_map,
    };
    let mut t_perm = Vec::with_capacity(n);
    for r in 0..n {
        t_perm.push(sys.coset_of(&t.mul(&sys.reps[r]))?);
    }
    sys.t_perm = t_perm;

    // The flattening must respect the block structure: T g_(i,j) lies in the
    // coset of g_(i, j+1 mod h).
    for r in 0..n {
        let (i, j) = sys.block_of[r];
        let h = sys.cusps[i].width as usize;
        let expect = sys.cusps[i].offset + (j + 1) % h;
        if sys.t_perm[r] != expect {
            return Err(Error::Inconsistent(
                "translation permutation disagrees with the block layout".into(),
            ));
        }
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn sys(sub: Subgroup) -> CosetSystem {
        enumerate(sub, DEFAULT_MAX_INDEX).unwrap()
    }

    #[test]
    fn gamma0_2_structure() {
        let s = sys(Subgroup::Gamma0(2));
        assert_eq!(s.index(), 3);
        assert_eq!(s.cusps.len(), 2);
        assert!(s.cusps[0].point.is_infinity());
        assert_eq!(s.cusps[0].width, 1);
        assert_eq!(s.cusps[1].point, ExtendedPoint::from_integers(0, 1));
        assert_eq!(s.cusps[1].width, 2);
        // A for the zero cusp is exactly S.
        assert_eq!(s.cusps[1].scaling, Mat2::s());
        assert_eq!(s.cusps[1].rational_width, rat_int(2));
    }

    #[test]
    fn gamma0_4_widths() {
        let s = sys(Subgroup::Gamma0(4));
        assert_eq!(s.index(), 6);
        let pts: Vec<String> = s.cusps.iter().map(|c| format!("{}", c.point)).collect();
        assert_eq!(pts, vec!["oo", "0", "1/2"]);
        let widths: Vec<u32> = s.cusps.iter().map(|c| c.width).collect();
        assert_eq!(widths, vec![1, 4, 1]);
        // Rational widths scale by the square of the cusp denominator.
        assert_eq!(s.cusps[1].rational_width, rat_int(4));
        assert_eq!(s.cusps[2].rational_width, rat_int(4));
    }

    #[test]
    fn principal_2_structure() {
        let s = sys(Subgroup::Principal(2));
        assert_eq!(s.index(), 6);
        let widths: Vec<u32> = s.cusps.iter().map(|c| c.width).collect();
        assert_eq!(widths, vec![2, 2, 2]);
        let pts: Vec<String> = s.cusps.iter().map(|c| format!("{}", c.point)).collect();
        assert_eq!(pts, vec!["oo", "0", "1"]);
    }

    #[test]
    fn gamma1_5_index() {
        let s = sys(Subgroup::Gamma1(5));
        assert_eq!(s.index(), 12);
        let mut widths: Vec<u32> = s.cusps.iter().map(|c| c.width).collect();
        widths.sort();
        assert_eq!(widths, vec![1, 1, 5, 5]);
    }

    #[test]
    fn full_group() {
        let s = sys(Subgroup::Full);
        assert_eq!(s.index(), 1);
        assert_eq!(s.cusps.len(), 1);
        assert_eq!(s.cusps[0].width, 1);
    }

    #[test]
    fn membership_and_cosets() {
        let s = sys(Subgroup::Gamma0(2));
        assert!(s.contains(&Mat2::t_pow(5)).unwrap());
        assert!(s.contains(&Mat2::from_i64(1, 0, 2, 1)).unwrap());
        assert!(!s.contains(&Mat2::s()).unwrap());
        assert!(s.contains(&Mat2::one().neg()).unwrap());
        // Coset location is constant on cosets.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = random_word(&mut rng, 12);
            let r = s.coset_of(&g).unwrap();
            let h = s.random_member(&mut rng, 8);
            assert_eq!(s.coset_of(&g.mul(&h)).unwrap(), r);
            // Representative and element differ by a member.
            let d = s.reps[r].inv().unwrap().mul(&g);
            assert!(s.contains(&d).unwrap());
        }
    }

    #[test]
    fn stabilizers_are_parabolic_members() {
        for sub in [Subgroup::Gamma0(4), Subgroup::Principal(2), Subgroup::Gamma1(5)] {
            let s = sys(sub);
            for c in &s.cusps {
                assert!(c.stabilizer.is_parabolic());
                assert!(s.contains(&c.stabilizer).unwrap());
                assert_eq!(c.stabilizer.parabolic_fixed_point().unwrap(), c.point);
                assert_eq!(c.scaling.apply_ext(&ExtendedPoint::infinity()), c.point);
                // Width minimality: no smaller T-power conjugates in.
                for d in 1..c.width {
                    let g = c
                        .scaling
                        .mul(&Mat2::t_pow(d as i64))
                        .mul(&c.scaling.inv().unwrap());
                    assert!(!s.contains(&g).unwrap());
                }
            }
            let total: u32 = s.cusps.iter().map(|c| c.width).sum();
            assert_eq!(total as usize, s.index());
        }
    }

    #[test]
    fn rational_scaling_width_is_minimal_conjugation_period() {
        let s = sys(Subgroup::Gamma0(4));
        // Cusp 1/2: rational width 4 means A_c T^4 A_c^(-1) is the first
        // T-power the rational scaling conjugates into the group.
        let c = &s.cusps[2];
        let a = &c.rational_scaling;
        let ai = a.inv().unwrap();
        let w = c.rational_width.to_integer().to_i64().unwrap();
        for n in 1..=w {
            let g = a.mul(&Mat2::t_pow(n)).mul(&ai);
            let inside = g.is_integral() && s.contains(&g).unwrap_or(false);
            assert_eq!(inside, n == w, "power {}", n);
        }
    }

    #[test]
    fn table_subgroup_matches_congruence_version() {
        // Export gamma0(2) as a coset action, re-enumerate from the table.
        let base = sys(Subgroup::Gamma0(2));
        let n = base.index();
        let t: Vec<usize> = base.t_perm.clone();
        let mut sperm = vec![0usize; n];
        for r in 0..n {
            sperm[r] = base.coset_of(&Mat2::s().mul(&base.reps[r])).unwrap();
        }
        let act = CosetAction::new(t, sperm).unwrap();
        let s = sys(Subgroup::Table(act));
        assert_eq!(s.index(), 3);
        let widths: Vec<u32> = s.cusps.iter().map(|c| c.width).collect();
        assert_eq!(widths, vec![1, 2]);
        assert_eq!(s.cusps[1].point, ExtendedPoint::from_integers(0, 1));
        // Membership agrees on random elements.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let g = random_word(&mut rng, 10);
            assert_eq!(s.contains(&g).unwrap(), base.contains(&g).unwrap());
        }
    }

    #[test]
    fn table_validation_rejects_bad_input() {
        assert!(CosetAction::new(vec![0, 1], vec![0, 0]).is_err());
        // Valid permutations but broken relation: (ST)^3 = T^3 = T != S^2.
        assert!(CosetAction::new(vec![1, 0], vec![0, 1]).is_err());
        // Intransitive: two fixed points everywhere.
        assert!(CosetAction::new(vec![0, 1], vec![0, 1]).is_err());
        // T and S both mapped to the 2-cycle is the abelianization-mod-2
        // kernel, a genuine index 2 subgroup; it must be accepted.
        assert!(CosetAction::new(vec![1, 0], vec![1, 0]).is_ok());
    }

    #[test]
    fn bound_is_enforced() {
        match enumerate(Subgroup::Gamma0(11), 5) {
            Err(Error::CosetBoundExceeded { bound }) => assert_eq!(bound, 5),
            other => panic!("expected bound error, got {:?}", other.map(|s| s.index())),
        }
    }

    #[test]
    fn smallest_power() {
        let s = sys(Subgroup::Gamma0(2));
        assert_eq!(s.smallest_power_inside(&Mat2::t_pow(1), 10).unwrap(), 1);
        assert_eq!(s.smallest_power_inside(&Mat2::s(), 10).unwrap(), 2);
        let st = Mat2::s().mul(&Mat2::t_pow(1));
        // S T has order 6 in PSL2; its cube is -I which lies in the group.
        assert_eq!(s.smallest_power_inside(&st, 10).unwrap(), 3);
    }
}
