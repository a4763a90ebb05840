//! Induction of subgroup representations to the full modular group, the
//! companion structure of the induced translation image, and the predicted
//! spectrum at each cusp.
//!
//! For a subgroup H with coset representatives g_r the induced
//! representation acts by blocks: rho~(gamma)[r, s] = rho(g_r^(-1) gamma g_s)
//! when that conjugate lands in H, zero otherwise; for each r exactly one s
//! qualifies, located as the coset of gamma^(-1) g_r. With the transversal
//! g_(i,j) = T^j A_i^(-1), the image of T is block diagonal across cusp
//! classes, and the class-i block is the m h_i x m h_i companion
//!
//!   [ 0      ...  0  rho(t_i) ]
//!   [ I_m    ...  0  0        ]
//!   [ ...             ...     ]
//!   [ 0      ...  I_m 0       ]
//!
//! with t_i = A_i T^(h_i) A_i^(-1) the stabilizer generator. Its spectrum
//! follows from rho(t_i): an eigenvalue e^(2 pi i mu) with Jordan sizes B
//! contributes eigenvalues e^(2 pi i (mu + a)/h_i), a = 0..h_i-1, each with
//! the same sizes B. Exponents of the induced matrix therefore determine
//! the source exponent and the residue class a by splitting tilde(mu) as
//! (mu + a)/h_i, recovered by a = floor(tilde(mu) h_i).

use crate::cmat::SMat;
use crate::error::Result;
use crate::rep::{jordan_analyze, AmbientRep, EigenClass, JordanAnalysis, JordanOptions, SubgroupRep};
use crate::scalar::{frac_mod1, rat_int, Scalar};
use crate::sl2::Mat2;
use crate::subgroup::CosetSystem;
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::ToPrimitive;
use std::sync::Arc;

/// An induced representation, evaluated directly through coset arithmetic.
#[derive(Clone)]
pub struct InducedRep {
    pub sys: Arc<CosetSystem>,
    pub rho: SubgroupRep,
}

impl InducedRep {
    pub fn new(sys: Arc<CosetSystem>, rho: SubgroupRep) -> InducedRep {
        InducedRep { sys, rho }
    }

    /// Dimension of the inducing representation.
    pub fn block_dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn dim(&self) -> usize {
        self.sys.index() * self.rho.dim()
    }

    /// rho~(gamma); exact while the subgroup representation is exact.
    pub fn evaluate(&self, gamma: &Mat2) -> Result<SMat> {
        let m = self.rho.dim();
        let n = self.sys.index();
        let gamma_inv = gamma.inv()?;
        let mut out = SMat::zeros(n * m, n * m);
        for r in 0..n {
            let s = self.sys.coset_of(&gamma_inv.mul(&self.sys.reps[r]))?;
            let h = self.sys.reps[r].inv()?.mul(gamma).mul(&self.sys.reps[s]);
            debug_assert!(self.sys.contains(&h).unwrap_or(false));
            let block = self.rho.evaluate(&h)?;
            for i in 0..m {
                for j in 0..m {
                    out[(r * m + i, s * m + j)] = block[(i, j)].clone();
                }
            }
        }
        Ok(out)
    }

    /// The companion block of the image of T belonging to cusp class ci.
    pub fn companion_block(&self, ci: usize) -> Result<SMat> {
        let cusp = &self.sys.cusps[ci];
        let top = self.rho.evaluate(&cusp.stabilizer)?;
        Ok(companion_of(&top, cusp.width))
    }

    /// Packages the induced representation as an ambient representation by
    /// its images at T and S, validating the defining relations.
    pub fn as_ambient(&self) -> Result<AmbientRep> {
        AmbientRep::from_images(self.evaluate(&Mat2::t_pow(1))?, self.evaluate(&Mat2::s())?)
    }
}

impl std::fmt::Debug for InducedRep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "InducedRep {{ {} cosets x dim {} }}",
            self.sys.index(),
            self.rho.dim()
        )
    }
}

/// The m h x m h companion matrix over an m x m top block: identity
/// subdiagonal blocks and the top block in the upper-right corner. Raised
/// to the h-th power it is block diagonal with conjugates of the top block.
pub fn companion_of(top: &SMat, h: u32) -> SMat {
    assert_eq!(top.rows, top.cols);
    let m = top.rows;
    let h = h as usize;
    let mut out = SMat::zeros(h * m, h * m);
    for j in 1..h {
        for k in 0..m {
            out[(j * m + k, (j - 1) * m + k)] = Scalar::one();
        }
    }
    for i in 0..m {
        for j in 0..m {
            out[(i, (h - 1) * m + j)] = top[(i, j)].clone();
        }
    }
    out
}

/// Splits an exponent of the induced translation image at a width-h cusp
/// into (source exponent, residue class): tilde(mu) = (mu + a)/h with
/// mu in [0,1) and a in 0..h.
pub fn split_exponent(tilde_mu: &BigRational, h: u32) -> (BigRational, u32) {
    let t = frac_mod1(tilde_mu);
    let scaled = &t * rat_int(h as i64);
    let a = scaled.floor();
    let mu = &scaled - &a;
    (mu, a.to_integer().to_u32().unwrap_or(0))
}

/// One predicted eigenvalue class of a companion block.
#[derive(Clone, Debug)]
pub struct PredictedClass {
    /// (mu + a) / h when the source exponent snapped to a rational.
    pub exponent: Option<BigRational>,
    pub value: Complex64,
    pub block_sizes: Vec<usize>,
}

/// Predicted spectrum of the induced image of T at one cusp class.
#[derive(Clone, Debug)]
pub struct CuspSpectrum {
    pub cusp: usize,
    pub width: u32,
    pub classes: Vec<PredictedClass>,
    /// Analysis of rho(t_i) the prediction was derived from.
    pub source: JordanAnalysis,
}

/// Spreads each eigenvalue class of a source analysis over its h-th roots:
/// e^(2 pi i mu) contributes e^(2 pi i (mu + a)/h) for a = 0..h, same block
/// sizes.
pub fn spread_classes(source: &JordanAnalysis, h: u32) -> Vec<PredictedClass> {
    let mut classes = Vec::new();
    for class in &source.classes {
        for a in 0..h {
            match &class.exponent {
                Some(mu) => {
                    let e = frac_mod1(&((mu + rat_int(a as i64)) / rat_int(h as i64)));
                    let value = Scalar::root_of_unity(&e).to_complex();
                    classes.push(PredictedClass {
                        exponent: Some(e),
                        value,
                        block_sizes: class.block_sizes.clone(),
                    });
                }
                None => {
                    let z = class.value.to_complex();
                    let theta = z.im.atan2(z.re).rem_euclid(2.0 * std::f64::consts::PI);
                    let r = z.norm().powf(1.0 / h as f64);
                    let ang = (theta + 2.0 * std::f64::consts::PI * a as f64) / h as f64;
                    classes.push(PredictedClass {
                        exponent: None,
                        value: Complex64::from_polar(r, ang),
                        block_sizes: class.block_sizes.clone(),
                    });
                }
            }
        }
    }
    classes
}

/// Predicts the spectrum of every companion block from the stabilizer
/// images alone.
pub fn predict_spectrum(ind: &InducedRep, opts: &JordanOptions) -> Result<Vec<CuspSpectrum>> {
    let mut out = Vec::with_capacity(ind.sys.cusps.len());
    for (ci, cusp) in ind.sys.cusps.iter().enumerate() {
        let image = ind.rho.evaluate(&cusp.stabilizer)?;
        let source = jordan_analyze(&image, opts)?;
        out.push(CuspSpectrum {
            cusp: ci,
            width: cusp.width,
            classes: spread_classes(&source, cusp.width),
            source,
        });
    }
    Ok(out)
}

/// Outcome of comparing a companion block's computed Jordan structure with
/// its prediction.
#[derive(Clone, Debug)]
pub struct SpectrumCheck {
    pub cusp: usize,
    pub matched: bool,
    pub detail: String,
    pub computed: JordanAnalysis,
}

/// Eigenvalue match tolerance when an exponent did not snap.
const VALUE_MATCH_TOL: f64 = 1e-7;

/// Computes the Jordan structure of each companion block and compares it
/// class by class with the prediction. A structural mismatch retries once
/// at a tighter cluster radius before being reported.
pub fn verify_spectrum(ind: &InducedRep, opts: &JordanOptions) -> Result<Vec<SpectrumCheck>> {
    let predictions = predict_spectrum(ind, opts)?;
    let mut out = Vec::with_capacity(predictions.len());
    for pred in predictions {
        let block = ind.companion_block(pred.cusp)?;
        let analysis = jordan_analyze(&block, opts)?;
        let (matched, detail) = match compare_spectrum(&pred, &analysis) {
            Ok(()) => (true, String::new()),
            Err(first) => {
                let mut tight = *opts;
                tight.cluster_radius = 1e-10;
                match jordan_analyze(&block, &tight) {
                    Ok(re) => match compare_spectrum(&pred, &re) {
                        Ok(()) => (true, String::new()),
                        Err(d) => (false, d),
                    },
                    Err(_) => (false, first),
                }
            }
        };
        out.push(SpectrumCheck {
            cusp: pred.cusp,
            matched,
            detail,
            computed: analysis,
        });
    }
    Ok(out)
}

/// Matches a computed Jordan structure against a prediction as multisets of
/// (eigenvalue, block sizes) classes. Ok on success, a description of the
/// first discrepancy otherwise.
pub fn compare_spectrum(pred: &CuspSpectrum, got: &JordanAnalysis) -> std::result::Result<(), String> {
    let total_pred: usize = pred.classes.iter().map(|c| c.block_sizes.iter().sum::<usize>()).sum();
    let total_got: usize = got.classes.iter().map(EigenClass::multiplicity).sum();
    if total_pred != total_got {
        return Err(format!(
            "multiplicity totals differ: predicted {}, computed {}",
            total_pred, total_got
        ));
    }
    let mut used = vec![false; got.classes.len()];
    for p in &pred.classes {
        let mut found = None;
        for (k, g) in got.classes.iter().enumerate() {
            if used[k] {
                continue;
            }
            let same = match (&p.exponent, &g.exponent) {
                (Some(a), Some(b)) => a == b,
                _ => (g.value.to_complex() - p.value).norm() <= VALUE_MATCH_TOL,
            };
            if same {
                found = Some(k);
                break;
            }
        }
        let k = match found {
            Some(k) => k,
            None => {
                return Err(format!(
                    "predicted eigenvalue {:?} (exponent {:?}) not computed",
                    p.value,
                    p.exponent.as_ref().map(crate::scalar::format_rational)
                ))
            }
        };
        used[k] = true;
        if got.classes[k].block_sizes != p.block_sizes {
            return Err(format!(
                "block sizes at eigenvalue {:?}: predicted {:?}, computed {:?}",
                p.value, p.block_sizes, got.classes[k].block_sizes
            ));
        }
    }
    if let Some(k) = used.iter().position(|u| !u) {
        return Err(format!(
            "computed eigenvalue {:?} was not predicted",
            got.classes[k].value
        ));
    }
    Ok(())
}

/// Eigenvector of the companion block for an h-th root xi of an eigenvalue
/// lambda of rho(t_i) with eigenvector v: the j-th m-subvector is xi^(-j) v.
pub fn companion_eigenvector(
    v: &[Complex64],
    xi: Complex64,
    h: u32,
) -> Vec<Complex64> {
    let m = v.len();
    let mut w = vec![Complex64::new(0.0, 0.0); m * h as usize];
    let mut scale = Complex64::new(1.0, 0.0);
    for j in 0..h as usize {
        for k in 0..m {
            w[j * m + k] = scale * v[k];
        }
        scale /= xi;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::subgroup::{enumerate, Subgroup, DEFAULT_MAX_INDEX};
    use rand::SeedableRng;

    fn gamma0_2() -> Arc<CosetSystem> {
        Arc::new(enumerate(Subgroup::Gamma0(2), DEFAULT_MAX_INDEX).unwrap())
    }

    fn trivial_ind() -> InducedRep {
        InducedRep::new(gamma0_2(), SubgroupRep::Restricted(AmbientRep::trivial(1)))
    }

    #[test]
    fn induced_translation_is_block_companion() {
        let ind = trivial_ind();
        let t = ind.evaluate(&Mat2::t_pow(1)).unwrap();
        // Cusp oo occupies index 0 (width 1), cusp 0 indices 1..3 (width 2).
        let expect = [
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 1.0, 0.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                let d = (t[(i, j)].to_complex() - Complex64::new(expect[i][j], 0.0)).norm();
                assert!(d < 1e-14, "entry ({}, {})", i, j);
            }
        }
        // companion_block agrees with the diagonal blocks of the image.
        for (ci, cusp) in ind.sys.cusps.iter().enumerate() {
            let b = ind.companion_block(ci).unwrap();
            let off = cusp.offset;
            for i in 0..b.rows {
                for j in 0..b.cols {
                    assert!(b[(i, j)].approx_eq(&t[(off + i, off + j)], 0.0));
                }
            }
        }
    }

    #[test]
    fn induced_is_a_homomorphism_with_one_block_per_row() {
        let sys = gamma0_2();
        let chi = SubgroupRep::EtaRatio { level: 2, power: 3 };
        let ind = InducedRep::new(sys, chi);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let g1 = crate::subgroup::random_word(&mut rng, 9);
            let g2 = crate::subgroup::random_word(&mut rng, 9);
            let lhs = ind.evaluate(&g1.mul(&g2)).unwrap();
            let rhs = ind.evaluate(&g1).unwrap().mul(&ind.evaluate(&g2).unwrap());
            assert!(lhs.approx_eq(&rhs, 1e-12));
            // Exactly one nonzero block per block row.
            let img = ind.evaluate(&g1).unwrap();
            for r in 0..3 {
                let nz: usize = (0..3)
                    .filter(|&s| !img[(r, s)].is_zero())
                    .count();
                assert_eq!(nz, 1);
            }
        }
        // Restriction to the subgroup puts rho(h) in the identity block.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(18);
        let h = ind.sys.random_member(&mut rng, 10);
        let img = ind.evaluate(&h).unwrap();
        let direct = ind.rho.evaluate(&h).unwrap();
        assert!(img[(0, 0)].approx_eq(&direct[(0, 0)], 1e-12));
    }

    #[test]
    fn induction_respects_powers() {
        let ind = trivial_ind();
        let g = Mat2::from_i64(2, 1, 3, 2);
        let img = ind.evaluate(&g).unwrap();
        let img3 = ind.evaluate(&g.mul(&g).mul(&g)).unwrap();
        assert!(img.pow(3).approx_eq(&img3, 1e-12));
    }

    #[test]
    fn trivial_spectrum_prediction() {
        let ind = trivial_ind();
        let opts = JordanOptions::default();
        let pred = predict_spectrum(&ind, &opts).unwrap();
        assert_eq!(pred.len(), 2);
        // Cusp oo: exponent 0. Cusp 0 (width 2): exponents 0 and 1/2.
        assert_eq!(pred[0].classes.len(), 1);
        assert_eq!(pred[0].classes[0].exponent, Some(rat_int(0)));
        let mut exps: Vec<BigRational> = pred[1]
            .classes
            .iter()
            .map(|c| c.exponent.clone().unwrap())
            .collect();
        exps.sort();
        assert_eq!(exps, vec![rat_int(0), rat(1, 2)]);
        let checks = verify_spectrum(&ind, &opts).unwrap();
        assert!(checks.iter().all(|c| c.matched), "{:?}", checks.iter().map(|c| &c.detail).collect::<Vec<_>>());
    }

    #[test]
    fn defective_spectrum_roundtrip() {
        // Restriction of the defining representation: rho(t_i) are 2-blocks,
        // so every companion eigenvalue keeps Jordan size 2.
        let t = SMat::from_fn(2, 2, |i, j| Scalar::from_int([[1, 1], [0, 1]][i][j]));
        let s = SMat::from_fn(2, 2, |i, j| Scalar::from_int([[0, -1], [1, 0]][i][j]));
        let rho = AmbientRep::from_images(t, s).unwrap();
        let ind = InducedRep::new(gamma0_2(), SubgroupRep::Restricted(rho));
        let opts = JordanOptions::default();
        let pred = predict_spectrum(&ind, &opts).unwrap();
        // Cusp 0 has width 2: source exponent 0 spreads to 0 and 1/2.
        let mut pairs: Vec<(BigRational, Vec<usize>)> = pred[1]
            .classes
            .iter()
            .map(|c| (c.exponent.clone().unwrap(), c.block_sizes.clone()))
            .collect();
        pairs.sort();
        assert_eq!(pairs, vec![(rat_int(0), vec![2]), (rat(1, 2), vec![2])]);
        let checks = verify_spectrum(&ind, &opts).unwrap();
        assert!(checks.iter().all(|c| c.matched), "{:?}", checks.iter().map(|c| &c.detail).collect::<Vec<_>>());
    }

    #[test]
    fn eta_ratio_spectrum_on_gamma0_3() {
        let sys = Arc::new(enumerate(Subgroup::Gamma0(3), DEFAULT_MAX_INDEX).unwrap());
        let ind = InducedRep::new(sys, SubgroupRep::EtaRatio { level: 3, power: 4 });
        let opts = JordanOptions::default();
        let checks = verify_spectrum(&ind, &opts).unwrap();
        assert!(checks.iter().all(|c| c.matched));
        // Width-3 cusp spreads the character exponent in thirds.
        let pred = predict_spectrum(&ind, &opts).unwrap();
        let zero_cusp = &pred[1];
        assert_eq!(zero_cusp.width, 3);
        for c in &zero_cusp.classes {
            assert_eq!(c.exponent.as_ref().unwrap().denom().to_u32().unwrap() % 3, 0);
        }
    }

    #[test]
    fn exponent_splitting_roundtrip() {
        for h in 1u32..=6 {
            for num in 0..(24 * h as i64) {
                let tilde = rat(num, 24 * h as i64);
                let (mu, a) = split_exponent(&tilde, h);
                assert!(a < h);
                let back = frac_mod1(&((&mu + rat_int(a as i64)) / rat_int(h as i64)));
                assert_eq!(back, frac_mod1(&tilde));
            }
        }
    }

    #[test]
    fn companion_eigenvector_formula() {
        let ind = trivial_ind();
        let b = ind.companion_block(1).unwrap().to_cmat();
        // rho(t_0) = 1, v = (1); xi = -1 is a square root of 1.
        let xi = Complex64::new(-1.0, 0.0);
        let w = companion_eigenvector(&[Complex64::new(1.0, 0.0)], xi, 2);
        let img = b.mul_vec(&w);
        for (x, y) in img.iter().zip(&w) {
            assert!((x - xi * y).norm() < 1e-13);
        }
    }
}
