//! End-to-end acceptance gate. Each numbered check prints one PASS/FAIL
//! line; the test fails if any check fails. Run with `--nocapture` to see
//! the lines on success.

use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;
use vvaf_lift::cmat::SMat;
use vvaf_lift::induction::{companion_eigenvector, companion_of, InducedRep};
use vvaf_lift::lift::{induced_tau_one, LiftedVVAF, VVAF};
use vvaf_lift::qseries::{delta_series, eta24_literal_product, eta_power_series};
use vvaf_lift::rep::{jordan_analyze, AmbientRep, JordanOptions, SubgroupRep};
use vvaf_lift::scalar::{rat, rat_int, rational_to_f64, Scalar};
use vvaf_lift::sl2::Mat2;
use vvaf_lift::subgroup::{enumerate, random_word, CosetSystem, Subgroup, DEFAULT_MAX_INDEX};

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { name, pass, detail }
}

fn gamma0_2() -> Arc<CosetSystem> {
    Arc::new(enumerate(Subgroup::Gamma0(2), DEFAULT_MAX_INDEX).unwrap())
}

fn full_sys() -> Arc<CosetSystem> {
    Arc::new(enumerate(Subgroup::Full, DEFAULT_MAX_INDEX).unwrap())
}

/// Golden-ratio spread of sample points with imaginary parts >= base_im.
fn sample_points(count: usize, base_im: f64) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let golden = 0.618_033_988_749_894_9_f64;
            let re = ((k as f64 * golden) % 1.0) - 0.5;
            Complex64::new(0.9 * re, base_im + 0.09 * k as f64)
        })
        .collect()
}

fn frobenius_mat2(g: &Mat2) -> f64 {
    let e = [
        rational_to_f64(&g.a),
        rational_to_f64(&g.b),
        rational_to_f64(&g.c),
        rational_to_f64(&g.d),
    ];
    e.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Least-squares slope of y against x.
fn fit_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in samples {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// One randomized source Jordan structure: exponent classes with block
/// sizes, realized as an exact matrix p j p^(-1).
struct CompanionInstance {
    top: SMat,
    width: u32,
    /// Merged: exponent class -> block sizes, descending.
    classes: BTreeMap<BigRational, Vec<usize>>,
}

fn random_instance(rng: &mut ChaCha8Rng) -> CompanionInstance {
    let size_choices: [&[usize]; 6] = [&[1], &[2], &[3], &[1, 1], &[2, 1], &[1, 1, 1]];
    let sizes = size_choices[rng.random_range(0..size_choices.len())];
    let width = rng.random_range(1..=4u32);
    let mut classes: BTreeMap<BigRational, Vec<usize>> = BTreeMap::new();
    for &size in sizes {
        let den = rng.random_range(1..=12i64);
        let num = rng.random_range(0..den);
        classes.entry(rat(num, den)).or_default().push(size);
    }
    for v in classes.values_mut() {
        v.sort_unstable_by(|a, b| b.cmp(a));
    }
    let m: usize = sizes.iter().sum();
    let mut j = SMat::zeros(m, m);
    let mut col = 0usize;
    for (mu, block_sizes) in &classes {
        for &size in block_sizes {
            for r in 0..size {
                j[(col + r, col + r)] = Scalar::root_of_unity(mu);
                if r + 1 < size {
                    j[(col + r, col + r + 1)] = Scalar::one();
                }
            }
            col += size;
        }
    }
    let p = loop {
        let entries: Vec<i64> = (0..m * m).map(|_| rng.random_range(-3..=3)).collect();
        let cand = SMat::from_fn(m, m, |i, k| Scalar::from_int(entries[i * m + k]));
        if cand.inverse().is_ok() {
            break cand;
        }
    };
    let top = p.mul(&j).mul(&p.inverse().unwrap());
    CompanionInstance {
        top,
        width,
        classes,
    }
}

/// Checks 1-3: companion spectra, companion eigenvectors, defectiveness
/// certificates, over 200 randomized instances.
fn companion_checks() -> (Outcome, Outcome, Outcome) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let opts = JordanOptions::default();
    let mut spectra_ok = 0usize;
    let mut max_value_dev = 0.0f64;
    let mut max_eigvec_residual = 0.0f64;
    let mut eigvec_count = 0usize;
    let mut defective_instances = 0usize;
    let mut certified = 0usize;
    let mut spectra_fail = String::new();
    const INSTANCES: usize = 200;

    for k in 0..INSTANCES {
        let inst = random_instance(&mut rng);
        let h = inst.width;
        let companion = companion_of(&inst.top, h);
        let analysis = jordan_analyze(&companion, &opts).unwrap();

        // Predicted classes by construction: (mu + a)/h for a = 0..h.
        let mut predicted: Vec<(Complex64, Vec<usize>)> = Vec::new();
        for (mu, sizes) in &inst.classes {
            for a in 0..h {
                let e = (mu + rat_int(a as i64)) / rat_int(h as i64);
                predicted.push((Scalar::root_of_unity(&e).to_complex(), sizes.clone()));
            }
        }

        let mut used = vec![false; predicted.len()];
        let mut matched = analysis.classes.len() == predicted.len();
        if matched {
            'outer: for class in &analysis.classes {
                let got = class.value.to_complex();
                let mut sizes = class.block_sizes.clone();
                sizes.sort_unstable_by(|a, b| b.cmp(a));
                for (i, (value, psizes)) in predicted.iter().enumerate() {
                    if !used[i] && (got - value).norm() <= 1e-8 && sizes == *psizes {
                        used[i] = true;
                        max_value_dev = max_value_dev.max((got - value).norm());
                        continue 'outer;
                    }
                }
                matched = false;
                break;
            }
        }
        if matched {
            spectra_ok += 1;
        } else if spectra_fail.is_empty() {
            spectra_fail = format!("first mismatch at instance {}", k);
        }

        // Check 2: companion eigenvectors from source eigenvectors.
        let source_analysis = jordan_analyze(&inst.top, &opts).unwrap();
        let companion_float = companion.to_cmat();
        let n = companion.rows;
        for (ci, col) in source_analysis.chain_starts() {
            let v = source_analysis.p.column(col);
            let lam = source_analysis.classes[ci].value.to_complex();
            for a in 0..h {
                let xi = match &source_analysis.classes[ci].exponent {
                    Some(mu) => {
                        let e = (mu + rat_int(a as i64)) / rat_int(h as i64);
                        Scalar::root_of_unity(&e).to_complex()
                    }
                    None => {
                        let theta =
                            (lam.arg() + 2.0 * std::f64::consts::PI * a as f64) / h as f64;
                        Complex64::from_polar(1.0, theta)
                    }
                };
                let w = companion_eigenvector(&v, xi, h);
                let cw = companion_float.mul_vec(&w);
                let wn = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let rn = cw
                    .iter()
                    .zip(&w)
                    .map(|(l, r)| (l - xi * r).norm())
                    .fold(0.0, f64::max);
                max_eigvec_residual = max_eigvec_residual.max(rn / wn);
                eigvec_count += 1;
            }
        }

        // Check 3: every defective class carries a rank certificate,
        // geometric multiplicity strictly below algebraic.
        let defective: Vec<_> = analysis
            .classes
            .iter()
            .filter(|c| c.block_sizes.iter().any(|&s| s > 1))
            .collect();
        if !defective.is_empty() {
            defective_instances += 1;
            let all_certified = defective.iter().all(|class| {
                let lam = class.value.to_complex();
                let shifted = companion_float.shift_diag(-lam);
                let rank = shifted.rank(1e-8);
                let geometric = n - rank;
                geometric == class.block_sizes.len() && geometric < class.multiplicity()
            });
            if all_certified {
                certified += 1;
            }
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    let c1 = outcome(
        "companion translation spectra",
        spectra_ok == INSTANCES && elapsed < 10.0,
        format!(
            "{}/{} instances matched, max eigenvalue deviation {:.2e}, {:.2}s {}",
            spectra_ok, INSTANCES, max_value_dev, elapsed, spectra_fail
        ),
    );
    let c2 = outcome(
        "companion eigenvector residuals",
        max_eigvec_residual <= 1e-9 && eigvec_count > 0,
        format!(
            "{} eigenvectors, max residual {:.2e} (tolerance 1e-9)",
            eigvec_count, max_eigvec_residual
        ),
    );
    let c3 = outcome(
        "defectiveness certificates",
        defective_instances > 0 && certified == defective_instances,
        format!(
            "{}/{} defective instances certified by rank deficiency",
            certified, defective_instances
        ),
    );
    (c1, c2, c3)
}

fn main_checks() -> Vec<Outcome> {
    let mut out = Vec::new();
    let sys2 = gamma0_2();
    let opts = JordanOptions::default();

    // Check 4: lifts on the index-3 subgroup against direct evaluation of
    // the sources at the coset translates, 10 points with Im >= 2,
    // truncation at least 50 after interleaving.
    let started = Instant::now();
    let tau_src = VVAF::tau_one(0, 104).unwrap().restrict(sys2.clone()).unwrap();
    let tau_lift = LiftedVVAF::assemble_lift(&tau_src).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let mut lifts = vec![("tau-one", tau_lift)];
    for _ in 0..3 {
        let mut power = 0i64;
        while power == 0 {
            power = rng.random_range(-6..=6);
        }
        let src = VVAF::eta_ratio_form(2, power, 104).unwrap();
        lifts.push(("eta-ratio", LiftedVVAF::assemble_lift(&src).unwrap()));
    }
    let taus = sample_points(10, 2.0);
    let mut oracle_max = 0.0f64;
    let mut oracle_ok = true;
    let mut trunc_min = BigRational::from_integer(1_000_000.into());
    for (_, lift) in &lifts {
        let r = lift.oracle_report(&taus, 1e-8).unwrap();
        oracle_max = oracle_max.max(r.max_rel_error);
        oracle_ok &= r.ok;
        trunc_min = trunc_min.min(lift.form.cusp_series[0].valid_to().clone());
    }
    let elapsed = started.elapsed().as_secs_f64();
    out.push(outcome(
        "lift matches direct evaluation",
        oracle_ok && trunc_min >= rat_int(50) && elapsed < 30.0,
        format!(
            "4 lifts, 10 points, max relative error {:.2e} (tolerance 1e-8), truncation {}, {:.2}s",
            oracle_max,
            trunc_min.to_integer(),
            elapsed
        ),
    ));

    // Check 5: coefficient interleaving through order 20 in every channel,
    // exact for exact sources, 1e-12 otherwise.
    let eta3 = VVAF::eta_ratio_form(2, 3, 48).unwrap();
    let eta3_lift = LiftedVVAF::assemble_lift(&eta3).unwrap();
    let il_exact = eta3_lift.interleaving_report(&opts, 1e-12).unwrap();
    let itau = induced_tau_one(2, 0, 40).unwrap();
    let il_log = itau.interleaving_report(&opts, 1e-12).unwrap();
    let reach = eta3_lift.form.cusp_series[0].valid_to() >= &rat_int(20)
        && itau.form.cusp_series[0].valid_to() >= &rat_int(20);
    out.push(outcome(
        "coefficient interleaving",
        il_exact.ok && il_exact.exact && il_log.ok && reach,
        format!(
            "exact source: {} keys identical, exact = {}; logarithmic source: {} keys, max deviation {:.2e}",
            il_exact.keys_checked, il_exact.exact, il_log.keys_checked, il_log.max_deviation
        ),
    ));

    // Check 6: spectral support vanishing at every cusp.
    let van_a = eta3_lift.vanishing_report(&opts, 1e-9).unwrap();
    let van_b = itau.vanishing_report(&opts, 1e-9).unwrap();
    out.push(outcome(
        "spectral support vanishing",
        van_a.ok && van_b.ok,
        format!(
            "max normalized violation {:.2e} (tolerance 1e-9)",
            van_a.max_violation.max(van_b.max_violation)
        ),
    ));

    // Check 7: weight-zero functional equation on 20 random group elements.
    let mut rng7 = ChaCha8Rng::seed_from_u64(7007);
    let fe = lifts[0]
        .1
        .form
        .functional_equation_report(&mut rng7, 20, 1e-7)
        .unwrap();
    out.push(outcome(
        "weight-zero functional equation",
        fe.ok,
        format!(
            "{} samples, max relative residual {:.2e} (tolerance 1e-7)",
            fe.samples, fe.max_rel_residual
        ),
    ));

    // Check 8: pole order bookkeeping. Holomorphic sources keep orders
    // <= 0, cusp forms < 0, and each source order is width times the
    // lifted order of its block.
    let mut class_ok = true;
    let mut relation_ok = true;
    let mut class_detail = String::new();
    let delta = VVAF::new(
        12,
        SubgroupRep::Restricted(AmbientRep::trivial(1)),
        full_sys(),
        vec![delta_series(36).unwrap()],
    )
    .unwrap();
    let delta_res = delta.restrict(sys2.clone()).unwrap();
    let cases: Vec<(&str, VVAF, bool, bool)> = vec![
        ("constant", VVAF::constant_one(sys2.clone(), 36).unwrap(), true, false),
        ("cusp form", delta_res, true, true),
        ("weakly holomorphic", eta3.clone(), false, false),
    ];
    for (label, form, expect_holo, expect_cusp) in cases {
        if form.flags.holomorphic != expect_holo || form.flags.cusp_form != expect_cusp {
            class_ok = false;
            class_detail = format!("{} misclassified", label);
            continue;
        }
        for order in form.pole_orders() {
            let m = order.unwrap();
            if expect_holo && m > BigRational::zero() {
                class_ok = false;
            }
            if expect_cusp && m >= BigRational::zero() {
                class_ok = false;
            }
        }
        let lift = LiftedVVAF::assemble_lift(&form).unwrap();
        let rep = lift.cuspidal_report().unwrap();
        relation_ok &= rep.ok;
    }
    out.push(outcome(
        "pole orders and propagation",
        class_ok && relation_ok,
        format!(
            "3/3 classes verified, source order = width x lifted order on every block {}",
            class_detail
        ),
    ));

    // Check 9: the 24th eta power against the literal product expansion,
    // exact through order 50, with the classical leading coefficients.
    let fast = eta_power_series(24, 55).unwrap();
    let literal = eta24_literal_product(55);
    let diff_zero = fast.sub(&literal).unwrap().is_zero();
    let zero_mu = BigRational::zero();
    let expected = [(1i64, 1i64), (2, -24), (3, 252), (4, -1472)];
    let coeffs_ok = expected.iter().all(|&(n, c)| {
        fast.coeff(&zero_mu, 0, n)
            .map(|v| v[0].sub(&Scalar::from_int(c)).is_zero())
            .unwrap_or(false)
    });
    out.push(outcome(
        "eta power oracle",
        diff_zero && coeffs_ok && fast.valid_to() >= &rat_int(50),
        format!(
            "identical to literal product through order {}, leading coefficients 1, -24, 252, -1472",
            fast.valid_to().to_integer()
        ),
    ));

    // Check 10: unlift inverts the lift, exactly on an index-one system.
    let rt = eta3_lift.roundtrip_report(1e-10).unwrap();
    let full_form = VVAF::tau_one(0, 16).unwrap();
    let id_lift = LiftedVVAF::assemble_lift(&full_form).unwrap();
    let id_rt = id_lift.roundtrip_report(0.0).unwrap();
    let identity_exact = id_lift.form.cusp_series[0]
        .sub(&full_form.cusp_series[0])
        .unwrap()
        .is_zero();
    out.push(outcome(
        "lift-unlift roundtrip",
        rt.ok && id_rt.ok && identity_exact,
        format!(
            "index-3 max deviation {:.2e} (tolerance 1e-10), index-1 lift is the identity",
            rt.max_deviation
        ),
    ));

    // Check 11: moderate growth of the defining representation restricted
    // to the subgroup and of its induction: fitted norm exponent <= 1.05
    // over 100 samples each.
    let mut rng11 = ChaCha8Rng::seed_from_u64(1111);
    let restricted = SubgroupRep::Restricted(AmbientRep::defining());
    let mut samples_r = Vec::new();
    for i in 0..100 {
        let g = sys2.random_member(&mut rng11, 2 + (i % 9));
        let image = restricted.evaluate(&g).unwrap();
        let x = frobenius_mat2(&g).ln();
        let y = image.to_cmat().frobenius_norm().ln();
        samples_r.push((x, y));
    }
    let alpha_r = fit_slope(&samples_r);
    let ind = InducedRep::new(sys2.clone(), restricted);
    let mut samples_i = Vec::new();
    for i in 0..100 {
        let g = random_word(&mut rng11, 2 + (i % 9));
        let image = ind.evaluate(&g).unwrap();
        let x = frobenius_mat2(&g).ln();
        let y = image.to_cmat().frobenius_norm().ln();
        samples_i.push((x, y));
    }
    let alpha_i = fit_slope(&samples_i);
    out.push(outcome(
        "moderate growth of the induction",
        alpha_r.is_finite() && alpha_i.is_finite() && alpha_r <= 1.05 && alpha_i <= 1.05,
        format!(
            "fitted exponents: restricted {:.3}, induced {:.3} (bound 1.05), 100 samples each",
            alpha_r, alpha_i
        ),
    ));

    out
}

#[test]
fn acceptance_criteria() {
    let mut results = Vec::new();
    let (c1, c2, c3) = companion_checks();
    results.push(c1);
    results.push(c2);
    results.push(c3);
    results.extend(main_checks());

    let mut all_pass = true;
    for (i, r) in results.iter().enumerate() {
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!("criterion {:02} {} {:<38} {}", i + 1, status, r.name, r.detail);
        all_pass &= r.pass;
    }
    assert!(all_pass, "one or more acceptance criteria failed");
}
