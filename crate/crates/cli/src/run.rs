//! Subcommand execution: wraps the library operations, assembles verdict
//! reports in a fixed section order, fans independent verification sections
//! out over a bounded number of threads, and writes every document through
//! the schema emitter so identical inputs produce identical bytes.
//!
//! The lift and verify commands run the same six verification sections
//! (evaluation oracle, coefficient interleaving, off-class vanishing, cusp
//! behavior, unlift roundtrip, functional equation); lift emits the lifted
//! series alongside the verdict, verify emits the verdict plus a
//! human-readable table. A failed check still writes its report, then exits
//! 2, or 3 when the failure is attributable to truncation.

use crate::job;
use crate::{Cmd, JobArgs};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::process::ExitCode;
use vvaf_lift::error::{Error, ErrorClass, Result};
use vvaf_lift::induction::{predict_spectrum, verify_spectrum, InducedRep};
use vvaf_lift::io::{self, VerdictReport};
use vvaf_lift::lift::{induced_tau_one, LiftedVVAF};
use vvaf_lift::rep::{JordanOptions, SubgroupRep};

pub fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::CuspData(a) => cusp_data(&a),
        Cmd::Induce(a) => induce(&a),
        Cmd::Spectrum(a) => spectrum(&a),
        Cmd::Lift(a) => lift_like(&a, false),
        Cmd::Verify(a) => lift_like(&a, true),
        Cmd::Construct(a) => construct(&a),
    }
}

fn validate(args: &JobArgs) -> Result<()> {
    if args.trunc < 8 {
        return Err(Error::InvalidInput(format!(
            "truncation {} is below the minimum of 8",
            args.trunc
        )));
    }
    if let Some(t) = args.tol {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(
                "tolerance override must be positive".into(),
            ));
        }
    }
    if args.threads == 0 {
        return Err(Error::InvalidInput("thread cap must be at least 1".into()));
    }
    let cusp = io::point_from_json(&args.cusp)?;
    if io::point_to_json(&cusp) != "oo" {
        return Err(Error::InvalidInput(
            "only the ambient cusp oo is supported; conjugate the problem to oo first".into(),
        ));
    }
    Ok(())
}

fn require<'a>(opt: &'a Option<String>, flag: &str, cmd: &str) -> Result<&'a str> {
    opt.as_deref()
        .ok_or_else(|| Error::InvalidInput(format!("--{} is required for {}", flag, cmd)))
}

/// Writes named documents into --out (printing their paths), or prints the
/// single document to stdout when no directory is given.
fn write_docs(out: &Option<PathBuf>, docs: &[(&str, String)]) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| {
                Error::InvalidInput(format!("cannot create {}: {}", dir.display(), e))
            })?;
            for (name, text) in docs {
                let p = dir.join(name);
                std::fs::write(&p, text).map_err(|e| {
                    Error::InvalidInput(format!("cannot write {}: {}", p.display(), e))
                })?;
                println!("{}", p.display());
            }
        }
        None => {
            debug_assert_eq!(docs.len(), 1);
            for (_, text) in docs {
                print!("{}", text);
            }
        }
    }
    Ok(())
}

fn cusp_data(args: &JobArgs) -> Result<ExitCode> {
    validate(args)?;
    let sys = job::load_system(&args.subgroup)?;
    let doc = io::emit(&io::lift_plan_to_json(&sys));
    write_docs(&args.out, &[("plan.json", doc)])?;
    Ok(ExitCode::SUCCESS)
}

fn induce(args: &JobArgs) -> Result<ExitCode> {
    validate(args)?;
    let sys = job::load_system(&args.subgroup)?;
    let rep = job::load_rep(require(&args.rep, "rep", "induce")?)?;
    let ind = InducedRep::new(sys.clone(), rep);
    let ambient = ind.as_ambient()?;
    let doc = serde_json::json!({
        "plan": serde_json::to_value(io::lift_plan_to_json(&sys)).expect("schema"),
        "representation":
            serde_json::to_value(io::rep_to_json(&SubgroupRep::Restricted(ambient)))
                .expect("schema"),
    });
    write_docs(&args.out, &[("induced.json", io::emit(&doc))])?;
    Ok(ExitCode::SUCCESS)
}

fn spectrum(args: &JobArgs) -> Result<ExitCode> {
    validate(args)?;
    let sys = job::load_system(&args.subgroup)?;
    let rep = job::load_rep(require(&args.rep, "rep", "spectrum")?)?;
    let ind = InducedRep::new(sys.clone(), rep);
    let opts = JordanOptions::default();
    let pred = predict_spectrum(&ind, &opts)?;
    let checks = verify_spectrum(&ind, &opts)?;
    let report = io::spectrum_report_to_json(&pred, &checks);
    let pass = report.pass;
    write_docs(&args.out, &[("spectrum.json", io::emit(&report))])?;
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn construct(args: &JobArgs) -> Result<ExitCode> {
    validate(args)?;
    let spec = require(&args.form, "form", "construct")?;
    let parts: Vec<&str> = spec.split(':').collect();
    let (name, doc) = if let ["induced-tau-one", level] = parts.as_slice() {
        let level: u32 = level.trim().parse().map_err(|_| {
            Error::InvalidInput(format!("malformed level in form {:?}", spec))
        })?;
        let lifted = induced_tau_one(level, args.weight.unwrap_or(0), args.trunc)?;
        ("lifted.json", io::emit(&io::lifted_to_json(&lifted)))
    } else {
        let sys = job::load_system(&args.subgroup)?;
        let form = job::build_form(spec, &sys, args.weight, args.trunc)?;
        ("form.json", io::emit(&io::vvaf_to_json(&form)))
    };
    write_docs(&args.out, &[(name, doc)])?;
    Ok(ExitCode::SUCCESS)
}

/// Per-section tolerances; a --tol override replaces every one of them.
#[derive(Clone, Copy)]
struct Tols {
    oracle: f64,
    interleave: f64,
    vanish: f64,
    roundtrip: f64,
    functional: f64,
}

impl Tols {
    fn new(over: Option<f64>) -> Tols {
        match over {
            Some(t) => Tols {
                oracle: t,
                interleave: t,
                vanish: t,
                roundtrip: t,
                functional: t,
            },
            None => Tols {
                oracle: 1e-8,
                interleave: 1e-12,
                vanish: 1e-9,
                roundtrip: 1e-10,
                functional: 1e-7,
            },
        }
    }
}

/// One verification section's outcome, in report order.
struct Section {
    name: &'static str,
    pass: bool,
    residual: f64,
    tol: f64,
    samples: usize,
    notes: Vec<String>,
    truncation_limited: bool,
}

impl Section {
    fn failed(name: &'static str, tol: f64, e: Error) -> Section {
        Section {
            name,
            pass: false,
            residual: f64::NAN,
            tol,
            samples: 0,
            truncation_limited: e.class() == ErrorClass::Truncation,
            notes: vec![e.to_string()],
        }
    }
}

fn oracle_section(l: &LiftedVVAF, seed: u64, tol: f64) -> Section {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let taus: Vec<Complex64> = (0..10)
        .map(|_| Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(2.0..3.5)))
        .collect();
    match l.oracle_report(&taus, tol) {
        Ok(r) => Section {
            name: "oracle",
            pass: r.ok,
            residual: r.max_rel_error,
            tol,
            samples: r.samples,
            notes: Vec::new(),
            truncation_limited: !r.ok && r.max_tail > 0.1 * tol,
        },
        Err(e) => Section::failed("oracle", tol, e),
    }
}

fn interleaving_section(l: &LiftedVVAF, tol: f64) -> Section {
    match l.interleaving_report(&JordanOptions::default(), tol) {
        Ok(r) => {
            let mut notes = Vec::new();
            if !r.lattice_contained {
                notes.push(
                    "assembled exponent channels fall outside the predicted lattice".into(),
                );
            } else if !r.lattice_equal {
                notes.push("some predicted exponent channels carry no coefficients".into());
            }
            Section {
                name: "interleaving",
                pass: r.ok,
                residual: r.max_deviation,
                tol,
                samples: r.keys_checked,
                notes,
                truncation_limited: false,
            }
        }
        Err(e) => Section::failed("interleaving", tol, e),
    }
}

fn vanishing_section(l: &LiftedVVAF, tol: f64) -> Section {
    match l.vanishing_report(&JordanOptions::default(), tol) {
        Ok(r) => Section {
            name: "vanishing",
            pass: r.ok,
            residual: r.max_violation,
            tol,
            samples: r.per_cusp.len(),
            notes: Vec::new(),
            truncation_limited: false,
        },
        Err(e) => Section::failed("vanishing", tol, e),
    }
}

fn cuspidal_section(l: &LiftedVVAF) -> Section {
    match l.cuspidal_report() {
        Ok(r) => {
            let mut notes = Vec::new();
            if !r.relation_ok {
                notes.push("source and lifted pole orders violate the width relation".into());
            }
            if !r.order_matches_prediction {
                notes.push("lifted pole order differs from its prediction".into());
            }
            Section {
                name: "cuspidal",
                pass: r.ok,
                residual: 0.0,
                tol: 0.0,
                samples: r.source_orders.len(),
                notes,
                truncation_limited: false,
            }
        }
        Err(e) => Section::failed("cuspidal", 0.0, e),
    }
}

fn roundtrip_section(l: &LiftedVVAF, tol: f64) -> Section {
    match l.roundtrip_report(tol) {
        Ok(r) => Section {
            name: "roundtrip",
            pass: r.ok,
            residual: r.max_deviation,
            tol,
            samples: l.source.cusp_series.len() + 1,
            notes: Vec::new(),
            truncation_limited: false,
        },
        Err(e) => Section::failed("roundtrip", tol, e),
    }
}

fn functional_section(l: &LiftedVVAF, seed: u64, tol: f64) -> Section {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    match l.form.functional_equation_report(&mut rng, 20, tol) {
        Ok(r) => Section {
            name: "functional-equation",
            pass: r.ok,
            residual: r.max_rel_residual,
            tol,
            samples: r.samples,
            notes: Vec::new(),
            truncation_limited: !r.ok && r.max_tail > 0.1 * tol,
        },
        Err(e) => Section::failed("functional-equation", tol, e),
    }
}

/// Runs jobs with at most `cap` alive at once, returning results in job
/// order so report assembly stays deterministic and single-threaded.
fn run_capped<'a, T: Send + 'a>(
    cap: usize,
    jobs: Vec<Box<dyn FnOnce() -> T + Send + 'a>>,
) -> Vec<T> {
    let mut out: Vec<Option<T>> = jobs.iter().map(|_| None).collect();
    let mut pending: Vec<(usize, Box<dyn FnOnce() -> T + Send + 'a>)> =
        jobs.into_iter().enumerate().collect();
    while !pending.is_empty() {
        let take = cap.clamp(1, pending.len());
        let batch: Vec<_> = pending.drain(..take).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = batch.into_iter().map(|(i, f)| (i, s.spawn(f))).collect();
            for (i, h) in handles {
                out[i] = Some(h.join().expect("verification section panicked"));
            }
        });
    }
    out.into_iter().map(|o| o.expect("every job ran")).collect()
}

fn lift_like(args: &JobArgs, thorough: bool) -> Result<ExitCode> {
    validate(args)?;
    let cmd = if thorough { "verify" } else { "lift" };
    let sys = job::load_system(&args.subgroup)?;
    let form_spec = require(&args.form, "form", cmd)?;
    let source = job::load_form(form_spec, &sys, args.weight, args.trunc)?;
    let lifted = LiftedVVAF::assemble_lift(&source)?;

    let tols = Tols::new(args.tol);
    let mut report = VerdictReport::new(args.seed, args.trunc);
    report
        .inputs
        .insert("subgroup".into(), job::fingerprint(&args.subgroup));
    report
        .inputs
        .insert("form".into(), job::fingerprint(form_spec));
    report.inputs.insert("cusp".into(), args.cusp.clone());
    report
        .inputs
        .insert("weight".into(), source.weight.to_string());
    if let Some(t) = args.tol {
        report
            .inputs
            .insert("tolerance-override".into(), io::f17(t));
    }

    let lref = &lifted;
    let seed = args.seed;
    let jobs: Vec<Box<dyn FnOnce() -> Section + Send + '_>> = vec![
        Box::new(move || oracle_section(lref, seed, tols.oracle)),
        Box::new(move || interleaving_section(lref, tols.interleave)),
        Box::new(move || vanishing_section(lref, tols.vanish)),
        Box::new(move || cuspidal_section(lref)),
        Box::new(move || roundtrip_section(lref, tols.roundtrip)),
        Box::new(move || functional_section(lref, seed, tols.functional)),
    ];
    let sections = run_capped(args.threads, jobs);

    let mut truncation_limited = false;
    for s in &sections {
        report.record(s.name, s.pass, s.residual, s.tol, s.samples);
        for n in &s.notes {
            report.note(format!("{}: {}", s.name, n));
        }
        truncation_limited |= !s.pass && s.truncation_limited;
    }
    if source.weight != 0 && (source.flags.holomorphic || source.flags.cusp_form) {
        report.note(format!(
            "cusp behavior propagation is certified for the weight-0 reduction; \
             the weight-{} form carries it through the eta power factor",
            source.weight
        ));
    }
    if args.trunc < 20 {
        report.note(format!(
            "truncation {} limits the checked coefficient depth; residuals are \
             truncation-limited",
            args.trunc
        ));
    }

    let report_doc = io::emit(&report);
    if thorough {
        write_docs(&args.out, &[("report.json", report_doc)])?;
        let table = human_table(&report);
        match &args.out {
            Some(_) => print!("{}", table),
            None => eprint!("{}", table),
        }
    } else {
        match &args.out {
            Some(_) => {
                let lifted_doc = io::emit(&io::lifted_to_json(&lifted));
                write_docs(&args.out, &[("lifted.json", lifted_doc), ("report.json", report_doc)])?;
            }
            None => {
                let combined = serde_json::json!({
                    "lifted": serde_json::to_value(io::lifted_to_json(&lifted)).expect("schema"),
                    "report": serde_json::to_value(&report).expect("schema"),
                });
                print!("{}", io::emit(&combined));
            }
        }
    }

    Ok(if report.pass {
        ExitCode::SUCCESS
    } else if truncation_limited {
        ExitCode::from(3)
    } else {
        ExitCode::from(2)
    })
}

fn human_table(report: &VerdictReport) -> String {
    let mut t = format!(
        "{:<22} {:>6} {:>12} {:>10} {:>8}\n",
        "check", "status", "residual", "tolerance", "samples"
    );
    for (name, c) in &report.checks {
        t.push_str(&format!(
            "{:<22} {:>6} {:>12} {:>10} {:>8}\n",
            name,
            if c.pass { "pass" } else { "FAIL" },
            short_float(&c.max_residual),
            short_float(&c.tolerance),
            c.samples
        ));
    }
    t.push_str(&format!(
        "overall: {}\n",
        if report.pass { "pass" } else { "FAIL" }
    ));
    for n in &report.notes {
        t.push_str(&format!("note: {}\n", n));
    }
    t
}

fn short_float(s: &str) -> String {
    s.parse::<f64>()
        .map(|x| format!("{:.2e}", x))
        .unwrap_or_else(|_| s.to_string())
}
