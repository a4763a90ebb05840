//! Command-line driver around the lifting library: coset enumeration,
//! induction, spectrum prediction, lifting, and verification, all speaking
//! the library's JSON schema.
//!
//! Every document is written through the schema emitter, so two runs with
//! identical inputs, seed, and truncation produce byte-identical output.
//! Exit codes: 0 success, 1 input error, 2 mathematical-consistency
//! failure, 3 insufficient truncation.

mod job;
mod run;

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;
use vvaf_lift::error::{Error, ErrorClass};

#[derive(Parser)]
#[command(
    name = "vvaf-lift",
    version,
    about = "Induce representations and lift vector-valued automorphic forms \
             from finite-index subgroups of SL2(Z)"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Enumerate cosets and cusp classes of a subgroup; print the plan.
    CuspData(JobArgs),
    /// Induce a representation; print the generator images and the plan.
    Induce(JobArgs),
    /// Predict the translation spectrum at every cusp and verify it.
    Spectrum(JobArgs),
    /// Lift a form; print the lifted series and a verification report.
    Lift(JobArgs),
    /// Lift a form and run every verification; print the verdict.
    Verify(JobArgs),
    /// Build one of the built-in forms and print it.
    Construct(JobArgs),
}

#[derive(Args)]
pub struct JobArgs {
    /// Subgroup: full, gamma0:N, gamma1:N, principal:N, or a JSON path.
    #[arg(long, default_value = "full")]
    pub subgroup: String,

    /// Representation: trivial, defining, eta:E, eta-ratio:LEVEL:POWER, or
    /// a JSON path.
    #[arg(long)]
    pub rep: Option<String>,

    /// Form: tau-one, constant-one, eta-ratio:LEVEL:POWER,
    /// induced-tau-one:LEVEL, or a JSON path.
    #[arg(long)]
    pub form: Option<String>,

    /// Ambient cusp. Only "oo" is supported; other cusps are reduced to oo
    /// by conjugation before they reach this tool.
    #[arg(long, default_value = "oo")]
    pub cusp: String,

    /// Weight of a constructed form (must match the weight of a form loaded
    /// from a file).
    #[arg(long)]
    pub weight: Option<i64>,

    /// Truncation order of constructed series, at least 8.
    #[arg(long, default_value_t = 40)]
    pub trunc: i64,

    /// Tolerance override applied to every verification section.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Seed for all randomized sampling.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Directory to write output documents into instead of stdout.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,

    /// Cap on concurrently running verification sections.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Input => 1,
        ErrorClass::Consistency => 2,
        ErrorClass::Truncation => 3,
    }
}
