//! `jetsym`: batch front-end. Exit codes: 0 pass, 1 fail, 2 input error.

mod ops;
mod problem;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use jetsym::invariants::reconstruct;
use jetsym::selftest;
use jetsym::Oracle;
use serde_json::{json, Value};

use crate::ops::{dispatch, OpError, OPERATIONS};
use crate::problem::{default_oracle, InputError, Problem};
use crate::report::{ClaimReport, OracleSettings, Report};

#[derive(Parser)]
#[command(name = "jetsym", version, about = "Twisted prolongations and symmetry checks on jet spaces")]
struct Cli {
    /// Oracle seed (default: file setting, then JETSYM_SEED, then built in).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Oracle sample count.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Oracle tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Also write the report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Do not print the report on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the command block of a problem file.
    Run { file: PathBuf },
    /// Prolong fields, optionally twisted.
    Prolong { file: PathBuf },
    /// Check the Maurer-Cartan condition for a μ twist.
    Mch { file: PathBuf },
    /// Check that prolonged fields are symmetries of an equation.
    CheckSymmetry { file: PathBuf },
    /// Solve the determining equations inside an ansatz.
    SolveAnsatz { file: PathBuf },
    /// Generate and certify a chain of differential invariants.
    Invariants { file: PathBuf },
    /// Reduce a scalar ODE by a pair of invariants.
    Reduce { file: PathBuf },
    /// Integrate sampled w(y) into v(y) with v' = w; CSV in (y,w), CSV out (y,v).
    Reconstruct {
        file: PathBuf,
        /// Value of v at the first sample.
        #[arg(long, allow_negative_numbers = true)]
        v0: f64,
    },
    /// Verify a μ or σ gauge diagram.
    GaugeVerify { file: PathBuf },
    /// Euler-Lagrange, variational symmetry, Noether and μ-conservation checks.
    Variational { file: PathBuf },
    /// σ-symmetries of a perturbed dynamical system.
    Dynsys { file: PathBuf },
    /// Run every built-in check; `--only` selects one by name.
    Selftest {
        #[arg(long)]
        only: Option<String>,
    },
}

const PASS: u8 = 0;
const FAIL: u8 = 1;
const INPUT: u8 = 2;

impl Cli {
    fn oracle_over(&self, base: Oracle) -> Oracle {
        Oracle::new(self.seed.unwrap_or(base.seed), self.trials.unwrap_or(base.trials), self.tol.unwrap_or(base.tol))
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        if !self.quiet {
            println!("{text}");
        }
        if let Some(path) = &self.out {
            let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            writeln!(f, "{text}")?;
        }
        Ok(())
    }
}

fn emit_report(cli: &Cli, report: &Report) -> anyhow::Result<u8> {
    cli.emit(&serde_json::to_string_pretty(report)?)?;
    Ok(if report.passed { PASS } else { FAIL })
}

fn input_failure(e: &InputError) -> u8 {
    eprintln!("error: {e}");
    INPUT
}

fn run_problem(cli: &Cli, path: &Path, forced: Option<&str>) -> anyhow::Result<u8> {
    let start = Instant::now();
    let p = match Problem::load(path) {
        Ok(p) => p,
        Err(e) => return Ok(input_failure(&e)),
    };
    let (op, args) = match (&p.command, forced) {
        (Some(c), Some(f)) if c.op != f => {
            return Ok(input_failure(&p.error("op", format!("file asks for `{}`, command line for `{f}`", c.op))))
        }
        (Some(c), _) => (c.op.clone(), c.args.clone()),
        (None, Some(f)) => (f.to_string(), Value::Null),
        (None, None) => return Ok(input_failure(&p.error("command", "no command block"))),
    };
    if !OPERATIONS.contains(&op.as_str()) {
        return Ok(input_failure(&p.error("op", format!("unknown operation `{op}`"))));
    }
    let oracle = cli.oracle_over(p.oracle());
    let (claims, result, error) = match dispatch(&op, &p, &args, &oracle) {
        Ok(o) => (o.claims, o.result, None),
        Err(OpError::Input(e)) => return Ok(input_failure(&e)),
        Err(OpError::Engine(e)) => (Vec::new(), Value::Null, Some(e.to_string())),
    };
    let report = Report {
        op,
        args,
        oracle: OracleSettings::from(&oracle),
        passed: error.is_none() && claims.iter().all(|c| c.holds),
        claims,
        result,
        error,
        elapsed_ms: start.elapsed().as_millis(),
    };
    emit_report(cli, &report)
}

fn run_reconstruct(cli: &Cli, path: &Path, v0: f64) -> anyhow::Result<u8> {
    let fail_input = |msg: String| {
        eprintln!("error: {}: {msg}", path.display());
        Ok(INPUT)
    };
    let mut reader = match csv::Reader::from_path(path) {
        Ok(r) => r,
        Err(e) => return fail_input(e.to_string()),
    };
    let mut samples = Vec::new();
    for (i, row) in reader.deserialize::<(f64, f64)>().enumerate() {
        match row {
            Ok(s) => samples.push(s),
            Err(e) => return fail_input(format!("row {}: {e}", i + 2)),
        }
    }
    let values = match reconstruct(&samples, v0) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(FAIL);
        }
    };
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["y", "v"])?;
    for (y, v) in values {
        writer.serialize((y, v))?;
    }
    let text = String::from_utf8(writer.into_inner()?)?;
    cli.emit(text.trim_end())?;
    Ok(PASS)
}

fn run_selftest(cli: &Cli, only: Option<&str>) -> anyhow::Result<u8> {
    let start = Instant::now();
    let oracle = cli.oracle_over(default_oracle());
    let results = match only {
        Some(name) => match selftest::run_named(name, &oracle) {
            Some(r) => vec![r],
            None => {
                eprintln!("error: no check named `{name}`");
                return Ok(INPUT);
            }
        },
        None => selftest::run_all(&oracle),
    };
    if !cli.quiet {
        for r in &results {
            eprintln!("[{}] {} ({} ms): {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.elapsed_ms, r.detail);
        }
    }
    let claims: Vec<ClaimReport> =
        results.iter().map(|r| ClaimReport::new(r.name, r.passed, r.max_residual)).collect();
    let details: Vec<Value> = results
        .iter()
        .map(|r| {
            let kind = match r.kind {
                selftest::CheckKind::Criterion => "criterion",
                selftest::CheckKind::Property => "property",
            };
            json!({ "name": r.name, "kind": kind, "detail": r.detail })
        })
        .collect();
    let report = Report {
        op: "selftest".into(),
        args: json!({ "only": only }),
        oracle: OracleSettings::from(&oracle),
        passed: results.iter().all(|r| r.passed),
        claims,
        result: json!({ "checks": details }),
        error: None,
        elapsed_ms: start.elapsed().as_millis(),
    };
    emit_report(cli, &report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { file } => run_problem(&cli, file, None),
        Command::Prolong { file } => run_problem(&cli, file, Some("prolong")),
        Command::Mch { file } => run_problem(&cli, file, Some("mch")),
        Command::CheckSymmetry { file } => run_problem(&cli, file, Some("check-symmetry")),
        Command::SolveAnsatz { file } => run_problem(&cli, file, Some("solve-ansatz")),
        Command::Invariants { file } => run_problem(&cli, file, Some("invariants")),
        Command::Reduce { file } => run_problem(&cli, file, Some("reduce")),
        Command::GaugeVerify { file } => run_problem(&cli, file, Some("gauge-verify")),
        Command::Variational { file } => run_problem(&cli, file, Some("variational")),
        Command::Dynsys { file } => run_problem(&cli, file, Some("dynsys")),
        Command::Reconstruct { file, v0 } => run_reconstruct(&cli, file, *v0),
        Command::Selftest { only } => run_selftest(&cli, only.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT)
        }
    }
}
