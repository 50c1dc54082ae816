//! `hkcircle`: simulate, verify and explore bounded-confidence dynamics on a
//! circle.
//!
//! Exit status is 0 on success, 1 when a verification finds a violation and
//! 2 for usage or input errors.

mod recurrence;
mod spec;
mod sweep;
mod verify;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hkcircle::format::{read_trace, write_trace, ConfigFile};
use hkcircle::scenarios::disconnect_time_in;
use hkcircle::{simulate, Mode, Rational, Scalar, TerminalStatus, TolerancePolicy, Trace};

use crate::spec::{radius_from_epsilon, RunArgs, RunSpec, ScenarioArgs, RATIONAL_STEP_CAP};
use crate::sweep::{run_sweep, write_csv, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "hkcircle", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the dynamics and write a JSONL trace.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Trace file; without it the trace goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every inequality and recorded field on a run or a trace file.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Verify this trace file instead of simulating. The scenario or
        /// config still supplies perimeter, radius and mode.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// JSON report file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slow-freeze disconnect times across confidence radii, as CSV.
    Sweep(SweepArgs),
    /// Report influence digraphs that come back after a different one.
    Recurrence {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a scenario's initial configuration as a JSON config file.
    Scenario {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    m1: usize,
    #[arg(long)]
    m2: usize,
    #[arg(long, default_value = "1")]
    d1: String,
    #[arg(long)]
    y0: Option<String>,
    /// Radii given as offsets below d2: r = d2 - epsilon.
    #[arg(long, value_delimiter = ',', required_unless_present = "r_list")]
    epsilon: Vec<String>,
    /// Radii given directly.
    #[arg(long, value_delimiter = ',', conflicts_with = "epsilon")]
    r_list: Vec<String>,
    #[arg(long, default_value = "rational")]
    mode: Mode,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    force_rational: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure that maps to exit status 1 rather than 2.
#[derive(Debug)]
struct Violations(usize);

impl std::fmt::Display for Violations {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} violation(s) found", self.0)
    }
}

impl std::error::Error for Violations {}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn obtain_trace<S: Scalar>(spec: &RunSpec, trace_file: Option<&Path>) -> Result<Trace<S>> {
    let initial = spec.initial::<S>()?;
    let Some(path) = trace_file else {
        return Ok(simulate(&initial, spec.steps, &spec.policy));
    };
    let file = File::open(path).with_context(|| format!("cannot open trace {}", path.display()))?;
    let records = read_trace::<S, _>(BufReader::new(file))?;
    if let Some(bad) = records.iter().find(|r| r.positions.len() != initial.len()) {
        bail!(
            "trace record t = {} has {} agents, expected {}",
            bad.t,
            bad.positions.len(),
            initial.len()
        );
    }
    let last = records.last().map_or(0, |r| r.t);
    Ok(Trace::from_records(
        &initial,
        records,
        TerminalStatus::MaxStepsReached(last),
    )?)
}

fn cmd_simulate<S: Scalar>(spec: &RunSpec, out: Option<&Path>) -> Result<()> {
    let trace = simulate(&spec.initial::<S>()?, spec.steps, &spec.policy);
    let mut sink = output(out)?;
    write_trace(&mut sink, &trace.records)?;
    sink.flush()?;
    if out.is_some() {
        println!("{}", trace.status);
    } else {
        eprintln!("{}", trace.status);
    }
    Ok(())
}

fn cmd_verify<S: Scalar>(
    spec: &RunSpec,
    trace_file: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let trace = obtain_trace::<S>(spec, trace_file)?;
    let mut report = verify::verify(&trace);
    report.disconnect_t = spec
        .slow_freeze_params::<S>()
        .and_then(|params| disconnect_time_in(&trace, &params));
    if let Some(path) = out {
        write_json(Some(path), &report)?;
    }
    for check in &report.checks {
        let verdict = if check.violations == 0 { "ok" } else { "FAIL" };
        println!(
            "{:<20} {verdict:<4} evaluated {:>6}, violations {}",
            check.name, check.evaluated, check.violations
        );
    }
    println!(
        "digraph changes {} (budget {})",
        report.change_count, report.budget
    );
    if let Some(t) = report.disconnect_t {
        println!("slow-freeze disconnect at t = {t}");
    }
    for v in &report.violations {
        eprintln!("violation: {} at t = {}: {}", v.check, v.t, v.detail);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Violations(report.violations.len()).into())
    }
}

fn cmd_recurrence<S: Scalar>(
    spec: &RunSpec,
    trace_file: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let trace = obtain_trace::<S>(spec, trace_file)?;
    let report =
        recurrence::find_recurrences(trace.records.iter().map(|r| r.digraph_hash.as_str()));
    write_json(out, &report)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut mode = args.mode;
    if mode == Mode::Rational && args.steps > RATIONAL_STEP_CAP && !args.force_rational {
        eprintln!(
            "note: {} steps exceeds the rational cap of {RATIONAL_STEP_CAP}; running in float64",
            args.steps
        );
        mode = Mode::Float64;
    }
    let radii = if args.r_list.is_empty() {
        args.epsilon
            .iter()
            .map(|eps| radius_from_epsilon(args.m1, args.m2, &args.d1, eps))
            .collect::<Result<Vec<_>>>()?
    } else {
        args.r_list.clone()
    };
    let mut policy = TolerancePolicy::for_mode(mode);
    if let Some(tol) = args.tol {
        policy.convergence_tol = Some(tol);
    }
    if let Some(window) = args.window {
        policy.window = window;
    }
    let spec = SweepSpec {
        m1: args.m1,
        m2: args.m2,
        d1: args.d1.clone(),
        y0: args.y0.clone(),
        radii,
        steps: args.steps,
        policy,
    };
    let rows = match mode {
        Mode::Rational => run_sweep::<Rational>(&spec)?,
        Mode::Float64 => run_sweep::<f64>(&spec)?,
    };
    let mut sink = output(args.out.as_deref())?;
    write_csv(&mut sink, &rows)?;
    sink.flush()?;
    Ok(())
}

fn cmd_scenario(args: &ScenarioArgs, out: Option<&Path>) -> Result<()> {
    let run = RunArgs {
        scenario: args.clone(),
        steps: 0,
        tol: None,
        window: None,
        force_rational: true,
    };
    let spec = run.resolve()?;
    let file = match spec.mode {
        Mode::Rational => ConfigFile::from_configuration(&spec.initial::<Rational>()?),
        Mode::Float64 => ConfigFile::from_configuration(&spec.initial::<f64>()?),
    };
    write_json(out, &file)
}

macro_rules! dispatch {
    ($mode:expr, $f:ident($($arg:expr),*)) => {
        match $mode {
            Mode::Rational => $f::<Rational>($($arg),*),
            Mode::Float64 => $f::<f64>($($arg),*),
        }
    };
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { run, out } => {
            let spec = run.resolve()?;
            dispatch!(spec.mode, cmd_simulate(&spec, out.as_deref()))
        }
        Command::Verify { run, trace, out } => {
            let spec = run.resolve()?;
            dispatch!(
                spec.mode,
                cmd_verify(&spec, trace.as_deref(), out.as_deref())
            )
        }
        Command::Recurrence { run, trace, out } => {
            let spec = run.resolve()?;
            dispatch!(
                spec.mode,
                cmd_recurrence(&spec, trace.as_deref(), out.as_deref())
            )
        }
        Command::Sweep(args) => cmd_sweep(args),
        Command::Scenario { scenario, out } => cmd_scenario(scenario, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Violations>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
