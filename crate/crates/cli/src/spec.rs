//! Turning command-line flags into a runnable specification.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use hkcircle::format::ConfigFile;
use hkcircle::{
    Configuration, Mode, Rational, Scalar, ScenarioSpec, SlowFreezeParams, TolerancePolicy,
};

/// Longest rational run allowed without `--force-rational`.
pub const RATIONAL_STEP_CAP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    #[value(name = "figure1")]
    FigureOne,
    #[value(name = "perturbed_figure1")]
    PerturbedFigureOne,
    #[value(name = "equally_spaced")]
    EquallySpaced,
    #[value(name = "five_cluster")]
    FiveCluster,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Built-in initial configuration.
    #[arg(long, value_enum, conflicts_with = "config")]
    pub scenario: Option<ScenarioName>,
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub perimeter: Option<String>,
    #[arg(long)]
    pub radius: Option<String>,
    /// Number of agents (equally_spaced, random).
    #[arg(long)]
    pub agents: Option<usize>,
    /// Perturbation size; for five_cluster, sets r = d2 - epsilon.
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub m1: Option<usize>,
    #[arg(long)]
    pub m2: Option<usize>,
    #[arg(long)]
    pub d1: Option<String>,
    #[arg(long)]
    pub y0: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scalar mode; defaults to the config file's mode, or rational.
    #[arg(long)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Maximum number of updates.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Max-norm threshold for numerical convergence.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Quiet steps required for numerical convergence.
    #[arg(long)]
    pub window: Option<usize>,
    /// Keep rational arithmetic beyond the step cap.
    #[arg(long)]
    pub force_rational: bool,
}

#[derive(Debug, Clone)]
pub enum Source {
    Scenario(ScenarioSpec),
    Config(ConfigFile),
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub source: Source,
    pub mode: Mode,
    pub steps: usize,
    pub policy: TolerancePolicy,
}

impl RunSpec {
    pub fn initial<S: Scalar>(&self) -> Result<Configuration<S>> {
        Ok(match &self.source {
            Source::Scenario(spec) => spec.build()?,
            Source::Config(file) => file.to_configuration()?,
        })
    }

    pub fn slow_freeze_params<S: Scalar>(&self) -> Option<SlowFreezeParams<S>> {
        match &self.source {
            Source::Scenario(spec) => spec.slow_freeze_params().ok(),
            Source::Config(_) => None,
        }
    }
}

fn required<'a>(value: &'a Option<String>, flag: &str, scenario: &str) -> Result<&'a String> {
    value
        .as_ref()
        .with_context(|| format!("--{flag} is required for scenario {scenario}"))
}

/// `d2 - epsilon` as an exact literal.
pub fn radius_from_epsilon(m1: usize, m2: usize, d1: &str, epsilon: &str) -> Result<String> {
    let d1 = Rational::parse_literal(d1)?;
    let epsilon = Rational::parse_literal(epsilon)?;
    let params = SlowFreezeParams::new(m1, m2, d1, Rational::from_usize(1));
    Ok((params.d2() - epsilon).to_literal())
}

impl ScenarioArgs {
    fn source(&self) -> Result<Source> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            let file: ConfigFile = serde_json::from_str(&text)
                .with_context(|| format!("invalid config file {}", path.display()))?;
            return Ok(Source::Config(file));
        }
        let Some(name) = self.scenario else {
            bail!("one of --scenario or --config is required");
        };
        let radius = || self.radius.clone().unwrap_or_else(|| "1".into());
        let agents = || {
            self.agents
                .context("--agents is required for this scenario")
        };
        let spec = match name {
            ScenarioName::FigureOne => ScenarioSpec::FigureOne {
                perimeter: required(&self.perimeter, "perimeter", "figure1")?.clone(),
            },
            ScenarioName::PerturbedFigureOne => ScenarioSpec::PerturbedFigureOne {
                perimeter: required(&self.perimeter, "perimeter", "perturbed_figure1")?.clone(),
                epsilon: required(&self.epsilon, "epsilon", "perturbed_figure1")?.clone(),
            },
            ScenarioName::EquallySpaced => ScenarioSpec::EquallySpaced {
                n: agents()?,
                perimeter: required(&self.perimeter, "perimeter", "equally_spaced")?.clone(),
                radius: radius(),
            },
            ScenarioName::Random => ScenarioSpec::Random {
                n: agents()?,
                perimeter: required(&self.perimeter, "perimeter", "random")?.clone(),
                radius: radius(),
                seed: self.seed,
            },
            ScenarioName::FiveCluster => {
                let m1 = self
                    .m1
                    .context("--m1 is required for scenario five_cluster")?;
                let m2 = self
                    .m2
                    .context("--m2 is required for scenario five_cluster")?;
                let d1 = self.d1.clone().unwrap_or_else(|| "1".into());
                let radius = match (&self.radius, &self.epsilon) {
                    (Some(r), None) => r.clone(),
                    (None, Some(eps)) => radius_from_epsilon(m1, m2, &d1, eps)?,
                    _ => bail!("five_cluster needs exactly one of --radius or --epsilon"),
                };
                ScenarioSpec::FiveCluster {
                    m1,
                    m2,
                    d1,
                    radius,
                    y0: self.y0.clone(),
                    y0_1: None,
                    y0_2: None,
                }
            }
        };
        Ok(Source::Scenario(spec))
    }

    fn default_mode(&self, source: &Source) -> Mode {
        match (self.mode, source) {
            (Some(mode), _) => mode,
            (None, Source::Config(file)) => file.mode,
            (None, Source::Scenario(_)) => Mode::Rational,
        }
    }
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunSpec> {
        let source = self.scenario.source()?;
        let mut mode = self.scenario.default_mode(&source);
        if mode == Mode::Rational && self.steps > RATIONAL_STEP_CAP && !self.force_rational {
            eprintln!(
                "note: {} steps exceeds the rational cap of {RATIONAL_STEP_CAP}; running in float64 \
                 (use --force-rational to override)",
                self.steps
            );
            mode = Mode::Float64;
        }
        let mut policy = TolerancePolicy::for_mode(mode);
        if let Some(tol) = self.tol {
            policy.convergence_tol = Some(tol);
        }
        if let Some(window) = self.window {
            policy.window = window;
        }
        let spec = RunSpec {
            source,
            mode,
            steps: self.steps,
            policy,
        };
        // Fail on bad parameters before any work or output happens.
        match mode {
            Mode::Rational => spec.initial::<Rational>().map(drop)?,
            Mode::Float64 => spec.initial::<f64>().map(drop)?,
        }
        Ok(spec)
    }
}
