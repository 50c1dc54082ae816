//! JSON configuration files and JSONL trace lines.
//!
//! Scalars are always serialized as strings: `"a/b"` for rationals and the
//! shortest round-trip decimal for floats.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::{Configuration, TraceRecord};
use crate::error::{Error, Result};
use crate::scalar::{Mode, Rational, Scalar};

/// `{ "perimeter": "12/5", "radius": "1", "mode": "rational", "positions": [...] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub perimeter: String,
    pub radius: String,
    pub mode: Mode,
    pub positions: Vec<String>,
}

impl ConfigFile {
    pub fn from_configuration<S: Scalar>(c: &Configuration<S>) -> Self {
        Self {
            perimeter: c.perimeter().to_literal(),
            radius: c.radius().to_literal(),
            mode: S::MODE,
            positions: c.positions().iter().map(Scalar::to_literal).collect(),
        }
    }

    /// Parses into the requested mode, whatever `self.mode` says.
    pub fn to_configuration<S: Scalar>(&self) -> Result<Configuration<S>> {
        let positions = self
            .positions
            .iter()
            .map(|s| S::parse_literal(s))
            .collect::<Result<Vec<_>>>()?;
        Configuration::new(
            S::parse_literal(&self.perimeter)?,
            S::parse_literal(&self.radius)?,
            positions,
        )
    }

    pub fn load(&self) -> Result<AnyConfiguration> {
        Ok(match self.mode {
            Mode::Rational => AnyConfiguration::Rational(self.to_configuration()?),
            Mode::Float64 => AnyConfiguration::Float64(self.to_configuration()?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyConfiguration {
    Rational(Configuration<Rational>),
    Float64(Configuration<f64>),
}

impl AnyConfiguration {
    pub fn mode(&self) -> Mode {
        match self {
            AnyConfiguration::Rational(_) => Mode::Rational,
            AnyConfiguration::Float64(_) => Mode::Float64,
        }
    }
}

/// One JSONL line of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub t: usize,
    pub positions: Vec<String>,
    pub energy: String,
    pub delta_norm_sq: String,
    pub digraph_hash: String,
    pub digraph_changed: bool,
    #[serde(default)]
    pub boundary_warning: bool,
}

impl TraceLine {
    pub fn from_record<S: Scalar>(r: &TraceRecord<S>) -> Self {
        Self {
            t: r.t,
            positions: r.positions.iter().map(Scalar::to_literal).collect(),
            energy: r.energy.to_literal(),
            delta_norm_sq: r.delta_norm_sq.to_literal(),
            digraph_hash: r.digraph_hash.clone(),
            digraph_changed: r.digraph_changed,
            boundary_warning: r.boundary_warning,
        }
    }

    pub fn to_record<S: Scalar>(&self) -> Result<TraceRecord<S>> {
        Ok(TraceRecord {
            t: self.t,
            positions: self
                .positions
                .iter()
                .map(|s| S::parse_literal(s))
                .collect::<Result<_>>()?,
            energy: S::parse_literal(&self.energy)?,
            delta_norm_sq: S::parse_literal(&self.delta_norm_sq)?,
            digraph_hash: self.digraph_hash.clone(),
            digraph_changed: self.digraph_changed,
            boundary_warning: self.boundary_warning,
        })
    }
}

pub fn write_trace<S: Scalar, W: Write>(out: &mut W, records: &[TraceRecord<S>]) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(&TraceLine::from_record(r))
            .map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(())
}

pub fn read_trace<S: Scalar, R: BufRead>(input: R) -> Result<Vec<TraceRecord<S>>> {
    let mut records = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TraceLine = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        records.push(parsed.to_record()?);
    }
    Ok(records)
}
