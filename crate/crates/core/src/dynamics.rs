//! The synchronous bounded-confidence update on the circle, trajectories and
//! freeze/convergence detection.
//!
//! Agents are indexed from 0 in this API. Each agent moves to the circular
//! mean of every agent within distance `r` of it (itself included, boundary
//! included).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circle::Circle;
use crate::error::{Error, Result};
use crate::lyapunov::{energy, influence_digraph_after, InfluenceDigraph};
use crate::scalar::{Mode, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration<S> {
    circle: Circle<S>,
    radius: S,
    positions: Vec<S>,
}

impl<S: Scalar> Configuration<S> {
    /// Builds a configuration, reducing every position into `[0, p)`.
    pub fn new(perimeter: S, radius: S, positions: Vec<S>) -> Result<Self> {
        let circle = Circle::new(perimeter)?;
        if positions.is_empty() {
            return Err(Error::Empty);
        }
        if radius <= S::zero() || radius.clone() * S::from_usize(2) >= *circle.perimeter() {
            return Err(Error::RadiusTooLarge);
        }
        let positions = positions.iter().map(|x| circle.reduce(x)).collect();
        Ok(Self {
            circle,
            radius,
            positions,
        })
    }

    /// Same circle and radius, new positions.
    pub fn with_positions(&self, positions: Vec<S>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Empty);
        }
        let positions = positions.iter().map(|x| self.circle.reduce(x)).collect();
        Ok(Self {
            circle: self.circle.clone(),
            radius: self.radius.clone(),
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn circle(&self) -> &Circle<S> {
        &self.circle
    }

    pub fn perimeter(&self) -> &S {
        self.circle.perimeter()
    }

    pub fn radius(&self) -> &S {
        &self.radius
    }

    pub fn positions(&self) -> &[S] {
        &self.positions
    }

    pub fn distance(&self, i: usize, j: usize) -> S {
        self.circle.distance(&self.positions[i], &self.positions[j])
    }

    /// Signed shortest-path displacement from agent `i` to agent `j`.
    pub fn displacement(&self, i: usize, j: usize) -> S {
        self.circle
            .displacement(&self.positions[i], &self.positions[j])
    }

    pub fn are_neighbors(&self, i: usize, j: usize) -> bool {
        self.distance(i, j) <= self.radius
    }

    /// True when the agent indices run anti-clockwise around the circle,
    /// i.e. the positions are a rotation of a non-decreasing sequence.
    pub fn is_cyclically_ordered(&self) -> bool {
        let n = self.len();
        let descents = (0..n)
            .filter(|&i| self.positions[(i + 1) % n] < self.positions[i])
            .count();
        descents <= 1
    }

    /// All agents at exactly the same position.
    pub fn is_consensus(&self) -> bool {
        self.positions.windows(2).all(|w| w[0] == w[1])
    }

    /// Componentwise comparison: exact in rational mode, within `tol` of
    /// circle distance in float mode.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self.positions.iter().zip(&other.positions).all(|(a, b)| {
                if S::is_exact() {
                    a == b
                } else {
                    self.circle.distance(a, b).to_f64() <= tol
                }
            })
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.len(),
            });
        }
        Ok(())
    }
}

/// Agents within distance `r` of agent `i`, including `i` itself.
pub fn neighborhood<S: Scalar>(c: &Configuration<S>, i: usize) -> Result<Vec<usize>> {
    c.check_index(i)?;
    Ok((0..c.len()).filter(|&j| c.are_neighbors(i, j)).collect())
}

/// One synchronous update of every agent.
pub fn hk_step<S: Scalar>(c: &Configuration<S>) -> Configuration<S> {
    let n = c.len();
    let positions = (0..n)
        .map(|i| {
            let x = &c.positions[i];
            let mut sum = S::zero();
            let mut count = 0usize;
            for j in 0..n {
                let offset = c.circle.displacement(x, &c.positions[j]);
                if offset.abs() <= c.radius {
                    sum = sum + offset;
                    count += 1;
                }
            }
            c.circle.reduce(&(x.clone() + sum / S::from_usize(count)))
        })
        .collect();
    Configuration {
        circle: c.circle.clone(),
        radius: c.radius.clone(),
        positions,
    }
}

/// Per-agent signed displacement of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaVector<S>(pub Vec<S>);

impl<S: Scalar> DeltaVector<S> {
    pub fn components(&self) -> &[S] {
        &self.0
    }

    pub fn norm_sq(&self) -> S {
        self.0
            .iter()
            .fold(S::zero(), |acc, d| acc + d.clone() * d.clone())
    }

    pub fn max_abs(&self) -> S {
        self.0
            .iter()
            .fold(S::zero(), |acc, d| S::max_of(acc, d.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|d| d.is_zero())
    }
}

pub fn delta_vector<S: Scalar>(
    current: &Configuration<S>,
    next: &Configuration<S>,
) -> Result<DeltaVector<S>> {
    if current.len() != next.len() {
        return Err(Error::DimensionMismatch {
            expected: current.len(),
            actual: next.len(),
        });
    }
    if current.circle != next.circle || current.radius != next.radius {
        return Err(Error::Mismatch("perimeter or radius differ".into()));
    }
    Ok(DeltaVector(
        current
            .positions
            .iter()
            .zip(&next.positions)
            .map(|(a, b)| current.circle.displacement(a, b))
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Float-mode equality slack for freeze detection; always 0 for rationals.
    pub eq_tol: f64,
    /// Max-norm step threshold for the numerical convergence surrogate.
    /// `None` disables the surrogate.
    pub convergence_tol: Option<f64>,
    pub window: usize,
}

impl TolerancePolicy {
    pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-12;
    pub const DEFAULT_WINDOW: usize = 10;
    pub const DEFAULT_FLOAT_EQ_TOL: f64 = 1e-14;

    /// Exact freezing only: rational trajectories can approach a limit
    /// forever without reaching it, and the surrogate would hide that.
    pub fn exact() -> Self {
        Self {
            eq_tol: 0.0,
            convergence_tol: None,
            window: Self::DEFAULT_WINDOW,
        }
    }

    pub fn float() -> Self {
        Self {
            eq_tol: Self::DEFAULT_FLOAT_EQ_TOL,
            convergence_tol: Some(Self::DEFAULT_CONVERGENCE_TOL),
            window: Self::DEFAULT_WINDOW,
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Rational => Self::exact(),
            Mode::Float64 => Self::float(),
        }
    }

    fn eq_tol_for<S: Scalar>(&self) -> f64 {
        if S::is_exact() {
            0.0
        } else {
            self.eq_tol
        }
    }
}

pub fn is_frozen<S: Scalar>(c: &Configuration<S>, policy: &TolerancePolicy) -> bool {
    hk_step(c).approx_eq(c, policy.eq_tol_for::<S>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalStatus {
    /// One update left the configuration unchanged at step `t`.
    FrozenExactly(usize),
    /// Max-norm displacement stayed below tolerance, with a constant digraph,
    /// for a full window ending at step `t`.
    ConvergedNumerically(usize),
    /// Step budget exhausted after `t` updates.
    MaxStepsReached(usize),
}

impl fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminalStatus::FrozenExactly(t) => write!(f, "FrozenExactly({t})"),
            TerminalStatus::ConvergedNumerically(t) => write!(f, "ConvergedNumerically({t})"),
            TerminalStatus::MaxStepsReached(t) => write!(f, "MaxStepsReached({t})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<S> {
    pub t: usize,
    pub positions: Vec<S>,
    pub energy: S,
    /// Squared norm of the move from step `t` to step `t + 1`.
    pub delta_norm_sq: S,
    pub digraph_hash: String,
    pub digraph_changed: bool,
    /// Float mode only: some pair sits within `eq_tol` of distance `r`.
    pub boundary_warning: bool,
}

/// A simulated trajectory. Record `t` holds state `x_t`; `final_state` is the
/// state after the last recorded update.
#[derive(Debug, Clone)]
pub struct Trace<S> {
    pub records: Vec<TraceRecord<S>>,
    pub final_state: Configuration<S>,
    pub status: TerminalStatus,
}

impl<S: Scalar> Trace<S> {
    /// States `x_0, ..., x_T, x_{T+1}` (the last one is `final_state`).
    pub fn states(&self) -> Vec<Configuration<S>> {
        let mut states: Vec<_> = self
            .records
            .iter()
            .map(|r| {
                self.final_state
                    .with_positions(r.positions.clone())
                    .expect("recorded positions are non-empty")
            })
            .collect();
        states.push(self.final_state.clone());
        states
    }

    /// Rebuilds a trace from bare records, re-deriving the post-trace state
    /// with one more update.
    pub fn from_records(
        template: &Configuration<S>,
        records: Vec<TraceRecord<S>>,
        status: TerminalStatus,
    ) -> Result<Self> {
        let last = records
            .last()
            .ok_or_else(|| Error::InsufficientData("trace has no records".into()))?;
        let last_state = template.with_positions(last.positions.clone())?;
        Ok(Self {
            final_state: hk_step(&last_state),
            records,
            status,
        })
    }
}

fn has_boundary_pair<S: Scalar>(c: &Configuration<S>, tol: f64) -> bool {
    let n = c.len();
    let r = c.radius.to_f64();
    (0..n).any(|i| ((i + 1)..n).any(|j| (c.distance(i, j).to_f64() - r).abs() <= tol))
}

/// Runs at most `max_steps` updates, recording every visited state.
pub fn simulate<S: Scalar>(
    initial: &Configuration<S>,
    max_steps: usize,
    policy: &TolerancePolicy,
) -> Trace<S> {
    let eq_tol = policy.eq_tol_for::<S>();
    let mut records = Vec::new();
    let mut current = initial.clone();
    let mut previous_digraph: Option<InfluenceDigraph> = None;
    let mut quiet_steps = 0usize;

    for t in 0.. {
        let next = hk_step(&current);
        let delta = delta_vector(&current, &next).expect("same geometry");
        let digraph = influence_digraph_after(&current, previous_digraph.as_ref());
        let changed = previous_digraph.as_ref().is_some_and(|g| *g != digraph);
        let boundary_warning = !S::is_exact() && has_boundary_pair(&current, eq_tol);

        records.push(TraceRecord {
            t,
            positions: current.positions.clone(),
            energy: energy(&current),
            delta_norm_sq: delta.norm_sq(),
            digraph_hash: digraph.hash(),
            digraph_changed: changed,
            boundary_warning,
        });

        if next.approx_eq(&current, eq_tol) {
            return Trace {
                records,
                final_state: next,
                status: TerminalStatus::FrozenExactly(t),
            };
        }

        if let Some(tol) = policy.convergence_tol {
            if delta.max_abs().to_f64() < tol && !changed {
                quiet_steps += 1;
            } else {
                quiet_steps = 0;
            }
            if quiet_steps >= policy.window.max(1) {
                return Trace {
                    records,
                    final_state: next,
                    status: TerminalStatus::ConvergedNumerically(t),
                };
            }
        }

        if t >= max_steps {
            return Trace {
                records,
                final_state: next,
                status: TerminalStatus::MaxStepsReached(t),
            };
        }
        previous_digraph = Some(digraph);
        current = next;
    }
    unreachable!()
}
