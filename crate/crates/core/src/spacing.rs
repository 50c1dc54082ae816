//! Gap-vector representation of a configuration and the linear map it
//! follows while the influence digraph stays fixed.

use serde::Serialize;

use crate::dynamics::{hk_step, Configuration, Trace};
use crate::error::{Error, Result};
use crate::lyapunov::influence_graph;
use crate::scalar::Scalar;

/// Normalised consecutive gaps: entry `i` is the anti-clockwise arc from
/// agent `i` to agent `i + 1` (cyclically), divided by `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapVector<S>(pub Vec<S>);

impl<S: Scalar> GapVector<S> {
    pub fn entries(&self) -> &[S] {
        &self.0
    }

    pub fn sum(&self) -> S {
        self.0.iter().fold(S::zero(), |a, b| a + b.clone())
    }
}

/// Gap vector of a cyclically ordered configuration. Entries always sum to 1;
/// when every agent coincides the whole circle is assigned to the last gap.
pub fn gap_vector<S: Scalar>(c: &Configuration<S>) -> Result<GapVector<S>> {
    if !c.is_cyclically_ordered() {
        return Err(Error::NotCyclicallyOrdered);
    }
    let n = c.len();
    let xs = c.positions();
    let p = c.perimeter().clone();
    let mut gaps: Vec<S> = (0..n)
        .map(|i| c.circle().forward_arc(&xs[i], &xs[(i + 1) % n]) / p.clone())
        .collect();
    if gaps.iter().all(|g| g.is_zero()) {
        gaps[n - 1] = S::one();
    }
    Ok(GapVector(gaps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> TransitionMatrix<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { S::one() } else { S::zero() })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.rows[i][j]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.rows.iter().flatten().all(|x| *x >= S::zero())
    }

    /// JSON form: array of rows of scalar literals.
    pub fn to_literal_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(Scalar::to_literal).collect())
            .collect()
    }
}

/// The matrix `A` with `gap_vector(hk_step(x)) = A * gap_vector(x)` for every
/// configuration sharing this one's influence digraph and cyclic order.
///
/// Each agent's step is the average of its neighbours' signed offsets, and an
/// offset is a run of consecutive gaps taken in the direction of the shorter
/// arc. The new gap `i` is the old one plus the step of agent `i + 1` minus
/// the step of agent `i`.
pub fn transition_matrix<S: Scalar>(c: &Configuration<S>) -> Result<TransitionMatrix<S>> {
    let gaps = gap_vector(c)?;
    if !influence_graph(c).is_connected() {
        return Err(Error::Disconnected);
    }
    let n = c.len();
    let g = gaps.entries();
    let half = S::from_ratio(1, 2);

    // step[i][k]: coefficient of gap k in agent i's normalised displacement.
    let mut step = vec![vec![S::zero(); n]; n];
    for (i, row) in step.iter_mut().enumerate() {
        let neighbors: Vec<usize> = (0..n).filter(|&j| c.are_neighbors(i, j)).collect();
        let weight = S::one() / S::from_usize(neighbors.len());
        for &j in neighbors.iter().filter(|&&j| j != i) {
            let forward: Vec<usize> = cyclic_range(i, j, n).collect();
            let forward_len = forward.iter().fold(S::zero(), |a, &k| a + g[k].clone());
            if forward_len <= half {
                for k in forward {
                    row[k] = row[k].clone() + weight.clone();
                }
            } else {
                for k in cyclic_range(j, i, n) {
                    row[k] = row[k].clone() - weight.clone();
                }
            }
        }
    }

    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let diag = if i == k { S::one() } else { S::zero() };
                    diag + step[(i + 1) % n][k].clone() - step[i][k].clone()
                })
                .collect()
        })
        .collect();
    Ok(TransitionMatrix { rows })
}

/// Gap indices `from, from + 1, ..., to - 1` modulo `n`.
fn cyclic_range(from: usize, to: usize, n: usize) -> impl Iterator<Item = usize> {
    let len = (to + n - from) % n;
    (0..len).map(move |k| (from + k) % n)
}

pub fn apply_matrix<S: Scalar>(a: &TransitionMatrix<S>, v: &[S]) -> Result<Vec<S>> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: v.len(),
        });
    }
    Ok(a.rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
        })
        .collect())
}

/// Float-mode tolerance for [`verify_eigenpair`].
pub const EIGENPAIR_TOL: f64 = 1e-9;

/// Whether `A v = lambda v` (exactly for rationals).
pub fn verify_eigenpair<S: Scalar>(a: &TransitionMatrix<S>, lambda: &S, v: &[S]) -> Result<bool> {
    if v.iter().all(|x| x.is_zero()) {
        return Err(Error::ZeroVector);
    }
    let av = apply_matrix(a, v)?;
    Ok(av
        .iter()
        .zip(v)
        .all(|(x, y)| x.approx_eq(&(lambda.clone() * y.clone()), EIGENPAIR_TOL)))
}

pub fn column_sums<S: Scalar>(a: &TransitionMatrix<S>) -> Vec<S> {
    (0..a.dim())
        .map(|j| {
            a.rows
                .iter()
                .fold(S::zero(), |acc, row| acc + row[j].clone())
        })
        .collect()
}

pub fn is_column_stochastic<S: Scalar>(a: &TransitionMatrix<S>) -> bool {
    a.is_nonnegative()
        && column_sums(a)
            .iter()
            .all(|s| s.approx_eq(&S::one(), EIGENPAIR_TOL))
}

/// Whether one update moves the gaps by the transition matrix:
/// `gap_vector(hk_step(c)) = A gap_vector(c)`, within `tol` in float mode.
/// A consensus result has no preferred gap for the full circle, so any unit
/// vector is accepted there.
pub fn gap_dynamics_hold<S: Scalar>(c: &Configuration<S>, tol: f64) -> Result<bool> {
    let a = transition_matrix(c)?;
    let predicted = apply_matrix(&a, gap_vector(c)?.entries())?;
    let next = hk_step(c);
    if next.is_consensus() {
        let ones = predicted
            .iter()
            .filter(|g| g.approx_eq(&S::one(), tol))
            .count();
        let zeros = predicted
            .iter()
            .filter(|g| g.approx_eq(&S::zero(), tol))
            .count();
        return Ok(ones == 1 && ones + zeros == predicted.len());
    }
    let actual = gap_vector(&next)?;
    Ok(predicted
        .iter()
        .zip(actual.entries())
        .all(|(p, g)| p.approx_eq(g, tol)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Fitted exponential rate `c` in `||Delta_t|| ~ exp(-c t)`.
    pub rate: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares slope of `ln ||Delta_t||` against `t` over the last `tail`
/// records. The digraph must be constant over that window and every step
/// must move.
pub fn estimate_decay_rate<S: Scalar>(trace: &Trace<S>, tail: usize) -> Result<DecayFit> {
    let start = trace.records.len().saturating_sub(tail);
    let window = &trace.records[start..];
    if window.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 steps, have {}",
            window.len()
        )));
    }
    if window
        .iter()
        .any(|r| r.digraph_hash != window[0].digraph_hash)
    {
        return Err(Error::InsufficientData(
            "influence digraph changes inside the fit window".into(),
        ));
    }
    let mut points = Vec::with_capacity(window.len());
    for r in window {
        let sq = r.delta_norm_sq.to_f64();
        if sq <= 0.0 {
            return Err(Error::InsufficientData(format!(
                "zero displacement at t = {}",
                r.t
            )));
        }
        points.push((r.t as f64, 0.5 * sq.ln()));
    }
    let m = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let residual = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(DecayFit {
        rate: -slope,
        intercept,
        residual,
        points: points.len(),
    })
}
