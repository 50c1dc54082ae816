//! Energy, influence graphs, and verifiers for the energy-descent and
//! digraph-change inequalities.
//!
//! Everything is expressed in units of the confidence radius: distances are
//! divided by `r` before squaring, so with `r = 1` the formulas are the
//! textbook ones and for other radii they are the same statements about the
//! rescaled configuration.

use std::collections::BTreeSet;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dynamics::{delta_vector, hk_step, Configuration, DeltaVector, Trace};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Undirected influence graph: `{i, j}` (stored with `i < j`) iff the agents
/// are within distance `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceGraph {
    pub n: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl InfluenceGraph {
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut adjacency = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(i, j)| i == v || j == v)
            .count()
    }
}

/// Oriented influence digraph: `(i, j)` iff `i != j`, the agents are within
/// distance `r`, and the shortest path from `i` to `j` runs anti-clockwise.
///
/// Coincident agents have no shortest-path direction. Since agents never
/// cross, such a pair keeps the single orientation it had at the previous
/// step (see [`influence_digraph_after`]); with no history it is oriented
/// from the lower index to the higher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceDigraph {
    pub n: usize,
    pub arcs: BTreeSet<(usize, usize)>,
}

impl InfluenceDigraph {
    /// Hex digest of the literal arc set.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        for &(i, j) in &self.arcs {
            hasher.update((i as u64).to_le_bytes());
            hasher.update((j as u64).to_le_bytes());
        }
        hasher.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn underlying(&self) -> InfluenceGraph {
        InfluenceGraph {
            n: self.n,
            edges: self
                .arcs
                .iter()
                .map(|&(i, j)| (i.min(j), i.max(j)))
                .collect(),
        }
    }
}

pub fn influence_graph<S: Scalar>(c: &Configuration<S>) -> InfluenceGraph {
    let n = c.len();
    let edges = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| c.are_neighbors(i, j))
        .collect();
    InfluenceGraph { n, edges }
}

pub fn influence_digraph<S: Scalar>(c: &Configuration<S>) -> InfluenceDigraph {
    influence_digraph_after(c, None)
}

/// Digraph of `c`, orienting coincident pairs as they were in `previous`.
pub fn influence_digraph_after<S: Scalar>(
    c: &Configuration<S>,
    previous: Option<&InfluenceDigraph>,
) -> InfluenceDigraph {
    let n = c.len();
    let half = c.circle().half();
    let xs = c.positions();
    let mut arcs = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !c.are_neighbors(i, j) {
                continue;
            }
            if xs[i] == xs[j] {
                let inherited = previous.and_then(|g| {
                    match (g.arcs.contains(&(i, j)), g.arcs.contains(&(j, i))) {
                        (true, false) => Some((i, j)),
                        (false, true) => Some((j, i)),
                        _ => None,
                    }
                });
                arcs.insert(inherited.unwrap_or((i, j)));
                continue;
            }
            if c.circle().forward_arc(&xs[i], &xs[j]) <= half {
                arcs.insert((i, j));
            }
            if c.circle().forward_arc(&xs[j], &xs[i]) <= half {
                arcs.insert((j, i));
            }
        }
    }
    InfluenceDigraph { n, arcs }
}

/// Digraphs along a trajectory, each oriented with its predecessor's history.
pub fn digraph_sequence<S: Scalar>(states: &[Configuration<S>]) -> Vec<InfluenceDigraph> {
    let mut out: Vec<InfluenceDigraph> = Vec::with_capacity(states.len());
    for c in states {
        let g = influence_digraph_after(c, out.last());
        out.push(g);
    }
    out
}

/// `sum_{i,j} min{1, (delta(x_i, x_j) / r)^2}`.
pub fn energy<S: Scalar>(c: &Configuration<S>) -> S {
    let n = c.len();
    let r_sq = c.radius().clone() * c.radius().clone();
    let one = S::one();
    let mut total = S::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = c.distance(i, j);
            let term = S::min_of(one.clone(), d.clone() * d / r_sq.clone());
            total = total + term;
        }
    }
    total * S::from_usize(2)
}

/// Auxiliary two-argument energy anchored at `base`: neighbour pairs
/// contribute `(u_i - v_j - r(i,j))^2`, non-neighbour pairs 1, the diagonal
/// `(u_i + v_j)^2`, where `r(i,j)` is the signed displacement from `i` to `j`.
/// At `u = v = 0` it equals `energy(base)`.
pub fn script_energy<S: Scalar>(base: &Configuration<S>, u: &[S], v: &[S]) -> Result<S> {
    let n = base.len();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    let r = base.radius().clone();
    let r_sq = r.clone() * r;
    let mut total = S::zero();
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in 0..n {
            let term = if i == j {
                let s = u[i].clone() + v[j].clone();
                s.clone() * s / r_sq.clone()
            } else if base.are_neighbors(i, j) {
                let s = u[i].clone() - v[j].clone() - base.displacement(i, j);
                s.clone() * s / r_sq.clone()
            } else {
                S::one()
            };
            total = total + term;
        }
    }
    Ok(total)
}

/// Float verification slack: `1e-9 * n` on each inequality; zero for
/// rationals.
pub fn slack<S: Scalar>(n: usize) -> S {
    if S::is_exact() {
        S::zero()
    } else {
        S::from_ratio(1, 1_000_000_000) * S::from_usize(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub t: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentReport {
    pub steps_checked: usize,
    pub violations: Vec<Violation>,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn scaled_norm_sq<S: Scalar>(delta: &DeltaVector<S>, radius: &S) -> S {
    delta.norm_sq() / (radius.clone() * radius.clone())
}

/// `E(x_{t+1}) <= E(x_t) - 4 ||Delta_t||^2` on every step of the trace.
pub fn check_energy_descent<S: Scalar>(trace: &Trace<S>) -> DescentReport {
    let states = trace.states();
    let mut violations = Vec::new();
    let mut energies = states.iter().map(energy).collect::<Vec<_>>().into_iter();
    let mut e_prev = energies.next().expect("at least one state");
    for (t, pair) in states.windows(2).enumerate() {
        let e_next = energies.next().expect("one energy per state");
        let delta = delta_vector(&pair[0], &pair[1]).expect("same geometry");
        let n = pair[0].len();
        let drop = S::from_usize(4) * scaled_norm_sq(&delta, pair[0].radius());
        if e_next > e_prev.clone() - drop.clone() + slack::<S>(n) {
            violations.push(Violation {
                check: "energy_descent".into(),
                t,
                detail: format!(
                    "E(t+1) = {} > E(t) - 4|D|^2 = {}",
                    e_next.to_literal(),
                    (e_prev.clone() - drop).to_literal()
                ),
            });
        }
        e_prev = e_next;
    }
    DescentReport {
        steps_checked: states.len() - 1,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeCheck {
    /// Step at which the digraph differs from the previous step's.
    pub t: usize,
    /// `(||Delta_t||^2 + ||Delta_{t+1}||^2) / r^2`.
    pub two_step_norm_sq: String,
    pub bound: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeDropReport {
    pub checks: Vec<ChangeCheck>,
    pub violations: Vec<Violation>,
    pub change_count: usize,
    pub budget: u128,
}

impl ChangeDropReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every digraph change at step `t >= 1` must be paid for by
/// `||Delta_t||^2 + ||Delta_{t+1}||^2 >= 1/(9 n^2)`, and the total number of
/// changes must stay within `18 n^4`. Steps past the end of the trace are
/// generated by further updates when a change sits at the very end.
pub fn check_change_drop<S: Scalar>(trace: &Trace<S>) -> ChangeDropReport {
    let mut states = trace.states();
    let n = states[0].len();
    let radius = states[0].radius().clone();
    let bound = S::one() / S::from_usize(9 * n * n);
    let budget = 18 * (n as u128).pow(4);

    let digraphs = digraph_sequence(&states);
    let change_steps: Vec<usize> = (1..digraphs.len())
        .filter(|&t| digraphs[t] != digraphs[t - 1])
        .collect();

    let mut checks = Vec::new();
    let mut violations = Vec::new();
    for &t in &change_steps {
        while states.len() < t + 3 {
            let next = hk_step(states.last().expect("non-empty"));
            states.push(next);
        }
        let d0 = delta_vector(&states[t], &states[t + 1]).expect("same geometry");
        let d1 = delta_vector(&states[t + 1], &states[t + 2]).expect("same geometry");
        let lhs = scaled_norm_sq(&d0, &radius) + scaled_norm_sq(&d1, &radius);
        let ok = lhs.clone() + slack::<S>(n) >= bound;
        if !ok {
            violations.push(Violation {
                check: "change_drop".into(),
                t,
                detail: format!("{} < 1/(9n^2) = {}", lhs.to_literal(), bound.to_literal()),
            });
        }
        checks.push(ChangeCheck {
            t,
            two_step_norm_sq: lhs.to_literal(),
            bound: bound.to_literal(),
            ok,
        });
    }

    let change_count = change_steps.len();
    if change_count as u128 > budget {
        violations.push(Violation {
            check: "change_budget".into(),
            t: *change_steps.last().expect("non-empty"),
            detail: format!("{change_count} digraph changes exceed 18n^4 = {budget}"),
        });
    }
    ChangeDropReport {
        checks,
        violations,
        change_count,
        budget,
    }
}

/// Exact checks of the auxiliary-energy identities on each step
/// `x_t -> x_{t+1}`:
///
/// * `script_energy_t(0, 0) = E(x_t)`
/// * `script_energy_t(D, D) <= script_energy_t(0, 0)`
/// * `script_energy_t(D, D) - script_energy_{t+1}(0, 0) >= 4 ||D||^2`
/// * `|r_{t+1}(i,j)| <= |r_t(i,j) - (D_i - D_j)|` for `i != j`
///
/// The last one is skipped on steps where either state has an exactly
/// antipodal pair, since its orientation there is a convention.
pub fn check_auxiliary_inequalities<S: Scalar>(trace: &Trace<S>) -> DescentReport {
    let states = trace.states();
    let mut violations = Vec::new();
    let mut push = |check: &str, t: usize, detail: String| {
        violations.push(Violation {
            check: check.into(),
            t,
            detail,
        })
    };
    for (t, pair) in states.windows(2).enumerate() {
        let (now, next) = (&pair[0], &pair[1]);
        let n = now.len();
        let tol = slack::<S>(n);
        let zeros = vec![S::zero(); n];
        let delta = delta_vector(now, next).expect("same geometry");
        let d = delta.components();

        let at_zero = script_energy(now, &zeros, &zeros).expect("dimensions");
        let e_now = energy(now);
        if !at_zero.approx_eq(&e_now, tol.to_f64()) {
            push(
                "script_energy_at_zero",
                t,
                format!("{} != {}", at_zero, e_now),
            );
        }
        let at_delta = script_energy(now, d, d).expect("dimensions");
        if at_delta > at_zero.clone() + tol.clone() {
            push(
                "script_energy_convexity",
                t,
                format!("{at_delta} > {at_zero}"),
            );
        }
        let next_zero = script_energy(next, &zeros, &zeros).expect("dimensions");
        let four = S::from_usize(4) * scaled_norm_sq(&delta, now.radius());
        if at_delta.clone() - next_zero.clone() + tol.clone() < four {
            push(
                "script_energy_gap",
                t,
                format!("{at_delta} - {next_zero} < {four}"),
            );
        }

        if !has_antipodal_pair(now) && !has_antipodal_pair(next) {
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let lhs = next.displacement(i, j).abs();
                    let rhs = (now.displacement(i, j) - (d[i].clone() - d[j].clone())).abs();
                    if lhs > rhs.clone() + tol.clone() {
                        push(
                            "displacement_contraction",
                            t,
                            format!("pair ({i},{j}): {lhs} > {rhs}"),
                        );
                    }
                }
            }
        }
    }
    DescentReport {
        steps_checked: states.len() - 1,
        violations,
    }
}

fn has_antipodal_pair<S: Scalar>(c: &Configuration<S>) -> bool {
    let half = c.circle().half();
    let n = c.len();
    (0..n).any(|i| ((i + 1)..n).any(|j| c.distance(i, j) == half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, TolerancePolicy};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn config(p: Rational, xs: &[Rational]) -> Configuration<Rational> {
        Configuration::new(p, q(1, 1), xs.to_vec()).unwrap()
    }

    fn figure_one() -> Configuration<Rational> {
        config(q(12, 5), &[q(0, 1), q(3, 10), q(6, 5), q(21, 10)])
    }

    fn three_agents() -> Configuration<Rational> {
        config(q(10, 1), &[q(0, 1), q(1, 2), q(97, 10)])
    }

    #[test]
    fn energy_examples() {
        let consensus = config(q(10, 1), &[q(3, 1), q(3, 1), q(3, 1)]);
        assert_eq!(energy(&consensus), q(0, 1));
        assert_eq!(energy(&figure_one()), q(158, 25));
        assert_eq!(energy(&three_agents()), q(49, 25));
    }

    #[test]
    fn script_energy_examples() {
        let base = figure_one();
        let zeros = vec![q(0, 1); 4];
        assert_eq!(script_energy(&base, &zeros, &zeros).unwrap(), energy(&base));
        let u = vec![q(1, 7), q(-2, 9), q(0, 1), q(5, 3)];
        let v = vec![q(3, 4), q(1, 2), q(-1, 5), q(0, 1)];
        assert_eq!(
            script_energy(&base, &u, &v).unwrap(),
            script_energy(&base, &v, &u).unwrap()
        );
        assert!(matches!(
            script_energy(&base, &u[..3], &v),
            Err(Error::DimensionMismatch {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn graph_examples() {
        let sparse = config(q(10, 1), &[q(0, 1), q(3, 1), q(6, 1)]);
        assert!(influence_graph(&sparse).edges.is_empty());
        assert!(influence_digraph(&sparse).arcs.is_empty());

        let g = influence_graph(&figure_one());
        let expected: BTreeSet<_> = [(0, 1), (0, 3), (1, 2), (1, 3), (2, 3)].into();
        assert_eq!(g.edges, expected);
        assert!(g.is_connected());

        let xs: Vec<_> = (0..6).map(|j| q(j, 2)).collect();
        let ring = config(q(3, 1), &xs);
        let g = influence_graph(&ring);
        assert!((0..6).all(|v| g.degree(v) == 4));
    }

    #[test]
    fn digraph_orientation() {
        let d = influence_digraph(&figure_one());
        // 0 -> 1 anti-clockwise, 3 -> 0 across the origin.
        assert!(d.arcs.contains(&(0, 1)) && !d.arcs.contains(&(1, 0)));
        assert!(d.arcs.contains(&(3, 0)) && !d.arcs.contains(&(0, 3)));
        assert_eq!(d.underlying(), influence_graph(&figure_one()));
        assert_eq!(d.hash().len(), 16);

        let coincident = config(q(10, 1), &[q(1, 1), q(1, 1)]);
        let fresh = influence_digraph(&coincident);
        assert_eq!(fresh.arcs, [(0, 1)].into());
        let history = InfluenceDigraph {
            n: 2,
            arcs: [(1, 0)].into(),
        };
        assert_eq!(
            influence_digraph_after(&coincident, Some(&history)).arcs,
            [(1, 0)].into()
        );
    }

    #[test]
    fn descent_on_three_agents() {
        let trace = simulate(&three_agents(), 5, &TolerancePolicy::exact());
        let report = check_energy_descent(&trace);
        assert!(report.passed());
        // E0 = 49/25, E1 = 0, 4|D0|^2 = 1176/900.
        assert!(q(0, 1) <= q(49, 25) - q(1176, 900));
        assert!(check_auxiliary_inequalities(&trace).passed());
        // Merging keeps every pair's orientation, so the digraph never changes.
        let changes = check_change_drop(&trace);
        assert_eq!(changes.change_count, 0);
        assert!(changes.passed());
    }

    #[test]
    fn frozen_trace_is_vacuous() {
        let trace = simulate(&figure_one(), 5, &TolerancePolicy::exact());
        assert!(check_energy_descent(&trace).passed());
        let changes = check_change_drop(&trace);
        assert_eq!(changes.change_count, 0);
        assert!(changes.checks.is_empty());
        assert_eq!(changes.budget, 18 * 256);
    }

    #[test]
    fn corrupted_energy_is_detected() {
        let mut trace = simulate(&three_agents(), 5, &TolerancePolicy::exact());
        // Move an agent after the fact: the consensus state is no longer
        // consistent with the claimed descent.
        trace.final_state = trace
            .final_state
            .with_positions(vec![q(0, 1), q(1, 1), q(5, 1)])
            .unwrap();
        assert!(!check_energy_descent(&trace).passed());
    }
}
