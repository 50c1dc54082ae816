//! Bounded-confidence opinion dynamics (the Hegselmann-Krause model) with
//! agents on a circle.
//!
//! Agents hold opinions on a circle of perimeter `p` and, at every step, move
//! to the average of all opinions within distance `r` of their own. This crate
//! simulates that process exactly (arbitrary-precision rationals) or quickly
//! (`f64`), and checks the quantitative facts that govern it: the energy
//! descent inequality, the lower bound on movement around influence-digraph
//! changes, the linear gap dynamics under a fixed digraph, and the
//! constructions of frozen, never-freezing and slowly freezing configurations.

pub mod circle;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod lyapunov;
pub mod scalar;
pub mod scenarios;
pub mod spacing;

pub use circle::Circle;
pub use dynamics::{
    delta_vector, hk_step, is_frozen, neighborhood, simulate, Configuration, DeltaVector,
    TerminalStatus, TolerancePolicy, Trace, TraceRecord,
};
pub use error::{Error, Result};
pub use lyapunov::{
    check_auxiliary_inequalities, check_change_drop, check_energy_descent, digraph_sequence,
    energy, influence_digraph, influence_digraph_after, influence_graph, script_energy,
    InfluenceDigraph, InfluenceGraph,
};
pub use scalar::{Mode, Rational, Scalar};
pub use scenarios::{
    collapse_interval, decompose_n, equally_spaced, figure_one, five_cluster, perturbed_figure_one,
    predict_slow_freeze, random_config, ScenarioSpec, SlowFreezeParams,
};
pub use spacing::{
    apply_matrix, column_sums, estimate_decay_rate, gap_dynamics_hold, gap_vector,
    transition_matrix, verify_eigenpair, GapVector, TransitionMatrix,
};
