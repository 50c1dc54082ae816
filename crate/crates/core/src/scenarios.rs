//! Constructors for the configuration families studied here, plus closed-form
//! predictors for the slow-freeze construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{hk_step, Configuration, Trace};
use crate::error::{Error, Result};
use crate::lyapunov::influence_digraph;
use crate::scalar::{Rational, Scalar};

/// Positions `p * j / n` for `j = 0..n`.
pub fn equally_spaced<S: Scalar>(n: usize, perimeter: S, radius: S) -> Result<Configuration<S>> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let positions = (0..n)
        .map(|j| perimeter.clone() * S::from_usize(j) / S::from_usize(n))
        .collect();
    Configuration::new(perimeter, radius, positions)
}

/// The non-uniform four-agent frozen configuration with gaps
/// `p * (1/8, 3/8, 3/8, 1/8)` and unit radius, valid for `2 < p < 8/3`.
pub fn figure_one<S: Scalar>(perimeter: S) -> Result<Configuration<S>> {
    perturbed_figure_one(perimeter, S::zero())
}

/// Figure-one configuration with gap vector
/// `(1/8 + e, 3/8 + e, 3/8 - e, 1/8 - e)`. Rejected when the perturbation
/// changes the influence digraph, now or after one update.
pub fn perturbed_figure_one<S: Scalar>(perimeter: S, epsilon: S) -> Result<Configuration<S>> {
    if perimeter <= S::from_usize(2) || perimeter >= S::from_ratio(8, 3) {
        return Err(Error::InvalidParameters(format!(
            "perimeter {} outside (2, 8/3)",
            perimeter.to_literal()
        )));
    }
    let gaps = [
        S::from_ratio(1, 8) + epsilon.clone(),
        S::from_ratio(3, 8) + epsilon.clone(),
        S::from_ratio(3, 8) - epsilon.clone(),
        S::from_ratio(1, 8) - epsilon.clone(),
    ];
    if gaps.iter().any(|g| *g < S::zero()) {
        return Err(Error::Validation(format!(
            "epsilon {} makes a gap negative",
            epsilon.to_literal()
        )));
    }
    let mut positions = Vec::with_capacity(4);
    let mut acc = S::zero();
    for g in &gaps[..3] {
        positions.push(acc.clone() * perimeter.clone());
        acc = acc + g.clone();
    }
    positions.push(acc * perimeter.clone());
    let c = Configuration::new(perimeter.clone(), S::one(), positions)?;

    if !epsilon.is_zero() {
        let reference = influence_digraph(&figure_one_unchecked(perimeter)?);
        if influence_digraph(&c) != reference || influence_digraph(&hk_step(&c)) != reference {
            return Err(Error::Validation(format!(
                "epsilon {} changes the influence digraph",
                epsilon.to_literal()
            )));
        }
    }
    Ok(c)
}

fn figure_one_unchecked<S: Scalar>(perimeter: S) -> Result<Configuration<S>> {
    let positions = vec![
        S::zero(),
        perimeter.clone() * S::from_ratio(1, 8),
        perimeter.clone() * S::from_ratio(1, 2),
        perimeter.clone() * S::from_ratio(7, 8),
    ];
    Configuration::new(perimeter, S::one(), positions)
}

/// Parameters of the five-cluster slow-freeze construction.
///
/// Clusters of sizes `(m1, m2, m1, m1, m2)` sit anti-clockwise at
/// `(0, d1 + y2, 2 d1 + y1, 2 d1 + d2 - y1, 3 d1 + d2 - y2)` on a circle of
/// perimeter `4 d1 + d2`, where `d2 = (m2 / m1) d1` and `(y1, y2) = y0`.
/// The gap between the two adjacent `m1` clusters is `d2 - 2 y1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowFreezeParams<S> {
    pub m1: usize,
    pub m2: usize,
    pub d1: S,
    pub y0: (S, S),
    pub radius: S,
}

impl<S: Scalar> SlowFreezeParams<S> {
    /// `y0` defaults to `d1 * 1e-4` in both components.
    pub fn new(m1: usize, m2: usize, d1: S, radius: S) -> Self {
        let y = d1.clone() * S::from_ratio(1, 10_000);
        Self {
            m1,
            m2,
            d1,
            y0: (y.clone(), y),
            radius,
        }
    }

    pub fn with_y0(mut self, y1: S, y2: S) -> Self {
        self.y0 = (y1, y2);
        self
    }

    pub fn d2(&self) -> S {
        S::from_usize(self.m2) * self.d1.clone() / S::from_usize(self.m1)
    }

    pub fn perimeter(&self) -> S {
        S::from_usize(4) * self.d1.clone() + self.d2()
    }

    pub fn n(&self) -> usize {
        3 * self.m1 + 2 * self.m2
    }

    /// Cluster sizes in anti-clockwise order.
    pub fn sizes(&self) -> [usize; 5] {
        [self.m1, self.m2, self.m1, self.m1, self.m2]
    }

    /// Agent index of the first member of each cluster.
    pub fn cluster_starts(&self) -> [usize; 5] {
        let mut starts = [0; 5];
        let mut acc = 0;
        for (k, size) in self.sizes().into_iter().enumerate() {
            starts[k] = acc;
            acc += size;
        }
        starts
    }

    /// Representatives of the two adjacent equal-size clusters, in order.
    pub fn equal_pair(&self) -> (usize, usize) {
        let starts = self.cluster_starts();
        (starts[2], starts[3])
    }

    fn cluster_positions(&self) -> [S; 5] {
        let d1 = self.d1.clone();
        let d2 = self.d2();
        let (y1, y2) = self.y0.clone();
        let two = S::from_usize(2);
        let three = S::from_usize(3);
        [
            S::zero(),
            d1.clone() + y2.clone(),
            two.clone() * d1.clone() + y1.clone(),
            two * d1.clone() + d2.clone() - y1,
            three * d1 + d2 - y2,
        ]
    }

    fn validate(&self) -> Result<()> {
        let (m1, m2) = (self.m1, self.m2);
        if !(m1 >= 1 && m1 < m2 && m2 < 2 * m1) {
            return Err(Error::InvalidParameters(format!(
                "need m1 < m2 < 2 m1, got m1 = {m1}, m2 = {m2}"
            )));
        }
        if self.d1 <= S::zero() {
            return Err(Error::InvalidParameters("d1 must be positive".into()));
        }
        if self.y0.0 < S::zero() || self.y0.1 < S::zero() {
            return Err(Error::InvalidParameters("y0 must be non-negative".into()));
        }
        if self.radius <= S::zero() || self.radius.clone() * S::from_usize(2) >= self.perimeter() {
            return Err(Error::RadiusTooLarge);
        }
        Ok(())
    }
}

/// Builds the five-cluster state. Every cluster must see its `d1`-side
/// neighbour cluster and no non-adjacent cluster; the pair of equal `m1`
/// clusters may or may not see each other, depending on `r`.
pub fn five_cluster<S: Scalar>(params: &SlowFreezeParams<S>) -> Result<Configuration<S>> {
    params.validate()?;
    let centers = params.cluster_positions();
    let p = params.perimeter();
    let mut positions = Vec::with_capacity(params.n());
    for (center, size) in centers.iter().zip(params.sizes()) {
        positions.extend(std::iter::repeat_n(center.clone(), size));
    }
    let c = Configuration::new(p.clone(), params.radius.clone(), positions)?;

    let ordered = centers.windows(2).all(|w| w[0] < w[1]) && centers[4] < p;
    if !ordered {
        return Err(Error::Validation(
            "perturbation reorders the clusters".into(),
        ));
    }
    if params.d2() - S::from_usize(2) * params.y0.0.clone() <= S::zero() {
        return Err(Error::Validation(
            "perturbation closes the m1-m1 gap".into(),
        ));
    }
    let circle = c.circle();
    for a in 0..5 {
        for b in (a + 1)..5 {
            let sees = circle.distance(&centers[a], &centers[b]) <= params.radius;
            let adjacent = b == a + 1 || (a == 0 && b == 4);
            if (a, b) == (2, 3) {
                continue;
            }
            if adjacent && !sees {
                return Err(Error::Validation(format!(
                    "cluster {a} does not see its neighbour cluster {b}"
                )));
            }
            if !adjacent && sees {
                return Err(Error::Validation(format!(
                    "cluster {a} sees non-adjacent cluster {b}"
                )));
            }
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlowFreezePrediction<S> {
    /// `(y_t(1), y_t(2))` for `t = 0..=disconnect_time`.
    pub ys: Vec<(S, S)>,
    /// First `t` with `d2 - 2 y_t(1) > r`.
    pub disconnect_time: usize,
}

/// Iterates the cluster-perturbation recursion
///
/// ```text
/// y_{t+1}(1) = m2 y_t(2) / (2 m1 + m2)
/// y_{t+1}(2) = (m1 y_t(1) + m2 y_t(2)) / (2 m1 + m2)
/// ```
///
/// until the gap between the equal clusters exceeds `r`.
pub fn predict_slow_freeze<S: Scalar>(
    params: &SlowFreezeParams<S>,
) -> Result<SlowFreezePrediction<S>> {
    const MAX_ITERATIONS: usize = 1_000_000;

    params.validate()?;
    let d2 = params.d2();
    if params.radius >= d2 {
        return Err(Error::InvalidParameters(
            "r >= d2: the equal clusters never disconnect".into(),
        ));
    }
    if params.y0.0.is_zero() && params.y0.1.is_zero() {
        return Err(Error::InvalidParameters(
            "zero perturbation is a fixed point of the recursion".into(),
        ));
    }
    let m1 = S::from_usize(params.m1);
    let m2 = S::from_usize(params.m2);
    let total = S::from_usize(2 * params.m1 + params.m2);
    let two = S::from_usize(2);

    let mut ys = vec![params.y0.clone()];
    for t in 0..MAX_ITERATIONS {
        let (y1, y2) = ys[t].clone();
        if d2.clone() - two.clone() * y1.clone() > params.radius {
            return Ok(SlowFreezePrediction {
                ys,
                disconnect_time: t,
            });
        }
        let next1 = m2.clone() * y2.clone() / total.clone();
        let next2 = (m1.clone() * y1 + m2.clone() * y2) / total.clone();
        ys.push((next1, next2));
    }
    Err(Error::InsufficientData(format!(
        "no disconnect within {MAX_ITERATIONS} iterations"
    )))
}

/// First recorded step at which the two equal clusters are farther apart than
/// `r` in a simulated five-cluster trace.
pub fn disconnect_time_in<S: Scalar>(
    trace: &Trace<S>,
    params: &SlowFreezeParams<S>,
) -> Option<usize> {
    let (a, b) = params.equal_pair();
    let state = &trace.final_state;
    trace
        .records
        .iter()
        .find(|r| state.circle().distance(&r.positions[a], &r.positions[b]) > params.radius)
        .map(|r| r.t)
}

/// Parameter window for `r / d1` that makes the disconnected five-cluster line
/// collapse to consensus in exactly three steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseInterval {
    pub lower: String,
    pub upper: String,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseWindow {
    pub lower: Rational,
    pub upper: Rational,
}

impl CollapseWindow {
    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lower < *x && *x < self.upper
    }

    pub fn summary(&self) -> CollapseInterval {
        CollapseInterval {
            lower: self.lower.to_literal(),
            upper: self.upper.to_literal(),
            feasible: !self.is_empty(),
        }
    }
}

/// `( 2 (m1^2 + m2^2 + m1 m2) / (m2 (2 m1 + m2)), m2 / m1 )`.
pub fn collapse_interval(m1: usize, m2: usize) -> Result<CollapseWindow> {
    if !(m1 >= 1 && m1 < m2 && m2 < 2 * m1) {
        return Err(Error::InvalidParameters(format!(
            "need m1 < m2 < 2 m1, got m1 = {m1}, m2 = {m2}"
        )));
    }
    let (a, b) = (m1 as i64, m2 as i64);
    Ok(CollapseWindow {
        lower: Rational::from_ratio(2 * (a * a + b * b + a * b), b * (2 * a + b)),
        upper: Rational::from_ratio(b, a),
    })
}

/// `xi^3 - 2 xi - 2`.
pub fn collapse_cubic(xi: &Rational) -> Rational {
    xi.clone() * xi.clone() * xi.clone()
        - Rational::from_ratio(2, 1) * xi.clone()
        - Rational::from_ratio(2, 1)
}

/// Exact bisection bracket `(lo, hi)` around the real root of
/// `xi^3 - 2 xi - 2`, of width `2^-iterations` starting from `[1, 2]`.
pub fn collapse_threshold_bracket(iterations: usize) -> (Rational, Rational) {
    let mut lo = Rational::from_ratio(1, 1);
    let mut hi = Rational::from_ratio(2, 1);
    for _ in 0..iterations {
        let mid = (lo.clone() + hi.clone()) / Rational::from_ratio(2, 1);
        if collapse_cubic(&mid) < Rational::from_ratio(0, 1) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Whether the three-step collapse window is non-empty, decided by the sign
/// of the cubic at `m2 / m1`.
pub fn collapse_feasible(m1: usize, m2: usize) -> Result<bool> {
    let window = collapse_interval(m1, m2)?;
    Ok(collapse_cubic(&window.upper) > Rational::from_ratio(0, 1))
}

/// All `(m1, m2)` with `3 m1 + 2 m2 = n` and `m1 < m2 < 2 m1`, ascending in `m1`.
pub fn decompose_n(n: usize) -> Vec<(usize, usize)> {
    (1..=n / 3)
        .filter_map(|m1| {
            let rest = n - 3 * m1;
            rest.is_multiple_of(2).then_some((m1, rest / 2))
        })
        .filter(|&(m1, m2)| m1 < m2 && m2 < 2 * m1)
        .collect()
}

/// Grid resolution for [`random_config`].
pub const RANDOM_GRID: i64 = 1 << 16;

/// `n` positions drawn uniformly from the grid `p * k / 2^16`, sorted, and
/// fully determined by `seed`.
pub fn random_config<S: Scalar>(
    n: usize,
    perimeter: S,
    radius: S,
    seed: u64,
) -> Result<Configuration<S>> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ks: Vec<i64> = (0..n).map(|_| rng.random_range(0..RANDOM_GRID)).collect();
    ks.sort_unstable();
    let positions = ks
        .into_iter()
        .map(|k| perimeter.clone() * S::from_ratio(k, RANDOM_GRID))
        .collect();
    Configuration::new(perimeter, radius, positions)
}

/// JSON scenario description; builds a configuration in either scalar mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum ScenarioSpec {
    #[serde(rename = "figure1")]
    FigureOne { perimeter: String },
    EquallySpaced {
        n: usize,
        perimeter: String,
        #[serde(default = "one")]
        radius: String,
    },
    #[serde(rename = "perturbed_figure1")]
    PerturbedFigureOne { perimeter: String, epsilon: String },
    FiveCluster {
        m1: usize,
        m2: usize,
        d1: String,
        radius: String,
        /// Applied to both components unless `y0_1` / `y0_2` are given.
        #[serde(default)]
        y0: Option<String>,
        #[serde(default)]
        y0_1: Option<String>,
        #[serde(default)]
        y0_2: Option<String>,
    },
    Random {
        n: usize,
        perimeter: String,
        #[serde(default = "one")]
        radius: String,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> String {
    "1".into()
}

impl ScenarioSpec {
    pub fn build<S: Scalar>(&self) -> Result<Configuration<S>> {
        match self {
            ScenarioSpec::FigureOne { perimeter } => figure_one(S::parse_literal(perimeter)?),
            ScenarioSpec::EquallySpaced {
                n,
                perimeter,
                radius,
            } => equally_spaced(*n, S::parse_literal(perimeter)?, S::parse_literal(radius)?),
            ScenarioSpec::PerturbedFigureOne { perimeter, epsilon } => {
                perturbed_figure_one(S::parse_literal(perimeter)?, S::parse_literal(epsilon)?)
            }
            ScenarioSpec::FiveCluster { .. } => five_cluster(&self.slow_freeze_params()?),
            ScenarioSpec::Random {
                n,
                perimeter,
                radius,
                seed,
            } => random_config(
                *n,
                S::parse_literal(perimeter)?,
                S::parse_literal(radius)?,
                *seed,
            ),
        }
    }

    pub fn slow_freeze_params<S: Scalar>(&self) -> Result<SlowFreezeParams<S>> {
        let ScenarioSpec::FiveCluster {
            m1,
            m2,
            d1,
            radius,
            y0,
            y0_1,
            y0_2,
        } = self
        else {
            return Err(Error::InvalidParameters(
                "not a five_cluster scenario".into(),
            ));
        };
        let mut params =
            SlowFreezeParams::new(*m1, *m2, S::parse_literal(d1)?, S::parse_literal(radius)?);
        let default = match y0 {
            Some(y) => S::parse_literal(y)?,
            None => params.y0.0.clone(),
        };
        let y1 = y0_1
            .as_deref()
            .map(S::parse_literal)
            .transpose()?
            .unwrap_or(default.clone());
        let y2 = y0_2
            .as_deref()
            .map(S::parse_literal)
            .transpose()?
            .unwrap_or(default);
        params = params.with_y0(y1, y2);
        Ok(params)
    }
}
