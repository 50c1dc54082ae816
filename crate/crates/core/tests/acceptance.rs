//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p hkcircle-core --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hkcircle::lyapunov::{check_auxiliary_inequalities, check_change_drop, check_energy_descent};
use hkcircle::scenarios::disconnect_time_in;
use hkcircle::spacing::is_column_stochastic;
use hkcircle::{
    column_sums, decompose_n, delta_vector, digraph_sequence, energy, equally_spaced, figure_one,
    five_cluster, gap_dynamics_hold, gap_vector, hk_step, influence_graph, is_frozen,
    perturbed_figure_one, predict_slow_freeze, random_config, simulate, transition_matrix,
    verify_eigenpair, Configuration, Rational, Scalar, SlowFreezeParams, TerminalStatus,
    TolerancePolicy, TransitionMatrix,
};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Rational;

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn lit(s: &str) -> Q {
    Q::parse_literal(s).unwrap()
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Random `(n, p)` with `3 <= n <= 20` and `p` in `(2, n]`, `r = 1`.
fn random_rational_config(rng: &mut ChaCha8Rng) -> Configuration<Q> {
    let n: usize = rng.random_range(3..=20);
    let k: i64 = rng.random_range(1..=1000);
    let p = q(2, 1) + q((n as i64 - 2) * k, 1000);
    random_config(n, p, q(1, 1), rng.random()).unwrap()
}

fn reference_matrix() -> TransitionMatrix<Q> {
    let row = |xs: [(i64, i64); 4]| xs.iter().map(|&(a, b)| q(a, b)).collect::<Vec<_>>();
    TransitionMatrix::from_rows(vec![
        row([(1, 6), (1, 4), (0, 1), (1, 12)]),
        row([(1, 2), (5, 12), (1, 3), (1, 4)]),
        row([(1, 4), (1, 3), (5, 12), (1, 2)]),
        row([(1, 12), (0, 1), (1, 4), (1, 6)]),
    ])
    .unwrap()
}

fn criterion_1() -> Outcome {
    let a = transition_matrix(&figure_one(q(12, 5)).unwrap()).map_err(|e| e.to_string())?;
    ensure(
        a == reference_matrix(),
        format!("got {:?}", a.to_literal_rows()),
    )?;
    Ok("16 entries equal".into())
}

fn criterion_2() -> Outcome {
    let a = transition_matrix(&figure_one(q(12, 5)).unwrap()).map_err(|e| e.to_string())?;
    let slow = [q(1, 1), q(1, 1), q(-1, 1), q(-1, 1)];
    let stationary = [q(1, 8), q(3, 8), q(3, 8), q(1, 8)];
    ensure(
        verify_eigenpair(&a, &q(1, 3), &slow).unwrap(),
        "1/3 eigenpair fails",
    )?;
    ensure(
        verify_eigenpair(&a, &q(1, 1), &stationary).unwrap(),
        "stationary eigenpair fails",
    )?;
    Ok("both eigenpairs exact".into())
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut steps = 0;
    for k in 0..100 {
        let c = random_rational_config(&mut rng);
        let trace = simulate(&c, 50, &TolerancePolicy::exact());
        let descent = check_energy_descent(&trace);
        ensure(
            descent.passed(),
            format!("config {k}: {:?}", descent.violations),
        )?;
        let aux = check_auxiliary_inequalities(&trace);
        ensure(aux.passed(), format!("config {k}: {:?}", aux.violations))?;
        steps += descent.steps_checked;
    }
    Ok(format!("100 configurations, {steps} exact steps"))
}

/// Slow-freeze parameter sets whose runs cross the disconnect (`t* >= 1`).
fn crossing_runs() -> Vec<SlowFreezeParams<Q>> {
    let mut runs = Vec::new();
    for (m1, m2) in [(2, 3), (3, 4), (3, 5), (4, 5), (4, 7)] {
        for eps in ["1e-3", "1e-4", "1e-5", "1e-6"] {
            let params = SlowFreezeParams::new(m1, m2, q(1, 1), q(0, 1));
            let radius = params.d2() - lit(eps);
            runs.push(SlowFreezeParams { radius, ..params });
        }
    }
    runs
}

fn criterion_4() -> Outcome {
    let mut crossings = 0;
    let mut max_changes = 0;
    for params in crossing_runs() {
        let n = params.n();
        let t_star = predict_slow_freeze(&params)
            .map_err(|e| e.to_string())?
            .disconnect_time;
        if t_star == 0 {
            continue;
        }
        let trace = simulate(
            &five_cluster(&params).unwrap(),
            t_star + 60,
            &TolerancePolicy::exact(),
        );
        ensure(
            disconnect_time_in(&trace, &params) == Some(t_star),
            format!("{params:?}: disconnect not at {t_star}"),
        )?;
        let mut states = trace.states();
        while states.len() < t_star + 3 {
            let next = hk_step(states.last().unwrap());
            states.push(next);
        }
        let digraphs = digraph_sequence(&states);
        ensure(
            digraphs[t_star] != digraphs[t_star - 1],
            "no digraph change at t*",
        )?;
        let d0 = delta_vector(&states[t_star], &states[t_star + 1])
            .unwrap()
            .norm_sq();
        let d1 = delta_vector(&states[t_star + 1], &states[t_star + 2])
            .unwrap()
            .norm_sq();
        let r_sq = params.radius.clone() * params.radius.clone();
        let bound = q(1, (9 * n * n) as i64);
        ensure(
            (d0 + d1) / r_sq >= bound,
            format!(
                "m1={} m2={}: two-step movement below 1/(9n^2) at t*={t_star}",
                params.m1, params.m2
            ),
        )?;
        let report = check_change_drop(&trace);
        ensure(report.passed(), format!("{:?}", report.violations))?;
        ensure(
            report.change_count as u128 <= report.budget,
            "budget exceeded",
        )?;
        max_changes = max_changes.max(report.change_count);
        crossings += 1;
    }
    ensure(crossings >= 10, format!("only {crossings} runs crossed"))?;
    Ok(format!(
        "{crossings} crossing runs, at most {max_changes} digraph changes"
    ))
}

fn criterion_5() -> Outcome {
    let policy = TolerancePolicy::exact();
    ensure(
        is_frozen(&equally_spaced(6, q(3, 1), q(1, 1)).unwrap(), &policy),
        "equally spaced",
    )?;
    for p in [q(11, 5), q(12, 5), q(13, 5)] {
        ensure(
            is_frozen(&figure_one(p.clone()).unwrap(), &policy),
            format!("figure_one({p})"),
        )?;
    }
    let params = SlowFreezeParams::new(2, 3, q(1, 1), q(17, 10)).with_y0(q(0, 1), q(0, 1));
    ensure(
        is_frozen(&five_cluster(&params).unwrap(), &policy),
        "five_cluster",
    )?;
    Ok("5 configurations are fixed points".into())
}

fn criterion_6() -> Outcome {
    let p = q(12, 5);
    let c = perturbed_figure_one(p, q(1, 1000)).unwrap();
    let trace = simulate(&c, 30, &TolerancePolicy::exact());
    ensure(
        trace.status == TerminalStatus::MaxStepsReached(30),
        format!("status {}", trace.status),
    )?;
    let limit = [q(1, 8), q(3, 8), q(3, 8), q(1, 8)];
    let deviation = |c: &Configuration<Q>| -> Vec<Q> {
        let g = gap_vector(c).unwrap();
        g.entries()
            .iter()
            .zip(&limit)
            .map(|(a, b)| a.clone() - b.clone())
            .collect()
    };
    let states = trace.states();
    for t in 0..30 {
        let now = deviation(&states[t]);
        let next = deviation(&states[t + 1]);
        ensure(
            now.iter().any(|d| *d != q(0, 1)),
            format!("deviation vanished at t={t}"),
        )?;
        let scaled: Vec<Q> = now.iter().map(|d| d.clone() / q(3, 1)).collect();
        ensure(
            next == scaled,
            format!("step {t} is not an exact 1/3 contraction"),
        )?;
    }
    Ok("30 exact contractions by 1/3".into())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut found = 0;
    let mut tried = 0;
    let mut strict = 0;
    while found < 200 {
        tried += 1;
        ensure(tried < 20_000, "too few connected samples")?;
        let n: usize = rng.random_range(3..=20);
        // Dense enough that most samples are connected.
        let k: i64 = rng.random_range(1..=1000);
        let p = q(2, 1) + q((n as i64) * k, 4000);
        let c = random_config(n, p, q(1, 1), rng.random()).unwrap();
        if !influence_graph(&c).is_connected() {
            continue;
        }
        found += 1;
        let a = transition_matrix(&c).map_err(|e| e.to_string())?;
        ensure(a.is_nonnegative(), "negative entry")?;
        ensure(
            column_sums(&a).iter().all(|s| *s == q(1, 1)),
            "column sum differs from 1",
        )?;
        ensure(is_column_stochastic(&a), "not column-stochastic")?;
        ensure(
            gap_dynamics_hold(&c, 0.0).unwrap(),
            format!("gap oracle fails on sample {found}"),
        )?;
        if !hk_step(&c).is_consensus() {
            strict += 1;
        }
    }
    ensure(
        strict >= 100,
        format!("only {strict} samples avoid one-step consensus"),
    )?;
    Ok(format!(
        "200 connected samples ({tried} drawn, {strict} without one-step consensus)"
    ))
}

fn slow_freeze_2_3(eps: &str) -> SlowFreezeParams<Q> {
    SlowFreezeParams::new(2, 3, q(1, 1), q(3, 2) - lit(eps)).with_y0(lit("1e-4"), lit("1e-4"))
}

fn criterion_8() -> Outcome {
    let mut times = Vec::new();
    for eps in ["1e-2", "1e-4", "1e-6"] {
        let params = slow_freeze_2_3(eps);
        let predicted = predict_slow_freeze(&params)
            .map_err(|e| e.to_string())?
            .disconnect_time;
        ensure(predicted <= 500, "prediction beyond the rational budget")?;
        let trace = simulate(
            &five_cluster(&params).unwrap(),
            predicted + 5,
            &TolerancePolicy::exact(),
        );
        let simulated = disconnect_time_in(&trace, &params);
        ensure(
            simulated == Some(predicted),
            format!("eps={eps}: predicted {predicted}, simulated {simulated:?}"),
        )?;
        times.push(predicted);
    }
    ensure(
        times.windows(2).all(|w| w[0] < w[1]),
        format!("{times:?} not increasing"),
    )?;
    Ok(format!("disconnect times {times:?}"))
}

fn criterion_9() -> Outcome {
    let params =
        SlowFreezeParams::new(5, 9, q(1, 1), lit("1.78")).with_y0(lit("1e-6"), lit("1e-6"));
    ensure(params.n() == 33, "n != 33")?;
    let trace = simulate(
        &five_cluster(&params).unwrap(),
        50,
        &TolerancePolicy::exact(),
    );
    let t_star = disconnect_time_in(&trace, &params).ok_or("never disconnects")?;
    let records = &trace.records;
    ensure(
        records[..=t_star]
            .windows(2)
            .all(|w| w[0].digraph_hash == w[1].digraph_hash),
        "digraph changes before the disconnect",
    )?;
    let states = trace.states();
    let first_consensus = states
        .iter()
        .position(|c| c.is_consensus())
        .ok_or("no consensus")?;
    ensure(
        first_consensus == t_star + 3,
        format!("consensus at {first_consensus}, disconnect at {t_star}"),
    )?;
    Ok(format!(
        "disconnect at t={t_star}, 33 agents equal at t={first_consensus}"
    ))
}

fn criterion_10() -> Outcome {
    let missing: Vec<usize> = (12..=200).filter(|&n| decompose_n(n).is_empty()).collect();
    let expected = [13, 14, 15, 16, 18, 20, 21, 23, 25, 28, 30, 35];
    ensure(missing == expected, format!("empty for {missing:?}"))?;
    Ok(format!("{} exceptions", missing.len()))
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut steps = 0;
    let one = q(1, 1);
    while steps < 1000 {
        let c = random_rational_config(&mut rng);
        let n = c.len();
        let n_sq = q((n * n) as i64, 1);
        let r = c.radius().clone();
        let mut now = c;
        for _ in 0..40 {
            let next = hk_step(&now);
            let e = energy(&now);
            ensure(
                e >= q(0, 1) && e <= n_sq,
                format!("energy {e} out of [0, n^2]"),
            )?;
            ensure(next.is_cyclically_ordered(), "cyclic order broken")?;
            ensure(
                gap_vector(&next).unwrap().sum() == one,
                "gaps do not sum to 1",
            )?;
            let delta = delta_vector(&now, &next).unwrap();
            ensure(
                delta.components().iter().all(|d| d.abs() <= r),
                "step longer than r",
            )?;
            for i in 0..n {
                for j in (i + 1)..n {
                    if now.positions()[i] == now.positions()[j] {
                        ensure(
                            next.positions()[i] == next.positions()[j],
                            "coincident agents split",
                        )?;
                    }
                }
            }
            steps += 1;
            if next == now {
                break;
            }
            now = next;
        }
    }
    Ok(format!("{steps} exact steps"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "figure-one transition matrix",
            limit: secs(1),
            run: criterion_1,
        },
        Criterion {
            id: 2,
            name: "figure-one eigenpairs",
            limit: secs(1),
            run: criterion_2,
        },
        Criterion {
            id: 3,
            name: "energy descent and auxiliary identities",
            limit: secs(120),
            run: criterion_3,
        },
        Criterion {
            id: 4,
            name: "digraph-change movement bound and budget",
            limit: secs(60),
            run: criterion_4,
        },
        Criterion {
            id: 5,
            name: "frozen configurations",
            limit: secs(1),
            run: criterion_5,
        },
        Criterion {
            id: 6,
            name: "never-freezing 1/3 contraction",
            limit: secs(5),
            run: criterion_6,
        },
        Criterion {
            id: 7,
            name: "gap dynamics and column sums",
            limit: secs(60),
            run: criterion_7,
        },
        Criterion {
            id: 8,
            name: "slow-freeze disconnect times",
            limit: secs(60),
            run: criterion_8,
        },
        Criterion {
            id: 9,
            name: "three-step collapse",
            limit: secs(60),
            run: criterion_9,
        },
        Criterion {
            id: 10,
            name: "cluster-size decompositions",
            limit: secs(1),
            run: criterion_10,
        },
        Criterion {
            id: 11,
            name: "structural invariants",
            limit: secs(120),
            run: criterion_11,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome =
            panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > c.limit => Err(format!("{msg}; too slow, limit {:?}", c.limit)),
            other => other,
        };
        let (tag, msg) = match outcome {
            Ok(msg) => ("PASS", msg),
            Err(msg) => {
                failures += 1;
                ("FAIL", msg)
            }
        };
        println!(
            "[{tag}] {:>2} {:<42} {:>9.3?}  {msg}",
            c.id, c.name, elapsed
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
