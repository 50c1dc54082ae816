//! Slow-freeze sweeps over the confidence radius.

use anyhow::Result;
use hkcircle::scenarios::disconnect_time_in;
use hkcircle::{
    five_cluster, predict_slow_freeze, simulate, Scalar, SlowFreezeParams, TolerancePolicy,
};
use rayon::prelude::*;
use serde::Serialize;

pub const CSV_HEADER: [&str; 7] = [
    "m1",
    "m2",
    "d1",
    "r",
    "predicted_disconnect_t",
    "simulated_disconnect_t",
    "post_disconnect_consensus_steps",
];

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub m1: usize,
    pub m2: usize,
    pub d1: String,
    pub y0: Option<String>,
    pub radii: Vec<String>,
    pub steps: usize,
    pub policy: TolerancePolicy,
}

/// Empty cells mean "did not happen within the step budget".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub m1: usize,
    pub m2: usize,
    pub d1: String,
    pub r: String,
    pub predicted_disconnect_t: Option<usize>,
    pub simulated_disconnect_t: Option<usize>,
    pub post_disconnect_consensus_steps: Option<usize>,
}

fn run_row<S: Scalar>(spec: &SweepSpec, radius: &str) -> Result<SweepRow> {
    let d1 = S::parse_literal(&spec.d1)?;
    let mut params = SlowFreezeParams::new(spec.m1, spec.m2, d1, S::parse_literal(radius)?);
    if let Some(y) = &spec.y0 {
        let y = S::parse_literal(y)?;
        params = params.with_y0(y.clone(), y);
    }
    let initial = five_cluster(&params)?;
    let predicted = predict_slow_freeze(&params).ok().map(|p| p.disconnect_time);
    let trace = simulate(&initial, spec.steps, &spec.policy);
    let simulated = disconnect_time_in(&trace, &params);
    let consensus = simulated.and_then(|t_star| {
        trace
            .states()
            .iter()
            .enumerate()
            .skip(t_star)
            .find(|(_, c)| c.is_consensus())
            .map(|(t, _)| t - t_star)
    });
    Ok(SweepRow {
        m1: spec.m1,
        m2: spec.m2,
        d1: spec.d1.clone(),
        r: radius.to_string(),
        predicted_disconnect_t: predicted,
        simulated_disconnect_t: simulated,
        post_disconnect_consensus_steps: consensus,
    })
}

/// Rows come back in the order of `spec.radii`.
pub fn run_sweep<S: Scalar>(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.radii
        .par_iter()
        .map(|r| run_row::<S>(spec, r))
        .collect()
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
