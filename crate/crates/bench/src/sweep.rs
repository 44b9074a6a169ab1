//! Rank sweeps: one training experiment per rank with shared split seeds.

use std::io::Write;

use crate::config::ExperimentConfig;
use crate::experiment::{compute_basis, load_dataset, max_rank, prepare, run_many, RunStatus};
use crate::stats::{mean, sample_sd};
use crate::BenchError;

pub const SWEEP_HEADER: &str = "rank,miscls_mean,miscls_sd,setup_s,train_s";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rank: usize,
    pub miscls_mean: f64,
    pub miscls_sd: f64,
    pub setup_s: f64,
    pub train_s: f64,
}

/// Trains every rank in ascending order. All ranks are checked against the
/// dataset before the first run starts.
pub fn cmd_sweep_rank(
    cfg: &ExperimentConfig,
    ranks: &[usize],
    threads: usize,
) -> Result<Vec<SweepRow>, BenchError> {
    let dataset = load_dataset(cfg)?;
    let mut ranks = ranks.to_vec();
    ranks.sort_unstable();
    ranks.dedup();
    if ranks.is_empty() {
        return Err(BenchError::Config("no ranks given".into()));
    }
    let max = max_rank(&dataset);
    if let Some(&bad) = ranks.iter().find(|&&r| r == 0 || r > max) {
        return Err(pinvgcn::Error::RankTooLarge { rank: bad, max }.into());
    }

    let mut rows = Vec::with_capacity(ranks.len());
    for rank in ranks {
        let prepared = prepare(
            compute_basis(&dataset, cfg.dataset.kind, &cfg.eigen, rank)?,
            &dataset,
        )?;
        let outputs = run_many(&prepared, &dataset, &cfg.split, &cfg.train, threads)?;
        let miscls: Vec<f64> = outputs
            .iter()
            .filter(|o| o.record.status == RunStatus::Ok)
            .filter_map(|o| o.record.accuracy.map(|a| 1.0 - a))
            .collect();
        let train: Vec<f64> = outputs.iter().map(|o| o.timing.train_s).collect();
        rows.push(SweepRow {
            rank,
            miscls_mean: mean(&miscls),
            miscls_sd: sample_sd(&miscls),
            setup_s: prepared.setup_seconds,
            train_s: mean(&train),
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.rank, r.miscls_mean, r.miscls_sd, r.setup_s, r.train_s
        )?;
    }
    w.flush()
}
