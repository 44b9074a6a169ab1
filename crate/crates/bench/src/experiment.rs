//! Dataset loading, basis computation with caching, and multi-run training.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use pinvgcn::data::{
    load_categorical, load_edge_list, load_point_cloud, CsvOptions, Dataset, Source,
};
use pinvgcn::eigen::{spectral_basis_with_stats, SpectralBasis};
use pinvgcn::filters::FilterBank;
use pinvgcn::graph::NormalizedAdjacency;
use pinvgcn::hypergraph::{hypergraph_spectral_basis, RankPolicy};
use pinvgcn::model::{
    evaluate, train_with_rng, weight_magnitude_analysis, ModelParams, Precomputed, Split,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    DatasetKind, EigenConfig, ExperimentConfig, RankPolicyConfig, SplitConfig, TrainSection,
};
use crate::stats::{mean, sample_sd};
use crate::BenchError;

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset<f64>, BenchError> {
    cfg.validate()?;
    let d = &cfg.dataset;
    let dataset = match d.kind {
        DatasetKind::Categorical => {
            let options = CsvOptions {
                delimiter: d.delimiter as u8,
                has_header: d.header,
                classes: d.classes.clone(),
            };
            let schema = d.schema.as_ref().expect("validated");
            load_categorical(&d.path, schema, &options)?.0
        }
        DatasetKind::PointCloud => {
            let mut ds = load_point_cloud(&d.path, d.sigma.expect("validated"))?;
            if let (Source::PointCloud(cloud), Some(b)) = (&mut ds.source, cfg.eigen.block_size) {
                *cloud = cloud.clone().with_block_size(b);
            }
            ds
        }
        DatasetKind::EdgeList => load_edge_list(&d.path, d.labels.as_deref())?,
    };
    Ok(dataset)
}

/// Largest legal rank: `|E| - 1` for hypergraphs, `n - 1` otherwise.
pub fn max_rank(dataset: &Dataset<f64>) -> usize {
    match &dataset.source {
        Source::Hypergraph(h) => h.edge_count().saturating_sub(1),
        _ => dataset.n().saturating_sub(1),
    }
}

/// Explicit or configured rank; hypergraphs default to `|E| - 1`.
pub fn resolve_rank(
    cfg: &ExperimentConfig,
    dataset: &Dataset<f64>,
    rank: Option<usize>,
) -> Result<usize, BenchError> {
    let max = max_rank(dataset);
    let r = match (rank.or(cfg.eigen.rank), &dataset.source) {
        (Some(r), _) => r,
        (None, Source::Hypergraph(_)) => max,
        (None, _) => {
            return Err(BenchError::Config(
                "`eigen.rank` (or --rank) is required for graphs and point clouds".into(),
            ))
        }
    };
    if r == 0 || r > max {
        return Err(pinvgcn::Error::RankTooLarge { rank: r, max }.into());
    }
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct BasisOutcome {
    pub basis: SpectralBasis<f64>,
    pub seconds: f64,
    pub from_cache: bool,
    /// Krylov statistics; zero on the hypergraph path and for cached bases.
    pub matvecs: usize,
    pub restarts: usize,
}

/// Computes the spectral basis: the Gram-matrix route for hypergraphs, the
/// deflated Krylov solver otherwise.
pub fn compute_basis(
    dataset: &Dataset<f64>,
    kind: DatasetKind,
    eigen: &EigenConfig,
    rank: usize,
) -> Result<BasisOutcome, BenchError> {
    let start = Instant::now();
    let (basis, matvecs, restarts) = match &dataset.source {
        Source::Hypergraph(h) => {
            let policy = match eigen.rank_policy {
                RankPolicyConfig::Complete => RankPolicy::Complete { seed: eigen.seed },
                RankPolicyConfig::Strict => RankPolicy::Strict,
            };
            (hypergraph_spectral_basis(h, rank, policy)?, 0, 0)
        }
        Source::PointCloud(c) => krylov_basis(&NormalizedAdjacency::new(c)?, rank, kind, eigen)?,
        Source::SparseGraph(g) => krylov_basis(&NormalizedAdjacency::new(g)?, rank, kind, eigen)?,
    };
    Ok(BasisOutcome {
        basis,
        seconds: start.elapsed().as_secs_f64(),
        from_cache: false,
        matvecs,
        restarts,
    })
}

fn krylov_basis(
    op: &NormalizedAdjacency<'_, f64>,
    rank: usize,
    kind: DatasetKind,
    eigen: &EigenConfig,
) -> Result<(SpectralBasis<f64>, usize, usize), BenchError> {
    let (basis, stats) = spectral_basis_with_stats(op, rank, &eigen.solver(kind))?;
    Ok((basis, stats.matvecs, stats.restarts))
}

/// Loads the cached basis when it matches `n` and has at least `rank`
/// pairs, otherwise computes it and writes the cache.
pub fn obtain_basis(
    cfg: &ExperimentConfig,
    dataset: &Dataset<f64>,
    rank: usize,
) -> Result<BasisOutcome, BenchError> {
    if let Some(path) = &cfg.eigen.cache {
        if path.exists() {
            let start = Instant::now();
            let cached = SpectralBasis::<f64>::load(path)?;
            if cached.n() == dataset.n() && cached.rank() >= rank {
                return Ok(BasisOutcome {
                    basis: cached.truncated(rank)?,
                    seconds: start.elapsed().as_secs_f64(),
                    from_cache: true,
                    matvecs: 0,
                    restarts: 0,
                });
            }
        }
    }
    let outcome = compute_basis(dataset, cfg.dataset.kind, &cfg.eigen, rank)?;
    if let Some(path) = &cfg.eigen.cache {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        outcome.basis.save(path)?;
    }
    Ok(outcome)
}

/// Deterministic per-run result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// Wall-clock seconds of one run; kept out of the results file so that it
/// stays reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub run: usize,
    /// Shared eigensolve and first-layer precomputation.
    pub setup_s: f64,
    pub train_s: f64,
    pub eval_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rank: usize,
    pub eigengap: f64,
    pub runs: usize,
    pub completed: usize,
    pub partial: bool,
    pub accuracy_mean: f64,
    pub accuracy_sd: f64,
    pub mu_mean: [f64; 3],
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Record {
    Run(RunRecord),
    Summary(Summary),
}

pub fn summarize(rank: usize, eigengap: f64, records: &[RunRecord]) -> Summary {
    let ok: Vec<&RunRecord> = records
        .iter()
        .filter(|r| r.status == RunStatus::Ok)
        .collect();
    let acc: Vec<f64> = ok.iter().filter_map(|r| r.accuracy).collect();
    let mus: Vec<[f64; 3]> = ok.iter().filter_map(|r| r.mu).collect();
    Summary {
        rank,
        eigengap,
        runs: records.len(),
        completed: ok.len(),
        partial: ok.len() < records.len(),
        accuracy_mean: mean(&acc),
        accuracy_sd: sample_sd(&acc),
        mu_mean: std::array::from_fn(|k| mean(&mus.iter().map(|m| m[k]).collect::<Vec<_>>())),
    }
}

/// Everything shared by the runs of one rank.
pub struct Prepared {
    pub bank: FilterBank<f64>,
    pub pre: Precomputed<f64>,
    pub basis_seconds: f64,
    pub setup_seconds: f64,
    pub from_cache: bool,
}

pub fn prepare(outcome: BasisOutcome, dataset: &Dataset<f64>) -> Result<Prepared, BenchError> {
    let start = Instant::now();
    let bank = FilterBank::new(outcome.basis);
    let pre = Precomputed::new(&bank, dataset.features.view())?;
    Ok(Prepared {
        bank,
        pre,
        basis_seconds: outcome.seconds,
        setup_seconds: outcome.seconds + start.elapsed().as_secs_f64(),
        from_cache: outcome.from_cache,
    })
}

pub struct RunOutput {
    pub record: RunRecord,
    pub timing: RunTiming,
    pub params: Option<ModelParams<f64>>,
}

/// Run `j`: one generator seeded `split.seed + j` draws the split, then the
/// initial weights, then the dropout masks.
pub fn run_one(
    prepared: &Prepared,
    dataset: &Dataset<f64>,
    split: &SplitConfig,
    train: &TrainSection,
    j: usize,
) -> RunOutput {
    let seed = split.seed.wrapping_add(j as u64);
    let spec = pinvgcn::data::SplitSpec {
        per_class: split.per_class,
        seed: split.seed,
        runs: split.runs,
    };
    let mut rng = spec.run_rng(j);
    let t0 = Instant::now();
    let result = Split::sample(
        &dataset.labels,
        dataset.classes(),
        split.per_class,
        &mut rng,
    )
    .and_then(|s| {
        let out = train_with_rng(
            &prepared.bank,
            &prepared.pre,
            &s,
            &train.to_config(seed),
            &mut rng,
        )?;
        Ok((s, out))
    });
    let train_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let result = result.and_then(|(s, out)| {
        let acc = evaluate(&prepared.bank, &prepared.pre, &out.params, &s)?;
        Ok((acc, out))
    });
    let eval_s = t1.elapsed().as_secs_f64();
    let timing = RunTiming {
        run: j,
        setup_s: prepared.setup_seconds,
        train_s,
        eval_s,
    };
    match result {
        Ok((acc, out)) => RunOutput {
            record: RunRecord {
                run: j,
                seed,
                status: RunStatus::Ok,
                accuracy: Some(acc),
                mu: Some(weight_magnitude_analysis(&out.params)),
                final_loss: out.losses.last().copied(),
                error: None,
            },
            timing,
            params: Some(out.params),
        },
        Err(e) => RunOutput {
            record: RunRecord {
                run: j,
                seed,
                status: RunStatus::Failed,
                accuracy: None,
                mu: None,
                final_loss: None,
                error: Some(e.to_string()),
            },
            timing,
            params: None,
        },
    }
}

/// Runs `count` independent trainings on a pool of `threads` workers;
/// outputs are ordered by run index.
pub fn run_many(
    prepared: &Prepared,
    dataset: &Dataset<f64>,
    split: &SplitConfig,
    train: &TrainSection,
    threads: usize,
) -> Result<Vec<RunOutput>, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..split.runs)
            .into_par_iter()
            .map(|j| run_one(prepared, dataset, split, train, j))
            .collect()
    }))
}

pub struct TrainReport {
    pub records: Vec<RunRecord>,
    pub timings: Vec<RunTiming>,
    pub summary: Summary,
    pub basis_seconds: f64,
    pub setup_seconds: f64,
}

/// Loads, solves (or reads the cache), trains every run and writes the
/// results, timing sidecar and optional checkpoints.
pub fn cmd_train(cfg: &ExperimentConfig, threads: usize) -> Result<TrainReport, BenchError> {
    let dataset = load_dataset(cfg)?;
    let rank = resolve_rank(cfg, &dataset, None)?;
    let prepared = prepare(obtain_basis(cfg, &dataset, rank)?, &dataset)?;
    let outputs = run_many(&prepared, &dataset, &cfg.split, &cfg.train, threads)?;

    if let Some(dir) = &cfg.output.checkpoints {
        std::fs::create_dir_all(dir)?;
        for out in &outputs {
            if let Some(p) = &out.params {
                p.save(checkpoint_path(dir, out.record.run))?;
            }
        }
    }
    let records: Vec<RunRecord> = outputs.iter().map(|o| o.record.clone()).collect();
    let timings: Vec<RunTiming> = outputs.into_iter().map(|o| o.timing).collect();
    let summary = summarize(rank, prepared.bank.eigengap(), &records);
    if let Some(path) = &cfg.output.path {
        write_results(path, &records, &summary)?;
        write_timings(&timing_path(path), &timings)?;
    }
    Ok(TrainReport {
        records,
        timings,
        summary,
        basis_seconds: prepared.basis_seconds,
        setup_seconds: prepared.setup_seconds,
    })
}

pub fn checkpoint_path(dir: &Path, run: usize) -> PathBuf {
    dir.join(format!("run-{run:04}.ckpt"))
}

/// `<results>.timing.jsonl`.
pub fn timing_path(results: &Path) -> PathBuf {
    results.with_extension("timing.jsonl")
}

pub fn write_results(
    path: &Path,
    records: &[RunRecord],
    summary: &Summary,
) -> Result<(), BenchError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, &Record::Run(r.clone()))?;
        writeln!(w)?;
    }
    serde_json::to_writer(&mut w, &Record::Summary(summary.clone()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_timings(path: &Path, timings: &[RunTiming]) -> Result<(), BenchError> {
    let mut w = BufWriter::new(File::create(path)?);
    for t in timings {
        serde_json::to_writer(&mut w, t)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a results file back into run records and the summary.
pub fn read_results(path: &Path) -> Result<(Vec<RunRecord>, Option<Summary>), BenchError> {
    let text = std::fs::read_to_string(path)?;
    let mut runs = Vec::new();
    let mut summary = None;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        match serde_json::from_str::<Record>(line)? {
            Record::Run(r) => runs.push(r),
            Record::Summary(s) => summary = Some(s),
        }
    }
    Ok((runs, summary))
}
