//! Experiment configuration, read from TOML with one section per concern.

use std::path::{Path, PathBuf};

use pinvgcn::eigen::EigSolveConfig;
use pinvgcn::model::TrainConfig;
use serde::Deserialize;

use crate::BenchError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub eigen: EigenConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Categorical,
    PointCloud,
    EdgeList,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    pub path: PathBuf,
    /// Column roles for categorical tables.
    pub schema: Option<PathBuf>,
    /// Per-node labels for edge lists.
    pub labels: Option<PathBuf>,
    /// Gaussian kernel width for point clouds.
    pub sigma: Option<f64>,
    /// Keep only these classes (categorical tables).
    pub classes: Option<Vec<String>>,
    #[serde(default = "default_true")]
    pub header: bool,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RankPolicyConfig {
    #[default]
    Complete,
    Strict,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    /// Number of informative eigenpairs; for hypergraphs `None` means
    /// `|E| - 1`.
    pub rank: Option<usize>,
    /// Residual tolerance; defaults depend on the dataset kind.
    pub tol: Option<f64>,
    pub max_subspace: Option<usize>,
    #[serde(default = "default_restarts")]
    pub max_restarts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Basis cache file, reused when it matches the dataset and rank.
    pub cache: Option<PathBuf>,
    /// Row block size of the Gaussian kernel matvec.
    pub block_size: Option<usize>,
    #[serde(default)]
    pub rank_policy: RankPolicyConfig,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            rank: None,
            tol: None,
            max_subspace: None,
            max_restarts: default_restarts(),
            seed: 0,
            cache: None,
            block_size: None,
            rank_policy: RankPolicyConfig::Complete,
        }
    }
}

impl EigenConfig {
    pub fn solver(&self, kind: DatasetKind) -> EigSolveConfig {
        let base = match kind {
            DatasetKind::PointCloud => EigSolveConfig::point_cloud(),
            _ => EigSolveConfig::sparse(),
        };
        EigSolveConfig {
            tol: self.tol.unwrap_or(base.tol),
            max_subspace: self.max_subspace,
            max_restarts: self.max_restarts,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_per_class")]
    pub per_class: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            per_class: default_per_class(),
            runs: default_runs(),
            seed: 0,
        }
    }
}

/// Every field of [`TrainConfig`] except the seed, which comes from the
/// split section per run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub hidden: usize,
    pub epochs: usize,
    pub dropout: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub tie_high_pass: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            hidden: t.hidden,
            epochs: t.epochs,
            dropout: t.dropout,
            lr: t.lr,
            weight_decay: t.weight_decay,
            beta1: t.beta1,
            beta2: t.beta2,
            eps: t.eps,
            tie_high_pass: t.tie_high_pass,
        }
    }
}

impl TrainSection {
    pub fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            hidden: self.hidden,
            epochs: self.epochs,
            dropout: self.dropout,
            lr: self.lr,
            weight_decay: self.weight_decay,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            seed,
            tie_high_pass: self.tie_high_pass,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Line-delimited results file.
    pub path: Option<PathBuf>,
    /// Directory for per-run model checkpoints.
    pub checkpoints: Option<PathBuf>,
}

fn default_true() -> bool {
    true
}

fn default_delimiter() -> char {
    ','
}

fn default_restarts() -> usize {
    200
}

fn default_per_class() -> usize {
    10
}

fn default_runs() -> usize {
    100
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset.path);
        for p in [
            self.dataset.schema.as_mut(),
            self.dataset.labels.as_mut(),
            self.eigen.cache.as_mut(),
            self.output.path.as_mut(),
            self.output.checkpoints.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let d = &self.dataset;
        if !d.path.exists() {
            return Err(BenchError::Config(format!(
                "dataset file {} not found",
                d.path.display()
            )));
        }
        match d.kind {
            DatasetKind::Categorical => match &d.schema {
                Some(s) if s.exists() => {}
                Some(s) => {
                    return Err(BenchError::Config(format!(
                        "schema {} not found",
                        s.display()
                    )))
                }
                None => {
                    return Err(BenchError::Config(
                        "categorical datasets need `schema`".into(),
                    ))
                }
            },
            DatasetKind::PointCloud => {
                if !d.sigma.is_some_and(|s| s > 0.0) {
                    return Err(BenchError::Config(
                        "point clouds need a positive `sigma`".into(),
                    ));
                }
            }
            DatasetKind::EdgeList => {
                if let Some(l) = d.labels.as_ref().filter(|l| !l.exists()) {
                    return Err(BenchError::Config(format!(
                        "labels file {} not found",
                        l.display()
                    )));
                }
            }
        }
        if !d.delimiter.is_ascii() {
            return Err(BenchError::Config(
                "delimiter must be an ASCII character".into(),
            ));
        }
        Ok(())
    }
}
