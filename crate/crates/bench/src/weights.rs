//! Averages of the learned weight magnitudes `mu_1..mu_3` over runs.

use std::path::Path;

use pinvgcn::model::{weight_magnitude_analysis, ModelParams};

use crate::experiment::{read_results, RunStatus};
use crate::stats::mean;
use crate::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub source: String,
    pub runs: usize,
    pub mu: [f64; 3],
}

/// Reads `mu` from a results file, a single checkpoint, or every `.ckpt`
/// file in a directory.
pub fn analyze_path(path: &Path) -> Result<WeightRow, BenchError> {
    let mus: Vec<[f64; 3]> = if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "ckpt"))
            .collect();
        files.sort();
        files
            .iter()
            .map(|f| Ok(weight_magnitude_analysis(&ModelParams::<f64>::load(f)?)))
            .collect::<Result<_, BenchError>>()?
    } else if path.extension().is_some_and(|x| x == "ckpt") {
        vec![weight_magnitude_analysis(&ModelParams::<f64>::load(path)?)]
    } else {
        read_results(path)?
            .0
            .into_iter()
            .filter(|r| r.status == RunStatus::Ok)
            .filter_map(|r| r.mu)
            .collect()
    };
    if mus.is_empty() {
        return Err(BenchError::Input(format!(
            "no checkpoints or completed runs found in {}",
            path.display()
        )));
    }
    Ok(WeightRow {
        source: path.display().to_string(),
        runs: mus.len(),
        mu: std::array::from_fn(|k| mean(&mus.iter().map(|m| m[k]).collect::<Vec<_>>())),
    })
}

pub fn format_table(rows: &[WeightRow]) -> String {
    let mut out = format!(
        "{:<40} {:>5} {:>9} {:>9} {:>9}\n",
        "source", "runs", "mu1", "mu2", "mu3"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<40} {:>5} {:>9.4} {:>9.4} {:>9.4}\n",
            r.source, r.runs, r.mu[0], r.mu[1], r.mu[2]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use pinvgcn::model::init_params;

    #[test]
    fn checkpoint_directory_average() {
        let dir = tempfile::tempdir().unwrap();
        let p = init_params::<f64>(4, 3, 2, 9);
        p.save(dir.path().join("run-0000.ckpt")).unwrap();
        let single = analyze_path(&dir.path().join("run-0000.ckpt")).unwrap();
        assert_eq!(single.mu, weight_magnitude_analysis(&p));
        p.save(dir.path().join("run-0001.ckpt")).unwrap();
        let both = analyze_path(dir.path()).unwrap();
        assert_eq!(both.runs, 2);
        assert_eq!(both.mu, single.mu);
        let empty = tempfile::tempdir().unwrap();
        assert!(analyze_path(empty.path()).is_err());
    }
}
