use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pinvgcn_bench::config::ExperimentConfig;
use pinvgcn_bench::experiment::{cmd_train, load_dataset, obtain_basis, resolve_rank};
use pinvgcn_bench::oracle::{cmd_oracle_check, Fault, DEFAULT_SCALE};
use pinvgcn_bench::sweep::{cmd_sweep_rank, write_sweep_csv};
use pinvgcn_bench::weights::{analyze_path, format_table};
use pinvgcn_bench::BenchError;

#[derive(Parser)]
#[command(name = "pinvgcn", version, about = "Pseudoinverse GCN experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override `eigen.rank`.
    #[arg(long)]
    rank: Option<usize>,
    /// Override `split.runs`.
    #[arg(long)]
    runs: Option<usize>,
    /// Override `split.seed`; run j uses seed + j.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, BenchError> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(r) = self.rank {
            cfg.eigen.rank = Some(r);
        }
        if let Some(r) = self.runs {
            cfg.split.runs = r;
        }
        if let Some(s) = self.seed {
            cfg.split.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output.path = Some(o.clone());
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute (or load) the spectral basis and print the eigengap.
    Eigs {
        #[command(flatten)]
        common: Common,
    },
    /// Train all runs and write per-run records plus a summary.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Train once per rank and write a CSV of misclassification and timings.
    SweepRank {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ranks.
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
    },
    /// Average the weight magnitudes mu_1..mu_3 of results files or
    /// checkpoint directories.
    AnalyzeWeights {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Run the dense-oracle equivalence suites.
    OracleCheck {
        #[arg(long, default_value_t = DEFAULT_SCALE)]
        scale: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturb every compared quantity; all suites should then fail.
        #[arg(long)]
        inject_fault: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, BenchError> {
    match cli.command {
        Command::Eigs { common } => {
            let mut cfg = common.load()?;
            if let Some(out) = common.out {
                cfg.eigen.cache = Some(out);
            }
            let dataset = load_dataset(&cfg)?;
            let rank = resolve_rank(&cfg, &dataset, None)?;
            let outcome = obtain_basis(&cfg, &dataset, rank)?;
            let b = &outcome.basis;
            println!("n = {}, rank = {rank}", b.n());
            println!("eigengap lambda_1 = {}", b.eigengap());
            println!(
                "lambda = [{}]",
                b.lambda()
                    .iter()
                    .map(|l| format!("{l:.6}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            let worst = b.residuals().iter().fold(0.0f64, |m, &r| m.max(r));
            println!("max residual = {worst:.3e}");
            let source = if outcome.from_cache {
                "loaded from cache"
            } else {
                "computed"
            };
            println!(
                "{source} in {:.3} s ({} matvecs, {} restarts)",
                outcome.seconds, outcome.matvecs, outcome.restarts
            );
            Ok(true)
        }
        Command::Train { common } => {
            let cfg = common.load()?;
            let report = cmd_train(&cfg, common.threads)?;
            let s = &report.summary;
            println!(
                "rank {} (eigengap {:.4}): accuracy {:.2}% +- {:.2} over {}/{} runs",
                s.rank,
                s.eigengap,
                100.0 * s.accuracy_mean,
                100.0 * s.accuracy_sd,
                s.completed,
                s.runs
            );
            println!(
                "mu = [{:.4}, {:.4}, {:.4}]",
                s.mu_mean[0], s.mu_mean[1], s.mu_mean[2]
            );
            let train: f64 = report.timings.iter().map(|t| t.train_s).sum::<f64>()
                / report.timings.len().max(1) as f64;
            println!(
                "setup {:.3} s, mean training {train:.3} s per run",
                report.setup_seconds
            );
            if let Some(p) = &cfg.output.path {
                println!("results written to {}", p.display());
            }
            if s.partial {
                eprintln!("warning: {} run(s) failed", s.runs - s.completed);
            }
            Ok(!s.partial)
        }
        Command::SweepRank { common, ranks } => {
            let cfg = common.load()?;
            let rows = cmd_sweep_rank(&cfg, &ranks, common.threads)?;
            match &cfg.output.path {
                Some(p) => {
                    write_sweep_csv(&rows, std::io::BufWriter::new(std::fs::File::create(p)?))?;
                    println!("sweep written to {}", p.display());
                }
                None => write_sweep_csv(&rows, std::io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::AnalyzeWeights { inputs } => {
            let rows = inputs
                .iter()
                .map(|p| analyze_path(p))
                .collect::<Result<Vec<_>, _>>()?;
            print!("{}", format_table(&rows));
            Ok(true)
        }
        Command::OracleCheck {
            scale,
            seed,
            inject_fault,
        } => {
            let reports = cmd_oracle_check(scale, seed, Fault(inject_fault))?;
            for r in &reports {
                println!("{r}");
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
    }
}
