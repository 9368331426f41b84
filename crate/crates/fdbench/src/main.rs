//! fdbench: benchmark harness CLI for functional-data classification.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdbench::bench::{
    aggregate_ranks, export_aggregates, read_records, run_benchmark, summarize_pairs,
    BenchmarkConfig, RunStatus,
};
use fdbench::error::{Error, Result};
use fdbench::extract::ExtractorSpec;
use fdbench::fdata::{load_csv_with_sidecar, load_ucr_tsv};
use fdbench::params::ParamMap;

#[derive(Parser)]
#[command(name = "fdbench", version)]
#[command(
    about = "Functional-data classification benchmarks: feature extraction, learners, tuning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark configuration
    Run {
        /// TOML benchmark configuration
        #[arg(long)]
        config: PathBuf,
        /// Override the configured worker count
        #[arg(long)]
        workers: Option<usize>,
        /// Override the configured seed
        #[arg(long)]
        seed: Option<u64>,
        /// Keep existing records and skip completed (dataset, pipeline) jobs
        #[arg(long)]
        resume: bool,
    },
    /// Recompute aggregates and print rankings from a results directory
    Rank {
        /// Directory holding records.csv
        #[arg(long)]
        results: PathBuf,
    },
    /// Fit one extractor on a whole dataset and export the feature block
    Extract {
        /// UCR-style series file/directory, or a CSV when --sidecar is given
        #[arg(long)]
        dataset: PathBuf,
        /// JSON sidecar describing CSV column spans
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// fourier | wavelets | bsignal | pca | dtwkernel | multires | tsfeat
        #[arg(long)]
        method: String,
        /// Method parameters, e.g. k=v,k2=v2
        #[arg(long, default_value = "")]
        params: String,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// Functional feature to extract from (default: the first)
        #[arg(long)]
        feature: Option<String>,
        /// Seed for reference sampling methods
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Parse and validate a configuration, checking datasets and pipelines
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            workers,
            seed,
            resume,
        } => {
            let mut config = BenchmarkConfig::from_path(&config)?;
            if let Some(w) = workers {
                config.workers = w;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            let report = run_benchmark(&config, resume)?;
            export_aggregates(&config, &report)?;
            println!(
                "{} records ({} jobs evaluated, {} skipped, {} failed) -> {}",
                report.records.len(),
                report.evaluated_jobs,
                report.skipped_jobs,
                report.failed_jobs.len(),
                config.output_dir.display()
            );
            for f in &report.failed_jobs {
                eprintln!("failed job {}/{}: {}", f.dataset, f.pipeline, f.reason);
            }
            Ok(match report.status {
                RunStatus::Ok => ExitCode::SUCCESS,
                RunStatus::PartialFailure => ExitCode::from(2),
            })
        }
        Command::Rank { results } => {
            let records = read_records(&results.join("records.csv"))?;
            if records.is_empty() {
                return Err(Error::Config(format!(
                    "no records found in {}",
                    results.display()
                )));
            }
            let pairs = summarize_pairs(&records);
            let ranks = aggregate_ranks(&pairs);
            println!("{:<30} {:>10} {:>12}", "pipeline", "avg rank", "pct of max");
            for (pipeline, rank) in &ranks.average {
                let mine: Vec<_> = pairs.iter().filter(|p| &p.pipeline == pipeline).collect();
                let pct: f64 =
                    mine.iter().map(|p| p.percent_of_max).sum::<f64>() / mine.len() as f64;
                println!("{pipeline:<30} {rank:>10.2} {pct:>12.3}");
            }
            for excluded in &ranks.excluded {
                eprintln!("excluded from ranking (incomplete results): {excluded}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Extract {
            dataset,
            sidecar,
            method,
            params,
            out,
            feature,
            seed,
        } => {
            let task = match &sidecar {
                Some(sc) => load_csv_with_sidecar(&dataset, sc)?,
                None => load_ucr_tsv(&dataset)?,
            };
            let params = ParamMap::parse_cli(&params)?;
            let spec = ExtractorSpec::from_params(&method, &params)?;
            let ds = task.dataset();
            let feat = match &feature {
                Some(name) => ds.functional_feature(name).ok_or_else(|| {
                    Error::Config(format!("no functional feature named `{name}`"))
                })?,
                None => ds
                    .functional_features()
                    .first()
                    .ok_or_else(|| Error::Config("dataset has no functional features".into()))?,
            };
            // exploratory export: fit and transform on all rows
            let fitted = spec.fit(feat.values().view(), feat.grid(), seed)?;
            let block = fitted.transform(feat.values().view())?;
            let labels = task.class_labels()?;
            let levels = task.class_levels()?;
            let label_strings: Vec<String> = labels.iter().map(|&c| levels[c].clone()).collect();
            fdbench::bench::export::write_feature_csv(
                &out,
                "label",
                &label_strings,
                &block.names,
                &block.values,
            )?;
            println!(
                "{} rows x {} features ({method}) -> {}",
                block.values.nrows(),
                block.width(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let config = BenchmarkConfig::from_path(&config)?;
            let mut problems = 0usize;
            for dc in &config.datasets {
                match dc.load() {
                    Ok(task) => {
                        println!(
                            "dataset {:<20} {} obs, {} classes, L={}",
                            dc.name,
                            task.n_obs(),
                            task.n_classes().unwrap_or(0),
                            task.dataset()
                                .functional_features()
                                .first()
                                .map(|f| f.curve_len())
                                .unwrap_or(0)
                        );
                        for pc in &config.pipelines {
                            let pipeline = pc.build_pipeline()?;
                            if pc.tuned {
                                if let Err(e) = pc.space_for(&pipeline, &task) {
                                    println!("  pipeline {:<24} space problem: {e}", pc.id);
                                    problems += 1;
                                }
                            }
                        }
                    }
                    Err(e) => {
                        println!("dataset {:<20} UNREADABLE: {e}", dc.name);
                        problems += 1;
                    }
                }
            }
            println!(
                "{} dataset(s), {} pipeline(s), {} problem(s)",
                config.datasets.len(),
                config.pipelines.len(),
                problems
            );
            if problems > 0 {
                Ok(ExitCode::from(1))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}
