//! Benchmark orchestration.
//!
//! Jobs are (dataset, pipeline) pairs. Every pipeline on a dataset runs
//! against the same seeded outer split plan. A worker pool executes jobs in
//! parallel; completed job records are flushed to `records.csv` strictly in
//! job order, one job per append, so interrupted runs resume by skipping
//! pairs whose records are already complete and two identical runs produce
//! identical files.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::bench::agg::{aggregate_ranks, summarize_pairs};
use crate::bench::config::BenchmarkConfig;
use crate::bench::export::{
    append_records, read_records, write_aggregates, write_long_csv, AggregatesDoc, FailedJob,
    AGGREGATES_FILE, LONG_FILE, RECORDS_FILE,
};
use crate::bench::Record;
use crate::error::{Error, Result};
use crate::fdata::{plan_fingerprint, stratified_subsample, SplitIndex, Task};
use crate::pipeline::Pipeline;
use crate::resample::{nested_resample_with, resample_with, ResampleResult};
use crate::seeds::derive_seed_str;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    /// Some jobs failed or were skipped; results cover the rest.
    PartialFailure,
}

#[derive(Debug)]
pub struct RunReport {
    pub status: RunStatus,
    pub records: Vec<Record>,
    /// Jobs executed in this invocation (resume skips count separately).
    pub evaluated_jobs: usize,
    pub skipped_jobs: usize,
    pub failed_jobs: Vec<FailedJob>,
    /// dataset -> fingerprint of the shared split plan.
    pub split_fingerprints: BTreeMap<String, u64>,
}

struct Job {
    dataset_idx: usize,
    pipeline_idx: usize,
}

struct JobOutcome {
    job_idx: usize,
    records: Vec<Record>,
}

fn job_records(dataset: &str, pipeline_id: &str, result: &ResampleResult) -> Vec<Record> {
    result
        .per_split
        .iter()
        .map(|r| Record {
            dataset: dataset.to_string(),
            pipeline: pipeline_id.to_string(),
            split: r.split_id,
            mmce: r.mmce,
            accuracy: r.accuracy,
            seconds: r.fit_seconds + r.predict_seconds + r.tune_seconds,
        })
        .collect()
}

fn run_job(
    config: &BenchmarkConfig,
    task: &Task,
    plan: &[SplitIndex],
    pipeline: &Pipeline,
    job: &Job,
    deadline: Instant,
) -> Result<ResampleResult> {
    let pc = &config.pipelines[job.pipeline_idx];
    let seed = derive_seed_str(
        derive_seed_str(config.seed, &config.datasets[job.dataset_idx].name),
        &pc.id,
    );
    if pc.tuned {
        let space = pc.space_for(pipeline, task)?;
        nested_resample_with(
            pipeline,
            task,
            plan,
            &space,
            pc.budget,
            pc.inner_k,
            pc.strategy()?,
            seed,
            None,
            Some(deadline),
        )
    } else {
        resample_with(pipeline, task, plan, seed, None, Some(deadline))
    }
}

/// Execute a benchmark configuration. With `resume`, (dataset, pipeline)
/// pairs whose records are already complete in the output are skipped.
pub fn run_benchmark(config: &BenchmarkConfig, resume: bool) -> Result<RunReport> {
    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    let records_path = config.output_dir.join(RECORDS_FILE);

    let existing: Vec<Record> = if resume && records_path.exists() {
        read_records(&records_path)?
    } else {
        if records_path.exists() {
            std::fs::remove_file(&records_path).map_err(|e| Error::io(&records_path, e))?;
        }
        Vec::new()
    };
    let mut existing_counts: BTreeMap<(String, String), usize> = BTreeMap::new();
    for r in &existing {
        *existing_counts
            .entry((r.dataset.clone(), r.pipeline.clone()))
            .or_default() += 1;
    }

    // Load datasets and build per-dataset shared split plans. A dataset
    // that cannot be loaded fails all of its jobs, mirroring the failed-
    // experiment bookkeeping of large benchmark runs.
    let mut tasks: Vec<Option<(Task, Vec<SplitIndex>)>> = Vec::new();
    let mut failed_jobs: Vec<FailedJob> = Vec::new();
    let mut split_fingerprints = BTreeMap::new();
    for dc in &config.datasets {
        match dc.load().and_then(|task| {
            let plan = stratified_subsample(
                &task,
                dc.split_fraction,
                dc.n_splits,
                derive_seed_str(config.seed, &dc.name),
            )?;
            Ok((task, plan))
        }) {
            Ok((task, plan)) => {
                split_fingerprints.insert(dc.name.clone(), plan_fingerprint(&plan));
                tasks.push(Some((task, plan)));
            }
            Err(e) => {
                log::warn!("dataset `{}` unusable, skipping its jobs: {e}", dc.name);
                for pc in &config.pipelines {
                    failed_jobs.push(FailedJob {
                        dataset: dc.name.clone(),
                        pipeline: pc.id.clone(),
                        reason: format!("dataset unusable: {e}"),
                    });
                }
                tasks.push(None);
            }
        }
    }

    // Pre-build pipelines (already validated by config parsing).
    let pipelines: Vec<Pipeline> = config
        .pipelines
        .iter()
        .map(|pc| pc.build_pipeline())
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<Job> = (0..config.datasets.len())
        .flat_map(|d| {
            (0..config.pipelines.len()).map(move |p| Job {
                dataset_idx: d,
                pipeline_idx: p,
            })
        })
        .collect();

    let mut skipped_jobs = 0usize;
    let mut runnable: Vec<usize> = Vec::new(); // indices into `jobs`
    let mut outcomes: Vec<Option<JobOutcome>> = (0..jobs.len()).map(|_| None).collect();
    for (ji, job) in jobs.iter().enumerate() {
        let dc = &config.datasets[job.dataset_idx];
        let pc = &config.pipelines[job.pipeline_idx];
        if tasks[job.dataset_idx].is_none() {
            outcomes[ji] = Some(JobOutcome {
                job_idx: ji,
                records: Vec::new(),
            });
            continue;
        }
        let done = existing_counts
            .get(&(dc.name.clone(), pc.id.clone()))
            .copied()
            .unwrap_or(0);
        if resume && done >= dc.n_splits {
            log::info!("resume: skipping completed job {}/{}", dc.name, pc.id);
            skipped_jobs += 1;
            outcomes[ji] = Some(JobOutcome {
                job_idx: ji,
                records: Vec::new(),
            });
            continue;
        }
        runnable.push(ji);
    }

    // Worker pool over runnable jobs; outcomes arrive via channel and are
    // flushed in job order.
    let evaluated_jobs = runnable.len();
    let timeout = Duration::from_secs_f64(config.job_timeout_seconds);
    let (tx, rx) = mpsc::channel::<JobOutcome>();
    let next = AtomicUsize::new(0);
    let failures_from_jobs: Mutex<Vec<FailedJob>> = Mutex::new(Vec::new());
    let workers = config.workers.max(1).min(runnable.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let runnable = &runnable;
            let jobs = &jobs;
            let tasks = &tasks;
            let pipelines = &pipelines;
            let failures_from_jobs = &failures_from_jobs;
            scope.spawn(move || loop {
                let at = next.fetch_add(1, Ordering::SeqCst);
                if at >= runnable.len() {
                    break;
                }
                let ji = runnable[at];
                let job = &jobs[ji];
                let dc = &config.datasets[job.dataset_idx];
                let pc = &config.pipelines[job.pipeline_idx];
                let (task, plan) = tasks[job.dataset_idx].as_ref().expect("runnable");
                let deadline = Instant::now() + timeout;
                let outcome = match run_job(
                    config,
                    task,
                    plan,
                    &pipelines[job.pipeline_idx],
                    job,
                    deadline,
                ) {
                    Ok(result) => {
                        let timed_out = result.failures.iter().any(|f| f.error.contains("timeout"));
                        if timed_out || result.per_split.len() < plan.len() {
                            let reason = result
                                .failures
                                .first()
                                .map(|f| f.error.clone())
                                .unwrap_or_else(|| "incomplete job".into());
                            failures_from_jobs.lock().unwrap().push(FailedJob {
                                dataset: dc.name.clone(),
                                pipeline: pc.id.clone(),
                                reason: reason.clone(),
                            });
                            JobOutcome {
                                job_idx: ji,
                                records: Vec::new(),
                            }
                        } else {
                            JobOutcome {
                                job_idx: ji,
                                records: job_records(&dc.name, &pc.id, &result),
                            }
                        }
                    }
                    Err(e) => {
                        log::warn!("job {}/{} failed: {e}", dc.name, pc.id);
                        failures_from_jobs.lock().unwrap().push(FailedJob {
                            dataset: dc.name.clone(),
                            pipeline: pc.id.clone(),
                            reason: e.to_string(),
                        });
                        JobOutcome {
                            job_idx: ji,
                            records: Vec::new(),
                        }
                    }
                };
                if tx.send(outcome).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        // in-order incremental flush
        let mut flush_at = 0usize;
        let mut pending: BTreeMap<usize, JobOutcome> = BTreeMap::new();
        let flush_ready = |outcomes: &mut Vec<Option<JobOutcome>>,
                           pending: &mut BTreeMap<usize, JobOutcome>,
                           flush_at: &mut usize|
         -> Result<()> {
            while *flush_at < outcomes.len() {
                if outcomes[*flush_at].is_some() {
                    *flush_at += 1;
                    continue;
                }
                match pending.remove(flush_at) {
                    Some(outcome) => {
                        append_records(&records_path, &outcome.records)?;
                        outcomes[*flush_at] = Some(outcome);
                        *flush_at += 1;
                    }
                    None => break,
                }
            }
            Ok(())
        };
        for outcome in rx {
            pending.insert(outcome.job_idx, outcome);
            flush_ready(&mut outcomes, &mut pending, &mut flush_at)?;
        }
        flush_ready(&mut outcomes, &mut pending, &mut flush_at)
    })?;
    // the header must exist even when everything was skipped or failed
    if !records_path.exists() {
        append_records(&records_path, &[])?;
    }

    failed_jobs.extend(failures_from_jobs.into_inner().unwrap());
    let all_records = read_records(&records_path)?;
    let status = if failed_jobs.is_empty() {
        RunStatus::Ok
    } else {
        RunStatus::PartialFailure
    };
    Ok(RunReport {
        status,
        records: all_records,
        evaluated_jobs,
        skipped_jobs,
        failed_jobs,
        split_fingerprints,
    })
}

/// Write aggregates.json and the plot-ready long CSV next to records.csv.
pub fn export_aggregates(config: &BenchmarkConfig, report: &RunReport) -> Result<()> {
    let pairs = summarize_pairs(&report.records);
    let ranks = aggregate_ranks(&pairs);
    let config_echo =
        toml::Value::try_from(config).map_err(|e| Error::Config(format!("config echo: {e}")))?;
    let doc = AggregatesDoc {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        config_echo,
        pairs,
        ranks,
        split_fingerprints: report
            .split_fingerprints
            .iter()
            .map(|(k, v)| (k.clone(), format!("{v:016x}")))
            .collect(),
        failed_jobs: report.failed_jobs.clone(),
    };
    write_aggregates(&config.output_dir.join(AGGREGATES_FILE), &doc)?;
    write_long_csv(&config.output_dir.join(LONG_FILE), &report.records)
}
