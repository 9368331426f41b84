//! Hyperparameter search: random sampling or surrogate-based sequential
//! optimization (random-forest surrogate, expected improvement over random
//! candidate batches). Candidates are scored by mean MMCE over stratified
//! inner folds of the training rows only; a failed evaluation scores the
//! worst-case loss 1.0 and the search continues.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdata::{kfold_stratified, Task};
use crate::learn::regress::{self, RegForestParams};
use crate::params::ParamMap;
use crate::pipeline::space::{sample_params, ParamSpace};
use crate::pipeline::Pipeline;
use crate::resample::mmce;
use crate::seeds::derive_seed;
use crate::trace::{Stage, Tracer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuneStrategy {
    Random,
    Smbo,
}

impl std::str::FromStr for TuneStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(TuneStrategy::Random),
            "smbo" | "mbo" => Ok(TuneStrategy::Smbo),
            other => Err(Error::Config(format!(
                "unknown tuning strategy `{other}` (expected random or smbo)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_params: ParamMap,
    pub best_inner_loss: f64,
    pub history: Vec<(ParamMap, f64)>,
    pub budget_used: usize,
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Abramowitz-Stegun 7.1.26 polynomial approximation, |error| < 1.5e-7.
fn erf(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736
                + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Expected improvement for minimization.
fn expected_improvement(best: f64, mu: f64, sigma: f64) -> f64 {
    if sigma < 1e-12 {
        return (best - mu).max(0.0);
    }
    let z = (best - mu) / sigma;
    (best - mu) * normal_cdf(z) + sigma * normal_pdf(z)
}

/// Core search loop over an arbitrary loss function. The i-th random
/// candidate is a pure function of (space, seed, i), so runs with a larger
/// budget share their prefix with smaller ones.
pub fn tune_with(
    space: &ParamSpace,
    budget: usize,
    strategy: TuneStrategy,
    seed: u64,
    mut eval: impl FnMut(&ParamMap) -> f64,
) -> Result<TuneResult> {
    if budget == 0 {
        return Err(Error::InvalidParam("tuning budget must be >= 1".into()));
    }
    space.validate()?;
    let sample_at = |i: usize| -> Result<ParamMap> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5475_6e00 + i as u64));
        sample_params(space, &mut rng)
    };

    let mut history: Vec<(ParamMap, f64)> = Vec::with_capacity(budget);
    let mut run_candidate = |a: ParamMap, history: &mut Vec<(ParamMap, f64)>| {
        let loss = eval(&a);
        history.push((a, loss));
    };

    match strategy {
        TuneStrategy::Random => {
            for i in 0..budget {
                run_candidate(sample_at(i)?, &mut history);
            }
        }
        TuneStrategy::Smbo => {
            let init = budget.min(10.max(budget.div_ceil(10)));
            for i in 0..init {
                run_candidate(sample_at(i)?, &mut history);
            }
            for i in init..budget {
                let x = Array2::from_shape_fn((history.len(), space.entries.len()), |(r, c)| {
                    space.encode(&history[r].0)[c]
                });
                let y: Vec<f64> = history.iter().map(|(_, l)| *l).collect();
                let surrogate = regress::fit_forest(
                    &RegForestParams {
                        min_node_size: 1,
                        ..Default::default()
                    },
                    x.view(),
                    &y,
                    derive_seed(seed, 0x5352_4f00 + i as u64),
                )?;
                let best = y.iter().cloned().fold(f64::INFINITY, f64::min);

                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x4549_0000 + i as u64));
                // maximize EI; on EI ties (all-zero EI happens once the
                // surrogate is confident) fall back to the lowest mean
                let mut chosen: Option<(f64, f64, ParamMap)> = None;
                for _ in 0..500 {
                    let cand = sample_params(space, &mut rng)?;
                    let enc = space.encode(&cand);
                    let (mu, var) = surrogate.predict_mean_var(&enc)?;
                    let ei = expected_improvement(best, mu, var.sqrt());
                    let better = chosen
                        .as_ref()
                        .map_or(true, |(be, bm, _)| ei > *be || (ei == *be && mu < *bm));
                    if better {
                        chosen = Some((ei, mu, cand));
                    }
                }
                run_candidate(chosen.expect("500 candidates").2, &mut history);
            }
        }
    }

    let (best_idx, _) = history
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.1.partial_cmp(&b.1).unwrap())
        .expect("budget >= 1");
    Ok(TuneResult {
        best_params: history[best_idx].0.clone(),
        best_inner_loss: history[best_idx].1,
        history,
        budget_used: budget,
    })
}

/// Mean MMCE of a candidate pipeline over stratified inner folds of `train`.
/// Failures score 1.0.
pub(crate) fn inner_cv_objective<'a>(
    pipeline: &'a Pipeline,
    task: &'a Task,
    train: &'a [usize],
    inner_k: usize,
    seed: u64,
    tracer: Option<&'a Tracer>,
) -> Result<impl FnMut(&ParamMap) -> f64 + 'a> {
    let labels = task.class_labels()?;
    let sub_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let folds = kfold_stratified(&sub_labels, inner_k, derive_seed(seed, 0x696e_6e65_72))?;
    let tune_tracer = tracer.map(|t| t.forcing(Stage::Tune));
    let mut candidate_no = 0usize;
    Ok(move |assignment: &ParamMap| -> f64 {
        candidate_no += 1;
        let candidate = match pipeline.with_assignment(assignment) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("candidate {candidate_no} rejected: {e}; scoring worst-case loss");
                return 1.0;
            }
        };
        let mut losses = Vec::with_capacity(folds.len());
        for (f, fold) in folds.iter().enumerate() {
            let inner_train: Vec<usize> = fold.train().iter().map(|&i| train[i]).collect();
            let inner_test: Vec<usize> = fold.test().iter().map(|&i| train[i]).collect();
            let fit_seed = derive_seed(seed, (candidate_no as u64) << 16 | f as u64);
            let preds = match candidate.fit_predict_traced(
                task,
                &inner_train,
                &inner_test,
                fit_seed,
                tune_tracer.as_ref(),
            ) {
                Ok(p) => p,
                Err(e) => {
                    log::warn!(
                        "candidate {candidate_no} failed on inner fold {f}: {e}; scoring worst-case loss"
                    );
                    return 1.0;
                }
            };
            let truth: Vec<usize> = inner_test.iter().map(|&i| labels[i]).collect();
            match mmce(&truth, &preds) {
                Ok(l) => losses.push(l),
                Err(_) => return 1.0,
            }
        }
        losses.iter().sum::<f64>() / losses.len() as f64
    })
}

/// Tune a pipeline's joint space on the given training rows only.
#[allow(clippy::too_many_arguments)]
pub fn tune(
    pipeline: &Pipeline,
    task: &Task,
    train: &[usize],
    space: &ParamSpace,
    budget: usize,
    inner_k: usize,
    strategy: TuneStrategy,
    seed: u64,
    tracer: Option<&Tracer>,
) -> Result<TuneResult> {
    if inner_k < 2 {
        return Err(Error::InvalidParam("inner_k must be >= 2".into()));
    }
    let objective = inner_cv_objective(pipeline, task, train, inner_k, seed, tracer)?;
    tune_with(space, budget, strategy, seed, objective)
}
