//! Stratified split generation: repeated subsampling and k-fold CV.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fdata::{ClassId, SplitIndex, Task};
use crate::seeds::derive_seed;

/// Generate `n_splits` stratified train/test subsamples.
///
/// Per-class train counts come from largest-remainder apportionment of
/// `class_count * train_fraction` against a total of `round(N * fraction)`,
/// then clamped so every class keeps at least one member on each side.
/// Deterministic given the seed; distinct splits in the returned list.
pub fn stratified_subsample(
    task: &Task,
    train_fraction: f64,
    n_splits: usize,
    seed: u64,
) -> Result<Vec<SplitIndex>> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "train_fraction must be in (0,1), got {train_fraction}"
        )));
    }
    if n_splits == 0 {
        return Err(Error::InvalidParam("n_splits must be >= 1".into()));
    }
    let labels = task.class_labels()?;
    let levels = task.class_levels()?;
    let counts = task.class_counts()?;
    if let Some(c) = counts.iter().position(|&n| n < 2) {
        return Err(Error::Task(format!(
            "class `{}` has {} member(s); stratified subsampling needs at least 2 per class",
            levels[c], counts[c]
        )));
    }
    let train_counts = apportion_train_counts(&counts, train_fraction, task.n_obs());

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); counts.len()];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }

    let mut splits: Vec<SplitIndex> = Vec::with_capacity(n_splits);
    for s in 0..n_splits {
        // Re-draw on collision with an earlier split so the list holds
        // distinct splits whenever the class sizes allow it.
        let mut chosen = None;
        for attempt in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, (s as u64) << 8 | attempt));
            let split = draw_split(&by_class, &train_counts, task.n_obs(), &mut rng)?;
            if !splits.contains(&split) {
                chosen = Some(split);
                break;
            }
            chosen = Some(split);
        }
        let split = chosen.expect("at least one draw attempted");
        if splits.contains(&split) {
            log::warn!(
                "stratified_subsample: split {s} duplicates an earlier split (class sizes too small for {n_splits} distinct splits)"
            );
        }
        splits.push(split);
    }
    Ok(splits)
}

fn draw_split(
    by_class: &[Vec<usize>],
    train_counts: &[usize],
    n_obs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SplitIndex> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (members, &t) in by_class.iter().zip(train_counts) {
        let mut shuffled = members.clone();
        shuffled.shuffle(rng);
        train.extend_from_slice(&shuffled[..t]);
        test.extend_from_slice(&shuffled[t..]);
    }
    SplitIndex::new(train, test, n_obs)
}

/// Largest-remainder apportionment of train seats across classes, clamped to
/// keep >= 1 member on each side of every class.
fn apportion_train_counts(counts: &[usize], fraction: f64, n_obs: usize) -> Vec<usize> {
    let total = (n_obs as f64 * fraction).round().max(1.0) as usize;
    let quotas: Vec<f64> = counts.iter().map(|&n| n as f64 * fraction).collect();
    let mut seats: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = seats.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut remaining = total.saturating_sub(assigned);
    for &c in order.iter().cycle().take(order.len() * 2) {
        if remaining == 0 {
            break;
        }
        if seats[c] < counts[c] {
            seats[c] += 1;
            remaining -= 1;
        }
    }
    for (s, &n) in seats.iter_mut().zip(counts) {
        *s = (*s).clamp(1, n - 1);
    }
    seats
}

/// Stratified k-fold: returns k splits whose test sets partition all indices
/// and whose per-class fold counts differ by at most one.
pub fn kfold_stratified(labels: &[ClassId], k: usize, seed: u64) -> Result<Vec<SplitIndex>> {
    let n = labels.len();
    if k < 2 {
        return Err(Error::InvalidParam(format!("k must be >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidParam(format!(
            "k = {k} exceeds the number of observations ({n})"
        )));
    }
    let n_classes = labels.iter().max().map(|&c| c + 1).unwrap_or(0);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x6b66_6f6c_64));
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    // Deal each class round-robin; the offset carries across classes so
    // overall fold sizes stay balanced too.
    let mut offset = 0usize;
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            folds[(offset + j) % k].push(i);
        }
        offset = (offset + members.len()) % k;
    }
    if folds.iter().any(|f| f.is_empty()) {
        return Err(Error::InvalidParam(format!(
            "cannot form {k} non-empty folds from {n} observations"
        )));
    }

    let mut splits = Vec::with_capacity(k);
    for j in 0..k {
        let test = folds[j].clone();
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != j)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        splits.push(SplitIndex::new(train, test, n)?);
    }
    Ok(splits)
}
