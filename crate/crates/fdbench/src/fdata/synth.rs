//! Synthetic classification tasks.
//!
//! `cylinder_bell_funnel` follows the standard generative definition of the
//! CBF simulation benchmark. The other generators produce structurally
//! similar stand-ins (motion-like and daily-load-like curves) for demo runs
//! and tests in environments without the real archive files.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::fdata::{FunctionalDataset, FunctionalFeature, Task};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn build_task(
    name: &str,
    curves: Vec<Vec<f64>>,
    labels: Vec<usize>,
    levels: Vec<String>,
) -> Result<Task> {
    let n = curves.len();
    let l = curves[0].len();
    let mut flat = Vec::with_capacity(n * l);
    for c in curves {
        flat.extend_from_slice(&c);
    }
    let values = Array2::from_shape_vec((n, l), flat).expect("curve block shape");
    let feature = FunctionalFeature::new("series", values)?;
    let dataset = FunctionalDataset::new(vec![], vec![feature])?;
    Task::classification(name, dataset, labels, levels)
}

/// Cylinder-Bell-Funnel: three shape classes of length-128 series.
///
/// c(t) = (6+eta)*X_[a,b](t) + eps(t), bell and funnel ramp the indicator up
/// or down over [a,b]; a ~ U{16..32}, b-a ~ U{32..96}, eta, eps ~ N(0,1).
pub fn cylinder_bell_funnel(n_obs: usize, seed: u64) -> Result<Task> {
    const LEN: usize = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = Vec::with_capacity(n_obs);
    let mut labels = Vec::with_capacity(n_obs);
    for i in 0..n_obs {
        let class = i % 3;
        let a = rng.random_range(16..=32) as f64;
        let b = a + rng.random_range(32..=96) as f64;
        let eta = normal(&mut rng);
        let mut curve = Vec::with_capacity(LEN);
        for t in 1..=LEN {
            let t = t as f64;
            let on = if t >= a && t <= b { 1.0 } else { 0.0 };
            let shape = match class {
                0 => on,
                1 => on * (t - a) / (b - a),
                _ => on * (b - t) / (b - a),
            };
            curve.push((6.0 + eta) * shape + normal(&mut rng));
        }
        curves.push(curve);
        labels.push(class);
    }
    build_task(
        "cbf",
        curves,
        labels,
        vec!["cylinder".into(), "bell".into(), "funnel".into()],
    )
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Two-class motion-like curves: rest, rise to a plateau, fall back to rest,
/// with random onset/offset warping. One class overshoots just after the
/// rise, the other settles smoothly.
pub fn two_class_motion(n_obs: usize, length: usize, seed: u64) -> Result<Task> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = Vec::with_capacity(n_obs);
    let mut labels = Vec::with_capacity(n_obs);
    for i in 0..n_obs {
        let class = i % 2;
        let onset = rng.random_range(0.15..0.30);
        let offset = rng.random_range(0.65..0.80);
        let ramp = rng.random_range(0.08..0.14);
        let level = 1.0 + 0.08 * normal(&mut rng);
        let bump_height = 0.34 + 0.06 * normal(&mut rng);
        let bump_center = onset + ramp + 0.04;
        let mut curve = Vec::with_capacity(length);
        for t in 0..length {
            let x = t as f64 / (length - 1) as f64;
            let mut v = level * (smoothstep((x - onset) / ramp) - smoothstep((x - offset) / ramp));
            if class == 1 {
                let z = (x - bump_center) / 0.025;
                v += bump_height * (-0.5 * z * z).exp();
            }
            v += 0.08 * normal(&mut rng);
            curve.push(v);
        }
        curves.push(curve);
        labels.push(class);
    }
    build_task(
        "motion",
        curves,
        labels,
        vec!["smooth".into(), "overshoot".into()],
    )
}

/// Two-class daily-load-like curves of length 24: a double-peak day shape
/// versus a single broad midday peak.
pub fn two_class_power(n_obs: usize, seed: u64) -> Result<Task> {
    const LEN: usize = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = Vec::with_capacity(n_obs);
    let mut labels = Vec::with_capacity(n_obs);
    for i in 0..n_obs {
        let class = i % 2;
        let base = 1.0 + 0.12 * normal(&mut rng);
        let h1 = 0.7 + 0.15 * normal(&mut rng);
        let h2 = 0.8 + 0.15 * normal(&mut rng);
        let shift = 1.2 * normal(&mut rng);
        let mut curve = Vec::with_capacity(LEN);
        for t in 0..LEN {
            let hour = t as f64 + shift;
            let peak = |center: f64, width: f64, h: f64| {
                let z = (hour - center) / width;
                h * (-0.5 * z * z).exp()
            };
            let v = if class == 0 {
                base + peak(9.0, 1.8, h1) + peak(20.0, 2.0, h2)
            } else {
                base + peak(14.0, 4.5, h1 + h2 - 0.6)
            };
            curve.push(v + 0.14 * normal(&mut rng));
        }
        curves.push(curve);
        labels.push(class);
    }
    build_task(
        "power",
        curves,
        labels,
        vec!["double_peak".into(), "single_peak".into()],
    )
}

/// Two classes of sinusoids that differ only in frequency; phase is random,
/// so amplitude spectra separate the classes while phases do not.
pub fn two_class_frequency(n_obs: usize, length: usize, seed: u64) -> Result<Task> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = Vec::with_capacity(n_obs);
    let mut labels = Vec::with_capacity(n_obs);
    for i in 0..n_obs {
        let class = i % 2;
        let freq = if class == 0 { 2.0 } else { 5.0 };
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let mut curve = Vec::with_capacity(length);
        for t in 0..length {
            let x = std::f64::consts::TAU * freq * t as f64 / length as f64 + phase;
            curve.push(x.sin() + 0.1 * normal(&mut rng));
        }
        curves.push(curve);
        labels.push(class);
    }
    build_task(
        "frequency",
        curves,
        labels,
        vec!["low".into(), "high".into()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cbf_shape_and_balance() {
        let task = cylinder_bell_funnel(930, 1).unwrap();
        assert_eq!(task.n_obs(), 930);
        assert_eq!(task.n_classes().unwrap(), 3);
        assert_eq!(task.dataset().functional_features()[0].curve_len(), 128);
        assert_eq!(task.class_counts().unwrap(), vec![310, 310, 310]);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = two_class_motion(10, 50, 4).unwrap();
        let b = two_class_motion(10, 50, 4).unwrap();
        assert_eq!(
            a.dataset().functional_features()[0].values(),
            b.dataset().functional_features()[0].values()
        );
    }
}
