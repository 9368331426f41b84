//! Generate a self-contained demo: three synthetic datasets plus a
//! benchmark configuration, ready for `fdbench run`.
//!
//! Usage: cargo run --example demo -- [target_dir]   (default: ./demo)

use std::path::PathBuf;

use fdbench::fdata::{synth, write_ucr_tsv};

fn main() {
    let target = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("demo"));
    let data_dir = target.join("data");
    std::fs::create_dir_all(&data_dir).expect("create demo directory");

    let datasets = [
        ("motion", synth::two_class_motion(120, 100, 1).unwrap(), 0.3),
        ("power", synth::two_class_power(200, 2).unwrap(), 0.25),
        ("cbf", synth::cylinder_bell_funnel(150, 3).unwrap(), 0.2),
    ];
    let mut config = format!(
        "seed = 42\nworkers = 2\noutput_dir = {:?}\n",
        target.join("out")
    );
    for (name, task, fraction) in &datasets {
        let path = data_dir.join(format!("{name}.tsv"));
        write_ucr_tsv(task, &path).expect("write dataset");
        println!(
            "wrote {} ({} obs, {} classes, L={})",
            path.display(),
            task.n_obs(),
            task.n_classes().unwrap(),
            task.dataset().functional_features()[0].curve_len()
        );
        config.push_str(&format!(
            "\n[[datasets]]\nname = {name:?}\npath = {:?}\nsplit_fraction = {fraction}\nn_splits = 10\n",
            path
        ));
    }
    config.push_str(
        r#"
[[pipelines]]
id = "knn_dtw_default"
extractors = "raw"
learner = { method = "knn", k = 1, metric = "dtw", window = 1.0 }

[[pipelines]]
id = "tree_tsfeat"
learner = { method = "tree" }

[pipelines.extractors.series]
method = "tsfeat"

[[pipelines]]
id = "forest_bsignal"
learner = { method = "forest", n_trees = 50 }

[pipelines.extractors.series]
method = "bsignal"
knots = 10
df = 3

[[pipelines]]
id = "forest_fourier_tuned"
tuned = true
budget = 15
strategy = "smbo"
learner = { method = "forest", n_trees = 50 }

[pipelines.extractors.series]
method = "fourier"
trafo_coeff = "amplitude"
"#,
    );
    let config_path = target.join("bench.toml");
    std::fs::write(&config_path, config).expect("write config");
    println!("wrote {}", config_path.display());
    println!();
    println!("next steps:");
    println!("  fdbench validate --config {}", config_path.display());
    println!("  fdbench run --config {}", config_path.display());
    println!("  fdbench rank --results {}", target.join("out").display());
}
