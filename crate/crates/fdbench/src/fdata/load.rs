//! Dataset ingestion: UCR-style TSV series files and CSV tables with a
//! JSON sidecar describing functional column spans.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fdata::{FunctionalDataset, FunctionalFeature, ScalarFeature, Task};

/// 1-based inclusive column range of one functional feature in a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnSpan {
    pub start: usize,
    pub end: usize,
}

impl ColumnSpan {
    pub fn width(&self) -> usize {
        self.end + 1 - self.start
    }
}

/// Load a UCR-style series file (or a directory holding TRAIN/TEST files)
/// into a classification task with one functional feature named `series`.
///
/// Each line is one observation: first field the class label, remaining
/// fields the series values. Tab, comma and plain whitespace separators are
/// auto-detected per file. When `path` is a directory, all `*_TRAIN*` /
/// `*_TEST*` files inside are merged into a single task; the archive's own
/// train/test boundary is discarded (the benchmark resamples its own splits).
pub fn load_ucr_tsv(path: impl AsRef<Path>) -> Result<Task> {
    let path = path.as_ref();
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                p.is_file()
                    && p.file_name()
                        .and_then(|n| n.to_str())
                        .map(|n| n.contains("_TRAIN") || n.contains("_TEST"))
                        .unwrap_or(false)
            })
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::Format(format!(
                "no *_TRAIN*/*_TEST* files found in {}",
                path.display()
            )));
        }
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("ucr")
            .to_string();
        load_ucr_tsv_files(&files, &name)
    } else {
        let name = task_name_from(path);
        load_ucr_tsv_files(std::slice::from_ref(&path.to_path_buf()), &name)
    }
}

/// Load and merge several UCR-style series files into one task.
pub fn load_ucr_tsv_files(paths: &[PathBuf], name: &str) -> Result<Task> {
    let mut raw_labels: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for p in paths {
        parse_ucr_file(p, &mut raw_labels, &mut rows)?;
    }
    if rows.is_empty() {
        return Err(Error::Format(format!("no observations in {name}")));
    }
    let width = rows[0].len();
    let n = rows.len();
    let mut flat = Vec::with_capacity(n * width);
    for r in rows {
        flat.extend_from_slice(&r);
    }
    let values = Array2::from_shape_vec((n, width), flat)
        .map_err(|e| Error::Shape(format!("series block: {e}")))?;
    let feature = FunctionalFeature::new("series", values)?;
    let dataset = FunctionalDataset::new(vec![], vec![feature])?;

    // Map labels to class ids in first-appearance order.
    let mut levels: Vec<String> = Vec::new();
    let mut labels = Vec::with_capacity(n);
    for raw in raw_labels {
        let id = match levels.iter().position(|l| *l == raw) {
            Some(i) => i,
            None => {
                levels.push(raw);
                levels.len() - 1
            }
        };
        labels.push(id);
    }
    Task::classification(name, dataset, labels, levels)
}

fn task_name_from(path: &Path) -> String {
    let stem = path.file_stem().and_then(|n| n.to_str()).unwrap_or("ucr");
    stem.trim_end_matches("_TRAIN")
        .trim_end_matches("_TEST")
        .to_string()
}

fn parse_ucr_file(path: &Path, labels: &mut Vec<String>, rows: &mut Vec<Vec<f64>>) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let expected = rows.first().map(|r| r.len());
    let mut expected = expected;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').collect()
        } else if line.contains(',') {
            line.split(',').collect()
        } else {
            line.split_whitespace().collect()
        };
        if fields.len() < 3 {
            return Err(Error::Format(format!(
                "{}:{}: expected a label and at least 2 series values, got {} fields",
                path.display(),
                lineno + 1,
                fields.len()
            )));
        }
        let series_len = fields.len() - 1;
        match expected {
            None => expected = Some(series_len),
            Some(w) if w != series_len => {
                return Err(Error::Format(format!(
                    "{}:{}: ragged row with {} series values, expected {}",
                    path.display(),
                    lineno + 1,
                    series_len,
                    w
                )));
            }
            _ => {}
        }
        let mut row = Vec::with_capacity(series_len);
        for (col, cell) in fields[1..].iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "{}:{}: non-numeric series value `{}` in field {}",
                    path.display(),
                    lineno + 1,
                    cell,
                    col + 2
                ))
            })?;
            row.push(v);
        }
        labels.push(fields[0].trim().to_string());
        rows.push(row);
    }
    Ok(())
}

/// Write the first functional feature of a classification task back to a
/// UCR-style TSV. Values are formatted so they parse back bit-for-bit.
pub fn write_ucr_tsv(task: &Task, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let labels = task.class_labels()?;
    let levels = task.class_levels()?;
    let feature = task
        .dataset()
        .functional_features()
        .first()
        .ok_or_else(|| Error::Task("task has no functional feature to write".into()))?;
    let mut out = Vec::new();
    for (i, row) in feature.values().rows().into_iter().enumerate() {
        let mut line = levels[labels[i]].clone();
        for v in row.iter() {
            line.push('\t');
            line.push_str(&format!("{v:.16e}"));
        }
        line.push('\n');
        out.extend_from_slice(line.as_bytes());
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Turn a named-column numeric table into a dataset: each span becomes one
/// functional feature, remaining columns become scalar features. Spans are
/// 1-based inclusive column ranges and must be disjoint and at least 2 wide.
pub fn make_functional_dataset(
    names: &[String],
    columns: &[Vec<f64>],
    spans: &BTreeMap<String, ColumnSpan>,
) -> Result<FunctionalDataset> {
    if names.len() != columns.len() {
        return Err(Error::Shape(format!(
            "{} column names for {} columns",
            names.len(),
            columns.len()
        )));
    }
    let width = columns.len();
    let mut covered = vec![false; width];
    for (fname, span) in spans {
        if span.start == 0 || span.end > width || span.start > span.end {
            return Err(Error::InvalidParam(format!(
                "span for `{fname}` ({}..{}) outside table width {width}",
                span.start, span.end
            )));
        }
        if span.width() < 2 {
            return Err(Error::InvalidParam(format!(
                "span for `{fname}` has width 1; a functional feature needs at least 2 columns"
            )));
        }
        for c in span.start..=span.end {
            if covered[c - 1] {
                return Err(Error::InvalidParam(format!(
                    "span for `{fname}` overlaps another span at column {c}"
                )));
            }
            covered[c - 1] = true;
        }
    }
    let n_obs = columns.first().map(|c| c.len()).unwrap_or(0);
    let mut functional = Vec::new();
    for (fname, span) in spans {
        let w = span.width();
        let mut flat = Vec::with_capacity(n_obs * w);
        for i in 0..n_obs {
            for c in span.start..=span.end {
                flat.push(columns[c - 1][i]);
            }
        }
        let values = Array2::from_shape_vec((n_obs, w), flat)
            .map_err(|e| Error::Shape(format!("span `{fname}`: {e}")))?;
        functional.push(FunctionalFeature::new(fname.clone(), values)?);
    }
    let mut scalars = Vec::new();
    for (j, name) in names.iter().enumerate() {
        if !covered[j] {
            scalars.push(ScalarFeature {
                name: name.clone(),
                values: columns[j].clone(),
            });
        }
    }
    FunctionalDataset::new(scalars, functional)
}

#[derive(Debug, Deserialize)]
struct Sidecar {
    target: String,
    #[serde(default)]
    task: Option<String>,
    features: BTreeMap<String, (usize, usize)>,
    #[serde(default)]
    name: Option<String>,
}

/// Load a CSV table (with header) plus a JSON sidecar that names the target
/// column and maps feature names to 1-based inclusive column ranges on the
/// CSV as written (including the target column).
pub fn load_csv_with_sidecar(
    csv_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<Task> {
    let csv_path = csv_path.as_ref();
    let sidecar_path = sidecar_path.as_ref();
    let sidecar: Sidecar = serde_json::from_str(
        &fs::read_to_string(sidecar_path).map_err(|e| Error::io(sidecar_path, e))?,
    )
    .map_err(|e| Error::Format(format!("{}: {e}", sidecar_path.display())))?;

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(csv_path)
        .map_err(|e| Error::Format(format!("{}: {e}", csv_path.display())))?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", csv_path.display())))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let target_col = headers
        .iter()
        .position(|h| *h == sidecar.target)
        .ok_or_else(|| {
            Error::Config(format!(
                "target column `{}` not found in {}",
                sidecar.target,
                csv_path.display()
            ))
        })?;

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for (lineno, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(format!("{}: {e}", csv_path.display())))?;
        if rec.len() != headers.len() {
            return Err(Error::Format(format!(
                "{}: record {} has {} fields, header has {}",
                csv_path.display(),
                lineno + 2,
                rec.len(),
                headers.len()
            )));
        }
        for (j, cell) in rec.iter().enumerate() {
            raw[j].push(cell.to_string());
        }
    }

    // Feature table excludes the target column; sidecar spans index the CSV
    // as written, so spans shift down by one past the target.
    let mut spans = BTreeMap::new();
    for (fname, (start, end)) in &sidecar.features {
        let (start, end) = (*start, *end);
        if (start..=end).contains(&(target_col + 1)) {
            return Err(Error::Config(format!(
                "feature span `{fname}` covers the target column `{}`",
                sidecar.target
            )));
        }
        let shift = |c: usize| if c > target_col + 1 { c - 1 } else { c };
        spans.insert(
            fname.clone(),
            ColumnSpan {
                start: shift(start),
                end: shift(end),
            },
        );
    }

    let mut names = Vec::new();
    let mut columns = Vec::new();
    for (j, h) in headers.iter().enumerate() {
        if j == target_col {
            continue;
        }
        let mut col = Vec::with_capacity(raw[j].len());
        for (i, cell) in raw[j].iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "{}: non-numeric value `{}` in column `{}`, record {}",
                    csv_path.display(),
                    cell,
                    h,
                    i + 2
                ))
            })?;
            col.push(v);
        }
        names.push(h.clone());
        columns.push(col);
    }
    let dataset = make_functional_dataset(&names, &columns, &spans)?;

    let task_name = sidecar.name.unwrap_or_else(|| task_name_from(csv_path));
    let kind = sidecar.task.as_deref().unwrap_or("classification");
    match kind {
        "classification" => {
            let mut levels: Vec<String> = Vec::new();
            let mut labels = Vec::new();
            for raw_label in &raw[target_col] {
                let id = match levels.iter().position(|l| l == raw_label) {
                    Some(i) => i,
                    None => {
                        levels.push(raw_label.clone());
                        levels.len() - 1
                    }
                };
                labels.push(id);
            }
            Task::classification(task_name, dataset, labels, levels)
        }
        "regression" => {
            let mut y = Vec::new();
            for (i, cell) in raw[target_col].iter().enumerate() {
                y.push(cell.trim().parse().map_err(|_| {
                    Error::Parse(format!(
                        "non-numeric regression target `{}` in record {}",
                        cell,
                        i + 2
                    ))
                })?);
            }
            Task::regression(task_name, dataset, y)
        }
        other => Err(Error::Config(format!(
            "unknown task kind `{other}` (expected classification or regression)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(&mut f, content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn minimal_two_row_file() {
        let f = write_tmp("1 0.0 0.0\n2 1.0 1.0\n");
        let task = load_ucr_tsv(f.path()).unwrap();
        assert_eq!(task.n_obs(), 2);
        assert_eq!(task.n_classes().unwrap(), 2);
        assert_eq!(task.dataset().functional_features()[0].curve_len(), 2);
    }

    #[test]
    fn tab_and_comma_autodetect() {
        let tab = write_tmp("a\t1.0\t2.0\nb\t3.0\t4.0\n");
        let comma = write_tmp("a,1.0,2.0\nb,3.0,4.0\n");
        let t1 = load_ucr_tsv(tab.path()).unwrap();
        let t2 = load_ucr_tsv(comma.path()).unwrap();
        assert_eq!(
            t1.dataset().functional_features()[0].values(),
            t2.dataset().functional_features()[0].values()
        );
    }

    #[test]
    fn ragged_row_names_line() {
        let f = write_tmp("1 0.0 0.0\n2 1.0 1.0 2.0\n");
        let err = load_ucr_tsv(f.path()).unwrap_err();
        assert!(err.to_string().contains(":2"), "{err}");
    }

    #[test]
    fn non_numeric_cell_is_parse_error() {
        let f = write_tmp("1 0.0 xyz\n2 1.0 1.0\n");
        let err = load_ucr_tsv(f.path()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
    }

    #[test]
    fn single_class_is_task_error() {
        let f = write_tmp("1 0.0 0.0\n1 1.0 1.0\n");
        let err = load_ucr_tsv(f.path()).unwrap_err();
        assert!(matches!(err, Error::Task(_)), "{err}");
    }

    #[test]
    fn directory_merges_train_and_test_files() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut series = |n: usize, l: usize, classes: usize| -> String {
            let mut text = String::new();
            for i in 0..n {
                text.push_str(&(i % classes + 1).to_string());
                for _ in 0..l {
                    text.push_str(&format!("\t{:.6}", rng.random_range(-1.0..1.0f64)));
                }
                text.push('\n');
            }
            text
        };
        // shaped like a 200-row motion set: 50 train + 150 test, L = 150
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("X_TRAIN.tsv"), series(50, 150, 2)).unwrap();
        fs::write(dir.path().join("X_TEST.tsv"), series(150, 150, 2)).unwrap();
        let task = load_ucr_tsv(dir.path()).unwrap();
        assert_eq!(task.n_obs(), 200);
        assert_eq!(task.n_classes().unwrap(), 2);
        assert_eq!(task.dataset().functional_features()[0].curve_len(), 150);

        // shaped like a 60-row spectro set: 5 classes, L = 470
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("Y_TRAIN.tsv"), series(30, 470, 5)).unwrap();
        fs::write(dir.path().join("Y_TEST.tsv"), series(30, 470, 5)).unwrap();
        let task = load_ucr_tsv(dir.path()).unwrap();
        assert_eq!(task.n_obs(), 60);
        assert_eq!(task.n_classes().unwrap(), 5);
        assert_eq!(task.dataset().functional_features()[0].curve_len(), 470);

        // mismatched lengths across the merged files are a format error
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("Z_TRAIN.tsv"), series(3, 8, 2)).unwrap();
        fs::write(dir.path().join("Z_TEST.tsv"), series(3, 9, 2)).unwrap();
        assert!(load_ucr_tsv(dir.path()).is_err());
    }

    #[test]
    fn labels_in_first_appearance_order() {
        let f = write_tmp("5 0.0 0.0\n2 1.0 1.0\n5 2.0 2.0\n");
        let task = load_ucr_tsv(f.path()).unwrap();
        assert_eq!(task.class_levels().unwrap(), &["5", "2"]);
        assert_eq!(task.class_labels().unwrap(), &[0, 1, 0]);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut text = String::new();
        for i in 0..20 {
            text.push_str(if i % 2 == 0 { "1" } else { "2" });
            for _ in 0..8 {
                let v: f64 = (rng.random::<f64>() - 0.5) * 1e3;
                text.push_str(&format!("\t{v}"));
            }
            text.push('\n');
        }
        let f = write_tmp(&text);
        let task = load_ucr_tsv(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_ucr_tsv(&task, out.path()).unwrap();
        let task2 = load_ucr_tsv(out.path()).unwrap();
        assert_eq!(
            task.dataset().functional_features()[0].values(),
            task2.dataset().functional_features()[0].values()
        );
    }

    #[test]
    fn spans_become_functional_features() {
        // fuelSubset-shaped table: 367 columns, UVVIS = 3..136, NIR = 137..367.
        let width = 367;
        let names: Vec<String> = (1..=width).map(|j| format!("c{j}")).collect();
        let columns: Vec<Vec<f64>> = (0..width).map(|j| vec![j as f64, j as f64 + 0.5]).collect();
        let mut spans = BTreeMap::new();
        spans.insert("UVVIS".to_string(), ColumnSpan { start: 3, end: 136 });
        spans.insert(
            "NIR".to_string(),
            ColumnSpan {
                start: 137,
                end: 367,
            },
        );
        let ds = make_functional_dataset(&names, &columns, &spans).unwrap();
        assert_eq!(ds.functional_features().len(), 2);
        assert_eq!(ds.functional_feature("UVVIS").unwrap().curve_len(), 134);
        assert_eq!(ds.functional_feature("NIR").unwrap().curve_len(), 231);
        assert_eq!(ds.scalar_features().len(), 2);
    }

    #[test]
    fn no_spans_gives_scalar_dataset() {
        let names = vec!["a".to_string(), "b".to_string()];
        let columns = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let ds = make_functional_dataset(&names, &columns, &BTreeMap::new()).unwrap();
        assert_eq!(ds.functional_features().len(), 0);
        assert_eq!(ds.scalar_features().len(), 2);
    }

    #[test]
    fn four_column_span() {
        let names: Vec<String> = (1..=4).map(|j| format!("c{j}")).collect();
        let columns: Vec<Vec<f64>> = (0..4).map(|j| vec![j as f64, 10.0 + j as f64]).collect();
        let mut spans = BTreeMap::new();
        spans.insert("f".to_string(), ColumnSpan { start: 2, end: 4 });
        let ds = make_functional_dataset(&names, &columns, &spans).unwrap();
        assert_eq!(ds.scalar_features().len(), 1);
        assert_eq!(ds.functional_feature("f").unwrap().curve_len(), 3);
        // Row order preserved: observation 1's curve is row 1 of the span.
        let v = ds.functional_feature("f").unwrap().values();
        assert_eq!(v.row(1).to_vec(), vec![11.0, 12.0, 13.0]);
    }

    #[test]
    fn overlapping_spans_rejected() {
        let names: Vec<String> = (1..=6).map(|j| format!("c{j}")).collect();
        let columns: Vec<Vec<f64>> = (0..6).map(|_| vec![0.0]).collect();
        let mut spans = BTreeMap::new();
        spans.insert("a".to_string(), ColumnSpan { start: 1, end: 3 });
        spans.insert("b".to_string(), ColumnSpan { start: 3, end: 6 });
        assert!(make_functional_dataset(&names, &columns, &spans).is_err());
    }

    #[test]
    fn width_one_span_rejected() {
        let names: Vec<String> = (1..=3).map(|j| format!("c{j}")).collect();
        let columns: Vec<Vec<f64>> = (0..3).map(|_| vec![0.0]).collect();
        let mut spans = BTreeMap::new();
        spans.insert("a".to_string(), ColumnSpan { start: 2, end: 2 });
        assert!(make_functional_dataset(&names, &columns, &spans).is_err());
    }

    #[test]
    fn sidecar_loader_builds_task() {
        let csv = write_tmp("label,x,s1,s2,s3\nA,0.5,1.0,2.0,3.0\nB,0.25,4.0,5.0,6.0\n");
        let sc = write_tmp(r#"{"target": "label", "features": {"series": [3, 5]}}"#);
        let task = load_csv_with_sidecar(csv.path(), sc.path()).unwrap();
        assert_eq!(task.n_obs(), 2);
        assert_eq!(task.n_classes().unwrap(), 2);
        let ds = task.dataset();
        assert_eq!(ds.scalar_features().len(), 1);
        assert_eq!(ds.functional_feature("series").unwrap().curve_len(), 3);
        assert_eq!(
            ds.functional_feature("series")
                .unwrap()
                .values()
                .row(0)
                .to_vec(),
            vec![1.0, 2.0, 3.0]
        );
    }
}
