//! Metrics, parameter-recovery diagnostics and the metrics CSV.

use std::fs::OpenOptions;
use std::path::Path;

use ndarray::Array3;

use crate::corpus::ClassAnnotations;
use crate::error::{Error, Result};
use crate::simulate::{ConfusionAnnotatorSpec, GaussianAnnotatorSpec};

fn check_lengths(pred: usize, truth: usize) -> Result<()> {
    if pred != truth {
        return Err(Error::invalid(format!("{pred} predictions for {truth} true values")));
    }
    if truth == 0 {
        return Err(Error::invalid("nothing to evaluate"));
    }
    Ok(())
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// 1 − SS_res / SS_tot; negative when worse than predicting the mean.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let mu = mean(truth);
    let ss_tot: f64 = truth.iter().map(|t| (t - mu) * (t - mu)).sum();
    if ss_tot == 0.0 {
        return Err(Error::invalid("true values are constant"));
    }
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p) * (t - p)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Per-annotator answer frequencies given the true class (R×C×C, rows
/// normalized). Rows without any document are uniform.
pub fn empirical_confusion(ann: &ClassAnnotations, truth: &[usize]) -> Result<Array3<f64>> {
    if truth.len() != ann.num_docs() {
        return Err(Error::invalid("truth length differs from the number of documents"));
    }
    let c = ann.num_classes();
    let mut counts = Array3::<f64>::zeros((ann.num_annotators(), c, c));
    for a in ann.records() {
        counts[[a.annotator, truth[a.doc], a.value]] += 1.0;
    }
    Ok(normalize_rows(&counts))
}

fn normalize_rows(x: &Array3<f64>) -> Array3<f64> {
    let mut out = x.clone();
    for mut row in out.lanes_mut(ndarray::Axis(2)) {
        let s = row.sum();
        if s > 0.0 {
            row.mapv_inplace(|v| v / s);
        } else {
            let n = row.len() as f64;
            row.fill(1.0 / n);
        }
    }
    out
}

/// Mean over (annotator, true class) of the L1 distance between the
/// normalized estimated row and the reference row.
pub fn confusion_recovery_error(estimated: &Array3<f64>, reference: &Array3<f64>) -> Result<f64> {
    if estimated.shape() != reference.shape() {
        return Err(Error::invalid(format!(
            "confusion shapes differ: {:?} vs {:?}",
            estimated.shape(),
            reference.shape()
        )));
    }
    let est = normalize_rows(estimated);
    let mut total = 0.0;
    let mut rows = 0usize;
    for (a, b) in est.lanes(ndarray::Axis(2)).into_iter().zip(reference.lanes(ndarray::Axis(2))) {
        total += a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        rows += 1;
    }
    Ok(total / rows as f64)
}

/// Stacks annotator confusion specs into an R×C×C array.
pub fn confusion_array(specs: &[ConfusionAnnotatorSpec]) -> Array3<f64> {
    let c = specs.first().map_or(0, |s| s.num_classes());
    Array3::from_shape_fn((specs.len(), c, c), |(r, i, j)| specs[r].confusion[i][j])
}

/// Per annotator, (b̂ − b, p̂ / p).
pub fn bias_precision_recovery(bias: &[f64], precision: &[f64], specs: &[GaussianAnnotatorSpec]) -> Result<Vec<(f64, f64)>> {
    if bias.len() != specs.len() || precision.len() != specs.len() {
        return Err(Error::invalid("estimate and spec counts differ"));
    }
    Ok(specs
        .iter()
        .zip(bias.iter().zip(precision))
        .map(|(s, (b, p))| (b - s.bias, p / s.precision))
        .collect())
}

/// One row of the metrics CSV.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricRow {
    pub run: String,
    pub seed: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub metric: String,
    pub value: f64,
}

const HEADER: &str = "run,seed,K,metric,value";

/// Appends rows to `path`, writing the header first if the file is new or
/// empty.
pub fn emit_report(rows: &[MetricRow], path: &Path) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        w.write_record(HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<Vec<MetricRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != HEADER {
        return Err(Error::invalid(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Mean and sample standard deviation.
pub fn summarize(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = mean(values);
    if values.len() < 2 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    (m, var.sqrt())
}
