use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;

use crate::simulate::{Assignment, ConfusionAnnotatorSpec, GaussianAnnotatorSpec};

/// Reads a two-column CSV with a header (`doc_id,<value>`); extra columns are
/// ignored. Values come back ordered by document id, which must be exactly 0..D.
pub fn read_doc_values(path: &Path) -> anyhow::Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows: Vec<(usize, f64)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.with_context(|| format!("{}: line {line}", path.display()))?;
        if rec.len() < 2 {
            bail!("{}: line {line} has fewer than 2 columns", path.display());
        }
        let doc: usize = rec[0]
            .parse()
            .with_context(|| format!("{}: line {line}: bad doc_id {:?}", path.display(), &rec[0]))?;
        let value: f64 = rec[1]
            .parse()
            .with_context(|| format!("{}: line {line}: bad value {:?}", path.display(), &rec[1]))?;
        if !value.is_finite() {
            bail!("{}: line {line}: value is not finite", path.display());
        }
        rows.push((doc, value));
    }
    rows.sort_by_key(|r| r.0);
    for (expected, &(doc, _)) in rows.iter().enumerate() {
        if doc != expected {
            bail!("{}: document ids must be 0..{} without gaps or repeats", path.display(), rows.len());
        }
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

pub fn as_labels(values: &[f64], path: &Path) -> anyhow::Result<Vec<usize>> {
    values
        .iter()
        .map(|&v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                bail!("{}: class label {v} is not a non-negative integer", path.display())
            }
        })
        .collect()
}

pub fn write_doc_values<T: std::fmt::Display>(path: &Path, column: &str, values: &[T]) -> anyhow::Result<()> {
    let mut out = format!("doc_id,{column}\n");
    for (d, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{d},{v}");
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn default_partition() -> Assignment {
    Assignment::Partition
}

fn default_all() -> Assignment {
    Assignment::All
}

/// Annotator profile file.
#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum Profile {
    /// Either explicit confusion matrices, or diagonal accuracies with the
    /// rest of each row spread evenly over `num_classes`.
    Confusion {
        #[serde(default)]
        annotators: Vec<ConfusionAnnotatorSpec>,
        #[serde(default)]
        accuracies: Vec<f64>,
        num_classes: Option<usize>,
        #[serde(default = "default_partition")]
        assignment: Assignment,
    },
    Gaussian {
        annotators: Vec<GaussianAnnotatorSpec>,
        #[serde(default = "default_all")]
        assignment: Assignment,
    },
}

pub enum ResolvedProfile {
    Confusion(Vec<ConfusionAnnotatorSpec>, Assignment),
    Gaussian(Vec<GaussianAnnotatorSpec>, Assignment),
}

/// Parses and validates a profile.
pub fn parse_profile(text: &str) -> Result<ResolvedProfile, String> {
    let profile: Profile = serde_json::from_str(text).map_err(|e| format!("invalid profile: {e}"))?;
    match profile {
        Profile::Confusion {
            annotators,
            accuracies,
            num_classes,
            assignment,
        } => {
            let specs = match (annotators.is_empty(), accuracies.is_empty()) {
                (false, true) => annotators,
                (true, false) => {
                    let c = num_classes.ok_or("a profile with accuracies needs num_classes")?;
                    accuracies
                        .iter()
                        .map(|&a| ConfusionAnnotatorSpec::from_accuracy(a, c))
                        .collect::<crate::Result<_>>()
                        .map_err(|e| e.to_string())?
                }
                _ => return Err("a profile needs exactly one of annotators or accuracies".into()),
            };
            for s in &specs {
                s.validate().map_err(|e| e.to_string())?;
                if s.num_classes() != specs[0].num_classes() {
                    return Err("annotators disagree on the number of classes".into());
                }
            }
            Ok(ResolvedProfile::Confusion(specs, assignment))
        }
        Profile::Gaussian { annotators, assignment } => {
            if annotators.is_empty() {
                return Err("profile lists no annotators".into());
            }
            for s in &annotators {
                s.validate().map_err(|e| e.to_string())?;
            }
            Ok(ResolvedProfile::Gaussian(annotators, assignment))
        }
    }
}
