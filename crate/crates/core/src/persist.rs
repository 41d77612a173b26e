//! Model files: one JSON document tagged with the task.
//!
//! Matrices are stored row-major and ξ annotator-major. Floats use the
//! shortest representation that parses back to the same bits.

use std::path::Path;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::classify::{ClassificationModel, Hyperparameters};
use crate::error::{Error, Result};
use crate::regress::RegressionModel;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Classify(ClassificationModel),
    Regress(RegressionModel),
}

impl Model {
    pub fn vocab_size(&self) -> usize {
        match self {
            Model::Classify(m) => m.vocab_size(),
            Model::Regress(m) => m.vocab_size(),
        }
    }

    pub fn num_topics(&self) -> usize {
        match self {
            Model::Classify(m) => m.num_topics(),
            Model::Regress(m) => m.num_topics(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase", deny_unknown_fields)]
enum ModelFile {
    Classify {
        num_topics: usize,
        num_classes: usize,
        vocab_size: usize,
        num_annotators: usize,
        hyperparameters: Hyperparameters,
        eta: Vec<f64>,
        zeta: Vec<f64>,
        xi: Vec<f64>,
        annotator_ids: Vec<u64>,
    },
    Regress {
        num_topics: usize,
        vocab_size: usize,
        num_annotators: usize,
        hyperparameters: Hyperparameters,
        sigma2: f64,
        eta: Vec<f64>,
        bias: Vec<f64>,
        precision: Vec<f64>,
        zeta: Vec<f64>,
        annotator_ids: Vec<u64>,
    },
}

fn flat<D: ndarray::Dimension>(a: &ndarray::Array<f64, D>) -> Vec<f64> {
    a.iter().copied().collect()
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::invalid(format!("model file: {what} has {got} values, expected {want}")));
    }
    Ok(())
}

fn check_positive(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("model file: {what} must be positive and finite")));
    }
    Ok(())
}

fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("model file: {what} must be finite")));
    }
    Ok(())
}

impl From<&Model> for ModelFile {
    fn from(model: &Model) -> Self {
        match model {
            Model::Classify(m) => ModelFile::Classify {
                num_topics: m.num_topics(),
                num_classes: m.num_classes(),
                vocab_size: m.vocab_size(),
                num_annotators: m.num_annotators(),
                hyperparameters: m.hyper,
                eta: flat(&m.eta),
                zeta: flat(&m.zeta),
                xi: flat(&m.xi),
                annotator_ids: m.annotator_ids.clone(),
            },
            Model::Regress(m) => ModelFile::Regress {
                num_topics: m.num_topics(),
                vocab_size: m.vocab_size(),
                num_annotators: m.num_annotators(),
                hyperparameters: m.hyper,
                sigma2: m.sigma2,
                eta: m.eta.clone(),
                bias: m.bias.clone(),
                precision: m.precision.clone(),
                zeta: flat(&m.zeta),
                annotator_ids: m.annotator_ids.clone(),
            },
        }
    }
}

impl TryFrom<ModelFile> for Model {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        match f {
            ModelFile::Classify {
                num_topics: k,
                num_classes: c,
                vocab_size: v,
                num_annotators: r,
                hyperparameters,
                eta,
                zeta,
                xi,
                annotator_ids,
            } => {
                hyperparameters.validate()?;
                check_len("eta", eta.len(), c * k)?;
                check_len("zeta", zeta.len(), k * v)?;
                check_len("xi", xi.len(), r * c * c)?;
                check_len("annotator_ids", annotator_ids.len(), r)?;
                check_finite("eta", &eta)?;
                check_positive("zeta", &zeta)?;
                check_positive("xi", &xi)?;
                Ok(Model::Classify(ClassificationModel {
                    hyper: hyperparameters,
                    eta: Array2::from_shape_vec((c, k), eta).expect("checked"),
                    zeta: Array2::from_shape_vec((k, v), zeta).expect("checked"),
                    xi: Array3::from_shape_vec((r, c, c), xi).expect("checked"),
                    annotator_ids,
                }))
            }
            ModelFile::Regress {
                num_topics: k,
                vocab_size: v,
                num_annotators: r,
                hyperparameters,
                sigma2,
                eta,
                bias,
                precision,
                zeta,
                annotator_ids,
            } => {
                hyperparameters.validate()?;
                check_len("eta", eta.len(), k)?;
                check_len("zeta", zeta.len(), k * v)?;
                check_len("bias", bias.len(), r)?;
                check_len("precision", precision.len(), r)?;
                check_len("annotator_ids", annotator_ids.len(), r)?;
                check_finite("eta", &eta)?;
                check_finite("bias", &bias)?;
                check_positive("zeta", &zeta)?;
                check_positive("precision", &precision)?;
                check_positive("sigma2", &[sigma2])?;
                Ok(Model::Regress(RegressionModel {
                    hyper: hyperparameters,
                    eta,
                    bias,
                    precision,
                    sigma2,
                    zeta: Array2::from_shape_vec((k, v), zeta).expect("checked"),
                    annotator_ids,
                }))
            }
        }
    }
}

pub fn to_json(model: &Model) -> String {
    let mut s = serde_json::to_string_pretty(&ModelFile::from(model)).expect("serializable");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text)?;
    Model::try_from(file)
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class_model() -> ClassificationModel {
        ClassificationModel {
            hyper: Hyperparameters::default(),
            eta: Array2::from_shape_fn((2, 3), |(i, j)| (i as f64 - j as f64) / 3.0),
            zeta: Array2::from_shape_fn((3, 4), |(i, j)| 0.1 + (i * j) as f64 / 7.0),
            xi: Array3::from_shape_fn((2, 2, 2), |(r, c, l)| 1.0 + (r + c + l) as f64 * 0.1),
            annotator_ids: vec![17, 4],
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = Model::Classify(class_model());
        assert_eq!(from_json(&to_json(&m)).unwrap(), m);
        let r = Model::Regress(RegressionModel {
            hyper: Hyperparameters::default(),
            eta: vec![0.1 + 0.2, -1e-300],
            bias: vec![std::f64::consts::PI],
            precision: vec![1e6],
            sigma2: 1.0 / 3.0,
            zeta: Array2::from_elem((2, 1), 0.7),
            annotator_ids: vec![0],
        });
        assert_eq!(from_json(&to_json(&r)).unwrap(), r);
    }

    #[test]
    fn rejects_inconsistent_files() {
        let text = to_json(&Model::Classify(class_model()));
        let broken = text.replace("\"num_classes\": 2", "\"num_classes\": 3");
        assert!(from_json(&broken).is_err());
        assert!(from_json("{\"task\": \"cluster\"}").is_err());
    }
}
