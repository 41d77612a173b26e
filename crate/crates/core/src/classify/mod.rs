//! Multi-annotator supervised LDA for classification.
//!
//! Each document has a latent true class drawn from softmax(η z̄); every
//! annotator reports a label through its own confusion matrix πʳ.

mod elbo;
mod estep;
mod eta;
mod fit;
mod model;
mod predict;
mod svi;

pub use elbo::{confusion_elbo, doc_elbo, doc_label_elbo, elbo};
pub use estep::{estep_document, update_lambda, update_phi_word, PhiContext, SoftmaxBoundWorkspace};
pub use eta::{eta_objective_grad, update_eta};
pub use fit::{confusion_statistics, fit_batch, initialize, m_step, run_estep, update_xi, ClassFit};
pub use model::{expected_log_pi, expected_log_pi_all, ClassDocState, ClassGlobals, ClassificationModel, Hyperparameters};
pub use predict::{classify_mean_assignment, infer_heldout, predict_class, predict_classes};
pub use svi::{fit_svi, svi_global_step};
