//! Multi-annotator supervised LDA for regression.
//!
//! Each document has a latent target x ~ N(ηᵀz̄, σ²); annotator r answers
//! yʳ ~ N(x + bʳ, 1/pʳ).

mod elbo;
mod estep;
mod fit;
mod model;
mod mstep;
mod predict;

pub use elbo::{doc_elbo_r, doc_target_elbo, elbo_r};
pub use estep::{estep_document_r, update_m, update_phi_word_r, update_v, RegPhiContext};
pub use fit::{fit_batch_r, fit_svi_r, initialize_r, m_step_r, svi_global_step_r, RegFit};
pub use model::{RegDocState, RegGlobals, RegressionModel, UpdateForm};
pub use mstep::{estimate_bias, estimate_precision, expected_outer, solve_eta, update_annotators, MAX_PRECISION, MIN_PRECISION};
pub use predict::{predict_target, predict_targets};
