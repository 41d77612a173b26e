//! Multi-annotator supervised topic models.
//!
//! [`classify`] learns a topic model whose documents carry a latent class
//! observed only through noisy annotators with per-annotator confusion
//! matrices; [`regress`] does the same for a real-valued target with
//! per-annotator bias and precision. Both are fit by batch variational EM
//! or stochastic variational inference.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod exec;
pub mod fit;
pub mod numerics;
pub mod oracle;
pub mod persist;
pub mod regress;
pub mod rng;
pub mod simulate;
pub mod topics;

pub use error::{Error, Result};
