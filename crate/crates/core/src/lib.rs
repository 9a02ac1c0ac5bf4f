//! Tabular fraud scoring toolkit.
//!
//! Raw borrower records are one-hot encoded and optionally squashed with
//! tanh and/or projected with PCA ([`pipeline`]), scored with random forests
//! ([`forest`]) or gradient-boosted trees ([`gbdt`]) built on depth-limited
//! CART trees ([`tree`]), and evaluated by ROC AUC ([`metrics`]). [`sweep`]
//! runs depth × tree-count grids over a train/test/validation split and
//! [`plot`] renders the results.

pub mod dataset;
pub mod error;
pub mod forest;
pub mod gbdt;
pub mod metrics;
pub mod model;
pub mod persist;
pub mod pipeline;
pub mod plot;
pub mod sweep;
pub mod tree;

pub use error::{Error, Result};
pub use model::{Model, ModelKind, ModelParams};
