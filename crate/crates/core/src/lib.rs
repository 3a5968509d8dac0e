//! Sliding-window path signatures and ridge forecasting on signature features.
//!
//! The crate is organized bottom-up:
//!
//! - [`tensor`]: truncated tensor algebra (product, inverse, norms).
//! - [`signature`]: segment and window signatures of time-augmented paths,
//!   and their flattening to feature vectors.
//! - [`sliding`]: the two-product incremental update of a window signature.
//! - [`ridge`]: standardized closed-form ridge regression with validation
//!   selection of the penalty.
//! - [`pipeline`]: delayed-increment forecasting, baselines, metrics, sweeps.
//! - [`data`]: CSV ingestion, interpolation, synthetic demand generation.
//! - [`cli`]: the `sigwin` command-line front end.

pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod ridge;
pub mod signature;
pub mod sliding;
pub mod tensor;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use pipeline::{Experiment, ForecastConfig, ModelSpec};
pub use ridge::{fit_ridge, select_lambda, RidgeModel};
pub use signature::{
    feature_indices, flatten_features, segment_signature, window_signature, AugmentedWindow,
    MultiIndex,
};
pub use sliding::{SlidingParams, SlidingSignatureState};
pub use tensor::TruncatedTensorSeq;
