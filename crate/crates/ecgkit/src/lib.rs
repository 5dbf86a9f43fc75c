//! Single-lead ECG rhythm classification toolkit.
//!
//! The crate covers the full path from raw samples to a trained classifier:
//!
//! - [`preprocess`]: band-pass and powerline notch filtering (zero phase)
//! - [`delineate`]: R-peak detection and P/QRS/T boundary delineation
//! - [`features`]: HRV and morphological time-domain features
//! - [`wavelet`]: stationary wavelet transform and coefficient features
//! - [`balance`]: SMOTE oversampling and random undersampling
//! - [`classify`]: random forest plus KNN and decision-tree baselines
//! - [`evaluate`]: stratified k-fold cross-validation, metrics, ablations
//! - [`synthgen`]: synthetic ECG generator with exact ground-truth fiducials
//! - [`pipeline`]: end-to-end drivers used by the CLI and examples
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod balance;
pub mod classify;
pub mod delineate;
pub mod domain;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod pipeline;
pub mod plot;
pub mod preprocess;
pub mod stats;
pub mod synthgen;
pub mod wavelet;

pub use error::{Error, Result};
