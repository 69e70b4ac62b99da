//! Breast-lesion classification pipeline over mammographic regions of interest.
//!
//! The library covers the full chain: 16-bit PNG ingestion and 150x150 ROI
//! extraction, lesion segmentation by low-pass differencing and morphology,
//! a 181-value statistics/texture/geometry feature pool, four dimensionality
//! reducers (sparse random projection, PCA, NMF, chi-squared selection), a
//! calibrated linear SVM, and leave-one-case-out evaluation with two-view
//! score fusion. A seeded synthetic-data generator makes the whole pipeline
//! runnable end to end without clinical data.
//!
//! Data-parallel stages (feature extraction, cross-validation folds) run on
//! rayon when the `parallel` feature is enabled (default) and fall back to
//! sequential iteration otherwise. Outputs are identical either way.

pub mod error;
pub mod linalg;
pub mod eval;
pub mod imaging;
pub mod manifest;
pub mod parallel;
pub mod pipeline;
pub mod reduction;
pub mod segmentation;
pub mod svm;
pub mod synth;
pub mod texture;
pub mod wavelet;

pub use error::{Error, Result};
