//! Handcrafted image descriptors, from-scratch shallow classifiers and
//! cross-validated evaluation for binary (normal / abnormal) histopathology
//! tile classification.
//!
//! The pipeline is:
//!
//! 1. [`ingestion`] loads a labeled directory tree and plans stratified folds.
//! 2. [`descriptors`] turns every image into one of nine feature vectors
//!    ([`moments`], [`texture`], [`color`]).
//! 3. [`deepfeat`] reads, writes and concatenates canonical feature CSVs,
//!    including activations exported from pretrained CNNs.
//! 4. [`classifiers`] trains decision trees, random forests, kNN and RBF SVMs.
//! 5. [`evaluation`] pools confusion matrices across folds and renders tables.

pub mod classifiers;
pub mod color;
pub mod deepfeat;
pub mod descriptors;
pub mod error;
pub mod evaluation;
pub mod image;
pub mod ingestion;
pub mod moments;
pub mod rng;
pub mod texture;

pub use error::{Error, Result};
pub use image::{GrayImage, RgbImage};
pub use ingestion::{Dataset, FoldPlan, Label, Sample};
pub use moments::FeatureVector;
