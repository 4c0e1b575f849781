//! Texture descriptors: rotation-invariant Haralick statistics, rotation
//! invariant LBP histograms and Haar rectangle features.

pub mod glcm;
pub mod haar;
pub mod lbp;

pub use glcm::{glcm, haralick13, haralick_ri, quantize, Glcm, GlcmConfig, QuantizedImage};
pub use haar::{haar_features, integral_image, HaarBank, HaarKind, HaarTemplate, IntegralImage};
pub use lbp::{lbp_ri_hist, LbpConfig};
