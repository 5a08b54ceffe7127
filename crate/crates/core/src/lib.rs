//! Dynamic hand-gesture recognition from landmark recordings.
//!
//! The pipeline reduces every video of 21 hand landmarks to a 21×3 matrix of
//! per-landmark coordinate variances, fits a Gaussian mixture to the stacked
//! rows by Expectation-Maximization, labels each component with the gesture
//! most of its training rows came from, and classifies new videos by letting
//! each landmark row vote for its most probable component.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, which is what the file formats use.

#![allow(clippy::needless_range_loop)]

pub mod classifier;
pub mod error;
pub mod features;
pub mod gmm;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Scalar;

pub type LandmarkFrame = features::LandmarkFrame<f64>;
pub type GestureVideo = features::GestureVideo<f64>;
pub type FeatureMatrix = features::FeatureMatrix<f64>;
pub type NormalizedFeatures = features::NormalizedFeatures<f64>;
pub type NormalizationStats = features::NormalizationStats<f64>;
pub type GaussianComponent = gmm::GaussianComponent<f64>;
pub type MixtureParams = gmm::MixtureParams<f64>;
pub type ResponsibilityMatrix = gmm::ResponsibilityMatrix<f64>;
pub type EmConfig = gmm::EmConfig<f64>;
pub type EmTrace = gmm::EmTrace<f64>;
pub type ClusterLabelMap = classifier::ClusterLabelMap<f64>;
pub type ClassificationResult = classifier::ClassificationResult<f64>;
pub type SilhouetteReport = metrics::SilhouetteReport<f64>;
pub type GestureModel = model::GestureModel<f64>;

/// Single-precision variants.
pub type MixtureParams32 = gmm::MixtureParams<f32>;
pub type EmConfig32 = gmm::EmConfig<f32>;
pub type FeatureMatrix32 = features::FeatureMatrix<f32>;
