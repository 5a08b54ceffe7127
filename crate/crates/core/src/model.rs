//! Trained gesture model and the train / evaluate pipeline around it.

use crate::classifier::{build_label_map, classify_normalized, classify_row, ClassificationResult, ClusterLabelMap};
use crate::error::{Error, Result};
use crate::features::{apply_normalization, fit_normalization, FeatureMatrix, NormalizationStats, NormalizedFeatures};
use crate::gmm::{fit, CovarianceMode, EmConfig, FitResult, MixtureParams};
use crate::linalg::Vec3;
use crate::metrics::{silhouette, SilhouetteReport};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta<T> {
    pub seed: u64,
    pub tol: T,
    pub iterations: usize,
    pub final_log_likelihood: T,
    pub silhouette: T,
}

/// Everything needed to classify new videos: mixture, normalization and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureModel<T> {
    pub covariance_mode: CovarianceMode,
    pub params: MixtureParams<T>,
    pub stats: NormalizationStats<T>,
    pub label_map: ClusterLabelMap<T>,
    pub meta: TrainingMeta<T>,
}

impl<T: Scalar> GestureModel<T> {
    pub fn new(
        covariance_mode: CovarianceMode,
        params: MixtureParams<T>,
        stats: NormalizationStats<T>,
        label_map: ClusterLabelMap<T>,
        meta: TrainingMeta<T>,
    ) -> Result<Self> {
        if label_map.k() != params.k() {
            return Err(Error::invariant(
                "label_map",
                format!("{} labels for {} components", label_map.k(), params.k()),
            ));
        }
        if covariance_mode == CovarianceMode::Diagonal {
            for (k, c) in params.components().iter().enumerate() {
                let m = c.covariance();
                if m[0][1] != T::zero() || m[0][2] != T::zero() || m[1][2] != T::zero() {
                    return Err(Error::invariant(
                        format!("component[{k}].covariance"),
                        "off-diagonal entries in a diagonal-covariance model",
                    ));
                }
            }
        }
        Ok(Self {
            covariance_mode,
            params,
            stats,
            label_map,
            meta,
        })
    }

    pub fn k(&self) -> usize {
        self.params.k()
    }

    pub fn normalize(&self, features: &FeatureMatrix<T>) -> NormalizedFeatures<T> {
        apply_normalization(features, &self.stats)
    }

    pub fn classify(&self, features: &FeatureMatrix<T>) -> Result<ClassificationResult<T>> {
        classify_normalized(&self.normalize(features), &self.params, &self.label_map)
    }
}

pub struct TrainOutput<T> {
    pub model: GestureModel<T>,
    pub fit: FitResult<T>,
    /// Stacked normalized training rows, video-major.
    pub rows: Vec<Vec3<T>>,
    /// Hard cluster assignment of every row in `rows`.
    pub assignment: Vec<usize>,
    pub silhouette: SilhouetteReport<T>,
}

pub fn stack_rows<T: Scalar>(features: &[NormalizedFeatures<T>]) -> Vec<Vec3<T>> {
    features.iter().flat_map(|f| f.rows().iter().copied()).collect()
}

/// Fits normalization and the mixture on labeled features, labels the
/// clusters and scores the training clustering.
pub fn train<T: Scalar>(features: &[FeatureMatrix<T>], config: &EmConfig<T>) -> Result<TrainOutput<T>> {
    if features.is_empty() {
        return Err(Error::InvalidInput("no training videos".into()));
    }
    if let Some(f) = features.iter().find(|f| f.label().is_none()) {
        return Err(Error::InvalidInput(format!(
            "training video `{}` has no label",
            f.source_id()
        )));
    }
    let stats = fit_normalization(features)?;
    let normalized: Vec<_> = features.iter().map(|f| apply_normalization(f, &stats)).collect();
    let rows = stack_rows(&normalized);
    let fit = fit(&rows, config)?;
    let label_map = build_label_map(&normalized, &fit.params)?;
    let assignment = fit.responsibilities.argmax();
    let silhouette = silhouette(&rows, &assignment)?;
    let meta = TrainingMeta {
        seed: config.seed,
        tol: config.tol,
        iterations: fit.trace.iterations,
        final_log_likelihood: fit.trace.final_log_likelihood(),
        silhouette: silhouette.overall,
    };
    let model = GestureModel::new(config.covariance_mode, fit.params.clone(), stats, label_map, meta)?;
    Ok(TrainOutput {
        model,
        fit,
        rows,
        assignment,
        silhouette,
    })
}

pub struct Evaluation<T> {
    pub results: Vec<ClassificationResult<T>>,
    /// `(correct, labeled)` over videos that carry a label.
    pub correct: usize,
    pub labeled: usize,
    /// Silhouette of the argmax clustering of all rows, when it is defined.
    pub silhouette: Option<SilhouetteReport<T>>,
}

impl<T: Scalar> Evaluation<T> {
    pub fn accuracy(&self) -> Option<f64> {
        (self.labeled > 0).then(|| self.correct as f64 / self.labeled as f64)
    }
}

/// Classifies every video and, where labels exist, scores accuracy.
pub fn evaluate<T: Scalar>(model: &GestureModel<T>, features: &[FeatureMatrix<T>]) -> Result<Evaluation<T>> {
    let mut results = Vec::with_capacity(features.len());
    let mut correct = 0;
    let mut labeled = 0;
    let mut rows = Vec::with_capacity(features.len() * crate::features::LANDMARKS);
    let mut assignment = Vec::with_capacity(rows.capacity());
    for f in features {
        let r = model.classify(f)?;
        if let Some(l) = f.label() {
            labeled += 1;
            if l == r.winner {
                correct += 1;
            }
        }
        let n = model.normalize(f);
        rows.extend(n.rows().iter().copied());
        assignment.extend(r.votes.iter().map(|v| v.0));
        results.push(r);
    }
    let silhouette = silhouette(&rows, &assignment).ok();
    Ok(Evaluation {
        results,
        correct,
        labeled,
        silhouette,
    })
}

/// Hard assignment of normalized rows under a model.
pub fn assign_rows<T: Scalar>(rows: &[Vec3<T>], params: &MixtureParams<T>) -> Result<Vec<usize>> {
    rows.iter().map(|r| classify_row(r, params).map(|c| c.0)).collect()
}
