//! Landmark recordings and their reduction to per-landmark variance features.
//!
//! A video is a sequence of frames, each holding the 21 tracked hand
//! landmarks. The motion of each landmark over the whole video is summarized
//! by the population variance of its x, y and z coordinates, giving a 21×3
//! [`FeatureMatrix`]. The rows of these matrices are the data points the
//! mixture model is trained on.

use crate::error::{Error, Result};
use crate::linalg::{Vec3, DIM};
use crate::scalar::Scalar;

/// Number of tracked landmarks per hand.
pub const LANDMARKS: usize = 21;

/// Smallest admissible per-column standard deviation after normalization.
pub const STD_FLOOR: f64 = 1e-12;

/// 21 rows of three values, one row per landmark.
pub type FeatureRows<T> = [Vec3<T>; LANDMARKS];

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame<T> {
    points: FeatureRows<T>,
}

impl<T: Scalar> LandmarkFrame<T> {
    pub fn new(points: FeatureRows<T>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::invariant(format!("landmark[{i}]"), "coordinates must be finite"));
            }
        }
        Ok(Self { points })
    }

    /// Builds a frame from a flat `x0,y0,z0,...,x20,y20,z20` slice.
    pub fn from_flat(values: &[T]) -> Result<Self> {
        if values.len() != LANDMARKS * DIM {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates per frame, got {}",
                LANDMARKS * DIM,
                values.len()
            )));
        }
        let mut points = [[T::zero(); DIM]; LANDMARKS];
        for (i, p) in points.iter_mut().enumerate() {
            p.copy_from_slice(&values[i * DIM..(i + 1) * DIM]);
        }
        Self::new(points)
    }

    pub fn points(&self) -> &FeatureRows<T> {
        &self.points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureVideo<T> {
    frames: Vec<LandmarkFrame<T>>,
    source_id: String,
    label: Option<String>,
}

impl<T: Scalar> GestureVideo<T> {
    pub fn new(frames: Vec<LandmarkFrame<T>>, source_id: impl Into<String>, label: Option<String>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::DegenerateInput(format!(
                "a video needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        Ok(Self {
            frames,
            source_id: source_id.into(),
            label,
        })
    }

    pub fn frames(&self) -> &[LandmarkFrame<T>] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Applies `f` to every coordinate, keeping metadata.
    pub fn map_coords(&self, f: impl Fn(usize, usize, T) -> T) -> Result<Self> {
        let frames = self
            .frames
            .iter()
            .map(|fr| {
                let mut pts = fr.points;
                for (i, p) in pts.iter_mut().enumerate() {
                    for (c, v) in p.iter_mut().enumerate() {
                        *v = f(i, c, *v);
                    }
                }
                LandmarkFrame::new(pts)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(frames, self.source_id.clone(), self.label.clone())
    }
}

/// Per-landmark coordinate variances of one video.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    rows: FeatureRows<T>,
    source_id: String,
    label: Option<String>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(rows: FeatureRows<T>, source_id: impl Into<String>, label: Option<String>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            for (c, v) in r.iter().enumerate() {
                if !v.is_finite() || *v < T::zero() {
                    return Err(Error::invariant(
                        format!("features[{i}][{c}]"),
                        format!("variance must be finite and non-negative, got {v}"),
                    ));
                }
            }
        }
        Ok(Self {
            rows,
            source_id: source_id.into(),
            label,
        })
    }

    pub fn rows(&self) -> &FeatureRows<T> {
        &self.rows
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }
}

/// Feature matrix after z-scoring; entries may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFeatures<T> {
    rows: FeatureRows<T>,
    source_id: String,
    label: Option<String>,
}

impl<T: Scalar> NormalizedFeatures<T> {
    pub fn rows(&self) -> &FeatureRows<T> {
        &self.rows
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Maps the rows back to the raw variance scale.
    pub fn denormalize(&self, stats: &NormalizationStats<T>) -> FeatureRows<T> {
        let mut rows = self.rows;
        for r in &mut rows {
            for c in 0..DIM {
                r[c] = r[c] * stats.std[c] + stats.mean[c];
            }
        }
        rows
    }
}

/// Column-wise z-score parameters fitted on a training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationStats<T> {
    mean: Vec3<T>,
    std: Vec3<T>,
}

impl<T: Scalar> NormalizationStats<T> {
    pub fn new(mean: Vec3<T>, std: Vec3<T>) -> Result<Self> {
        for c in 0..DIM {
            if !mean[c].is_finite() {
                return Err(Error::invariant(format!("normalization.mean[{c}]"), "must be finite"));
            }
            if !std[c].is_finite() || std[c] <= T::zero() {
                return Err(Error::invariant(
                    format!("normalization.std[{c}]"),
                    format!("must be finite and strictly positive, got {}", std[c]),
                ));
            }
        }
        Ok(Self { mean, std })
    }

    pub fn identity() -> Self {
        Self {
            mean: [T::zero(); DIM],
            std: [T::one(); DIM],
        }
    }

    pub fn mean(&self) -> &Vec3<T> {
        &self.mean
    }

    pub fn std(&self) -> &Vec3<T> {
        &self.std
    }

    pub fn normalize_row(&self, row: &Vec3<T>) -> Vec3<T> {
        let mut out = *row;
        for c in 0..DIM {
            out[c] = (out[c] - self.mean[c]) / self.std[c];
        }
        out
    }
}

/// Population variance (divisor = frame count) of every landmark coordinate.
pub fn compute_variances<T: Scalar>(video: &GestureVideo<T>) -> Result<FeatureMatrix<T>> {
    if video.frame_count() < 2 {
        return Err(Error::DegenerateInput(format!(
            "a video needs at least 2 frames, got {}",
            video.frame_count()
        )));
    }
    // Welford's update; numerically stable under large constant offsets.
    let mut mean = [[T::zero(); DIM]; LANDMARKS];
    let mut m2 = [[T::zero(); DIM]; LANDMARKS];
    for (t, frame) in video.frames().iter().enumerate() {
        let count = T::from_usize_lossy(t + 1);
        for (i, p) in frame.points().iter().enumerate() {
            for c in 0..DIM {
                let delta = p[c] - mean[i][c];
                mean[i][c] += delta / count;
                m2[i][c] += delta * (p[c] - mean[i][c]);
            }
        }
    }
    let n = T::from_usize_lossy(video.frame_count());
    let mut rows = [[T::zero(); DIM]; LANDMARKS];
    for i in 0..LANDMARKS {
        for c in 0..DIM {
            rows[i][c] = (m2[i][c] / n).max(T::zero());
        }
    }
    FeatureMatrix::new(rows, video.source_id(), video.label.clone())
}

/// Column-wise mean and population standard deviation over all stacked rows.
pub fn fit_normalization<T: Scalar>(features: &[FeatureMatrix<T>]) -> Result<NormalizationStats<T>> {
    if features.is_empty() {
        return Err(Error::InvalidInput(
            "cannot fit normalization on an empty feature set".into(),
        ));
    }
    let n = T::from_usize_lossy(features.len() * LANDMARKS);
    let mut mean = [T::zero(); DIM];
    for fm in features {
        for r in fm.rows() {
            for c in 0..DIM {
                mean[c] += r[c];
            }
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = [T::zero(); DIM];
    for fm in features {
        for r in fm.rows() {
            for c in 0..DIM {
                let d = r[c] - mean[c];
                var[c] += d * d;
            }
        }
    }
    let floor = T::lit(STD_FLOOR);
    let std = var.map(|v| (v / n).sqrt().max(floor));
    NormalizationStats::new(mean, std)
}

pub fn apply_normalization<T: Scalar>(
    features: &FeatureMatrix<T>,
    stats: &NormalizationStats<T>,
) -> NormalizedFeatures<T> {
    let mut rows = features.rows;
    for r in &mut rows {
        *r = stats.normalize_row(r);
    }
    NormalizedFeatures {
        rows,
        source_id: features.source_id.clone(),
        label: features.label.clone(),
    }
}
