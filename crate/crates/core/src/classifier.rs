//! Cluster-to-gesture labelling and per-landmark voting classification.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::features::{apply_normalization, FeatureMatrix, NormalizationStats, NormalizedFeatures, LANDMARKS};
use crate::gmm::{argmax_posterior, MixtureParams};
use crate::linalg::Vec3;
use crate::scalar::{log_sum_exp, Scalar};

/// Gesture label attached to every mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabelMap<T> {
    labels: Vec<String>,
    confidence: Vec<T>,
}

impl<T: Scalar> ClusterLabelMap<T> {
    pub fn new(labels: Vec<String>, confidence: Vec<T>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invariant("label_map", "must cover at least one cluster"));
        }
        if labels.len() != confidence.len() {
            return Err(Error::invariant(
                "label_map.confidence",
                format!("{} confidences for {} clusters", confidence.len(), labels.len()),
            ));
        }
        for (k, l) in labels.iter().enumerate() {
            validate_label(l).map_err(|r| Error::invariant(format!("label_map[{k}]"), r))?;
        }
        for (k, &c) in confidence.iter().enumerate() {
            if !(c >= T::zero() && c <= T::one()) {
                return Err(Error::invariant(
                    format!("label_map.confidence[{k}]"),
                    format!("{c} outside [0, 1]"),
                ));
            }
        }
        Ok(Self { labels, confidence })
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, cluster: usize) -> &str {
        &self.labels[cluster]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn confidence(&self) -> &[T] {
        &self.confidence
    }

    /// Distinct labels in lexicographic order; the column order of result records.
    pub fn distinct_labels(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::gmm::check_permutation(perm, self.k())?;
        Ok(Self {
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            confidence: perm.iter().map(|&p| self.confidence[p]).collect(),
        })
    }
}

/// Labels end up in comma-separated records and `key=value` files.
pub(crate) fn validate_label(l: &str) -> std::result::Result<(), String> {
    if l.is_empty() {
        return Err("label is empty".into());
    }
    if l.contains([',', '\n', '\r', '=']) || l.trim() != l {
        return Err(format!("label `{l}` contains a separator or surrounding whitespace"));
    }
    Ok(())
}

/// Assigns each training row to its most probable cluster and labels every
/// cluster by majority vote of those rows. Majority ties go to the
/// lexicographically smallest label.
pub fn build_label_map<T: Scalar>(
    train: &[NormalizedFeatures<T>],
    params: &MixtureParams<T>,
) -> Result<ClusterLabelMap<T>> {
    let k = params.k();
    let mut tallies: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); k];
    for fm in train {
        let label = fm
            .label()
            .ok_or_else(|| Error::InvalidInput(format!("training video `{}` has no label", fm.source_id())))?;
        for row in fm.rows() {
            let (c, _) = classify_row(row, params)?;
            *tallies[c].entry(label).or_default() += 1;
        }
    }
    let mut labels = Vec::with_capacity(k);
    let mut confidence = Vec::with_capacity(k);
    for (c, t) in tallies.iter().enumerate() {
        let total: usize = t.values().sum();
        if total == 0 {
            return Err(Error::DegenerateInput(format!(
                "cluster {c} received no training rows; cannot attach a gesture label"
            )));
        }
        // BTreeMap iterates in label order, so `>` keeps the smallest label on ties.
        let (best, count) = t
            .iter()
            .fold(("", 0usize), |acc, (&l, &n)| if n > acc.1 { (l, n) } else { acc });
        labels.push(best.to_string());
        confidence.push(T::from_usize_lossy(count) / T::from_usize_lossy(total));
    }
    ClusterLabelMap::new(labels, confidence)
}

/// Posterior over clusters for a single normalized feature row.
pub fn row_posteriors<T: Scalar>(row: &Vec3<T>, params: &MixtureParams<T>) -> Result<Vec<T>> {
    if !row.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("feature row is not finite".into()));
    }
    let mut buf = vec![T::zero(); params.k()];
    params.weighted_log_densities(row, &mut buf);
    let lse = log_sum_exp(&buf);
    if !lse.is_finite() {
        return Err(Error::Numerical(format!("mixture log density {lse} at feature row")));
    }
    for v in &mut buf {
        *v = (*v - lse).exp();
    }
    Ok(buf)
}

/// Most probable cluster for one normalized row (ties to the lowest index).
pub fn classify_row<T: Scalar>(row: &Vec3<T>, params: &MixtureParams<T>) -> Result<(usize, T)> {
    row_posteriors(row, params).map(|p| argmax_posterior(&p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult<T> {
    pub source_id: String,
    /// Winning cluster and its posterior for each landmark row.
    pub votes: Vec<(usize, T)>,
    /// Vote tally per distinct gesture label, in label order.
    pub counts: Vec<(String, usize)>,
    pub winner: String,
    pub margin: usize,
}

impl<T: Scalar> ClassificationResult<T> {
    /// `source_id,winner,margin,count_1,...,count_K`.
    pub fn record(&self) -> String {
        let mut s = format!("{},{},{}", self.source_id, self.winner, self.margin);
        for (_, c) in &self.counts {
            s.push(',');
            s.push_str(&c.to_string());
        }
        s
    }

    pub fn count_of(&self, label: &str) -> usize {
        self.counts.iter().find(|(l, _)| l == label).map_or(0, |(_, c)| *c)
    }
}

/// Header line matching [`ClassificationResult::record`].
pub fn record_header<T: Scalar>(map: &ClusterLabelMap<T>) -> String {
    let mut s = String::from("source_id,winner,margin");
    for l in map.distinct_labels() {
        s.push_str(",count_");
        s.push_str(l);
    }
    s
}

/// Tallies per-row votes under the label map. The winner has the most votes;
/// ties go to the lexicographically smallest label.
pub fn tally_votes<T: Scalar>(
    source_id: impl Into<String>,
    votes: Vec<(usize, T)>,
    map: &ClusterLabelMap<T>,
) -> Result<ClassificationResult<T>> {
    let mut counts: Vec<(String, usize)> = map.distinct_labels().into_iter().map(|l| (l.to_string(), 0)).collect();
    for &(c, _) in &votes {
        if c >= map.k() {
            return Err(Error::InvalidInput(format!(
                "vote for cluster {c} but the label map has {} clusters",
                map.k()
            )));
        }
        let label = map.label(c);
        let slot = counts
            .binary_search_by(|(l, _)| l.as_str().cmp(label))
            .expect("label present in distinct set");
        counts[slot].1 += 1;
    }
    let mut ranked: Vec<&(String, usize)> = counts.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let winner = ranked[0].0.clone();
    let margin = ranked[0].1 - ranked.get(1).map_or(0, |r| r.1);
    Ok(ClassificationResult {
        source_id: source_id.into(),
        votes,
        counts,
        winner,
        margin,
    })
}

/// Classifies already-normalized features by per-landmark voting.
pub fn classify_normalized<T: Scalar>(
    features: &NormalizedFeatures<T>,
    params: &MixtureParams<T>,
    map: &ClusterLabelMap<T>,
) -> Result<ClassificationResult<T>> {
    if map.k() != params.k() {
        return Err(Error::InvalidInput(format!(
            "label map covers {} clusters, model has {}",
            map.k(),
            params.k()
        )));
    }
    let votes = features
        .rows()
        .iter()
        .map(|r| classify_row(r, params))
        .collect::<Result<Vec<_>>>()?;
    debug_assert_eq!(votes.len(), LANDMARKS);
    tally_votes(features.source_id(), votes, map)
}

/// Normalizes raw features with the training statistics and classifies them.
pub fn classify_video<T: Scalar>(
    features: &FeatureMatrix<T>,
    params: &MixtureParams<T>,
    map: &ClusterLabelMap<T>,
    stats: &NormalizationStats<T>,
) -> Result<ClassificationResult<T>> {
    classify_normalized(&apply_normalization(features, stats), params, map)
}
