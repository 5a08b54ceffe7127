//! Silhouette score of a hard clustering.

use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteReport<T> {
    /// Mean of `per_point`.
    pub overall: T,
    pub per_point: Vec<T>,
    /// `(cluster, mean silhouette)` for every cluster with at least one point, by index.
    pub per_cluster_mean: Vec<(usize, T)>,
}

impl<T: Scalar> SilhouetteReport<T> {
    /// `key=value` block: overall score, point count, then one line per cluster.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "silhouette.overall={:.6}\nsilhouette.points={}\n",
            self.overall,
            self.per_point.len()
        );
        for (c, m) in &self.per_cluster_mean {
            s.push_str(&format!("silhouette.cluster.{c}={m:.6}\n"));
        }
        s
    }
}

/// Euclidean silhouette: `s(i) = (b - a) / max(a, b)` where `a` is the mean
/// distance to the rest of i's cluster and `b` the smallest mean distance to
/// another cluster. Points in singleton clusters score 0.
pub fn silhouette<T: Scalar>(data: &[Vec3<T>], assignment: &[usize]) -> Result<SilhouetteReport<T>> {
    if data.len() != assignment.len() {
        return Err(Error::InvalidInput(format!(
            "{} points but {} assignments",
            data.len(),
            assignment.len()
        )));
    }
    if data.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "silhouette needs at least 3 points, got {}",
            data.len()
        )));
    }
    if let Some(i) = data.iter().position(|x| !linalg::all_finite(x)) {
        return Err(Error::InvalidInput(format!("point {i} is not finite")));
    }
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &c in assignment {
        sizes[c] += 1;
    }
    let present = sizes.iter().filter(|&&s| s > 0).count();
    if present < 2 {
        return Err(Error::DegenerateInput(format!(
            "silhouette needs at least 2 clusters, found {present}"
        )));
    }

    // sums[i * k + c] = total distance from point i to the members of cluster c
    let n = data.len();
    let mut sums = vec![T::zero(); n * k];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = linalg::dist(&data[i], &data[j]);
            sums[i * k + assignment[j]] += d;
            sums[j * k + assignment[i]] += d;
        }
    }

    let mut per_point = Vec::with_capacity(n);
    for (i, &own) in assignment.iter().enumerate() {
        if sizes[own] == 1 {
            per_point.push(T::zero());
            continue;
        }
        let row = &sums[i * k..(i + 1) * k];
        let a = row[own] / T::from_usize_lossy(sizes[own] - 1);
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| row[c] / T::from_usize_lossy(sizes[c]))
            .fold(T::infinity(), T::min);
        let denom = a.max(b);
        per_point.push(if denom > T::zero() { (b - a) / denom } else { T::zero() });
    }

    let overall = per_point.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let mut cluster_sum = vec![T::zero(); k];
    for (&s, &c) in per_point.iter().zip(assignment) {
        cluster_sum[c] += s;
    }
    let per_cluster_mean = (0..k)
        .filter(|&c| sizes[c] > 0)
        .map(|c| (c, cluster_sum[c] / T::from_usize_lossy(sizes[c])))
        .collect();
    Ok(SilhouetteReport {
        overall,
        per_point,
        per_cluster_mean,
    })
}
