#![allow(dead_code, clippy::needless_range_loop)]

use gesture_gmm::gmm::GaussianComponent;
use gesture_gmm::linalg::{Mat3, Vec3};
use gesture_gmm::MixtureParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random SPD matrix A·Aᵀ + floor·I with entries of A in [-scale, scale].
pub fn random_spd(rng: &mut ChaCha8Rng, scale: f64, floor: f64) -> Mat3<f64> {
    let mut a = [[0.0; 3]; 3];
    for r in &mut a {
        for v in r.iter_mut() {
            *v = rng.random_range(-scale..scale);
        }
    }
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * a[j][k]).sum::<f64>();
        }
        m[i][i] += floor;
    }
    m
}

/// Draws from N(mean, cov) through a plain Cholesky factor.
pub fn sample_gaussian(rng: &mut ChaCha8Rng, mean: &Vec3<f64>, cov: &Mat3<f64>) -> Vec3<f64> {
    let l = cholesky(cov);
    let z = [normal(rng), normal(rng), normal(rng)];
    let mut x = *mean;
    for i in 0..3 {
        for j in 0..=i {
            x[i] += l[i][j] * z[j];
        }
    }
    x
}

pub fn cholesky(a: &Mat3<f64>) -> Mat3<f64> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][j] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Cofactor determinant and inverse.
pub fn det_inv(a: &Mat3<f64>) -> (f64, Mat3<f64>) {
    let c = |i: usize, j: usize| {
        let r: Vec<usize> = (0..3).filter(|&x| x != i).collect();
        let k: Vec<usize> = (0..3).filter(|&x| x != j).collect();
        let m = a[r[0]][k[0]] * a[r[1]][k[1]] - a[r[0]][k[1]] * a[r[1]][k[0]];
        if (i + j).is_multiple_of(2) {
            m
        } else {
            -m
        }
    };
    let det = (0..3).map(|j| a[0][j] * c(0, j)).sum::<f64>();
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[j][i] = c(i, j) / det;
        }
    }
    (det, inv)
}

/// Density from the textbook formula with a cofactor inverse.
pub fn naive_pdf(x: &Vec3<f64>, mean: &Vec3<f64>, cov: &Mat3<f64>) -> f64 {
    let (det, inv) = det_inv(cov);
    let d = [x[0] - mean[0], x[1] - mean[1], x[2] - mean[2]];
    let mut q = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            q += d[i] * inv[i][j] * d[j];
        }
    }
    (-0.5 * q).exp() / ((2.0 * std::f64::consts::PI).powi(3) * det).sqrt()
}

pub fn naive_log_likelihood(data: &[Vec3<f64>], params: &MixtureParams) -> f64 {
    data.iter()
        .map(|x| {
            params
                .components()
                .iter()
                .zip(params.weights())
                .map(|(c, w)| w * naive_pdf(x, c.mean(), c.covariance()))
                .sum::<f64>()
                .ln()
        })
        .sum()
}

/// Silhouette straight from the definition: per point, mean intra distance
/// and the smallest mean distance to another cluster.
pub fn brute_silhouette(data: &[Vec3<f64>], assignment: &[usize]) -> (f64, Vec<f64>) {
    let d =
        |a: &Vec3<f64>, b: &Vec3<f64>| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    let k = assignment.iter().max().unwrap() + 1;
    let mut s = Vec::with_capacity(data.len());
    for i in 0..data.len() {
        let own = assignment[i];
        let size = assignment.iter().filter(|&&c| c == own).count();
        if size == 1 {
            s.push(0.0);
            continue;
        }
        let mut a = 0.0;
        for j in 0..data.len() {
            if j != i && assignment[j] == own {
                a += d(&data[i], &data[j]);
            }
        }
        a /= (size - 1) as f64;
        let mut b = f64::INFINITY;
        for c in (0..k).filter(|&c| c != own) {
            let members: Vec<usize> = (0..data.len()).filter(|&j| assignment[j] == c).collect();
            if members.is_empty() {
                continue;
            }
            let m = members.iter().map(|&j| d(&data[i], &data[j])).sum::<f64>() / members.len() as f64;
            b = b.min(m);
        }
        s.push(if a.max(b) > 0.0 { (b - a) / a.max(b) } else { 0.0 });
    }
    let overall = s.iter().sum::<f64>() / s.len() as f64;
    (overall, s)
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Largest mean-coordinate error under the best matching of fitted to true means.
pub fn best_permutation_error(fitted: &[Vec3<f64>], truth: &[Vec3<f64>]) -> f64 {
    permutations(truth.len())
        .into_iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .flat_map(|(i, &j)| (0..3).map(move |c| (fitted[j][c] - truth[i][c]).abs()))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Four isotropic components with std `sigma`, means on the axes at distance `spacing`.
pub fn separated_mixture(
    seed: u64,
    per_component: usize,
    spacing: f64,
    sigma: f64,
) -> (Vec<Vec3<f64>>, Vec<Vec3<f64>>, Vec<usize>) {
    let mut r = rng(seed);
    let means: Vec<Vec3<f64>> = vec![
        [0.0, 0.0, 0.0],
        [spacing, 0.0, 0.0],
        [0.0, spacing, 0.0],
        [0.0, 0.0, spacing],
    ];
    let v = sigma * sigma;
    let cov = [[v, 0.0, 0.0], [0.0, v, 0.0], [0.0, 0.0, v]];
    let mut data = Vec::new();
    let mut truth = Vec::new();
    for (k, m) in means.iter().enumerate() {
        for _ in 0..per_component {
            data.push(sample_gaussian(&mut r, m, &cov));
            truth.push(k);
        }
    }
    (data, means, truth)
}

/// Random mixture data with K random blobs of random covariance.
pub fn random_blobs(seed: u64, n: usize, k: usize) -> Vec<Vec3<f64>> {
    let mut r = rng(seed);
    let centers: Vec<Vec3<f64>> = (0..k)
        .map(|_| {
            [
                r.random_range(-5.0..5.0),
                r.random_range(-5.0..5.0),
                r.random_range(-5.0..5.0),
            ]
        })
        .collect();
    let covs: Vec<Mat3<f64>> = (0..k).map(|_| random_spd(&mut r, 1.0, 0.05)).collect();
    (0..n)
        .map(|i| sample_gaussian(&mut r, &centers[i % k], &covs[i % k]))
        .collect()
}

pub fn component(mean: Vec3<f64>, cov: Mat3<f64>) -> GaussianComponent<f64> {
    GaussianComponent::new(mean, cov).unwrap()
}
