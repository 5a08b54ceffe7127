//! Expectation-Maximization driver: seeding, the E/M loop, convergence and
//! empty-component recovery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gmm::component::GaussianComponent;
use crate::gmm::mixture::{
    expectation, m_step_raw, normalized_weights, CovarianceMode, MStepOptions, MixtureParams, ResponsibilityMatrix,
};
use crate::linalg::{self, Mat3, Vec3};
use crate::scalar::Scalar;

/// Upper bound on empty-component reseeds within one fit.
pub const MAX_REINITIALIZATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig<T> {
    pub k: usize,
    pub max_iters: usize,
    /// Absolute log-likelihood change below which the fit is converged.
    pub tol: T,
    /// Ridge added to every covariance diagonal.
    pub reg_eps: T,
    pub seed: u64,
    pub covariance_mode: CovarianceMode,
}

impl<T: Scalar> EmConfig<T> {
    pub fn new(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= T::zero() {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if !self.reg_eps.is_finite() || self.reg_eps < T::zero() {
            return Err(Error::InvalidInput(format!(
                "reg_eps must be finite and non-negative, got {}",
                self.reg_eps
            )));
        }
        Ok(())
    }

    fn m_step_options(&self) -> MStepOptions<T> {
        MStepOptions {
            reg_eps: self.reg_eps,
            mode: self.covariance_mode,
        }
    }
}

impl<T: Scalar> Default for EmConfig<T> {
    fn default() -> Self {
        Self {
            k: 4,
            max_iters: 500,
            tol: T::lit(1e-6),
            reg_eps: T::lit(1e-6),
            seed: 0,
            covariance_mode: CovarianceMode::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace<T> {
    /// Log-likelihood of the initial parameters followed by one value per iteration.
    pub log_likelihoods: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Iterations whose M-step had to reseed an empty component.
    pub reinitializations: Vec<usize>,
}

impl<T: Scalar> EmTrace<T> {
    pub fn final_log_likelihood(&self) -> T {
        *self.log_likelihoods.last().expect("trace holds the initial value")
    }

    /// Largest drop between consecutive entries (zero for a monotone trace).
    pub fn max_decrease(&self) -> T {
        self.log_likelihoods
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone)]
pub struct FitResult<T> {
    pub params: MixtureParams<T>,
    pub responsibilities: ResponsibilityMatrix<T>,
    pub trace: EmTrace<T>,
}

fn regularized_global_covariance<T: Scalar>(data: &[Vec3<T>], config: &EmConfig<T>) -> Mat3<T> {
    let (_, mut cov) = linalg::mean_and_covariance(data);
    if config.covariance_mode == CovarianceMode::Diagonal {
        linalg::keep_diagonal(&mut cov);
    }
    linalg::add_ridge(&mut cov, config.reg_eps);
    cov
}

/// Seeds the means with k-means++ style D² sampling from a seeded RNG,
/// sets every covariance to the regularized global covariance and uses
/// uniform weights. `k = 1` uses the data centroid.
pub fn initialize<T: Scalar>(data: &[Vec3<T>], config: &EmConfig<T>) -> Result<MixtureParams<T>> {
    config.validate()?;
    if data.len() < config.k {
        return Err(Error::InvalidInput(format!(
            "{} data points cannot seed {} components",
            data.len(),
            config.k
        )));
    }
    if let Some(n) = data.iter().position(|x| !linalg::all_finite(x)) {
        return Err(Error::InvalidInput(format!("data point {n} is not finite")));
    }
    let cov = regularized_global_covariance(data, config);
    let means = if config.k == 1 {
        vec![linalg::mean_and_covariance(data).0]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        plus_plus_seeds(data, config.k, &mut rng)
    };
    let components = means
        .into_iter()
        .map(|m| GaussianComponent::new(m, cov))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Numerical(format!("global covariance unusable for seeding: {e}")))?;
    let k = T::from_usize_lossy(config.k);
    MixtureParams::new(components, vec![T::one() / k; config.k])
}

fn plus_plus_seeds<T: Scalar>(data: &[Vec3<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3<T>> {
    // greedy variant: several D²-sampled candidates per step, keep the one
    // that lowers the total squared distance the most
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut centers = Vec::with_capacity(k);
    centers.push(data[rng.random_range(0..data.len())]);
    let mut d2: Vec<T> = data.iter().map(|x| linalg::dist_sq(x, &centers[0])).collect();
    while centers.len() < k {
        let total: T = d2.iter().copied().sum();
        let mut best: Option<(T, usize, Vec<T>)> = None;
        for _ in 0..trials {
            let pick = sample_by_weight(&d2, total, rng);
            let updated: Vec<T> = d2
                .iter()
                .zip(data)
                .map(|(&d, x)| d.min(linalg::dist_sq(x, &data[pick])))
                .collect();
            let potential: T = updated.iter().copied().sum();
            if best.as_ref().is_none_or(|b| potential < b.0) {
                best = Some((potential, pick, updated));
            }
        }
        let (_, pick, updated) = best.expect("at least one trial");
        d2 = updated;
        centers.push(data[pick]);
    }
    centers
}

/// Index drawn with probability proportional to `weights`; uniform when all are zero.
fn sample_by_weight<T: Scalar>(weights: &[T], total: T, rng: &mut ChaCha8Rng) -> usize {
    if !(total > T::zero() && total.is_finite()) {
        return rng.random_range(0..weights.len());
    }
    let target = T::lit(rng.random::<f64>()) * total;
    let mut acc = T::zero();
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if w > T::zero() && acc > target {
            return i;
        }
    }
    // rounding can leave target at the very end of the cumulative sum
    weights.iter().rposition(|&w| w > T::zero()).unwrap_or(0)
}

/// Runs EM from [`initialize`] until the log-likelihood changes by less than
/// `tol` or `max_iters` iterations have run.
pub fn fit<T: Scalar>(data: &[Vec3<T>], config: &EmConfig<T>) -> Result<FitResult<T>> {
    let params = initialize(data, config)?;
    fit_from(data, params, config)
}

/// EM loop starting from caller-supplied parameters.
pub fn fit_from<T: Scalar>(
    data: &[Vec3<T>],
    mut params: MixtureParams<T>,
    config: &EmConfig<T>,
) -> Result<FitResult<T>> {
    config.validate()?;
    let opts = config.m_step_options();
    let (mut resp, mut ll) = expectation(data, &params)?;
    let mut trace = EmTrace {
        log_likelihoods: vec![ll],
        iterations: 0,
        converged: false,
        reinitializations: Vec::new(),
    };
    for iter in 1..=config.max_iters {
        let raw = m_step_raw(data, &resp, &opts)?;
        params = if raw.components.iter().any(Option::is_none) {
            trace.reinitializations.push(iter);
            if trace.reinitializations.len() > MAX_REINITIALIZATIONS {
                let empty: Vec<usize> = raw
                    .components
                    .iter()
                    .enumerate()
                    .filter_map(|(j, c)| c.is_none().then_some(j))
                    .collect();
                return Err(Error::Numerical(format!(
                    "components {empty:?} stayed empty after {MAX_REINITIALIZATIONS} reinitializations \
                     (iteration {iter}, n = {}, k = {})",
                    data.len(),
                    config.k
                )));
            }
            reseed_empty(data, &params, raw.components, &raw.counts, config)?
        } else {
            let n = T::from_usize_lossy(data.len());
            let weights = normalized_weights(raw.counts.iter().map(|&c| c / n).collect());
            MixtureParams::new(raw.components.into_iter().flatten().collect(), weights)?
        };
        let (next_resp, next_ll) = expectation(data, &params)?;
        trace.log_likelihoods.push(next_ll);
        trace.iterations = iter;
        resp = next_resp;
        let delta = (next_ll - ll).abs();
        ll = next_ll;
        if delta < config.tol || config.tol == T::infinity() {
            trace.converged = true;
            break;
        }
    }
    Ok(FitResult {
        params,
        responsibilities: resp,
        trace,
    })
}

/// Moves every empty component onto the data point the current mixture
/// explains worst, with the global covariance and a one-point weight.
fn reseed_empty<T: Scalar>(
    data: &[Vec3<T>],
    previous: &MixtureParams<T>,
    updated: Vec<Option<GaussianComponent<T>>>,
    counts: &[T],
    config: &EmConfig<T>,
) -> Result<MixtureParams<T>> {
    let cov = regularized_global_covariance(data, config);
    let mut order: Vec<(usize, T)> = data
        .iter()
        .enumerate()
        .map(|(i, x)| (i, previous.log_density(x)))
        .collect();
    order.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    let mut worst = order.into_iter().map(|(i, _)| i);
    let one_point = T::one();
    let mut components = Vec::with_capacity(updated.len());
    let mut weights = Vec::with_capacity(updated.len());
    for (c, &nk) in updated.into_iter().zip(counts) {
        match c {
            Some(c) => {
                components.push(c);
                weights.push(nk);
            }
            None => {
                let at = worst.next().expect("at least k data points");
                components.push(
                    GaussianComponent::new(data[at], cov)
                        .map_err(|e| Error::Numerical(format!("reseeding failed: {e}")))?,
                );
                weights.push(one_point);
            }
        }
    }
    MixtureParams::new(components, normalized_weights(weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmm::mixture::log_likelihood;
    use rand_distr::{Distribution, Normal};

    fn blob(center: Vec3<f64>, sd: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3<f64>> {
        let nd = Normal::new(0.0, sd).unwrap();
        (0..n)
            .map(|_| {
                [
                    center[0] + nd.sample(rng),
                    center[1] + nd.sample(rng),
                    center[2] + nd.sample(rng),
                ]
            })
            .collect()
    }

    #[test]
    fn k_one_seeds_at_centroid() {
        let data = [[0.0, 0.0, 0.0], [2.0, 4.0, 0.0], [1.0, 2.0, 3.0]];
        let p = initialize(&data, &EmConfig::new(1)).unwrap();
        assert_eq!(*p.components()[0].mean(), [1.0, 2.0, 1.0]);
        assert_eq!(p.weights(), &[1.0]);
    }

    #[test]
    fn seeding_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = blob([0.0; 3], 1.0, 50, &mut rng);
        let cfg = EmConfig {
            seed: 17,
            ..EmConfig::new(3)
        };
        assert_eq!(initialize(&data, &cfg).unwrap(), initialize(&data, &cfg).unwrap());
    }

    #[test]
    fn four_far_points_are_each_picked_once() {
        let data = [[0.0, 0.0, 0.0], [100.0, 0.0, 0.0], [0.0, 100.0, 0.0], [0.0, 0.0, 100.0]];
        for seed in 0..20 {
            let p = initialize(
                &data,
                &EmConfig {
                    seed,
                    ..EmConfig::new(4)
                },
            )
            .unwrap();
            let mut means: Vec<_> = p.components().iter().map(|c| *c.mean()).collect();
            means.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut want = data.to_vec();
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(means, want);
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        let data = [[0.0; 3], [1.0; 3]];
        assert!(initialize(&data, &EmConfig::new(3)).is_err());
        assert!(fit(&data, &EmConfig::new(3)).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = EmConfig::<f64>::new(2);
        assert!(ok.validate().is_ok());
        assert!(EmConfig { tol: 0.0, ..ok }.validate().is_err());
        assert!(EmConfig { max_iters: 0, ..ok }.validate().is_err());
        assert!(EmConfig { reg_eps: -1.0, ..ok }.validate().is_err());
        assert!(EmConfig { k: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn infinite_tolerance_runs_one_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = blob([0.0; 3], 1.0, 40, &mut rng);
        let cfg = EmConfig {
            tol: f64::INFINITY,
            ..EmConfig::new(2)
        };
        let r = fit(&data, &cfg).unwrap();
        assert_eq!(r.trace.iterations, 1);
        assert_eq!(r.trace.log_likelihoods.len(), 2);
        assert!(r.trace.converged);
    }

    #[test]
    fn single_gaussian_recovers_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sd = 0.05;
        let data = blob([1.0, -2.0, 0.5], sd, 300, &mut rng);
        let r = fit(&data, &EmConfig::new(1)).unwrap();
        assert!(r.trace.converged);
        let (sample_mean, _) = linalg::mean_and_covariance(&data);
        let se = sd / (data.len() as f64).sqrt();
        for c in 0..3 {
            assert!((r.params.components()[0].mean()[c] - sample_mean[c]).abs() < 3.0 * se);
        }
    }

    #[test]
    fn trace_is_monotone_and_final_value_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut data = blob([0.0; 3], 1.0, 60, &mut rng);
        data.extend(blob([5.0, 5.0, 0.0], 0.7, 60, &mut rng));
        let r = fit(
            &data,
            &EmConfig {
                seed: 2,
                ..EmConfig::new(3)
            },
        )
        .unwrap();
        assert!(r.trace.max_decrease() <= 1e-9);
        let ll = log_likelihood(&data, &r.params).unwrap();
        assert!((ll - r.trace.final_log_likelihood()).abs() < 1e-9 * ll.abs().max(1.0));
        let sums = r.params.weights().iter().sum::<f64>();
        assert!((sums - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_components_are_reseeded() {
        // Two identical components on duplicated points: the second one is
        // starved once the first takes all mass through a zero weight.
        let data: Vec<Vec3<f64>> = (0..20).map(|i| [i as f64 * 0.1, 0.0, (i % 3) as f64]).collect();
        let cov = linalg::diag([1.0, 1.0, 1.0]);
        let params = MixtureParams::new(
            vec![
                GaussianComponent::new([1.0, 0.0, 1.0], cov).unwrap(),
                GaussianComponent::new([1.0, 0.0, 1.0], cov).unwrap(),
            ],
            vec![1.0, 0.0],
        )
        .unwrap();
        let r = fit_from(
            &data,
            params,
            &EmConfig {
                max_iters: 5,
                ..EmConfig::new(2)
            },
        )
        .unwrap();
        assert_eq!(r.trace.reinitializations.first(), Some(&1));
        assert!(r.params.weights()[1] > 0.0);
    }

    #[test]
    fn fit_is_bit_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut data = blob([0.0; 3], 1.0, 80, &mut rng);
        data.extend(blob([3.0, 0.0, 3.0], 1.0, 80, &mut rng));
        let cfg = EmConfig {
            seed: 8,
            ..EmConfig::new(4)
        };
        let a = fit(&data, &cfg).unwrap();
        let b = fit(&data, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn runs_in_single_precision() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut data64 = blob([0.0; 3], 1.0, 40, &mut rng);
        data64.extend(blob([6.0, 6.0, 0.0], 1.0, 40, &mut rng));
        let data: Vec<Vec3<f32>> = data64.iter().map(|p| p.map(|v| v as f32)).collect();
        let cfg = EmConfig {
            tol: 1e-4f32,
            reg_eps: 1e-4,
            ..EmConfig::new(2)
        };
        let r = fit(&data, &cfg).unwrap();
        let a = r.responsibilities.argmax();
        assert!(a[..40].iter().all(|&c| c == a[0]));
        assert!(a[40..].iter().all(|&c| c != a[0]));
        assert!(r.trace.max_decrease() <= 1e-3);
    }
}
