use crate::error::{Error, Result};
use crate::gmm::component::GaussianComponent;
use crate::linalg::{self, Mat3, Vec3, DIM};
use crate::scalar::{log_sum_exp, Scalar};

/// Below this effective count a component is considered empty.
pub const EMPTY_COMPONENT_MASS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceMode {
    #[default]
    Full,
    Diagonal,
}

impl CovarianceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CovarianceMode::Full => "full",
            CovarianceMode::Diagonal => "diag",
        }
    }
}

impl std::str::FromStr for CovarianceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(CovarianceMode::Full),
            "diag" | "diagonal" => Ok(CovarianceMode::Diagonal),
            other => Err(Error::InvalidInput(format!(
                "unknown covariance mode `{other}` (expected full or diag)"
            ))),
        }
    }
}

/// Component parameters together with their mixing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams<T> {
    components: Vec<GaussianComponent<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> MixtureParams<T> {
    pub fn new(components: Vec<GaussianComponent<T>>, weights: Vec<T>) -> Result<Self> {
        Self::with_tolerance(components, weights, T::check_tol())
    }

    /// Like [`MixtureParams::new`] with an explicit tolerance on the weight sum.
    pub fn with_tolerance(components: Vec<GaussianComponent<T>>, weights: Vec<T>, tol: T) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invariant("components", "at least one component is required"));
        }
        if components.len() != weights.len() {
            return Err(Error::invariant(
                "weights",
                format!("{} weights for {} components", weights.len(), components.len()),
            ));
        }
        for (k, &w) in weights.iter().enumerate() {
            if !(w >= T::zero() && w <= T::one()) {
                return Err(Error::invariant(format!("weights[{k}]"), format!("{w} outside [0, 1]")));
            }
        }
        let sum: T = weights.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            return Err(Error::invariant("weights", format!("sum to {sum}, expected 1")));
        }
        Ok(Self { components, weights })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[GaussianComponent<T>] {
        &self.components
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `ln(π_k) + ln N(x | μ_k, Σ_k)` for every component, written into `out`.
    pub fn weighted_log_densities(&self, x: &Vec3<T>, out: &mut [T]) {
        for (k, (c, &w)) in self.components.iter().zip(&self.weights).enumerate() {
            out[k] = if w > T::zero() {
                w.ln() + c.log_pdf_unchecked(x)
            } else {
                T::neg_infinity()
            };
        }
    }

    /// `ln Σ_k π_k N(x | μ_k, Σ_k)`.
    pub fn log_density(&self, x: &Vec3<T>) -> T {
        let mut buf = vec![T::zero(); self.k()];
        self.weighted_log_densities(x, &mut buf);
        log_sum_exp(&buf)
    }

    /// Returns a copy with the components reordered so that new index `i`
    /// holds old component `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.k())?;
        Ok(Self {
            components: perm.iter().map(|&p| self.components[p].clone()).collect(),
            weights: perm.iter().map(|&p| self.weights[p]).collect(),
        })
    }
}

pub(crate) fn check_permutation(perm: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    if perm.len() != k || !perm.iter().all(|&p| p < k && !std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidInput(format!("not a permutation of 0..{k}: {perm:?}")));
    }
    Ok(())
}

/// Posterior component probabilities, one row per data point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsibilityMatrix<T> {
    k: usize,
    entries: Vec<T>,
}

impl<T: Scalar> ResponsibilityMatrix<T> {
    /// Builds from row-major entries, checking range and row sums.
    pub fn from_rows(k: usize, entries: Vec<T>) -> Result<Self> {
        if k == 0 || !entries.len().is_multiple_of(k) {
            return Err(Error::invariant(
                "responsibilities",
                format!("{} entries do not form rows of width {k}", entries.len()),
            ));
        }
        for (n, row) in entries.chunks(k).enumerate() {
            if !row.iter().all(|&r| r >= T::zero() && r <= T::one()) {
                return Err(Error::invariant(
                    format!("responsibilities[{n}]"),
                    "entry outside [0, 1]",
                ));
            }
            let s: T = row.iter().copied().sum();
            if (s - T::one()).abs() > T::check_tol() {
                return Err(Error::invariant(
                    format!("responsibilities[{n}]"),
                    format!("row sums to {s}"),
                ));
            }
        }
        Ok(Self { k, entries })
    }

    pub fn n(&self) -> usize {
        self.entries.len() / self.k
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, n: usize) -> &[T] {
        &self.entries[n * self.k..(n + 1) * self.k]
    }

    pub fn get(&self, n: usize, k: usize) -> T {
        self.entries[n * self.k + k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.entries.chunks(self.k)
    }

    /// Effective point count `N_k` of every component.
    pub fn column_sums(&self) -> Vec<T> {
        let mut sums = vec![T::zero(); self.k];
        for row in self.rows() {
            for (s, &r) in sums.iter_mut().zip(row) {
                *s += r;
            }
        }
        sums
    }

    /// Hard assignment: the most probable component of every row.
    pub fn argmax(&self) -> Vec<usize> {
        self.rows().map(|r| argmax_posterior(r).0).collect()
    }
}

/// Index and value of the largest entry; ties resolve to the lowest index.
pub fn argmax_posterior<T: Scalar>(row: &[T]) -> (usize, T) {
    let mut best = (0, row[0]);
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

fn check_data<T: Scalar>(data: &[Vec3<T>]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidInput("no data points".into()));
    }
    if let Some(n) = data.iter().position(|x| !linalg::all_finite(x)) {
        return Err(Error::InvalidInput(format!("data point {n} is not finite")));
    }
    Ok(())
}

/// `Σ_n ln Σ_k π_k N(x_n | μ_k, Σ_k)`.
pub fn log_likelihood<T: Scalar>(data: &[Vec3<T>], params: &MixtureParams<T>) -> Result<T> {
    check_data(data)?;
    let mut buf = vec![T::zero(); params.k()];
    let mut total = T::zero();
    for x in data {
        params.weighted_log_densities(x, &mut buf);
        total += log_sum_exp(&buf);
    }
    Ok(total)
}

/// E-step returning the responsibilities and the log-likelihood of `params`.
pub fn expectation<T: Scalar>(data: &[Vec3<T>], params: &MixtureParams<T>) -> Result<(ResponsibilityMatrix<T>, T)> {
    check_data(data)?;
    let k = params.k();
    let mut entries = vec![T::zero(); data.len() * k];
    let mut total = T::zero();
    for (n, (x, row)) in data.iter().zip(entries.chunks_mut(k)).enumerate() {
        params.weighted_log_densities(x, row);
        let lse = log_sum_exp(row);
        if !lse.is_finite() {
            return Err(Error::Numerical(format!(
                "mixture density of point {n} is not representable (log density {lse})"
            )));
        }
        for r in row.iter_mut() {
            *r = (*r - lse).exp();
        }
        total += lse;
    }
    Ok((ResponsibilityMatrix { k, entries }, total))
}

/// `r_nk = π_k N(x_n|θ_k) / Σ_j π_j N(x_n|θ_j)`, normalized in log space.
pub fn e_step<T: Scalar>(data: &[Vec3<T>], params: &MixtureParams<T>) -> Result<ResponsibilityMatrix<T>> {
    expectation(data, params).map(|(r, _)| r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MStepOptions<T> {
    pub reg_eps: T,
    pub mode: CovarianceMode,
}

impl<T: Scalar> Default for MStepOptions<T> {
    fn default() -> Self {
        Self {
            reg_eps: T::lit(1e-6),
            mode: CovarianceMode::Full,
        }
    }
}

/// Per-component outcome of the closed-form updates; `None` marks an empty component.
pub(crate) struct RawMStep<T> {
    pub components: Vec<Option<GaussianComponent<T>>>,
    pub counts: Vec<T>,
}

pub(crate) fn m_step_raw<T: Scalar>(
    data: &[Vec3<T>],
    resp: &ResponsibilityMatrix<T>,
    opts: &MStepOptions<T>,
) -> Result<RawMStep<T>> {
    if resp.n() != data.len() {
        return Err(Error::InvalidInput(format!(
            "{} responsibility rows for {} data points",
            resp.n(),
            data.len()
        )));
    }
    check_data(data)?;
    let k = resp.k();
    let counts = resp.column_sums();
    let empty = T::lit(EMPTY_COMPONENT_MASS);
    let mut components = Vec::with_capacity(k);
    for (j, &nk) in counts.iter().enumerate() {
        if nk < empty {
            components.push(None);
            continue;
        }
        let mut mean = linalg::zeros::<T>();
        for (n, x) in data.iter().enumerate() {
            let r = resp.get(n, j);
            for c in 0..DIM {
                mean[c] += r * x[c];
            }
        }
        for m in &mut mean {
            *m /= nk;
        }
        let mut cov: Mat3<T> = linalg::zeros_mat();
        for (n, x) in data.iter().enumerate() {
            let r = resp.get(n, j);
            let d = linalg::sub(x, &mean);
            for a in 0..DIM {
                for b in 0..=a {
                    cov[a][b] += r * d[a] * d[b];
                }
            }
        }
        for a in 0..DIM {
            for b in 0..=a {
                cov[a][b] /= nk;
                cov[b][a] = cov[a][b];
            }
        }
        if opts.mode == CovarianceMode::Diagonal {
            linalg::keep_diagonal(&mut cov);
        }
        linalg::add_ridge(&mut cov, opts.reg_eps);
        let comp = GaussianComponent::new(mean, cov)
            .map_err(|e| Error::Numerical(format!("component {j} covariance update failed: {e}")))?;
        components.push(Some(comp));
    }
    Ok(RawMStep { components, counts })
}

/// Closed-form M-step: weighted means, weighted scatter plus ridge, and
/// weights `N_k / N`. Fails with [`Error::EmptyComponent`] when a
/// component's effective count falls below [`EMPTY_COMPONENT_MASS`].
pub fn m_step<T: Scalar>(
    data: &[Vec3<T>],
    resp: &ResponsibilityMatrix<T>,
    opts: &MStepOptions<T>,
) -> Result<MixtureParams<T>> {
    let raw = m_step_raw(data, resp, opts)?;
    let n = T::from_usize_lossy(data.len());
    let mut components = Vec::with_capacity(raw.components.len());
    for (j, c) in raw.components.into_iter().enumerate() {
        match c {
            Some(c) => components.push(c),
            None => {
                return Err(Error::EmptyComponent {
                    component: j,
                    count: raw.counts[j].to_f64_lossy(),
                })
            }
        }
    }
    let weights = normalized_weights(raw.counts.iter().map(|&c| c / n).collect());
    MixtureParams::new(components, weights)
}

/// Rescales non-negative weights so they sum to one in floating point.
pub(crate) fn normalized_weights<T: Scalar>(mut w: Vec<T>) -> Vec<T> {
    let s: T = w.iter().copied().sum();
    for v in &mut w {
        *v = (*v / s).min(T::one());
    }
    w
}
