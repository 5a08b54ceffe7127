use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky3, Mat3, Vec3, DIM};
use crate::scalar::Scalar;

/// One multivariate normal component with a cached Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent<T> {
    mean: Vec3<T>,
    covariance: Mat3<T>,
    chol: Cholesky3<T>,
    log_norm: T,
}

impl<T: Scalar> GaussianComponent<T> {
    /// Validates symmetry and positive-definiteness of `covariance`.
    pub fn new(mean: Vec3<T>, covariance: Mat3<T>) -> Result<Self> {
        if !linalg::all_finite(&mean) {
            return Err(Error::invariant("mean", "must be finite"));
        }
        if !covariance.iter().all(|r| linalg::all_finite(r)) {
            return Err(Error::invariant("covariance", "must be finite"));
        }
        let scale = covariance.iter().flatten().fold(T::one(), |m, v| m.max(v.abs()));
        if !linalg::is_symmetric(&covariance, T::check_tol() * scale) {
            return Err(Error::invariant("covariance", "must be symmetric"));
        }
        let chol =
            Cholesky3::new(&covariance).ok_or_else(|| Error::invariant("covariance", "must be positive definite"))?;
        let d = T::from_usize_lossy(DIM);
        let log_norm = -T::lit(0.5) * (d * (T::lit(2.0) * T::PI()).ln() + chol.log_det());
        Ok(Self {
            mean,
            covariance,
            chol,
            log_norm,
        })
    }

    pub fn mean(&self) -> &Vec3<T> {
        &self.mean
    }

    pub fn covariance(&self) -> &Mat3<T> {
        &self.covariance
    }

    pub fn cholesky(&self) -> &Cholesky3<T> {
        &self.chol
    }

    pub fn log_det(&self) -> T {
        self.chol.log_det()
    }

    pub fn inverse_covariance(&self) -> Mat3<T> {
        self.chol.inverse()
    }

    /// Log density; no finiteness check on `x`.
    #[inline]
    pub fn log_pdf_unchecked(&self, x: &Vec3<T>) -> T {
        let d = linalg::sub(x, &self.mean);
        self.log_norm - T::lit(0.5) * self.chol.mahalanobis_sq(&d)
    }

    pub fn log_pdf(&self, x: &Vec3<T>) -> Result<T> {
        if !linalg::all_finite(x) {
            return Err(Error::InvalidInput("density evaluated at a non-finite point".into()));
        }
        Ok(self.log_pdf_unchecked(x))
    }
}

/// Multivariate normal density, evaluated in log space and exponentiated.
pub fn gaussian_pdf<T: Scalar>(x: &Vec3<T>, comp: &GaussianComponent<T>) -> Result<T> {
    comp.log_pdf(x).map(|l| l.exp())
}
