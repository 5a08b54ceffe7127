//! Fixed-size 3-vector and 3×3 matrix helpers.
//!
//! Feature rows are always three-dimensional, so the mixture code works on
//! plain arrays instead of pulling in a general linear-algebra crate.

use crate::scalar::Scalar;

pub const DIM: usize = 3;

pub type Vec3<T> = [T; DIM];
pub type Mat3<T> = [[T; DIM]; DIM];

#[inline]
pub fn zeros<T: Scalar>() -> Vec3<T> {
    [T::zero(); DIM]
}

#[inline]
pub fn zeros_mat<T: Scalar>() -> Mat3<T> {
    [[T::zero(); DIM]; DIM]
}

pub fn identity<T: Scalar>() -> Mat3<T> {
    let mut m = zeros_mat();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn diag<T: Scalar>(d: Vec3<T>) -> Mat3<T> {
    let mut m = zeros_mat();
    for i in 0..DIM {
        m[i][i] = d[i];
    }
    m
}

#[inline]
pub fn sub<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn dist_sq<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    let d = sub(a, b);
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

#[inline]
pub fn dist<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    dist_sq(a, b).sqrt()
}

pub fn add_ridge<T: Scalar>(m: &mut Mat3<T>, eps: T) {
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += eps;
    }
}

/// Zeroes every off-diagonal entry.
pub fn keep_diagonal<T: Scalar>(m: &mut Mat3<T>) {
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if i != j {
                *v = T::zero();
            }
        }
    }
}

pub fn is_symmetric<T: Scalar>(m: &Mat3<T>, tol: T) -> bool {
    (0..DIM).all(|i| (0..i).all(|j| (m[i][j] - m[j][i]).abs() <= tol))
}

pub fn all_finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Population mean and covariance (divisor `N`) of a point set.
pub fn mean_and_covariance<T: Scalar>(points: &[Vec3<T>]) -> (Vec3<T>, Mat3<T>) {
    let n = T::from_usize_lossy(points.len());
    let mut mean = zeros::<T>();
    for p in points {
        for c in 0..DIM {
            mean[c] += p[c];
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut cov = zeros_mat::<T>();
    for p in points {
        let d = sub(p, &mean);
        for i in 0..DIM {
            for j in 0..=i {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    for i in 0..DIM {
        for j in 0..=i {
            cov[i][j] /= n;
            cov[j][i] = cov[i][j];
        }
    }
    (mean, cov)
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky3<T> {
    lower: Mat3<T>,
}

impl<T: Scalar> Cholesky3<T> {
    /// Factorizes a symmetric matrix, reading only its lower triangle.
    /// Returns `None` unless every pivot is strictly positive and finite.
    pub fn new(a: &Mat3<T>) -> Option<Self> {
        let mut l = zeros_mat::<T>();
        for j in 0..DIM {
            let mut pivot = a[j][j];
            for k in 0..j {
                pivot -= l[j][k] * l[j][k];
            }
            if !pivot.is_finite() || pivot <= T::zero() {
                return None;
            }
            let ljj = pivot.sqrt();
            l[j][j] = ljj;
            for i in (j + 1)..DIM {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / ljj;
            }
        }
        Some(Self { lower: l })
    }

    pub fn lower(&self) -> &Mat3<T> {
        &self.lower
    }

    /// `ln |A|`.
    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        (0..DIM).map(|i| self.lower[i][i].ln()).sum::<T>() * two
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve_lower(&self, b: &Vec3<T>) -> Vec3<T> {
        let l = &self.lower;
        let mut y = zeros::<T>();
        for i in 0..DIM {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        y
    }

    /// `dᵀ A⁻¹ d`.
    pub fn mahalanobis_sq(&self, d: &Vec3<T>) -> T {
        let y = self.solve_lower(d);
        y[0] * y[0] + y[1] * y[1] + y[2] * y[2]
    }

    pub fn inverse(&self) -> Mat3<T> {
        let mut inv = zeros_mat::<T>();
        for c in 0..DIM {
            let mut e = zeros::<T>();
            e[c] = T::one();
            let y = self.solve_lower(&e);
            // back substitution with Lᵀ
            let l = &self.lower;
            let mut x = zeros::<T>();
            for i in (0..DIM).rev() {
                let mut s = y[i];
                for k in (i + 1)..DIM {
                    s -= l[k][i] * x[k];
                }
                x[i] = s / l[i][i];
            }
            for r in 0..DIM {
                inv[r][c] = x[r];
            }
        }
        inv
    }
}
