//! Dense symmetric-matrix kernels for the small correlation matrices used by the
//! copula (dimension 16 in practice). Matrices are row-major `n × n` slices.

use crate::scalar::Real;

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// when a pivot is not strictly positive.
pub fn cholesky<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum = sum - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > T::zero()) {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Inverse of `L Lᵀ` given its lower Cholesky factor.
pub fn cholesky_inverse<T: Real>(l: &[T], n: usize) -> Vec<T> {
    // L⁻¹ by forward substitution, then (L⁻¹)ᵀ L⁻¹.
    let mut linv = vec![T::zero(); n * n];
    for col in 0..n {
        for i in col..n {
            let mut sum = if i == col { T::one() } else { T::zero() };
            for k in col..i {
                sum = sum - l[i * n + k] * linv[k * n + col];
            }
            linv[i * n + col] = sum / l[i * n + i];
        }
    }
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = T::zero();
            for k in i..n {
                sum = sum + linv[k * n + i] * linv[k * n + j];
            }
            inv[i * n + j] = sum;
            inv[j * n + i] = sum;
        }
    }
    inv
}

/// Eigen-decomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as the
/// columns of a row-major matrix.
pub fn symmetric_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut m = a.to_vec();
    let mut v = identity::<T>(n);
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut scale = T::zero();
        for i in 0..n {
            scale = scale + m[i * n + i] * m[i * n + i];
            for j in 0..n {
                if i != j {
                    off = off + m[i * n + j] * m[i * n + j];
                }
            }
        }
        if off <= eps * eps * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + dst] = v[k * n + src];
        }
    }
    (values, vectors)
}

pub fn identity<T: Real>(n: usize) -> Vec<T> {
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = T::one();
    }
    m
}

/// `V diag(w) Vᵀ` for eigenvector columns `V`.
pub fn reconstruct<T: Real>(values: &[T], vectors: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = T::zero();
            for k in 0..n {
                sum = sum + vectors[i * n + k] * values[k] * vectors[j * n + k];
            }
            out[i * n + j] = sum;
            out[j * n + i] = sum;
        }
    }
    out
}

pub fn mat_vec<T: Real>(m: &[T], x: &[T], n: usize) -> Vec<T> {
    (0..n)
        .map(|i| (0..n).fold(T::zero(), |acc, j| acc + m[i * n + j] * x[j]))
        .collect()
}
