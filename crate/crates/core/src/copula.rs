//! Gaussian copula over an arbitrary number of marginals.
//!
//! The joint density is
//!
//! ```text
//! f(x) = c_Σ(u) · Π_j f_j(x_j),   u_j = F_j(x_j),
//! c_Σ(u) = |Σ|^{-1/2} exp(-½ zᵀ (Σ⁻¹ − I) z),   z_j = Φ⁻¹(u_j)
//! ```
//!
//! i.e. the multivariate normal density at `z` divided by the product of the
//! standard normal densities, which integrates to one over the unit cube.
//! Sampling goes the other way: `z = A ε` with `A Aᵀ = Σ`, `u = Φ(z)` and
//! `x_j = F_j⁻¹(u_j)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::marginals::MarginalDistribution;
use crate::rng::map_chunks;
use crate::scalar::Real;
use crate::special::{std_normal_cdf, std_normal_quantile};

/// Correlation matrices with a condition number above this are treated as
/// singular when evaluating the density.
pub const MAX_CONDITION: f64 = 1e12;

/// Smallest sample count accepted by [`hellinger_nd`].
pub const MIN_HELLINGER_SAMPLES: usize = 10_000;

/// Eigenvalue floor applied by [`nearest_psd`] to indefinite inputs.
pub const PSD_EIGEN_FLOOR: f64 = 1e-10;

/// Symmetric, unit-diagonal, positive semidefinite matrix (row-major).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
#[serde(bound = "T: Real")]
pub struct CorrelationMatrix<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Real> CorrelationMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        Self { dim, entries: linalg::identity(dim) }
    }

    /// Validates symmetry, unit diagonal, range and positive semidefiniteness
    /// (minimum eigenvalue ≥ −1e-10).
    pub fn new(dim: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: entries.len() });
        }
        let tol = T::lit(1e-12);
        for i in 0..dim {
            if (entries[i * dim + i] - T::one()).abs() > tol {
                return Err(Error::InvalidParameter(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..dim {
                let v = entries[i * dim + j];
                if !(v.abs() <= T::one() + tol) {
                    return Err(Error::InvalidParameter(format!("entry ({i},{j}) = {v} outside [-1, 1]")));
                }
                if (v - entries[j * dim + i]).abs() > tol {
                    return Err(Error::InvalidParameter(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        let m = Self { dim, entries };
        let min_eig = m.min_eigenvalue();
        if min_eig < T::lit(-1e-10) {
            return Err(Error::InvalidParameter(format!(
                "matrix is not positive semidefinite (min eigenvalue {min_eig})"
            )));
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.dim.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::symmetric_eigen(&self.entries, self.dim).0
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().first().copied().unwrap_or_else(T::one)
    }
}

impl<T: Real> TryFrom<Vec<Vec<T>>> for CorrelationMatrix<T> {
    type Error = Error;

    fn try_from(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl<T: Real> From<CorrelationMatrix<T>> for Vec<Vec<T>> {
    fn from(m: CorrelationMatrix<T>) -> Self {
        m.rows()
    }
}

/// Outcome of [`repair_psd`].
#[derive(Clone, Debug)]
pub struct PsdRepair<T> {
    pub matrix: CorrelationMatrix<T>,
    /// Smallest eigenvalue of the symmetrized input.
    pub min_eigenvalue_before: T,
    /// Largest absolute entry change relative to the input.
    pub max_abs_change: T,
    pub repaired: bool,
}

/// Eigenvalue-clipping repair of a symmetric unit-diagonal matrix.
///
/// The input is symmetrized; if its smallest eigenvalue is non-negative it is
/// returned as is. Otherwise eigenvalues are clipped at [`PSD_EIGEN_FLOOR`],
/// the matrix is rebuilt and rescaled to unit diagonal.
pub fn repair_psd<T: Real>(entries: &[T], dim: usize) -> Result<PsdRepair<T>> {
    if entries.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, actual: entries.len() });
    }
    let half = T::lit(0.5);
    let mut sym = entries.to_vec();
    for i in 0..dim {
        sym[i * dim + i] = T::one();
        for j in 0..i {
            let v = (entries[i * dim + j] + entries[j * dim + i]) * half;
            sym[i * dim + j] = v;
            sym[j * dim + i] = v;
        }
    }
    let (values, vectors) = linalg::symmetric_eigen(&sym, dim);
    let min_before = values.first().copied().unwrap_or_else(T::one);
    let repaired = min_before < T::zero();
    let out = if repaired {
        let floor = T::lit(PSD_EIGEN_FLOOR);
        let clipped: Vec<T> = values.iter().map(|&v| v.max(floor)).collect();
        let mut m = linalg::reconstruct(&clipped, &vectors, dim);
        let scale: Vec<T> = (0..dim).map(|i| T::one() / m[i * dim + i].sqrt()).collect();
        for i in 0..dim {
            m[i * dim + i] = T::one();
            for j in 0..i {
                let v = ((m[i * dim + j] + m[j * dim + i]) * half * scale[i] * scale[j]).max(-T::one()).min(T::one());
                m[i * dim + j] = v;
                m[j * dim + i] = v;
            }
        }
        m
    } else {
        sym
    };
    let max_abs_change = out
        .iter()
        .zip(entries)
        .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()));
    Ok(PsdRepair {
        matrix: CorrelationMatrix { dim, entries: out },
        min_eigenvalue_before: min_before,
        max_abs_change,
        repaired,
    })
}

/// Nearest (within the eigenvalue-clipping scheme) valid correlation matrix.
pub fn nearest_psd<T: Real>(entries: &[T], dim: usize) -> Result<CorrelationMatrix<T>> {
    Ok(repair_psd(entries, dim)?.matrix)
}

/// Pearson correlation matrix of aligned series (one `Vec` per variable),
/// repaired to positive semidefiniteness if rounding made it indefinite.
pub fn pearson_matrix<T: Real>(series: &[Vec<T>]) -> Result<CorrelationMatrix<T>> {
    let dim = series.len();
    if dim == 0 {
        return Err(Error::InvalidParameter("no series given".into()));
    }
    let len = series[0].len();
    if let Some(bad) = series.iter().find(|s| s.len() != len) {
        return Err(Error::DimensionMismatch { expected: len, actual: bad.len() });
    }
    if len < 8 {
        return Err(Error::Degenerate(format!("series too short for correlation: {len} < 8")));
    }
    let n = T::from_count(len);
    let means: Vec<T> = series.iter().map(|s| s.iter().fold(T::zero(), |a, &x| a + x) / n).collect();
    let centered: Vec<Vec<T>> = series
        .iter()
        .zip(&means)
        .map(|(s, &mean)| s.iter().map(|&x| x - mean).collect())
        .collect();
    let norms: Vec<T> = centered
        .iter()
        .map(|c| c.iter().fold(T::zero(), |a, &x| a + x * x).sqrt())
        .collect();
    // spread at the level of rounding noise in the mean counts as constant
    let is_flat = |norm: T, mean: T| !(norm > mean.abs() * T::epsilon() * T::lit(64.0) * n.sqrt());
    if let Some(i) = (0..dim).find(|&i| is_flat(norms[i], means[i])) {
        return Err(Error::Degenerate(format!("series {i} has zero variance")));
    }
    let mut entries = linalg::identity::<T>(dim);
    for i in 0..dim {
        for j in 0..i {
            let dot = centered[i].iter().zip(&centered[j]).fold(T::zero(), |a, (&x, &y)| a + x * y);
            let r = (dot / (norms[i] * norms[j])).max(-T::one()).min(T::one());
            entries[i * dim + j] = r;
            entries[j * dim + i] = r;
        }
    }
    nearest_psd(&entries, dim)
}

/// One draw of the metric vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "T: Real")]
pub struct ParameterSample<T> {
    pub values: Vec<T>,
}

impl<T: Real> ParameterSample<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<T> std::ops::Index<usize> for ParameterSample<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

#[derive(Clone, Debug)]
struct Precision<T> {
    /// Σ⁻¹ − I
    inv_minus_identity: Vec<T>,
    ln_det: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct CopulaSpec<T> {
    epoch_label: String,
    marginals: Vec<MarginalDistribution<T>>,
    sigma: CorrelationMatrix<T>,
}

/// Joint law of one epoch: marginals tied together by a Gaussian copula.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CopulaSpec<T>", into = "CopulaSpec<T>")]
#[serde(bound = "T: Real")]
pub struct CopulaModel<T> {
    epoch_label: String,
    marginals: Vec<MarginalDistribution<T>>,
    sigma: CorrelationMatrix<T>,
    factor: Vec<T>,
    precision: Option<Precision<T>>,
    condition: T,
}

impl<T: Real> TryFrom<CopulaSpec<T>> for CopulaModel<T> {
    type Error = Error;

    fn try_from(spec: CopulaSpec<T>) -> Result<Self> {
        Self::new(spec.marginals, spec.sigma, spec.epoch_label)
    }
}

impl<T: Real> From<CopulaModel<T>> for CopulaSpec<T> {
    fn from(m: CopulaModel<T>) -> Self {
        Self { epoch_label: m.epoch_label, marginals: m.marginals, sigma: m.sigma }
    }
}

impl<T: Real> PartialEq for CopulaModel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.epoch_label == other.epoch_label && self.marginals == other.marginals && self.sigma == other.sigma
    }
}

impl<T: Real> CopulaModel<T> {
    pub fn new(
        marginals: Vec<MarginalDistribution<T>>,
        sigma: CorrelationMatrix<T>,
        epoch_label: impl Into<String>,
    ) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidParameter("copula needs at least one marginal".into()));
        }
        if marginals.len() != sigma.dim() {
            return Err(Error::DimensionMismatch { expected: marginals.len(), actual: sigma.dim() });
        }
        for m in &marginals {
            m.validate()?;
        }
        let n = sigma.dim();
        let (values, vectors) = linalg::symmetric_eigen(sigma.as_slice(), n);
        let min = values[0];
        let max = values[n - 1];
        let condition = if min > T::zero() { max / min } else { T::infinity() };
        let chol = linalg::cholesky(sigma.as_slice(), n);
        let precision = match &chol {
            Some(l) if condition <= T::lit(MAX_CONDITION) => {
                let mut inv = linalg::cholesky_inverse(l, n);
                for i in 0..n {
                    inv[i * n + i] = inv[i * n + i] - T::one();
                }
                let ln_det = (0..n).fold(T::zero(), |a, i| a + l[i * n + i].ln()) * T::lit(2.0);
                Some(Precision { inv_minus_identity: inv, ln_det })
            }
            _ => None,
        };
        let factor = match chol {
            Some(l) => l,
            None => {
                let mut a = vectors;
                for k in 0..n {
                    let s = values[k].max(T::zero()).sqrt();
                    for i in 0..n {
                        a[i * n + k] = a[i * n + k] * s;
                    }
                }
                a
            }
        };
        Ok(Self { epoch_label: epoch_label.into(), marginals, sigma, factor, precision, condition })
    }

    /// Independence copula (`Σ = I`).
    pub fn independent(marginals: Vec<MarginalDistribution<T>>, epoch_label: impl Into<String>) -> Result<Self> {
        let dim = marginals.len();
        Self::new(marginals, CorrelationMatrix::identity(dim), epoch_label)
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn epoch_label(&self) -> &str {
        &self.epoch_label
    }

    pub fn marginals(&self) -> &[MarginalDistribution<T>] {
        &self.marginals
    }

    pub fn sigma(&self) -> &CorrelationMatrix<T> {
        &self.sigma
    }

    pub fn condition_number(&self) -> T {
        self.condition
    }

    /// Copy with one marginal replaced.
    pub fn with_marginal(&self, index: usize, marginal: MarginalDistribution<T>) -> Result<Self> {
        if index >= self.dim() {
            return Err(Error::InvalidParameter(format!("marginal index {index} out of range")));
        }
        if marginal.family() != self.marginals[index].family() {
            return Err(Error::InvalidParameter("replacement marginal changes family".into()));
        }
        marginal.validate()?;
        let mut out = self.clone();
        out.marginals[index] = marginal;
        Ok(out)
    }

    pub fn with_label(&self, label: impl Into<String>) -> Self {
        let mut out = self.clone();
        out.epoch_label = label.into();
        out
    }

    fn precision(&self) -> Result<&Precision<T>> {
        self.precision
            .as_ref()
            .ok_or(Error::SingularCorrelation { condition: self.condition.as_f64() })
    }

    fn ln_copula(&self, p: &Precision<T>, z: &[T]) -> T {
        let n = self.dim();
        let mut quad = T::zero();
        for i in 0..n {
            let row = &p.inv_minus_identity[i * n..(i + 1) * n];
            let dot = row.iter().zip(z).fold(T::zero(), |a, (&m, &zj)| a + m * zj);
            quad = quad + z[i] * dot;
        }
        -T::lit(0.5) * (p.ln_det + quad)
    }

    /// Log of the joint density; `-∞` outside the support.
    pub fn ln_density(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        let p = self.precision()?;
        let mut ln_marg = T::zero();
        let mut z = Vec::with_capacity(x.len());
        for (m, &xj) in self.marginals.iter().zip(x) {
            let lp = m.ln_pdf(xj);
            if lp == T::neg_infinity() || lp.is_nan() {
                return Ok(T::neg_infinity());
            }
            ln_marg = ln_marg + lp;
            z.push(std_normal_quantile(clamp_unit(m.cdf(xj))));
        }
        Ok(self.ln_copula(p, &z) + ln_marg)
    }

    /// Joint density at `x`.
    pub fn density(&self, x: &ParameterSample<T>) -> Result<T> {
        Ok(self.ln_density(&x.values)?.exp())
    }

    fn draw(&self, rng: &mut ChaCha8Rng, eps: &mut [T], z: &mut [T], x: &mut [T]) {
        let n = self.dim();
        for e in eps.iter_mut() {
            *e = T::lit(rng.sample::<f64, _>(StandardNormal));
        }
        for i in 0..n {
            let row = &self.factor[i * n..(i + 1) * n];
            z[i] = row.iter().zip(eps.iter()).fold(T::zero(), |a, (&l, &e)| a + l * e);
        }
        for j in 0..n {
            let u = std_normal_cdf(z[j]);
            let uc = clamp_unit(u);
            if uc != u {
                z[j] = std_normal_quantile(uc);
            }
            x[j] = self.marginals[j].quantile(uc).expect("clamped level lies in (0, 1)");
        }
    }

    /// `n` draws from the joint law; identical for identical `(n, seed)`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<ParameterSample<T>> {
        let d = self.dim();
        map_chunks(n, seed, |rng, range| {
            let mut eps = vec![T::zero(); d];
            let mut z = vec![T::zero(); d];
            range
                .map(|_| {
                    let mut x = vec![T::zero(); d];
                    self.draw(rng, &mut eps, &mut z, &mut x);
                    ParameterSample::new(x)
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect()
    }
}

fn clamp_unit<T: Real>(u: T) -> T {
    u.max(T::min_positive_value()).min(T::one() - T::epsilon() * T::lit(0.5))
}

/// Monte Carlo Hellinger distance with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HellingerEstimate<T> {
    pub estimate: T,
    pub stderr: T,
    /// Estimated Bhattacharyya affinity `∫ √(f₁ f₂)`.
    pub affinity: T,
    pub affinity_stderr: T,
    pub samples: usize,
}

impl<T: Real> HellingerEstimate<T> {
    pub fn zero(samples: usize) -> Self {
        Self {
            estimate: T::zero(),
            stderr: T::zero(),
            affinity: T::one(),
            affinity_stderr: T::zero(),
            samples,
        }
    }
}

/// Hellinger distance between two joint laws by importance sampling.
///
/// With `x_i ~ m1`, the affinity is estimated as the mean of
/// `√(f₂(x_i) / f₁(x_i))`, and `H = √max(0, 1 − affinity)`. The standard error
/// of `H` is the delta-method value `se_A / (2H)`, capped by `√se_A`, which
/// bounds the square-root propagation when `H` is near zero.
pub fn hellinger_nd<T: Real>(
    m1: &CopulaModel<T>,
    m2: &CopulaModel<T>,
    n: usize,
    seed: u64,
) -> Result<HellingerEstimate<T>> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch { expected: m1.dim(), actual: m2.dim() });
    }
    if n < MIN_HELLINGER_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "Hellinger estimator needs at least {MIN_HELLINGER_SAMPLES} samples, got {n}"
        )));
    }
    for (a, b) in m1.marginals.iter().zip(&m2.marginals) {
        if a.family() != b.family() {
            return Err(Error::InvalidParameter("models disagree on marginal families".into()));
        }
    }
    let p1 = m1.precision()?;
    let p2 = m2.precision()?;
    let d = m1.dim();
    let shared: Vec<bool> = m1.marginals.iter().zip(&m2.marginals).map(|(a, b)| a == b).collect();
    let half = T::lit(0.5);

    let partials = map_chunks(n, seed, |rng, range| {
        let mut eps = vec![T::zero(); d];
        let mut z1 = vec![T::zero(); d];
        let mut z2 = vec![T::zero(); d];
        let mut x = vec![T::zero(); d];
        let (mut sum, mut sum_sq, mut zero) = (T::zero(), T::zero(), 0usize);
        for _ in range {
            m1.draw(rng, &mut eps, &mut z1, &mut x);
            let mut ln_ratio_marg = T::zero();
            let mut valid = true;
            for j in 0..d {
                if shared[j] {
                    z2[j] = z1[j];
                    continue;
                }
                let l1 = m1.marginals[j].ln_pdf(x[j]);
                if l1 == T::neg_infinity() || l1.is_nan() {
                    valid = false;
                    break;
                }
                ln_ratio_marg = ln_ratio_marg + m2.marginals[j].ln_pdf(x[j]) - l1;
                z2[j] = std_normal_quantile(clamp_unit(m2.marginals[j].cdf(x[j])));
            }
            if !valid {
                zero += 1;
                continue;
            }
            let ln_ratio = m2.ln_copula(p2, &z2) - m1.ln_copula(p1, &z1) + ln_ratio_marg;
            let r = (half * ln_ratio).exp();
            let r = if r.is_finite() { r } else { T::zero() };
            sum = sum + r;
            sum_sq = sum_sq + r * r;
        }
        (sum, sum_sq, zero)
    });

    let (sum, sum_sq, zero) = partials
        .into_iter()
        .fold((T::zero(), T::zero(), 0usize), |(a, b, c), (s, q, z)| (a + s, b + q, c + z));
    if zero * 100 > n {
        return Err(Error::SupportMismatch { zero, total: n });
    }
    let nf = T::from_count(n);
    let affinity = sum / nf;
    let var = ((sum_sq - nf * affinity * affinity) / (nf - T::one())).max(T::zero());
    let affinity_stderr = (var / nf).sqrt();
    let estimate = (T::one() - affinity).max(T::zero()).sqrt();
    let stderr = if estimate > T::zero() {
        (affinity_stderr / (T::lit(2.0) * estimate)).min(affinity_stderr.sqrt())
    } else {
        affinity_stderr.sqrt()
    };
    Ok(HellingerEstimate { estimate: estimate.min(T::one()), stderr, affinity, affinity_stderr, samples: n })
}
