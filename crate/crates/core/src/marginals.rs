//! One-dimensional laws for individual device metrics.
//!
//! Fidelity-like metrics live on `[0, 1]` and are modelled as Beta laws;
//! coherence times are positive and unbounded and are modelled as Gamma laws.
//! Besides density, cdf and quantile, this module provides method-of-moments
//! fitting and the closed-form Hellinger distance between two members of the
//! same family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::scalar::Real;
use crate::special::{ln_beta, ln_gamma, reg_inc_beta, reg_lower_gamma, std_normal_quantile, xlogy};

/// Parametric family of a marginal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Beta,
    Gamma,
}

/// A Beta law on `[0, 1]` or a Gamma law (shape/scale) on `(0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum MarginalDistribution<T> {
    Beta { alpha: T, beta: T },
    Gamma { shape: T, scale: T },
}

fn check_positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl<T: Real> MarginalDistribution<T> {
    pub fn beta(alpha: T, beta: T) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        Ok(Self::Beta { alpha, beta })
    }

    pub fn gamma(shape: T, scale: T) -> Result<Self> {
        check_positive("shape", shape)?;
        check_positive("scale", scale)?;
        Ok(Self::Gamma { shape, scale })
    }

    /// Builds a member of `family` with the given mean and variance.
    pub fn from_moments(family: Family, mean: T, variance: T) -> Result<Self> {
        if !(variance > T::zero()) {
            return Err(Error::Degenerate(format!("variance must be positive, got {variance}")));
        }
        match family {
            Family::Beta => {
                let common = mean * (T::one() - mean) / variance - T::one();
                let alpha = mean * common;
                let beta = (T::one() - mean) * common;
                if !(alpha > T::zero() && beta > T::zero()) {
                    return Err(Error::Degenerate(format!(
                        "moments (mean {mean}, variance {variance}) imply non-positive Beta parameters"
                    )));
                }
                Self::beta(alpha, beta)
            }
            Family::Gamma => {
                if !(mean > T::zero()) {
                    return Err(Error::Degenerate(format!("Gamma mean must be positive, got {mean}")));
                }
                Self::gamma(mean * mean / variance, variance / mean)
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Beta { .. } => Family::Beta,
            Self::Gamma { .. } => Family::Gamma,
        }
    }

    /// The two shape parameters: `(alpha, beta)` or `(shape, scale)`.
    pub fn params(&self) -> (T, T) {
        match *self {
            Self::Beta { alpha, beta } => (alpha, beta),
            Self::Gamma { shape, scale } => (shape, scale),
        }
    }

    /// Same family with replaced parameters.
    pub fn with_params(&self, p0: T, p1: T) -> Result<Self> {
        match self {
            Self::Beta { .. } => Self::beta(p0, p1),
            Self::Gamma { .. } => Self::gamma(p0, p1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (p0, p1) = self.params();
        self.with_params(p0, p1).map(|_| ())
    }

    /// Closed support interval.
    pub fn support(&self) -> (T, T) {
        match self {
            Self::Beta { .. } => (T::zero(), T::one()),
            Self::Gamma { .. } => (T::zero(), T::infinity()),
        }
    }

    pub fn in_support(&self, x: T) -> bool {
        let (lo, hi) = self.support();
        x >= lo && x <= hi
    }

    pub fn mean(&self) -> T {
        match *self {
            Self::Beta { alpha, beta } => alpha / (alpha + beta),
            Self::Gamma { shape, scale } => shape * scale,
        }
    }

    pub fn variance(&self) -> T {
        match *self {
            Self::Beta { alpha, beta } => {
                let s = alpha + beta;
                alpha * beta / (s * s * (s + T::one()))
            }
            Self::Gamma { shape, scale } => shape * scale * scale,
        }
    }

    /// Log density; `-∞` outside the support.
    pub fn ln_pdf(&self, x: T) -> T {
        match *self {
            Self::Beta { alpha, beta } => {
                if !(x >= T::zero() && x <= T::one()) {
                    return T::neg_infinity();
                }
                xlogy(alpha - T::one(), x) + xlogy(beta - T::one(), T::one() - x) - ln_beta(alpha, beta)
            }
            Self::Gamma { shape, scale } => {
                if !(x >= T::zero()) || x.is_infinite() {
                    return T::neg_infinity();
                }
                xlogy(shape - T::one(), x) - x / scale - ln_gamma(shape) - shape * scale.ln()
            }
        }
    }

    pub fn pdf(&self, x: T) -> T {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: T) -> T {
        if x.is_nan() {
            return x;
        }
        match *self {
            Self::Beta { alpha, beta } => reg_inc_beta(alpha, beta, x),
            Self::Gamma { shape, scale } => reg_lower_gamma(shape, x / scale),
        }
    }

    /// Inverse cdf, solved by Newton steps safeguarded by a shrinking bracket.
    pub fn quantile(&self, u: T) -> Result<T> {
        if !(u >= T::zero() && u <= T::one()) {
            return Err(Error::Domain(format!("quantile level {u} outside [0, 1]")));
        }
        let (lo_s, hi_s) = self.support();
        if u == T::zero() {
            return Ok(lo_s);
        }
        if u == T::one() {
            return Ok(hi_s);
        }
        let mean = self.mean();
        let sd = self.variance().sqrt();
        let (mut lo, mut hi) = match self {
            Self::Beta { .. } => (T::zero(), T::one()),
            Self::Gamma { .. } => {
                let mut lo = T::zero();
                let mut hi = mean + T::lit(10.0) * sd;
                while self.cdf(hi) < u && hi.is_finite() {
                    lo = hi;
                    hi = hi * T::lit(2.0);
                }
                (lo, hi)
            }
        };
        let z = std_normal_quantile(u);
        let mut x = match *self {
            Self::Gamma { shape, scale } => {
                // Wilson-Hilferty
                let nine_k = T::lit(9.0) * shape;
                let t = T::one() - T::one() / nine_k + z / nine_k.sqrt();
                shape * scale * t * t * t
            }
            Self::Beta { .. } => mean + sd * z,
        };
        if !(x > lo && x < hi) {
            x = (lo + hi) * T::lit(0.5);
        }
        let tol = T::lit(4.0) * T::epsilon();
        for _ in 0..300 {
            let f = self.cdf(x) - u;
            if f == T::zero() {
                return Ok(x);
            }
            if f < T::zero() {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.pdf(x);
            let mut next = x - f / d;
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::lit(0.5);
            }
            if (next - x).abs() <= tol * x.abs() || hi - lo <= tol * x.abs() {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }
}

fn mean_and_variance<T: Real>(samples: &[T]) -> (T, T) {
    let n = T::from_count(samples.len());
    let mean = samples.iter().fold(T::zero(), |a, &x| a + x) / n;
    let ss = samples.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean));
    (mean, ss / (n - T::one()))
}

/// Method-of-moments fit of `family` to `samples` (sample variance with the
/// `n - 1` denominator).
pub fn fit_moments<T: Real>(samples: &[T], family: Family) -> Result<MarginalDistribution<T>> {
    if samples.len() < 8 {
        return Err(Error::Degenerate(format!("need at least 8 samples, got {}", samples.len())));
    }
    let in_support = |x: T| match family {
        Family::Beta => x >= T::zero() && x <= T::one(),
        Family::Gamma => x > T::zero() && x.is_finite(),
    };
    if let Some(bad) = samples.iter().find(|&&x| !in_support(x)) {
        return Err(Error::Domain(format!("sample {bad} outside the {family:?} support")));
    }
    let (mean, variance) = mean_and_variance(samples);
    // spread at the level of rounding noise in the mean counts as constant
    let noise = mean.abs() * T::epsilon() * T::lit(64.0);
    if !(variance > noise * noise) {
        return Err(Error::Degenerate("samples have zero variance".into()));
    }
    MarginalDistribution::from_moments(family, mean, variance)
}

/// Bhattacharyya affinity `∫ √(f₁ f₂)` in closed form, with a rough bound on
/// the absolute rounding error of `1 - affinity`.
fn closed_form_affinity<T: Real>(a: &MarginalDistribution<T>, b: &MarginalDistribution<T>) -> (T, T) {
    let half = T::lit(0.5);
    let (ln_bc, magnitude) = match (*a, *b) {
        (
            MarginalDistribution::Beta { alpha: a1, beta: b1 },
            MarginalDistribution::Beta { alpha: a2, beta: b2 },
        ) => {
            let am = (a1 + a2) * half;
            let bm = (b1 + b2) * half;
            let ln_bc = ln_beta(am, bm) - half * (ln_beta(a1, b1) + ln_beta(a2, b2));
            let mag = [am, bm, am + bm, a1, b1, a1 + b1, a2, b2, a2 + b2]
                .iter()
                .fold(T::zero(), |acc, &v| acc + ln_gamma(v).abs());
            (ln_bc, mag)
        }
        (
            MarginalDistribution::Gamma { shape: k1, scale: s1 },
            MarginalDistribution::Gamma { shape: k2, scale: s2 },
        ) => {
            let km = (k1 + k2) * half;
            let ln_bc = ln_gamma(km) + km * (T::lit(2.0) * s1 * s2 / (s1 + s2)).ln()
                - half * (ln_gamma(k1) + k1 * s1.ln() + ln_gamma(k2) + k2 * s2.ln());
            let mag = ln_gamma(km).abs()
                + ln_gamma(k1).abs()
                + ln_gamma(k2).abs()
                + (km * (s1 * s2).ln()).abs()
                + T::lit(3.0);
            (ln_bc, mag)
        }
        _ => unreachable!("family checked by caller"),
    };
    (ln_bc.exp(), T::lit(8.0) * T::epsilon() * (magnitude + T::one()))
}

/// Squared Hellinger distance `½ ∫ (√f₁ − √f₂)²` by adaptive quadrature over
/// the region holding essentially all of both laws' mass.
fn hellinger_sq_quadrature<T: Real>(a: &MarginalDistribution<T>, b: &MarginalDistribution<T>) -> Result<T> {
    let tail = T::lit(1e-15);
    let lo = a.quantile(tail)?.min(b.quantile(tail)?);
    let hi = a.quantile(T::one() - tail)?.max(b.quantile(T::one() - tail)?);
    let integrand = |x: T| {
        let d = (a.ln_pdf(x) * T::lit(0.5)).exp() - (b.ln_pdf(x) * T::lit(0.5)).exp();
        if d.is_finite() {
            d * d
        } else {
            T::zero()
        }
    };
    let tol = T::lit(1e-16).max(T::epsilon() * T::epsilon());
    let (s_lo, s_hi) = a.support();
    let mut total = T::zero();
    if lo > s_lo {
        total = total + quadrature::integrate(integrand, s_lo, lo, tol);
    }
    let pieces = 32;
    let width = (hi - lo) / T::from_count(pieces);
    for i in 0..pieces {
        let x0 = lo + width * T::from_count(i);
        let x1 = if i + 1 == pieces { hi } else { x0 + width };
        total = total + quadrature::integrate(integrand, x0, x1, tol);
    }
    if s_hi.is_finite() && hi < s_hi {
        total = total + quadrature::integrate(integrand, hi, s_hi, tol);
    }
    Ok((total * T::lit(0.5)).max(T::zero()).min(T::one()))
}

/// Hellinger distance between two marginals of the same family.
///
/// Uses the Beta/Gamma closed form of the Bhattacharyya affinity; when the
/// distance is so small that rounding in `1 - affinity` would cost more than
/// ~1e-9 in `H`, falls back to direct quadrature of `½ ∫ (√f₁ − √f₂)²`.
pub fn hellinger_1d<T: Real>(a: &MarginalDistribution<T>, b: &MarginalDistribution<T>) -> Result<T> {
    if a.family() != b.family() {
        return Err(Error::InvalidParameter(format!(
            "family mismatch: {:?} vs {:?}",
            a.family(),
            b.family()
        )));
    }
    a.validate()?;
    b.validate()?;
    if a == b {
        return Ok(T::zero());
    }
    let (bc, err) = closed_form_affinity(a, b);
    let h2 = (T::one() - bc).max(T::zero()).min(T::one());
    let h = h2.sqrt();
    if err <= T::lit(2e-9) * h {
        return Ok(h);
    }
    Ok(hellinger_sq_quadrature(a, b)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn beta(a: f64, b: f64) -> MarginalDistribution<f64> {
        MarginalDistribution::beta(a, b).unwrap()
    }

    #[test]
    fn pdf_examples() {
        assert_relative_eq!(beta(1.0, 1.0).pdf(0.3), 1.0, epsilon = 1e-14);
        assert_relative_eq!(beta(2.0, 2.0).pdf(0.5), 1.5, epsilon = 1e-14);
        let g = MarginalDistribution::gamma(1.0, 2.0).unwrap();
        assert_relative_eq!(g.pdf(0.0), 0.5, epsilon = 1e-14);
        assert_eq!(beta(2.0, 2.0).pdf(-0.1), 0.0);
        assert_eq!(beta(2.0, 2.0).pdf(1.1), 0.0);
        assert_eq!(g.pdf(-1.0), 0.0);
    }

    #[test]
    fn cdf_examples() {
        assert_relative_eq!(beta(1.0, 1.0).cdf(0.25), 0.25, epsilon = 1e-14);
        assert_relative_eq!(beta(2.0, 2.0).cdf(0.5), 0.5, epsilon = 1e-14);
        assert_eq!(beta(2.0, 5.0).cdf(-1.0), 0.0);
        assert_eq!(beta(2.0, 5.0).cdf(2.0), 1.0);
        let g = MarginalDistribution::gamma(1.0, 1.0).unwrap();
        assert_relative_eq!(g.cdf(1.0), 1.0 - (-1.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn quantile_examples() {
        assert_relative_eq!(beta(1.0, 1.0).quantile(0.75).unwrap(), 0.75, epsilon = 1e-12);
        assert_relative_eq!(beta(2.0, 2.0).quantile(0.5).unwrap(), 0.5, epsilon = 1e-12);
        let g = MarginalDistribution::gamma(1.0, 1.0).unwrap();
        assert_relative_eq!(g.quantile(1.0 - (-1.0f64).exp()).unwrap(), 1.0, epsilon = 1e-10);
        assert!(beta(2.0, 2.0).quantile(1.5).is_err());
        assert!(beta(2.0, 2.0).quantile(-0.1).is_err());
        assert!(beta(2.0, 2.0).quantile(f64::NAN).is_err());
        assert_eq!(beta(2.0, 2.0).quantile(0.0).unwrap(), 0.0);
        assert_eq!(beta(2.0, 2.0).quantile(1.0).unwrap(), 1.0);
        assert!(g.quantile(1.0).unwrap().is_infinite());
    }

    #[test]
    fn quantile_recovers_interior_points() {
        let laws = [
            beta(2.0, 5.0),
            beta(0.5, 0.7),
            beta(1300.0, 15.8),
            MarginalDistribution::gamma(11.0, 9.0).unwrap(),
            MarginalDistribution::gamma(0.8, 2.0).unwrap(),
        ];
        for law in &laws {
            for i in 1..100 {
                let u = i as f64 / 100.0;
                let x = law.quantile(u).unwrap();
                assert!((law.cdf(x) - u).abs() <= 1e-9, "{law:?} u={u}");
                let back = law.quantile(law.cdf(x)).unwrap();
                assert_relative_eq!(back, x, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(MarginalDistribution::beta(0.0, 1.0).is_err());
        assert!(MarginalDistribution::beta(1.0, -2.0).is_err());
        assert!(MarginalDistribution::gamma(1.0, f64::INFINITY).is_err());
        assert!(MarginalDistribution::<f64>::from_moments(Family::Beta, 0.5, 0.3).is_err());
    }

    #[test]
    fn fit_symmetric_data_gives_equal_shapes() {
        let samples: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 0.25 } else { 0.75 }).collect();
        let fit = fit_moments(&samples, Family::Beta).unwrap();
        let (a, b) = fit.params();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert_relative_eq!(fit.mean(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn fit_errors() {
        assert!(fit_moments(&[0.5; 20], Family::Beta).is_err());
        assert!(fit_moments(&[0.1, 0.2, 0.3], Family::Beta).is_err());
        let mut out = vec![0.3, 0.4, 0.5, 0.6, 0.2, 0.3, 0.4, 0.5];
        out[3] = 1.5;
        assert!(fit_moments(&out, Family::Beta).is_err());
        let gamma_data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let g = fit_moments(&gamma_data, Family::Gamma).unwrap();
        assert_relative_eq!(g.mean(), 4.5, epsilon = 1e-12);
        assert_relative_eq!(g.variance(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn hellinger_identity_and_mismatch() {
        assert_eq!(hellinger_1d(&beta(2.0, 5.0), &beta(2.0, 5.0)).unwrap(), 0.0);
        let g = MarginalDistribution::gamma(2.0, 1.0).unwrap();
        assert!(hellinger_1d(&beta(2.0, 5.0), &g).is_err());
    }

    #[test]
    fn hellinger_continuity_at_identity() {
        let mut prev = f64::INFINITY;
        for k in 1..12 {
            let eps = 10f64.powi(-k);
            let h = hellinger_1d(&beta(1.0, 1.0), &beta(1.0, 1.0 + eps)).unwrap();
            assert!(h < prev, "not decreasing at eps={eps}: {h} >= {prev}");
            prev = h;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn gamma_closed_form_matches_quadrature() {
        let a = MarginalDistribution::gamma(11.0f64, 9.0).unwrap();
        let b = MarginalDistribution::gamma(12.5, 8.0).unwrap();
        let closed = hellinger_1d(&a, &b).unwrap();
        let quad = hellinger_sq_quadrature(&a, &b).unwrap().sqrt();
        assert_relative_eq!(closed, quad, epsilon = 1e-9);
    }
}
