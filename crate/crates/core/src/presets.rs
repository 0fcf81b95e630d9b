//! Built-in "washington-like" ground truth used when no characterization data
//! is available: plausible January-2022 magnitudes for a heavy-hex transmon
//! device, and a correlation structure from a three-factor model (device-wide
//! drift, per-class drift, and a readout-versus-gate factor).

use std::str::FromStr;

use crate::copula::{CopulaModel, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::marginals::{Family, MarginalDistribution};
use crate::metrics::{MetricClass, MetricId, METRIC_COUNT};
use crate::scalar::Real;

pub const BASELINE_LABEL: &str = "2022-01";

/// (mean, standard deviation) of each metric; T2 in microseconds.
const MOMENTS: [(f64, f64); METRIC_COUNT] = [
    (0.985, 0.004),
    (0.978, 0.006),
    (0.990, 0.003),
    (0.972, 0.007),
    (0.991, 0.002),
    (0.988, 0.003),
    (110.0, 25.0),
    (95.0, 20.0),
    (130.0, 30.0),
    (85.0, 22.0),
    (120.0, 28.0),
    (0.999_75, 0.000_08),
    (0.999_68, 0.000_08),
    (0.999_80, 0.000_08),
    (0.999_62, 0.000_08),
    (0.999_71, 0.000_08),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaPreset {
    Identity,
    WashingtonLike,
}

impl FromStr for SigmaPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "washington-like" => Ok(Self::WashingtonLike),
            other => Err(Error::InvalidParameter(format!("unknown sigma preset {other:?}"))),
        }
    }
}

fn loadings(class: MetricClass) -> [f64; 3] {
    match class {
        MetricClass::Spam => [0.35, 0.50, 0.30],
        MetricClass::Cnot => [0.40, 0.55, 0.0],
        MetricClass::T2 => [0.30, 0.45, 0.0],
        MetricClass::HGate => [0.35, 0.50, -0.30],
    }
}

/// Correlation matrix of the factor model: the global and readout factors are
/// shared by every metric, the class factor only within a class.
pub fn washington_like_sigma<T: Real>() -> CorrelationMatrix<T> {
    let ids: Vec<MetricId> = MetricId::all().collect();
    let mut entries = vec![T::zero(); METRIC_COUNT * METRIC_COUNT];
    for (i, a) in ids.iter().enumerate() {
        for (j, b) in ids.iter().enumerate() {
            let v = if i == j {
                1.0
            } else {
                let (la, lb) = (loadings(a.class()), loadings(b.class()));
                let class_term = if a.class() == b.class() { la[1] * lb[1] } else { 0.0 };
                la[0] * lb[0] + class_term + la[2] * lb[2]
            };
            entries[i * METRIC_COUNT + j] = T::lit(v);
        }
    }
    CorrelationMatrix::new(METRIC_COUNT, entries).expect("factor-model correlation is valid")
}

pub fn sigma<T: Real>(preset: SigmaPreset) -> CorrelationMatrix<T> {
    match preset {
        SigmaPreset::Identity => CorrelationMatrix::identity(METRIC_COUNT),
        SigmaPreset::WashingtonLike => washington_like_sigma(),
    }
}

/// January-2022-like marginals: Beta for fidelities, Gamma for T2.
pub fn january_2022_marginals<T: Real>() -> Vec<MarginalDistribution<T>> {
    MetricId::all()
        .map(|id| {
            let (mean, sd) = MOMENTS[id.index()];
            let family = if id.class().is_fidelity() { Family::Beta } else { Family::Gamma };
            MarginalDistribution::from_moments(family, T::lit(mean), T::lit(sd * sd))
                .expect("preset moments are valid")
        })
        .collect()
}

pub fn january_2022_like<T: Real>(preset: SigmaPreset) -> CopulaModel<T> {
    CopulaModel::new(january_2022_marginals(), sigma(preset), BASELINE_LABEL).expect("preset model is valid")
}
