//! Stability of the noise-averaged observable across epochs, and the bound that
//! ties it to the Hellinger distance between the epochs' noise laws.
//!
//! For a bounded observable `|⟨O_x⟩| ≤ c`, two epochs whose noise laws are at
//! Hellinger distance `H` satisfy
//!
//! ```text
//! s = |⟨O⟩₁ − ⟨O⟩₂| ≤ 2cH√(2 − H²)
//! ```
//!
//! and inverting at a tolerance `s_tol` gives the largest admissible distance
//! `H_max = √(1 − √(1 − φ))`, `φ = s_tol² / 4c²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{derive_channels, ChannelConfig};
use crate::copula::{hellinger_nd, CopulaModel, HellingerEstimate, ParameterSample};
use crate::error::{Error, Result};
use crate::metrics::MetricId;
use crate::qsim::{build_bv_circuit, expectation, sample_shots, simulate, CircuitSpec, Secret};
use crate::rng::derive_seed;
use crate::scalar::Real;

pub const SCHEMA_VERSION: u32 = 1;

/// Proposals tried by [`perturb_model`] before giving up.
pub const MAX_PERTURB_ATTEMPTS: usize = 100;

/// `s(t₁, t₂) = |o₁ − o₂|`.
pub fn stability_metric<T: Real>(o1: T, o2: T) -> T {
    (o1 - o2).abs()
}

/// Largest Hellinger distance compatible with a stability tolerance `s_tol`
/// for an observable bounded by `c`.
pub fn hellinger_max<T: Real>(s_tol: T, c: T) -> Result<T> {
    if !(c > T::zero() && c.is_finite()) {
        return Err(Error::Domain(format!("observable bound c = {c} must be positive")));
    }
    if !(s_tol >= T::zero()) {
        return Err(Error::Domain(format!("tolerance s_tol = {s_tol} must be non-negative")));
    }
    let phi = s_tol * s_tol / (T::lit(4.0) * c * c);
    if phi > T::one() {
        return Err(Error::Domain(format!("s_tol = {s_tol} exceeds 2c = {} (phi = {phi} > 1)", c + c)));
    }
    // 1 − √(1 − φ) rewritten as φ / (1 + √(1 − φ)) to avoid cancellation.
    Ok((phi / (T::one() + (T::one() - phi).sqrt())).sqrt())
}

/// Upper bound `2cH√(2 − H²)` on the stability metric at distance `h`.
pub fn stability_bound<T: Real>(h: T, c: T) -> T {
    T::lit(2.0) * c * h * (T::lit(2.0) - h * h).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ExperimentConfig<T> {
    pub s_tol: T,
    /// Bound on `|⟨O_x⟩|`; 1 for the projector observable.
    pub c: T,
    pub hellinger_samples: usize,
    pub circuit_samples: usize,
    /// Shots per circuit sample; 0 uses the exact outcome probability.
    pub shots: u64,
    pub months: usize,
    /// Relative half-width of the uniform parameter perturbation.
    pub perturb_step: T,
    pub perturb_metric: MetricId,
    pub seed: u64,
    pub channels: ChannelConfig<T>,
    pub secret: Secret,
}

impl<T: Real> Default for ExperimentConfig<T> {
    fn default() -> Self {
        Self {
            s_tol: T::lit(0.2),
            c: T::one(),
            hellinger_samples: 100_000,
            circuit_samples: 100,
            shots: 8192,
            months: 15,
            perturb_step: T::lit(0.05),
            perturb_metric: MetricId::CNOT[1],
            seed: 0,
            channels: ChannelConfig::default(),
            secret: "0011".parse().expect("valid default secret"),
        }
    }
}

impl<T: Real> ExperimentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        hellinger_max(self.s_tol, self.c)?;
        if !(self.s_tol > T::zero()) {
            return Err(Error::Domain("s_tol must be positive".into()));
        }
        if self.circuit_samples == 0 || self.hellinger_samples == 0 {
            return Err(Error::InvalidParameter("sample counts must be at least 1".into()));
        }
        if !(self.perturb_step >= T::zero() && self.perturb_step.is_finite()) {
            return Err(Error::InvalidParameter("perturb_step must be non-negative".into()));
        }
        self.channels.durations.validate()
    }
}

/// Monte Carlo estimate of the noise-averaged observable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ObservableEstimate<T> {
    pub mean: T,
    pub stderr: T,
    /// Largest `|⟨O_x⟩|` seen among the samples.
    pub max_abs: T,
    pub samples: usize,
}

/// `⟨O_x⟩` at one metric vector.
pub fn observable_at<T: Real>(x: &ParameterSample<T>, circuit: &CircuitSpec, channels: &ChannelConfig<T>) -> Result<T> {
    let noise = derive_channels(x, channels)?;
    Ok(expectation(&simulate(circuit, &noise)?, &circuit.secret))
}

/// Average of `⟨O_x⟩` over `n` draws from `model`. With `shots > 0`, each
/// `⟨O_x⟩` is replaced by the observed frequency of the secret in that many
/// shots.
pub fn mean_observable<T: Real>(
    model: &CopulaModel<T>,
    circuit: &CircuitSpec,
    channels: &ChannelConfig<T>,
    n: usize,
    shots: u64,
    seed: u64,
) -> Result<ObservableEstimate<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one noise sample".into()));
    }
    let samples = model.sample(n, seed);
    let values = samples
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let noise = derive_channels(x, channels)?;
            let dist = simulate(circuit, &noise)?;
            if shots == 0 {
                Ok(expectation(&dist, &circuit.secret))
            } else {
                let counts = sample_shots(&dist, shots, derive_seed(seed, "shots", i as u64))?;
                Ok(T::lit(counts.frequency(circuit.secret.index())))
            }
        })
        .collect::<Result<Vec<T>>>()?;
    let nf = T::from_count(n);
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / nf;
    let stderr = if n > 1 {
        let ss = values.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean));
        (ss / (nf - T::one()) / nf).sqrt()
    } else {
        T::zero()
    };
    let max_abs = values.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    Ok(ObservableEstimate { mean, stderr, max_abs, samples: n })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbSettings<T> {
    /// Index of the marginal to perturb.
    pub metric: usize,
    pub step: T,
    pub h_cap: T,
    pub hellinger_samples: usize,
}

/// An accepted perturbation and its measured distance from the baseline.
#[derive(Clone, Debug)]
pub struct Perturbation<T> {
    pub model: CopulaModel<T>,
    pub hellinger: HellingerEstimate<T>,
    pub attempts: usize,
}

/// Randomly rescales both parameters of one marginal by `1 + ε`,
/// `ε ~ U[−step, step]`, until the Hellinger distance to `baseline` (point
/// estimate plus one standard error) is at most `h_cap`.
pub fn perturb_model<T: Real>(
    baseline: &CopulaModel<T>,
    settings: &PerturbSettings<T>,
    seed: u64,
) -> Result<Perturbation<T>> {
    if !(settings.h_cap > T::zero() && settings.h_cap <= T::one()) {
        return Err(Error::InvalidParameter(format!("h_cap {} outside (0, 1]", settings.h_cap)));
    }
    if !(settings.step >= T::zero() && settings.step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step {} must be non-negative", settings.step)));
    }
    let Some(current) = baseline.marginals().get(settings.metric).copied() else {
        return Err(Error::InvalidParameter(format!("metric index {} out of range", settings.metric)));
    };
    if settings.step == T::zero() {
        return Ok(Perturbation {
            model: baseline.clone(),
            hellinger: HellingerEstimate::zero(settings.hellinger_samples),
            attempts: 0,
        });
    }
    let step = settings.step.as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p0, p1) = current.params();
    for attempt in 1..=MAX_PERTURB_ATTEMPTS {
        let e0 = T::lit(rng.random_range(-step..=step));
        let e1 = T::lit(rng.random_range(-step..=step));
        let Ok(proposal) = current.with_params(p0 * (T::one() + e0), p1 * (T::one() + e1)) else {
            continue;
        };
        let candidate = baseline.with_marginal(settings.metric, proposal)?;
        let h = hellinger_nd(
            baseline,
            &candidate,
            settings.hellinger_samples,
            derive_seed(seed, "hellinger", attempt as u64),
        )?;
        if h.estimate + h.stderr <= settings.h_cap {
            return Ok(Perturbation { model: candidate, hellinger: h, attempts: attempt });
        }
    }
    Err(Error::PerturbationExhausted { attempts: MAX_PERTURB_ATTEMPTS })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EpochResult<T> {
    pub label: String,
    pub hellinger: T,
    pub hellinger_stderr: T,
    pub mean_obs: T,
    pub mean_obs_stderr: T,
    /// `|⟨O⟩_epoch − ⟨O⟩_baseline|`
    pub stability: T,
    /// `2cH√(2 − H²)` at the measured `H`.
    pub bound: T,
    /// `stability ≤ s_tol`
    pub satisfied: bool,
}

impl<T: Real> EpochResult<T> {
    /// Slack of the bound at the upper confidence edges:
    /// `bound(H + 3σ_H) + 3σ_s − s`, non-negative when the bound holds.
    pub fn bound_slack(&self, baseline_stderr: T, c: T) -> T {
        let three = T::lit(3.0);
        let h_hi = (self.hellinger + three * self.hellinger_stderr).min(T::one());
        let sigma_s = (self.mean_obs_stderr * self.mean_obs_stderr + baseline_stderr * baseline_stderr).sqrt();
        stability_bound(h_hi, c) + three * sigma_s - self.stability
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BaselineResult<T> {
    pub label: String,
    pub mean_obs: T,
    pub mean_obs_stderr: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ReportSummary<T> {
    pub epochs: usize,
    pub hellinger_max: T,
    pub max_hellinger: T,
    pub max_stability: T,
    pub mean_stability: T,
    pub max_observable: T,
    pub all_satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StabilityReport<T> {
    pub schema_version: u32,
    pub config: ExperimentConfig<T>,
    pub baseline: BaselineResult<T>,
    pub epochs: Vec<EpochResult<T>>,
    pub summary: ReportSummary<T>,
}

/// Label `k` months after a `YYYY-MM` label, or `"{label}+k"` otherwise.
pub fn month_label(base: &str, k: usize) -> String {
    let parsed = base
        .split_once('-')
        .and_then(|(y, m)| Some((y.parse::<i64>().ok()?, m.parse::<i64>().ok()?)))
        .filter(|&(_, m)| (1..=12).contains(&m) && base.len() == 7);
    match parsed {
        Some((y, m)) => {
            let total = y * 12 + (m - 1) + k as i64;
            format!("{:04}-{:02}", total.div_euclid(12), total.rem_euclid(12) + 1)
        }
        None => format!("{base}+{k}"),
    }
}

/// Runs the month-by-month perturbation experiment against `baseline`.
pub fn run_experiment<T: Real>(config: &ExperimentConfig<T>, baseline: &CopulaModel<T>) -> Result<StabilityReport<T>> {
    config.validate()?;
    let h_cap = hellinger_max(config.s_tol, config.c)?;
    let circuit = build_bv_circuit(&config.secret);
    let observe = |model: &CopulaModel<T>, seed: u64| -> Result<ObservableEstimate<T>> {
        let est = mean_observable(model, &circuit, &config.channels, config.circuit_samples, config.shots, seed)?;
        if est.max_abs > config.c + T::lit(1e-12) {
            return Err(Error::ObservableBound { observed: est.max_abs.as_f64(), c: config.c.as_f64() });
        }
        Ok(est)
    };

    let base = observe(baseline, derive_seed(config.seed, "observable", 0))?;
    let mut max_observable = base.max_abs;
    let settings = PerturbSettings {
        metric: config.perturb_metric.index(),
        step: config.perturb_step,
        h_cap,
        hellinger_samples: config.hellinger_samples,
    };

    let mut epochs = Vec::with_capacity(config.months);
    for k in 1..=config.months {
        let label = month_label(baseline.epoch_label(), k);
        let perturbed = perturb_model(baseline, &settings, derive_seed(config.seed, "perturb", k as u64))?;
        let model = perturbed.model.with_label(label.clone());
        let obs = observe(&model, derive_seed(config.seed, "observable", k as u64))?;
        max_observable = max_observable.max(obs.max_abs);
        let stability = stability_metric(obs.mean, base.mean);
        let h = perturbed.hellinger;
        epochs.push(EpochResult {
            label,
            hellinger: h.estimate,
            hellinger_stderr: h.stderr,
            mean_obs: obs.mean,
            mean_obs_stderr: obs.stderr,
            stability,
            bound: stability_bound(h.estimate, config.c),
            satisfied: stability <= config.s_tol,
        });
    }

    let count = epochs.len();
    let max_hellinger = epochs.iter().fold(T::zero(), |a, e| a.max(e.hellinger));
    let max_stability = epochs.iter().fold(T::zero(), |a, e| a.max(e.stability));
    let mean_stability = if count > 0 {
        epochs.iter().fold(T::zero(), |a, e| a + e.stability) / T::from_count(count)
    } else {
        T::zero()
    };
    let summary = ReportSummary {
        epochs: count,
        hellinger_max: h_cap,
        max_hellinger,
        max_stability,
        mean_stability,
        max_observable,
        all_satisfied: epochs.iter().all(|e| e.satisfied),
    };
    Ok(StabilityReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        baseline: BaselineResult {
            label: baseline.epoch_label().to_string(),
            mean_obs: base.mean,
            mean_obs_stderr: base.stderr,
        },
        epochs,
        summary,
    })
}
