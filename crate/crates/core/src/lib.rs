//! Device-reliability and program-stability analysis for noisy quantum circuits.
//!
//! The crate models the day-to-day variation of sixteen device characterization
//! metrics as a Gaussian copula over Beta/Gamma marginals, turns sampled metric
//! vectors into noise channels, simulates a Bernstein–Vazirani circuit exactly
//! on density matrices, and measures how far the noise-averaged success
//! probability drifts between epochs compared with the Hellinger distance
//! between the epochs' noise laws.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`, which is what the experiment pipeline,
//! the CSV ingestion and the JSON report use.

pub mod channels;
pub mod copula;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod marginals;
pub mod metrics;
pub mod presets;
pub mod qsim;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stability;

pub use error::{Error, Result};
pub use marginals::Family;
pub use metrics::{FamilyAssignment, MetricClass, MetricId, METRIC_COUNT};
pub use scalar::Real;

pub type MarginalDistribution = marginals::MarginalDistribution<f64>;
pub type CorrelationMatrix = copula::CorrelationMatrix<f64>;
pub type CopulaModel = copula::CopulaModel<f64>;
pub type ParameterSample = copula::ParameterSample<f64>;
pub type HellingerEstimate = copula::HellingerEstimate<f64>;
pub type GateDurations = channels::GateDurations<f64>;
pub type ChannelConfig = channels::ChannelConfig<f64>;
pub type NoiseChannelSet = channels::NoiseChannelSet<f64>;
pub type ReadoutFlip = channels::ReadoutFlip<f64>;
pub type DensityMatrix = qsim::DensityMatrix<f64>;
pub type OutcomeDistribution = qsim::OutcomeDistribution<f64>;
pub type ExperimentConfig = stability::ExperimentConfig<f64>;
pub type EpochResult = stability::EpochResult<f64>;
pub type StabilityReport = stability::StabilityReport<f64>;

pub type MarginalDistribution32 = marginals::MarginalDistribution<f32>;
pub type CopulaModel32 = copula::CopulaModel<f32>;
pub type DensityMatrix32 = qsim::DensityMatrix<f32>;

pub use qsim::{CircuitSpec, Gate, Secret, ShotCounts};
