//! Noise channels derived from one sampled metric vector.
//!
//! | metric class | channel | parameter |
//! |---|---|---|
//! | SPAM fidelity `x` | readout bit flip | `p = 1 − x`, optionally split asymmetrically |
//! | CNOT fidelity `x` | depolarizing on control and target | `(1 − p)² = x` |
//! | H fidelity `x` | `R_z(θ)` after the Hadamard | `cos²(θ/2) = x` |
//! | T2 | phase flip after each gate | `p_z = (1 − e^{−t/T2}) / 2` |

use serde::{Deserialize, Serialize};

use crate::copula::ParameterSample;
use crate::error::{Error, Result};
use crate::metrics::{MetricId, METRIC_COUNT};
use crate::qsim::{rz, DensityMatrix, OutcomeDistribution};
use crate::scalar::Real;

/// Gate lengths used for dephasing, in nanoseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GateDurations<T> {
    pub single_qubit_ns: T,
    pub two_qubit_ns: T,
}

impl<T: Real> Default for GateDurations<T> {
    fn default() -> Self {
        Self { single_qubit_ns: T::lit(35.0), two_qubit_ns: T::lit(300.0) }
    }
}

impl<T: Real> GateDurations<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v > T::zero() && v.is_finite();
        if ok(self.single_qubit_ns) && ok(self.two_qubit_ns) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("gate durations must be positive".into()))
        }
    }
}

/// Knobs of the metric-to-channel mapping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ChannelConfig<T> {
    pub durations: GateDurations<T>,
    /// Ratio `r = p(0→1) / p(1→0)` of the readout flips; `1` is symmetric.
    pub readout_asymmetry: T,
    /// CNOT metric slot (0 → x4, 1 → x5) used by the k-th CNOT of the circuit.
    pub cnot_slots: Vec<usize>,
}

impl<T: Real> Default for ChannelConfig<T> {
    fn default() -> Self {
        Self { durations: GateDurations::default(), readout_asymmetry: T::one(), cnot_slots: vec![0, 1] }
    }
}

/// Readout error probabilities of one register.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ReadoutFlip<T> {
    /// P(read 1 | state 0)
    pub p01: T,
    /// P(read 0 | state 1)
    pub p10: T,
}

impl<T: Real> ReadoutFlip<T> {
    pub fn symmetric(p: T) -> Self {
        Self { p01: p, p10: p }
    }
}

/// Phase-flip probabilities after single- and two-qubit gates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Dephasing<T> {
    pub single: T,
    pub two_qubit: T,
}

/// Concrete channel parameters for one noise realization. Registers missing
/// from a vector are noiseless.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NoiseChannelSet<T> {
    /// Per register.
    pub spam_flip: Vec<ReadoutFlip<T>>,
    /// Per CNOT of the circuit, in gate order.
    pub cnot_depol: Vec<T>,
    /// Coherent phase angle after H, per register.
    pub h_phase: Vec<T>,
    /// Per register.
    pub dephasing: Vec<Dephasing<T>>,
}

impl<T: Real> NoiseChannelSet<T> {
    /// Identity noise for a circuit with `cnots` CNOT gates.
    pub fn noiseless(cnots: usize) -> Self {
        Self { cnot_depol: vec![T::zero(); cnots], ..Self::default() }
    }

    pub fn readout(&self, register: usize) -> ReadoutFlip<T> {
        self.spam_flip.get(register).copied().unwrap_or_default()
    }

    pub fn h_phase(&self, register: usize) -> T {
        self.h_phase.get(register).copied().unwrap_or_else(T::zero)
    }

    pub fn dephasing(&self, register: usize) -> Dephasing<T> {
        self.dephasing.get(register).copied().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |what: &str, p: T| {
            if (T::zero()..=T::one()).contains(&p) {
                Ok(())
            } else {
                Err(Error::Domain(format!("{what} probability {p} outside [0, 1]")))
            }
        };
        for f in &self.spam_flip {
            prob("readout flip", f.p01)?;
            prob("readout flip", f.p10)?;
        }
        for &p in &self.cnot_depol {
            prob("depolarizing", p)?;
        }
        for d in &self.dephasing {
            prob("dephasing", d.single)?;
            prob("dephasing", d.two_qubit)?;
        }
        for &theta in &self.h_phase {
            if !(theta >= T::zero() && theta <= T::PI()) {
                return Err(Error::Domain(format!("phase angle {theta} outside [0, pi]")));
            }
        }
        Ok(())
    }
}

fn fidelity<T: Real>(x: &ParameterSample<T>, id: MetricId) -> Result<T> {
    let v = x[id.index()];
    if v >= T::zero() && v <= T::one() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{id} = {v} is not a fidelity in [0, 1]")))
    }
}

/// Dephasing probability of a gate of length `t_ns` on a register with
/// coherence time `t2_us`.
pub fn dephasing_probability<T: Real>(t_ns: T, t2_us: T) -> T {
    let t_us = t_ns / T::lit(1000.0);
    -(-t_us / t2_us).exp_m1() * T::lit(0.5)
}

/// Coherent phase angle with `|⟨+|R_z(θ)|+⟩|² = fidelity`.
pub fn phase_angle<T: Real>(fidelity: T) -> T {
    T::lit(2.0) * fidelity.sqrt().acos()
}

/// Maps a sampled metric vector to channel parameters.
pub fn derive_channels<T: Real>(x: &ParameterSample<T>, config: &ChannelConfig<T>) -> Result<NoiseChannelSet<T>> {
    if x.len() != METRIC_COUNT {
        return Err(Error::DimensionMismatch { expected: METRIC_COUNT, actual: x.len() });
    }
    config.durations.validate()?;
    let r = config.readout_asymmetry;
    if !(r > T::zero() && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("readout asymmetry {r} must be positive")));
    }
    let two = T::lit(2.0);
    let spam_flip = MetricId::SPAM
        .iter()
        .map(|&id| {
            let err = T::one() - fidelity(x, id)?;
            Ok(ReadoutFlip { p01: err * two * r / (T::one() + r), p10: err * two / (T::one() + r) })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_slot = MetricId::CNOT
        .iter()
        .map(|&id| Ok(T::one() - fidelity(x, id)?.sqrt()))
        .collect::<Result<Vec<T>>>()?;
    let cnot_depol = config
        .cnot_slots
        .iter()
        .map(|&slot| {
            per_slot
                .get(slot)
                .copied()
                .ok_or_else(|| Error::NoiseMapMismatch(format!("CNOT slot {slot} does not exist")))
        })
        .collect::<Result<Vec<T>>>()?;
    let h_phase = MetricId::HGATE
        .iter()
        .map(|&id| Ok(phase_angle(fidelity(x, id)?)))
        .collect::<Result<Vec<T>>>()?;
    let dephasing = MetricId::T2
        .iter()
        .map(|&id| {
            let t2 = x[id.index()];
            if !(t2 > T::zero()) {
                return Err(Error::Domain(format!("{id} = {t2} is not a positive T2 time")));
            }
            Ok(Dephasing {
                single: dephasing_probability(config.durations.single_qubit_ns, t2),
                two_qubit: dephasing_probability(config.durations.two_qubit_ns, t2),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let set = NoiseChannelSet { spam_flip, cnot_depol, h_phase, dephasing };
    set.validate()?;
    Ok(set)
}

/// `ρ ← (1 − p) ρ + (p/3)(XρX + YρY + ZρZ)` on `target`.
pub fn apply_depolarizing<T: Real>(rho: &mut DensityMatrix<T>, target: usize, p: T) {
    let third = p / T::lit(3.0);
    rho.apply_pauli_channel(target, third, third, third);
}

/// `ρ ← (1 − p_z) ρ + p_z ZρZ` on `target`.
pub fn apply_phase_flip<T: Real>(rho: &mut DensityMatrix<T>, target: usize, p_z: T) {
    debug_assert!(p_z <= T::lit(0.5) + T::epsilon(), "dephasing probability above 1/2");
    rho.apply_pauli_channel(target, T::zero(), T::zero(), p_z);
}

/// `ρ ← R_z(θ) ρ R_z(θ)†` on `target`.
pub fn apply_coherent_phase<T: Real>(rho: &mut DensityMatrix<T>, target: usize, theta: T) {
    if theta != T::zero() {
        rho.apply_unitary(target, &rz(theta));
    }
}

/// Independently flips each measured bit `k` according to `flips[k]`.
pub fn apply_readout_flip<T: Real>(dist: &OutcomeDistribution<T>, flips: &[ReadoutFlip<T>]) -> OutcomeDistribution<T> {
    let bits = dist.bits();
    let mut probs = dist.probabilities().to_vec();
    for (k, f) in flips.iter().enumerate().take(bits) {
        if f.p01 == T::zero() && f.p10 == T::zero() {
            continue;
        }
        let m = 1usize << k;
        for lo in (0..probs.len()).filter(|i| i & m == 0) {
            let hi = lo | m;
            let (p0, p1) = (probs[lo], probs[hi]);
            probs[lo] = p0 * (T::one() - f.p01) + p1 * f.p10;
            probs[hi] = p0 * f.p01 + p1 * (T::one() - f.p10);
        }
    }
    OutcomeDistribution::from_raw(bits, probs)
}
