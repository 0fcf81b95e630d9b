//! Exact density-matrix simulation of the Bernstein–Vazirani test circuit.
//!
//! Registers `0..n` hold the secret's bits, register `n` is the ancilla. Only
//! data registers are measured. Bitstrings are written with register 0 first,
//! and outcome index bit `i` is register `i`.

mod density;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

pub use density::{hadamard, pauli_z, rz, DensityMatrix, Unitary2, MAX_QUBITS};

use crate::channels::{self, NoiseChannelSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Longest secret the simulator accepts (data registers plus ancilla ≤ 9).
pub const MAX_SECRET_LEN: usize = 8;

/// Hidden bitstring `r`, register 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Secret(Vec<bool>);

impl Secret {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_SECRET_LEN {
            return Err(Error::InvalidParameter(format!(
                "secret length {} outside 1..={MAX_SECRET_LEN}",
                bits.len()
            )));
        }
        Ok(Self(bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    /// Outcome index with bit `i` = register `i`.
    pub fn index(&self) -> usize {
        self.0.iter().enumerate().fold(0, |acc, (i, &b)| acc | (usize::from(b) << i))
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

impl FromStr for Secret {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!("invalid secret character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }
}

impl fmt::Display for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl TryFrom<String> for Secret {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Secret> for String {
    fn from(s: Secret) -> String {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
}

/// Gate list for one Bernstein–Vazirani instance.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    pub secret: Secret,
    pub ancilla: usize,
    pub gates: Vec<Gate>,
    pub measured: Vec<usize>,
}

impl CircuitSpec {
    pub fn registers(&self) -> usize {
        self.ancilla + 1
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }
}

/// Standard construction: ancilla to `|−⟩` by H then Z, H on every data
/// register, `CNOT(data_i → ancilla)` for each set bit, H on every data
/// register, measure the data registers.
pub fn build_bv_circuit(secret: &Secret) -> CircuitSpec {
    let n = secret.len();
    let ancilla = n;
    let mut gates = vec![Gate::H(ancilla), Gate::Z(ancilla)];
    gates.extend((0..n).map(Gate::H));
    gates.extend(secret.ones().map(|i| Gate::Cnot { control: i, target: ancilla }));
    gates.extend((0..n).map(Gate::H));
    CircuitSpec { secret: secret.clone(), ancilla, gates, measured: (0..n).collect() }
}

/// Probabilities over measured-register bitstrings.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution<T> {
    bits: usize,
    probs: Vec<T>,
}

impl<T: Real> OutcomeDistribution<T> {
    pub fn new(bits: usize, probs: Vec<T>) -> Result<Self> {
        if probs.len() != 1 << bits {
            return Err(Error::DimensionMismatch { expected: 1 << bits, actual: probs.len() });
        }
        if probs.iter().any(|&p| !(p >= T::zero())) {
            return Err(Error::InvalidParameter("negative or NaN probability".into()));
        }
        let total = probs.iter().fold(T::zero(), |a, &p| a + p);
        if (total - T::one()).abs() > T::lit(1e-10) {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { bits, probs })
    }

    /// All mass on one outcome.
    pub fn delta(bits: usize, outcome: usize) -> Self {
        let mut probs = vec![T::zero(); 1 << bits];
        probs[outcome] = T::one();
        Self { bits, probs }
    }

    pub fn uniform(bits: usize) -> Self {
        let n = 1usize << bits;
        Self { bits, probs: vec![T::one() / T::from_count(n); n] }
    }

    pub(crate) fn from_raw(bits: usize, probs: Vec<T>) -> Self {
        Self { bits, probs }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, outcome: usize) -> T {
        self.probs[outcome]
    }

    pub fn total(&self) -> T {
        self.probs.iter().fold(T::zero(), |a, &p| a + p)
    }

    /// Bitstring label of an outcome index, register 0 first.
    pub fn label(&self, outcome: usize) -> String {
        (0..self.bits).map(|i| if outcome >> i & 1 == 1 { '1' } else { '0' }).collect()
    }
}

/// Exact noisy evolution of `circuit`.
///
/// After each ideal gate: coherent phase error (H gates), per-qubit
/// depolarizing on both CNOT registers, then dephasing on every register the
/// gate touched. Readout flips act on the final outcome distribution.
pub fn simulate<T: Real>(circuit: &CircuitSpec, noise: &NoiseChannelSet<T>) -> Result<OutcomeDistribution<T>> {
    let cnots = circuit.cnot_count();
    if noise.cnot_depol.len() < cnots {
        return Err(Error::NoiseMapMismatch(format!(
            "circuit has {cnots} CNOTs but only {} depolarizing parameters",
            noise.cnot_depol.len()
        )));
    }
    noise.validate()?;
    let mut rho = DensityMatrix::zero_state(circuit.registers())?;
    let mut cnot_index = 0;
    for gate in &circuit.gates {
        match *gate {
            Gate::H(q) => {
                rho.apply_unitary(q, &hadamard());
                channels::apply_coherent_phase(&mut rho, q, noise.h_phase(q));
                channels::apply_phase_flip(&mut rho, q, noise.dephasing(q).single);
            }
            Gate::Z(q) => {
                rho.apply_unitary(q, &pauli_z());
                channels::apply_phase_flip(&mut rho, q, noise.dephasing(q).single);
            }
            Gate::Cnot { control, target } => {
                rho.apply_cnot(control, target);
                let p = noise.cnot_depol[cnot_index];
                cnot_index += 1;
                channels::apply_depolarizing(&mut rho, control, p);
                channels::apply_depolarizing(&mut rho, target, p);
                channels::apply_phase_flip(&mut rho, control, noise.dephasing(control).two_qubit);
                channels::apply_phase_flip(&mut rho, target, noise.dephasing(target).two_qubit);
            }
        }
    }
    let diag = rho.diagonal();
    let bits = circuit.measured.len();
    let mut probs = vec![T::zero(); 1 << bits];
    for (basis, &p) in diag.iter().enumerate() {
        let outcome = circuit
            .measured
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &reg)| acc | ((basis >> reg & 1) << k));
        probs[outcome] = probs[outcome] + p.max(T::zero());
    }
    let flips: Vec<_> = circuit.measured.iter().map(|&reg| noise.readout(reg)).collect();
    let ideal = OutcomeDistribution::from_raw(bits, probs);
    Ok(channels::apply_readout_flip(&ideal, &flips))
}

/// `⟨Π_r⟩`: the probability of reading the secret.
pub fn expectation<T: Real>(dist: &OutcomeDistribution<T>, secret: &Secret) -> T {
    dist.prob(secret.index())
}

/// Multinomial shot counts, indexed like the distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotCounts {
    pub bits: usize,
    pub counts: Vec<u64>,
}

impl ShotCounts {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequency(&self, outcome: usize) -> f64 {
        self.counts[outcome] as f64 / self.shots() as f64
    }
}

/// Draws `shots` measurement records from `dist` (sequential conditional
/// binomials, deterministic per seed).
pub fn sample_shots<T: Real>(dist: &OutcomeDistribution<T>, shots: u64, seed: u64) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs: Vec<f64> = dist.probabilities().iter().map(|p| p.as_f64().max(0.0)).collect();
    let mut remaining_mass: f64 = probs.iter().sum();
    let mut remaining = shots;
    let mut counts = vec![0u64; probs.len()];
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k == last {
            counts[k] = remaining;
            break;
        }
        let q = if remaining_mass > 0.0 { (p / remaining_mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q)
            .map_err(|e| Error::InvalidParameter(format!("binomial draw: {e}")))?
            .sample(&mut rng);
        counts[k] = draw;
        remaining -= draw;
        remaining_mass -= p;
    }
    Ok(ShotCounts { bits: dist.bits(), counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn secret(s: &str) -> Secret {
        s.parse().unwrap()
    }

    #[test]
    fn secret_parsing() {
        let r = secret("0011");
        assert_eq!(r.len(), 4);
        assert_eq!(r.index(), 0b1100);
        assert_eq!(r.to_string(), "0011");
        assert!("".parse::<Secret>().is_err());
        assert!("012".parse::<Secret>().is_err());
        assert!("000000000".parse::<Secret>().is_err());
    }

    #[test]
    fn circuit_shapes() {
        assert_eq!(build_bv_circuit(&secret("0000")).cnot_count(), 0);
        let c = build_bv_circuit(&secret("0011"));
        assert_eq!(c.cnot_count(), 2);
        assert_eq!(c.registers(), 5);
        assert!(c.gates.contains(&Gate::Cnot { control: 2, target: 4 }));
        assert!(c.gates.contains(&Gate::Cnot { control: 3, target: 4 }));
        assert_eq!(&c.gates[..2], &[Gate::H(4), Gate::Z(4)]);
        assert_eq!(c.measured, vec![0, 1, 2, 3]);
        assert_eq!(build_bv_circuit(&secret("1111")).cnot_count(), 4);
    }

    #[test]
    fn expectation_examples() {
        let r = secret("0110");
        let d = OutcomeDistribution::<f64>::delta(4, r.index());
        assert_eq!(expectation(&d, &r), 1.0);
        let u = OutcomeDistribution::<f64>::uniform(4);
        assert!((expectation(&u, &r) - 1.0 / 16.0).abs() < 1e-15);
        let mut probs = vec![0.0f64; 16];
        probs[r.index()] = 0.9;
        probs[0] = 0.1;
        let d = OutcomeDistribution::new(4, probs).unwrap();
        assert!((expectation(&d, &r) - 0.9).abs() < 1e-15);
        assert_eq!(d.label(r.index()), "0110");
    }

    #[test]
    fn outcome_distribution_validation() {
        assert!(OutcomeDistribution::<f64>::new(1, vec![0.5, 0.6]).is_err());
        assert!(OutcomeDistribution::<f64>::new(1, vec![1.5, -0.5]).is_err());
        assert!(OutcomeDistribution::<f64>::new(2, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn shots_on_delta_and_determinism() {
        let d = OutcomeDistribution::<f64>::delta(4, 12);
        let c = sample_shots(&d, 8192, 3).unwrap();
        assert_eq!(c.counts[12], 8192);
        let u = OutcomeDistribution::<f64>::uniform(3);
        assert_eq!(sample_shots(&u, 1000, 9).unwrap(), sample_shots(&u, 1000, 9).unwrap());
        assert_eq!(sample_shots(&u, 1000, 9).unwrap().shots(), 1000);
        assert!(sample_shots(&u, 0, 9).is_err());
    }

    #[test]
    fn shots_binomial_spread() {
        let u = OutcomeDistribution::<f64>::uniform(1);
        let n = 100_000u64;
        let c = sample_shots(&u, n, 11).unwrap();
        let sd = (0.25 * n as f64).sqrt();
        assert!((c.counts[0] as f64 - 50_000.0).abs() <= 3.0 * sd);
        assert_eq!(c.counts[0] + c.counts[1], n);
    }
}
