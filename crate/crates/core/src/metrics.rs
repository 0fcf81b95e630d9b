//! The sixteen device characterization metrics driving the noise model for the
//! five-register Bernstein–Vazirani test circuit.
//!
//! | id        | class | registers      | unit |
//! |-----------|-------|----------------|------|
//! | x0 – x3   | SPAM fidelity       | 0 – 3 | probability |
//! | x4        | CNOT fidelity       | control 0, target 1 | probability |
//! | x5        | CNOT fidelity       | control 2, target 1 | probability |
//! | x6 – x10  | T2 coherence time   | 0 – 4 | microseconds |
//! | x11 – x15 | Hadamard fidelity   | 0 – 4 | probability |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::marginals::Family;

pub const METRIC_COUNT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MetricClass {
    Spam,
    Cnot,
    T2,
    #[serde(rename = "HGATE")]
    HGate,
}

impl MetricClass {
    /// True for metrics that are probabilities in `[0, 1]`.
    pub fn is_fidelity(self) -> bool {
        !matches!(self, MetricClass::T2)
    }

    /// Whether `value` lies in the metric's physical domain.
    pub fn in_domain(self, value: f64) -> bool {
        if self.is_fidelity() {
            (0.0..=1.0).contains(&value)
        } else {
            value > 0.0 && value.is_finite()
        }
    }
}

/// Index of one of the sixteen metrics, `x0` through `x15`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MetricId(u8);

impl MetricId {
    pub const SPAM: [MetricId; 4] = [MetricId(0), MetricId(1), MetricId(2), MetricId(3)];
    pub const CNOT: [MetricId; 2] = [MetricId(4), MetricId(5)];
    pub const T2: [MetricId; 5] = [MetricId(6), MetricId(7), MetricId(8), MetricId(9), MetricId(10)];
    pub const HGATE: [MetricId; 5] = [MetricId(11), MetricId(12), MetricId(13), MetricId(14), MetricId(15)];

    pub fn new(index: usize) -> Option<Self> {
        (index < METRIC_COUNT).then_some(MetricId(index as u8))
    }

    pub fn all() -> impl Iterator<Item = MetricId> {
        (0..METRIC_COUNT as u8).map(MetricId)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn class(self) -> MetricClass {
        match self.0 {
            0..=3 => MetricClass::Spam,
            4 | 5 => MetricClass::Cnot,
            6..=10 => MetricClass::T2,
            _ => MetricClass::HGate,
        }
    }

    /// Registers the metric refers to; `(control, target)` for CNOTs.
    pub fn registers(self) -> Vec<usize> {
        match self.0 {
            i @ 0..=3 => vec![i as usize],
            4 => vec![0, 1],
            5 => vec![2, 1],
            i @ 6..=10 => vec![i as usize - 6],
            i => vec![i as usize - 11],
        }
    }

    pub fn description(self) -> String {
        let regs = self.registers();
        match self.class() {
            MetricClass::Spam => format!("SPAM fidelity, register {}", regs[0]),
            MetricClass::Cnot => format!("CNOT fidelity, control {}, target {}", regs[0], regs[1]),
            MetricClass::T2 => format!("T2 time (us), register {}", regs[0]),
            MetricClass::HGate => format!("H fidelity, register {}", regs[0]),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('x')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok())
            .and_then(MetricId::new)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric id {s:?}")))
    }
}

impl TryFrom<String> for MetricId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<MetricId> for String {
    fn from(id: MetricId) -> String {
        id.to_string()
    }
}

/// Marginal family used for each metric class when fitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyAssignment {
    pub spam: Family,
    pub cnot: Family,
    pub t2: Family,
    pub hgate: Family,
}

impl Default for FamilyAssignment {
    fn default() -> Self {
        Self {
            spam: Family::Beta,
            cnot: Family::Beta,
            t2: Family::Gamma,
            hgate: Family::Beta,
        }
    }
}

impl FamilyAssignment {
    pub fn family_for(&self, class: MetricClass) -> Family {
        match class {
            MetricClass::Spam => self.spam,
            MetricClass::Cnot => self.cnot,
            MetricClass::T2 => self.t2,
            MetricClass::HGate => self.hgate,
        }
    }
}
