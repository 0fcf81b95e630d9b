use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// 2×2 complex matrix, row-major.
pub type Unitary2<T> = [[Complex<T>; 2]; 2];

/// Mixed state of `n` qubits as a dense `2ⁿ × 2ⁿ` matrix (row-major).
///
/// Basis index bit `q` holds the value of register `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    qubits: usize,
    dim: usize,
    data: Vec<Complex<T>>,
}

/// Largest register count accepted by the simulator.
pub const MAX_QUBITS: usize = 10;

impl<T: Real> DensityMatrix<T> {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("qubit count {qubits} outside 1..={MAX_QUBITS}")));
        }
        let dim = 1usize << qubits;
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        data[0] = Complex::new(T::one(), T::zero());
        Ok(Self { qubits, dim, data })
    }

    /// `|ψ⟩⟨ψ|` for a (normalized) state vector.
    pub fn from_pure(qubits: usize, amplitudes: &[Complex<T>]) -> Result<Self> {
        let mut rho = Self::zero_state(qubits)?;
        if amplitudes.len() != rho.dim {
            return Err(Error::DimensionMismatch { expected: rho.dim, actual: amplitudes.len() });
        }
        for i in 0..rho.dim {
            for j in 0..rho.dim {
                rho.data[i * rho.dim + j] = amplitudes[i] * amplitudes[j].conj();
            }
        }
        Ok(rho)
    }

    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        let mut rho = Self::zero_state(qubits)?;
        let w = T::one() / T::from_count(rho.dim);
        rho.data.iter_mut().for_each(|v| *v = Complex::new(T::zero(), T::zero()));
        for i in 0..rho.dim {
            rho.data[i * rho.dim + i] = Complex::new(w, T::zero());
        }
        Ok(rho)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |a, i| a + self.get(i, i))
    }

    /// Real diagonal: the computational-basis outcome probabilities.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// `max |ρ − ρ†|` over entries.
    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..=i {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, via the real symmetric embedding `[[A, −B], [B, A]]`
    /// of `ρ = A + iB` (every eigenvalue of `ρ` appears twice).
    pub fn min_eigenvalue(&self) -> T {
        let d = self.dim;
        let n = 2 * d;
        let mut m = vec![T::zero(); n * n];
        for i in 0..d {
            for j in 0..d {
                // Hermitian part only, so the embedding is exactly symmetric.
                let v = (self.get(i, j) + self.get(j, i).conj()) * T::lit(0.5);
                m[i * n + j] = v.re;
                m[(i + d) * n + (j + d)] = v.re;
                m[i * n + (j + d)] = -v.im;
                m[(i + d) * n + j] = v.im;
            }
        }
        linalg::symmetric_eigen(&m, n).0[0]
    }

    fn mask(&self, q: usize) -> usize {
        assert!(q < self.qubits, "register {q} out of range for {} qubits", self.qubits);
        1 << q
    }

    /// `ρ ← U ρ U†` with `U` acting on register `q`.
    pub fn apply_unitary(&mut self, q: usize, u: &Unitary2<T>) {
        let m = self.mask(q);
        let d = self.dim;
        // rows: U ρ
        for i0 in (0..d).filter(|i| i & m == 0) {
            let i1 = i0 | m;
            for k in 0..d {
                let a = self.data[i0 * d + k];
                let b = self.data[i1 * d + k];
                self.data[i0 * d + k] = u[0][0] * a + u[0][1] * b;
                self.data[i1 * d + k] = u[1][0] * a + u[1][1] * b;
            }
        }
        // columns: (U ρ) U†
        for j0 in (0..d).filter(|j| j & m == 0) {
            let j1 = j0 | m;
            for k in 0..d {
                let a = self.data[k * d + j0];
                let b = self.data[k * d + j1];
                self.data[k * d + j0] = a * u[0][0].conj() + b * u[0][1].conj();
                self.data[k * d + j1] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    /// CNOT is a basis permutation: `ρ'_{ij} = ρ_{π(i) π(j)}`.
    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        assert_ne!(control, target, "CNOT needs distinct registers");
        let cm = self.mask(control);
        let tm = self.mask(target);
        let d = self.dim;
        let perm = |i: usize| if i & cm != 0 { i ^ tm } else { i };
        let old = self.data.clone();
        for i in 0..d {
            let pi = perm(i);
            for j in 0..d {
                self.data[i * d + j] = old[pi * d + perm(j)];
            }
        }
    }

    /// `ρ ← (1 − px − py − pz) ρ + px XρX + py YρY + pz ZρZ` on register `q`.
    pub fn apply_pauli_channel(&mut self, q: usize, px: T, py: T, pz: T) {
        if px == T::zero() && py == T::zero() && pz == T::zero() {
            return;
        }
        let m = self.mask(q);
        let d = self.dim;
        let keep = T::one() - px - py - pz;
        let old = self.data.clone();
        for i in 0..d {
            for j in 0..d {
                // s_i s_j = +1 when the register bits agree, −1 otherwise.
                let same = ((i ^ j) & m) == 0;
                let sign = if same { T::one() } else { -T::one() };
                let direct = old[i * d + j] * (keep + pz * sign);
                let flipped = old[(i ^ m) * d + (j ^ m)] * (px + py * sign);
                self.data[i * d + j] = direct + flipped;
            }
        }
    }
}

pub fn hadamard<T: Real>() -> Unitary2<T> {
    let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    [[h, h], [h, -h]]
}

pub fn pauli_z<T: Real>() -> Unitary2<T> {
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    [[one, zero], [zero, -one]]
}

/// `R_z(θ) = diag(e^{−iθ/2}, e^{iθ/2})`.
pub fn rz<T: Real>(theta: T) -> Unitary2<T> {
    let half = theta * T::lit(0.5);
    let zero = Complex::new(T::zero(), T::zero());
    [[Complex::new(half.cos(), -half.sin()), zero], [zero, Complex::new(half.cos(), half.sin())]]
}
