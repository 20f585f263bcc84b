//! Dense statevector representation and gate application kernels.
//!
//! Amplitudes are indexed big-endian: qubit 0 is the most significant bit of
//! the basis index, matching a circuit diagram read top to bottom. A state on
//! `n` qubits stores `2^n` complex amplitudes in double precision; every gate
//! operation preserves the squared norm to within 1e-12.
//!
//! Single-qubit unitaries follow the decomposition
//! `A = Phi(delta) * Rz(alpha) * Ry(theta) * Rz(beta)` with
//! `Ry(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]`,
//! `Rz(t) = diag(e^{-it/2}, e^{+it/2})` and `Phi(d) = e^{id} * I`.
//! Under these conventions `(pi/2, 0, pi/2, pi)` reconstructs the Hadamard.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Widest register the dense representation accepts (1 GiB of amplitudes).
pub const MAX_QUBITS: usize = 26;

fn check_width(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::invalid("state needs at least one qubit"));
    }
    if num_qubits > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "{num_qubits} qubits exceed the dense-statevector limit of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Dense unitary of a one-qubit (2x2) or two-qubit (4x4) gate.
#[derive(Clone, Debug, PartialEq)]
pub enum GateMatrix {
    OneQubit([[Complex64; 2]; 2]),
    TwoQubit([[Complex64; 4]; 4]),
}

impl GateMatrix {
    pub fn dimension(&self) -> usize {
        match self {
            GateMatrix::OneQubit(_) => 2,
            GateMatrix::TwoQubit(_) => 4,
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match self {
            GateMatrix::OneQubit(m) => m[row][col],
            GateMatrix::TwoQubit(m) => m[row][col],
        }
    }

    pub fn dagger(&self) -> GateMatrix {
        match self {
            GateMatrix::OneQubit(m) => {
                let mut out = [[C_ZERO; 2]; 2];
                for (r, row) in out.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = m[c][r].conj();
                    }
                }
                GateMatrix::OneQubit(out)
            }
            GateMatrix::TwoQubit(m) => {
                let mut out = [[C_ZERO; 4]; 4];
                for (r, row) in out.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = m[c][r].conj();
                    }
                }
                GateMatrix::TwoQubit(out)
            }
        }
    }

    /// Largest entrywise deviation of `A† A` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let dim = self.dimension();
        let dag = self.dagger();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let mut sum = C_ZERO;
                for k in 0..dim {
                    sum += dag.entry(r, k) * self.entry(k, c);
                }
                let expect = if r == c { C_ONE } else { C_ZERO };
                worst = worst.max((sum - expect).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tolerance: f64) -> bool {
        self.unitarity_error() < tolerance
    }
}

fn mul2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[C_ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// `Ry(theta)`: rotation about the Bloch-sphere y axis.
pub fn rotation_y(theta: f64) -> GateMatrix {
    let (sin, cos) = (theta / 2.0).sin_cos();
    GateMatrix::OneQubit([
        [Complex64::new(cos, 0.0), Complex64::new(-sin, 0.0)],
        [Complex64::new(sin, 0.0), Complex64::new(cos, 0.0)],
    ])
}

/// `Rz(theta)`: rotation about the Bloch-sphere z axis.
pub fn rotation_z(theta: f64) -> GateMatrix {
    GateMatrix::OneQubit([
        [Complex64::from_polar(1.0, -theta / 2.0), C_ZERO],
        [C_ZERO, Complex64::from_polar(1.0, theta / 2.0)],
    ])
}

/// `Phi(delta) = e^{i delta} * I`.
pub fn phase_gate(delta: f64) -> GateMatrix {
    let phase = Complex64::from_polar(1.0, delta);
    GateMatrix::OneQubit([[phase, C_ZERO], [C_ZERO, phase]])
}

pub fn hadamard() -> GateMatrix {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    GateMatrix::OneQubit([[h, h], [h, -h]])
}

/// General one-qubit unitary `Phi(delta) * Rz(alpha) * Ry(theta) * Rz(beta)`.
pub fn compose_1q(delta: f64, alpha: f64, theta: f64, beta: f64) -> GateMatrix {
    let factor = |g: GateMatrix| match g {
        GateMatrix::OneQubit(m) => m,
        GateMatrix::TwoQubit(_) => unreachable!(),
    };
    let product = mul2(
        &mul2(
            &mul2(&factor(phase_gate(delta)), &factor(rotation_z(alpha))),
            &factor(rotation_y(theta)),
        ),
        &factor(rotation_z(beta)),
    );
    GateMatrix::OneQubit(product)
}

/// CNOT unitary on (control, target) with the control as the more
/// significant bit of the 4x4 basis.
pub fn cnot_matrix() -> GateMatrix {
    let mut m = [[C_ZERO; 4]; 4];
    m[0][0] = C_ONE;
    m[1][1] = C_ONE;
    m[2][3] = C_ONE;
    m[3][2] = C_ONE;
    GateMatrix::TwoQubit(m)
}

/// Pure state of `n` qubits as `2^n` complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let mut amplitudes = vec![C_ZERO; 1 << num_qubits];
        amplitudes[0] = C_ONE;
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Computational basis state for a string of `0`/`1` characters, first
    /// character = qubit 0 = most significant bit of the index.
    pub fn basis_state(bits: &str) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("empty bitstring"));
        }
        check_width(bits.len())?;
        let mut index = 0usize;
        for ch in bits.chars() {
            index = (index << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(Error::invalid(format!(
                            "bitstring may only contain 0 and 1, found {other:?}"
                        )))
                    }
                };
        }
        let num_qubits = bits.len();
        let mut amplitudes = vec![C_ZERO; 1 << num_qubits];
        amplitudes[index] = C_ONE;
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_width(num_qubits)?;
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1usize << num_qubits,
                num_qubits,
                amplitudes.len()
            )));
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Bit mask of `qubit` in the amplitude index (qubit 0 = MSB).
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize, role: &str) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::invalid(format!(
                "{role} qubit {qubit} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    /// Apply a one-qubit gate to `target`.
    pub fn apply_1q(mut self, gate: &GateMatrix, target: usize) -> Result<Self> {
        self.check_qubit(target, "target")?;
        let m = match gate {
            GateMatrix::OneQubit(m) => m,
            GateMatrix::TwoQubit(_) => {
                return Err(Error::invalid("apply_1q needs a 2x2 gate matrix"))
            }
        };
        let mask = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = self.amplitudes[i];
                let b = self.amplitudes[j];
                self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
                self.amplitudes[j] = m[1][0] * a + m[1][1] * b;
            }
        }
        Ok(self)
    }

    /// Flip `target` wherever `control` is 1.
    pub fn apply_cnot(mut self, control: usize, target: usize) -> Result<Self> {
        self.check_qubit(control, "control")?;
        self.check_qubit(target, "target")?;
        if control == target {
            return Err(Error::invalid("cnot control and target must differ"));
        }
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
        Ok(self)
    }

    /// Controlled SWAP: exchange qubits `a` and `b` wherever `control` is 1.
    pub fn apply_fredkin(mut self, control: usize, a: usize, b: usize) -> Result<Self> {
        self.check_qubit(control, "control")?;
        self.check_qubit(a, "swap")?;
        self.check_qubit(b, "swap")?;
        if control == a || control == b || a == b {
            return Err(Error::invalid("fredkin qubits must be pairwise distinct"));
        }
        let cmask = self.mask(control);
        let amask = self.mask(a);
        let bmask = self.mask(b);
        for i in 0..self.amplitudes.len() {
            if i & cmask != 0 && i & amask != 0 && i & bmask == 0 {
                self.amplitudes.swap(i, i ^ amask ^ bmask);
            }
        }
        Ok(self)
    }

    /// Hadamard on each listed qubit.
    pub fn apply_hadamard_all(mut self, targets: &[usize]) -> Result<Self> {
        self.check_distinct(targets)?;
        let h = hadamard();
        for &t in targets {
            self = self.apply_1q(&h, t)?;
        }
        Ok(self)
    }

    /// Quantum Fourier transform on the listed register.
    ///
    /// `targets[0]` is the most significant bit of the register value `j`;
    /// the action is `|j> -> N^{-1/2} sum_k exp(2 pi i j k / N) |k>` with
    /// `N = 2^targets.len()`, realized as the usual Hadamard plus
    /// controlled-phase ladder followed by a reversing swap network.
    pub fn apply_qft(mut self, targets: &[usize]) -> Result<Self> {
        self.check_distinct(targets)?;
        let t = targets.len();
        let h = hadamard();
        for i in 0..t {
            self = self.apply_1q(&h, targets[i])?;
            for j in (i + 1)..t {
                let angle = 2.0 * PI / (1u64 << (j - i + 1)) as f64;
                self = self.apply_controlled_phase(targets[j], targets[i], angle)?;
            }
        }
        for i in 0..t / 2 {
            self = self.apply_swap(targets[i], targets[t - 1 - i])?;
        }
        Ok(self)
    }

    /// Inner product `<self|other>`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::invalid(format!(
                "inner product needs equal qubit counts, got {} and {}",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Kronecker product with `other`; `self` takes the more significant
    /// qubit positions.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let other_dim = other.amplitudes.len();
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other_dim);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amplitudes,
        }
    }

    fn check_distinct(&self, targets: &[usize]) -> Result<()> {
        for (i, &t) in targets.iter().enumerate() {
            self.check_qubit(t, "target")?;
            if targets[..i].contains(&t) {
                return Err(Error::invalid(format!("duplicate target qubit {t}")));
            }
        }
        Ok(())
    }

    /// Phase `e^{i angle}` on components where both qubits are 1.
    fn apply_controlled_phase(mut self, control: usize, target: usize, angle: f64) -> Result<Self> {
        self.check_qubit(control, "control")?;
        self.check_qubit(target, "target")?;
        if control == target {
            return Err(Error::invalid("controlled phase qubits must differ"));
        }
        let both = self.mask(control) | self.mask(target);
        let phase = Complex64::from_polar(1.0, angle);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & both == both {
                *amp *= phase;
            }
        }
        Ok(self)
    }

    fn apply_swap(mut self, a: usize, b: usize) -> Result<Self> {
        self.check_qubit(a, "swap")?;
        self.check_qubit(b, "swap")?;
        if a == b {
            return Err(Error::invalid("swap qubits must differ"));
        }
        let amask = self.mask(a);
        let bmask = self.mask(b);
        for i in 0..self.amplitudes.len() {
            if i & amask != 0 && i & bmask == 0 {
                self.amplitudes.swap(i, i ^ amask ^ bmask);
            }
        }
        Ok(self)
    }
}
