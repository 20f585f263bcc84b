//! Swap-test diagnostics: probe a circuit with chosen input/reference state
//! pairs and collect the ancilla zero-probabilities as a feature vector.
//!
//! One probe sends a bitstring through an input unitary `U` into the circuit
//! under test, prepares a reference state from the same bitstring through a
//! reference unitary `V`, and measures how close the two results are with a
//! single-ancilla controlled-SWAP cascade. The zero-probability is
//! `1/2 + |<psi|phi>|^2 / 2`, which this module evaluates in closed form;
//! [`swap_test_full_simulation`] keeps the explicit `2n+1`-qubit circuit as
//! a cross-check oracle.
//!
//! In the all-zeros input mode the test circuit always receives `|0...0>`
//! (the probe bitstrings feed only the reference side), modeling the case
//! where the circuit's input cannot be controlled but the comparison states
//! still vary.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Binomial, Distribution};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::seed::RngSeed;
use crate::state::StateVector;

/// Choice of the input unitary `U` (what enters the circuit under test).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InputMode {
    /// The circuit input is pinned to `|0...0>` regardless of the probe.
    AllZeros,
    /// The probe bitstring enters the circuit unchanged.
    BasisStates,
    /// Hadamard on every qubit of the probe bitstring.
    HadamardAll,
    /// Quantum Fourier transform of the probe bitstring.
    Qft,
}

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputMode::AllZeros => "all-zeros",
            InputMode::BasisStates => "basis",
            InputMode::HadamardAll => "hadamard",
            InputMode::Qft => "qft",
        })
    }
}

impl FromStr for InputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-zeros" => Ok(InputMode::AllZeros),
            "basis" => Ok(InputMode::BasisStates),
            "hadamard" => Ok(InputMode::HadamardAll),
            "qft" => Ok(InputMode::Qft),
            other => Err(Error::invalid(format!(
                "unknown input mode {other:?} (expected all-zeros, basis, hadamard, or qft)"
            ))),
        }
    }
}

/// Choice of the reference unitary `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReferenceMode {
    HadamardAll,
    Qft,
}

impl fmt::Display for ReferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceMode::HadamardAll => "hadamard",
            ReferenceMode::Qft => "qft",
        })
    }
}

impl FromStr for ReferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hadamard" => Ok(ReferenceMode::HadamardAll),
            "qft" => Ok(ReferenceMode::Qft),
            other => Err(Error::invalid(format!(
                "unknown reference mode {other:?} (expected hadamard or qft)"
            ))),
        }
    }
}

/// Full description of one feature-vector measurement: the unitary choices,
/// the probe bitstrings (one per feature dimension), and the shot budget
/// (0 = exact probabilities).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub input_mode: InputMode,
    pub reference_mode: ReferenceMode,
    pub probe_bitstrings: Vec<String>,
    pub shots: u64,
}

impl ProbeConfig {
    /// Probe configuration with the default bitstring family for
    /// `num_probes` probes on `num_qubits` qubits.
    pub fn standard(
        input_mode: InputMode,
        reference_mode: ReferenceMode,
        num_qubits: usize,
        num_probes: usize,
        shots: u64,
    ) -> ProbeConfig {
        ProbeConfig {
            input_mode,
            reference_mode,
            probe_bitstrings: default_probe_bitstrings(num_qubits, num_probes),
            shots,
        }
    }

    /// Feature dimension `d`.
    pub fn dimension(&self) -> usize {
        self.probe_bitstrings.len()
    }
}

/// Default probe bitstrings: all-zeros, all-ones, then alternating blocks
/// (`0101...`, `1010...`, `0011...`, `0110...`, `1100...`, `1001...`, wider
/// blocks after that). The first four are distinct and balanced for every
/// `n >= 2`; requesting more probes than there are patterns of a width
/// simply moves on to the next width.
pub fn default_probe_bitstrings(num_qubits: usize, count: usize) -> Vec<String> {
    let mut probes = Vec::with_capacity(count);
    if count >= 1 {
        probes.push("0".repeat(num_qubits));
    }
    if count >= 2 {
        probes.push("1".repeat(num_qubits));
    }
    let mut width = 1usize;
    while probes.len() < count {
        for shift in 0..2 * width {
            if probes.len() == count {
                break;
            }
            let pattern: String = (0..num_qubits)
                .map(|j| {
                    if ((j + shift) / width).is_multiple_of(2) {
                        '0'
                    } else {
                        '1'
                    }
                })
                .collect();
            probes.push(pattern);
        }
        width *= 2;
    }
    probes
}

/// State entering the circuit under test for one probe.
pub fn prepare_input(bits: &str, mode: InputMode) -> Result<StateVector> {
    match mode {
        InputMode::AllZeros => {
            if bits.chars().any(|c| c != '0') {
                return Err(Error::invalid(
                    "all-zeros input mode requires an all-zero bitstring",
                ));
            }
            StateVector::basis_state(bits)
        }
        InputMode::BasisStates => StateVector::basis_state(bits),
        InputMode::HadamardAll => {
            let state = StateVector::basis_state(bits)?;
            let all: Vec<usize> = (0..state.num_qubits()).collect();
            state.apply_hadamard_all(&all)
        }
        InputMode::Qft => {
            let state = StateVector::basis_state(bits)?;
            let all: Vec<usize> = (0..state.num_qubits()).collect();
            state.apply_qft(&all)
        }
    }
}

/// Reference state for one probe.
pub fn prepare_reference(bits: &str, mode: ReferenceMode) -> Result<StateVector> {
    match mode {
        ReferenceMode::HadamardAll => prepare_input(bits, InputMode::HadamardAll),
        ReferenceMode::Qft => prepare_input(bits, InputMode::Qft),
    }
}

/// Exact probability of measuring the swap-test ancilla in `|0>`:
/// `1/2 + |<psi|phi>|^2 / 2`.
pub fn swap_test_probability(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    let overlap = psi.inner_product(phi)?;
    Ok(0.5 + 0.5 * overlap.norm_sqr())
}

/// Brute-force swap test: build the full `2n+1`-qubit register
/// (test x reference x ancilla), run the circuit on the test register,
/// apply Hadamard - Fredkin cascade - Hadamard on the ancilla, and sum the
/// probability of the ancilla reading 0.
///
/// This is the oracle for [`swap_test_probability`]; it is exponentially
/// more expensive and exists for verification.
pub fn swap_test_full_simulation(
    circuit: &Circuit,
    input: &StateVector,
    reference: &StateVector,
) -> Result<f64> {
    let n = circuit.num_qubits();
    if input.num_qubits() != n || reference.num_qubits() != n {
        return Err(Error::invalid(format!(
            "input ({}) and reference ({}) must both have {n} qubits",
            input.num_qubits(),
            reference.num_qubits()
        )));
    }
    let ancilla = 2 * n;
    let mut full = input
        .tensor(reference)
        .tensor(&StateVector::basis_state("0")?);
    full = circuit.run_embedded(full, 0)?;
    full = full.apply_1q(&crate::state::hadamard(), ancilla)?;
    for i in 0..n {
        full = full.apply_fredkin(ancilla, i, n + i)?;
    }
    full = full.apply_1q(&crate::state::hadamard(), ancilla)?;

    // Ancilla is the least significant index bit.
    let p_zero = full
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & 1 == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    Ok(p_zero)
}

/// Binomial frequency estimate of `p` from `shots` measurements.
pub fn sampled_probability(p: f64, shots: u64, seed: RngSeed) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    if shots == 0 {
        return Err(Error::invalid(
            "sampling needs at least one shot; use exact mode instead",
        ));
    }
    let binomial =
        Binomial::new(shots, p).map_err(|e| Error::invalid(format!("binomial setup: {e}")))?;
    let hits: u64 = binomial.sample(&mut seed.rng());
    Ok(hits as f64 / shots as f64)
}

/// The `d` swap-test probabilities of a circuit, one per probe, optionally
/// with the gate-position label attached.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Option<usize>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> FeatureVector {
        FeatureVector {
            values,
            label: None,
        }
    }

    pub fn labeled(values: Vec<f64>, label: usize) -> FeatureVector {
        FeatureVector {
            values,
            label: Some(label),
        }
    }

    pub fn with_label(mut self, label: usize) -> FeatureVector {
        self.label = Some(label);
        self
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

/// Measure the feature vector of `circuit` under `config`.
///
/// Probe `i` contributes
/// `P_i = swap_test_probability(circuit(U |bits_i>), V |bits_i>)`, evaluated
/// exactly, or estimated from `config.shots` measurements using the child
/// seed `seed.derive(i, 0)` when shots are requested.
pub fn feature_vector(
    circuit: &Circuit,
    config: &ProbeConfig,
    seed: RngSeed,
) -> Result<FeatureVector> {
    if config.probe_bitstrings.is_empty() {
        return Err(Error::invalid(
            "probe configuration needs at least one bitstring",
        ));
    }
    let n = circuit.num_qubits();
    let zeros = "0".repeat(n);
    let mut values = Vec::with_capacity(config.probe_bitstrings.len());
    for (i, bits) in config.probe_bitstrings.iter().enumerate() {
        if bits.len() != n {
            return Err(Error::invalid(format!(
                "probe {i} has {} bits but the circuit has {n} qubits",
                bits.len()
            )));
        }
        let input_bits = if config.input_mode == InputMode::AllZeros {
            zeros.as_str()
        } else {
            bits.as_str()
        };
        let output = circuit.run(prepare_input(input_bits, config.input_mode)?)?;
        let reference = prepare_reference(bits, config.reference_mode)?;
        let mut p = swap_test_probability(&output, &reference)?;
        if config.shots > 0 {
            p = sampled_probability(p, config.shots, seed.derive(i as u64, 0))?;
        }
        values.push(p);
    }
    Ok(FeatureVector::new(values))
}
