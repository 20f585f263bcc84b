//! Single coherent gate faults: sampling, realization, and labeled datasets.
//!
//! A fault either replaces one angle of a gate's one-qubit decomposition
//! with a fresh uniform draw from `[0, 2pi)`, or rewires a CNOT onto a
//! different ordered (control, target) pair. Faults stay unitary, so a
//! faulted circuit is still a valid circuit.

use std::f64::consts::TAU;

use rand::Rng;

use crate::circuit::{canonical_angles, Circuit, GateSpec};
use crate::error::{Error, Result};
use crate::seed::RngSeed;

/// Which angle of `Phi(delta) Rz(alpha) Ry(theta) Rz(beta)` a fault replaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleParam {
    Delta,
    Alpha,
    Theta,
    Beta,
}

impl AngleParam {
    pub const ALL: [AngleParam; 4] = [
        AngleParam::Delta,
        AngleParam::Alpha,
        AngleParam::Theta,
        AngleParam::Beta,
    ];

    /// Slots drawn by [`sample_fault`]. `Delta` multiplies the gate by a
    /// global phase, which no measurement on the circuit can see (the
    /// swap-test probability depends on `|<psi|phi>|^2` only), so sampling
    /// it would plant faults that are unobservable in principle. It stays
    /// out of the draw; a `Delta` fault can still be built and applied
    /// explicitly.
    pub const SAMPLED: [AngleParam; 3] = [AngleParam::Alpha, AngleParam::Theta, AngleParam::Beta];

    fn index(self) -> usize {
        match self {
            AngleParam::Delta => 0,
            AngleParam::Alpha => 1,
            AngleParam::Theta => 2,
            AngleParam::Beta => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FaultKind {
    /// Replace one decomposition angle of a one-qubit gate.
    Angle { param: AngleParam, value: f64 },
    /// Move a CNOT onto a different ordered (control, target) pair.
    CnotRewire { control: usize, target: usize },
}

/// A single coherent fault bound to one gate position.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultSpec {
    pub gate_index: usize,
    pub kind: FaultKind,
}

/// Draw a random fault for the gate at `gate_index`.
///
/// One-qubit gates (including Hadamard and phase gates, via their canonical
/// decomposition angles) get a uniformly chosen observable angle (alpha,
/// theta, or beta) replaced by a uniform value in `[0, 2pi)`.
/// CNOTs get a uniform draw over all ordered distinct qubit pairs other
/// than the original one. See [`AngleParam::SAMPLED`] for why the
/// global-phase angle is never drawn.
pub fn sample_fault(circuit: &Circuit, gate_index: usize, seed: RngSeed) -> Result<FaultSpec> {
    let gate = circuit.gates().get(gate_index).ok_or_else(|| {
        Error::invalid(format!(
            "gate index {gate_index} out of range for {} gates",
            circuit.num_gates()
        ))
    })?;
    let mut rng = seed.rng();
    let kind = match *gate {
        GateSpec::Cnot { control, target } => {
            let n = circuit.num_qubits();
            let mut pairs = Vec::with_capacity(n * (n - 1) - 1);
            for c in 0..n {
                for t in 0..n {
                    if c != t && (c, t) != (control, target) {
                        pairs.push((c, t));
                    }
                }
            }
            let (control, target) = pairs[rng.random_range(0..pairs.len())];
            FaultKind::CnotRewire { control, target }
        }
        _ => FaultKind::Angle {
            param: AngleParam::SAMPLED[rng.random_range(0..AngleParam::SAMPLED.len())],
            value: rng.random_range(0.0..TAU),
        },
    };
    Ok(FaultSpec { gate_index, kind })
}

/// Realize `fault` on a copy of `circuit`.
///
/// An angle fault rewrites the gate as the `u` gate of its canonical
/// decomposition with one angle replaced; a rewire keeps the CNOT but moves
/// its qubits. Every other gate is untouched.
pub fn apply_fault(circuit: &Circuit, fault: &FaultSpec) -> Result<Circuit> {
    let gate = circuit.gates().get(fault.gate_index).ok_or_else(|| {
        Error::invalid(format!(
            "gate index {} out of range for {} gates",
            fault.gate_index,
            circuit.num_gates()
        ))
    })?;
    let faulted = match &fault.kind {
        FaultKind::Angle { param, value } => {
            if !(0.0..TAU).contains(value) {
                return Err(Error::invalid(format!(
                    "fault angle {value} outside [0, 2pi)"
                )));
            }
            let mut angles = canonical_angles(gate).ok_or_else(|| {
                Error::invalid("angle faults apply only to one-qubit gates, not cnot")
            })?;
            angles[param.index()] = *value;
            let target = match *gate {
                GateSpec::U1Q { target, .. }
                | GateSpec::Hadamard { target }
                | GateSpec::Phase { target, .. } => target,
                GateSpec::Cnot { .. } => unreachable!("rejected above"),
            };
            GateSpec::U1Q {
                target,
                delta: angles[0],
                alpha: angles[1],
                theta: angles[2],
                beta: angles[3],
            }
        }
        FaultKind::CnotRewire { control, target } => match *gate {
            GateSpec::Cnot {
                control: orig_control,
                target: orig_target,
            } => {
                if control == target {
                    return Err(Error::invalid("rewired control and target must differ"));
                }
                if (*control, *target) == (orig_control, orig_target) {
                    return Err(Error::invalid(
                        "rewire must differ from the original (control, target) pair",
                    ));
                }
                GateSpec::Cnot {
                    control: *control,
                    target: *target,
                }
            }
            _ => {
                return Err(Error::invalid(format!(
                    "rewire faults apply only to cnot gates, not {:?}",
                    gate.type_name()
                )))
            }
        },
    };
    let mut gates = circuit.gates().to_vec();
    gates[fault.gate_index] = faulted;
    Circuit::new(circuit.num_qubits(), gates)
}

/// Labeled fault dataset: `samples_per_gate` independent faults for every
/// gate position, labeled with that position.
///
/// The sample for (gate `g`, index `s`) uses the child seed
/// `seed.derive(g, s)`, so entries are reproducible in isolation and the
/// generation order does not matter.
pub fn fault_dataset(
    circuit: &Circuit,
    samples_per_gate: usize,
    seed: RngSeed,
) -> Result<Vec<(FaultSpec, usize)>> {
    if circuit.num_gates() == 0 {
        return Err(Error::invalid(
            "cannot build a fault dataset for an empty circuit",
        ));
    }
    if samples_per_gate == 0 {
        return Err(Error::invalid("samples_per_gate must be at least 1"));
    }
    let mut dataset = Vec::with_capacity(circuit.num_gates() * samples_per_gate);
    for gate_index in 0..circuit.num_gates() {
        for sample in 0..samples_per_gate {
            let fault = sample_fault(
                circuit,
                gate_index,
                seed.derive(gate_index as u64, sample as u64),
            )?;
            dataset.push((fault, gate_index));
        }
    }
    Ok(dataset)
}
