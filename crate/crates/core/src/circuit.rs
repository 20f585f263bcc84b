//! Gate-level circuit description, generation, execution, and the JSON
//! document format.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::seed::RngSeed;
use crate::state::{
    cnot_matrix, compose_1q, hadamard, phase_gate, GateMatrix, StateVector, MAX_QUBITS,
};

/// One gate in a circuit. Serialized form is documented on [`Circuit::to_json`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum GateSpec {
    /// General one-qubit unitary `Phi(delta) Rz(alpha) Ry(theta) Rz(beta)`.
    #[serde(rename = "u")]
    U1Q {
        target: usize,
        delta: f64,
        alpha: f64,
        theta: f64,
        beta: f64,
    },
    #[serde(rename = "h")]
    Hadamard { target: usize },
    #[serde(rename = "cnot")]
    Cnot { control: usize, target: usize },
    /// Standalone phase factor `Phi(delta) = e^{i delta} I`.
    #[serde(rename = "phase")]
    Phase { target: usize, delta: f64 },
}

impl GateSpec {
    /// Dense unitary of this gate (4x4 for CNOT, 2x2 otherwise).
    pub fn unitary(&self) -> GateMatrix {
        match *self {
            GateSpec::U1Q {
                delta,
                alpha,
                theta,
                beta,
                ..
            } => compose_1q(delta, alpha, theta, beta),
            GateSpec::Hadamard { .. } => hadamard(),
            GateSpec::Cnot { .. } => cnot_matrix(),
            GateSpec::Phase { delta, .. } => phase_gate(delta),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            GateSpec::U1Q { .. } => "u",
            GateSpec::Hadamard { .. } => "h",
            GateSpec::Cnot { .. } => "cnot",
            GateSpec::Phase { .. } => "phase",
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let check_index = |name: &str, q: usize| {
            if q >= num_qubits {
                Err(Error::invalid(format!(
                    "{name} {q} out of range for {num_qubits} qubits"
                )))
            } else {
                Ok(())
            }
        };
        let check_angle = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite, got {v}")))
            }
        };
        match *self {
            GateSpec::U1Q {
                target,
                delta,
                alpha,
                theta,
                beta,
            } => {
                check_index("target", target)?;
                check_angle("delta", delta)?;
                check_angle("alpha", alpha)?;
                check_angle("theta", theta)?;
                check_angle("beta", beta)
            }
            GateSpec::Hadamard { target } => check_index("target", target),
            GateSpec::Cnot { control, target } => {
                check_index("control", control)?;
                check_index("target", target)?;
                if control == target {
                    return Err(Error::invalid("cnot control and target must differ"));
                }
                Ok(())
            }
            GateSpec::Phase { target, delta } => {
                check_index("target", target)?;
                check_angle("delta", delta)
            }
        }
    }
}

/// An ordered list of gates on a fixed number of qubits.
///
/// Immutable after construction; `new` validates every gate against the
/// qubit count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Circuit {
    #[serde(rename = "qubits")]
    num_qubits: usize,
    gates: Vec<GateSpec>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<GateSpec>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::invalid("circuit needs at least one qubit"));
        }
        if num_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "{num_qubits} qubits exceed the dense-statevector limit of {MAX_QUBITS}"
            )));
        }
        for (i, gate) in gates.iter().enumerate() {
            gate.validate(num_qubits)
                .map_err(|e| Error::invalid(format!("gate {i}: {e}")))?;
        }
        Ok(Circuit { num_qubits, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    /// Apply the gates in list order to `input`.
    pub fn run(&self, input: StateVector) -> Result<StateVector> {
        if input.num_qubits() != self.num_qubits {
            return Err(Error::invalid(format!(
                "circuit on {} qubits cannot run a {}-qubit state",
                self.num_qubits,
                input.num_qubits()
            )));
        }
        self.run_embedded(input, 0)
    }

    /// Apply the gates with qubit indices shifted by `offset` inside a
    /// larger register.
    pub(crate) fn run_embedded(&self, input: StateVector, offset: usize) -> Result<StateVector> {
        if offset + self.num_qubits > input.num_qubits() {
            return Err(Error::invalid(format!(
                "circuit on {} qubits does not fit a {}-qubit state at offset {offset}",
                self.num_qubits,
                input.num_qubits()
            )));
        }
        let mut state = input;
        for gate in &self.gates {
            state = match *gate {
                GateSpec::U1Q { target, .. } | GateSpec::Phase { target, .. } => {
                    state.apply_1q(&gate.unitary(), offset + target)?
                }
                GateSpec::Hadamard { target } => state.apply_1q(&hadamard(), offset + target)?,
                GateSpec::Cnot { control, target } => {
                    state.apply_cnot(offset + control, offset + target)?
                }
            };
        }
        Ok(state)
    }

    /// JSON document for this circuit:
    /// `{"qubits": n, "gates": [{"type": "h", "target": 0}, ...]}` with gate
    /// records `h {target}`, `cnot {control, target}`,
    /// `u {target, delta, alpha, theta, beta}`, `phase {target, delta}`.
    /// Angles round-trip at full double precision.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }

    /// Parse a circuit document. Rejects unknown fields and unknown gate
    /// types; reports the offending gate position or document location.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
        let obj = doc
            .as_object()
            .ok_or_else(|| Error::parse("top level must be an object"))?;
        for key in obj.keys() {
            if key != "qubits" && key != "gates" {
                return Err(Error::parse(format!("unknown field {key:?} at top level")));
            }
        }
        let num_qubits = obj
            .get("qubits")
            .ok_or_else(|| Error::parse("missing field \"qubits\""))?
            .as_u64()
            .ok_or_else(|| Error::parse("\"qubits\" must be a non-negative integer"))?
            as usize;
        let gates_value = obj
            .get("gates")
            .ok_or_else(|| Error::parse("missing field \"gates\""))?
            .as_array()
            .ok_or_else(|| Error::parse("\"gates\" must be an array"))?;
        let mut gates = Vec::with_capacity(gates_value.len());
        for (i, value) in gates_value.iter().enumerate() {
            let gate = parse_gate(value, i)?;
            gate.validate(num_qubits)
                .map_err(|e| Error::parse(format!("gate {i}: {e}")))?;
            gates.push(gate);
        }
        Circuit::new(num_qubits, gates).map_err(|e| Error::parse(e.to_string()))
    }
}

fn parse_gate(value: &Value, index: usize) -> Result<GateSpec> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse(format!("gate {index}: must be an object")))?;
    let gate_type = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse(format!("gate {index}: missing string field \"type\"")))?;
    let allowed: &[&str] = match gate_type {
        "h" => &["type", "target"],
        "cnot" => &["type", "control", "target"],
        "u" => &["type", "target", "delta", "alpha", "theta", "beta"],
        "phase" => &["type", "target", "delta"],
        other => {
            return Err(Error::parse(format!(
                "gate {index}: unknown gate type {other:?}"
            )))
        }
    };
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::parse(format!(
                "gate {index}: unknown field {key:?} for type {gate_type:?}"
            )));
        }
    }
    let qubit = |name: &str| -> Result<usize> {
        obj.get(name)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| {
                Error::parse(format!(
                    "gate {index}: missing or non-integer field {name:?}"
                ))
            })
    };
    let angle = |name: &str| -> Result<f64> {
        obj.get(name).and_then(Value::as_f64).ok_or_else(|| {
            Error::parse(format!(
                "gate {index}: missing or non-numeric field {name:?}"
            ))
        })
    };
    Ok(match gate_type {
        "h" => GateSpec::Hadamard {
            target: qubit("target")?,
        },
        "cnot" => GateSpec::Cnot {
            control: qubit("control")?,
            target: qubit("target")?,
        },
        "u" => GateSpec::U1Q {
            target: qubit("target")?,
            delta: angle("delta")?,
            alpha: angle("alpha")?,
            theta: angle("theta")?,
            beta: angle("beta")?,
        },
        "phase" => GateSpec::Phase {
            target: qubit("target")?,
            delta: angle("delta")?,
        },
        _ => unreachable!(),
    })
}

/// Seed-deterministic random circuit.
///
/// Each slot draws uniformly among the three gate families; a `u` gate gets
/// a uniform random target and four angles uniform in `[0, 2pi)`, a Hadamard
/// a uniform target, and a CNOT a uniform ordered pair of distinct qubits.
/// Draw order per slot is family, target(s), then angles.
pub fn random_circuit(num_qubits: usize, num_gates: usize, seed: RngSeed) -> Result<Circuit> {
    if num_qubits < 2 {
        return Err(Error::invalid(
            "random circuits need at least two qubits for CNOT slots",
        ));
    }
    let mut rng = seed.rng();
    let gates = (0..num_gates)
        .map(|_| match rng.random_range(0..3u8) {
            0 => GateSpec::U1Q {
                target: rng.random_range(0..num_qubits),
                delta: rng.random_range(0.0..TAU),
                alpha: rng.random_range(0.0..TAU),
                theta: rng.random_range(0.0..TAU),
                beta: rng.random_range(0.0..TAU),
            },
            1 => GateSpec::Hadamard {
                target: rng.random_range(0..num_qubits),
            },
            _ => {
                let control = rng.random_range(0..num_qubits);
                let mut target = rng.random_range(0..num_qubits - 1);
                if target >= control {
                    target += 1;
                }
                GateSpec::Cnot { control, target }
            }
        })
        .collect();
    Circuit::new(num_qubits, gates)
}

/// Fixed four-qubit entanglement-swapping test circuit.
///
/// Three identical ten-gate rounds; each round distributes Bell pairs on
/// (0,1) and (2,3), rotates (1,2) into the Bell basis, then applies the
/// X- and Z-style corrections coherently (the CZ written as H-CNOT-H).
/// Thirty gates total, all Hadamard or CNOT, stable across releases.
pub fn repeater_circuit() -> Circuit {
    let round = [
        GateSpec::Hadamard { target: 0 },
        GateSpec::Cnot {
            control: 0,
            target: 1,
        },
        GateSpec::Hadamard { target: 2 },
        GateSpec::Cnot {
            control: 2,
            target: 3,
        },
        GateSpec::Cnot {
            control: 1,
            target: 2,
        },
        GateSpec::Hadamard { target: 1 },
        GateSpec::Cnot {
            control: 2,
            target: 3,
        },
        GateSpec::Hadamard { target: 3 },
        GateSpec::Cnot {
            control: 1,
            target: 3,
        },
        GateSpec::Hadamard { target: 3 },
    ];
    let gates: Vec<GateSpec> = (0..3).flat_map(|_| round.clone()).collect();
    Circuit::new(4, gates).expect("repeater circuit is statically valid")
}

/// Canonical `u`-gate angles used when a gate must be expressed in the
/// one-qubit decomposition: Hadamard is `(pi/2, 0, pi/2, pi)`, a phase gate
/// is `(delta, 0, 0, 0)`. CNOT has no such form.
pub fn canonical_angles(gate: &GateSpec) -> Option<[f64; 4]> {
    match *gate {
        GateSpec::U1Q {
            delta,
            alpha,
            theta,
            beta,
            ..
        } => Some([delta, alpha, theta, beta]),
        GateSpec::Hadamard { .. } => Some([FRAC_PI_2, 0.0, FRAC_PI_2, PI]),
        GateSpec::Phase { delta, .. } => Some([delta, 0.0, 0.0, 0.0]),
        GateSpec::Cnot { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn random_circuit_contract() {
        let c = random_circuit(3, 25, RngSeed::new(1)).unwrap();
        assert_eq!(c.num_gates(), 25);
        assert_eq!(c.num_qubits(), 3);
        for gate in c.gates() {
            gate.validate(3).unwrap();
        }

        let again = random_circuit(3, 25, RngSeed::new(1)).unwrap();
        assert_eq!(c, again);

        let empty = random_circuit(2, 0, RngSeed::new(1)).unwrap();
        assert_eq!(empty.num_gates(), 0);

        assert!(random_circuit(1, 5, RngSeed::new(1)).is_err());
    }

    #[test]
    fn random_circuit_draws_every_family() {
        let c = random_circuit(4, 200, RngSeed::new(2)).unwrap();
        let mut u = 0;
        let mut h = 0;
        let mut cx = 0;
        for gate in c.gates() {
            match gate {
                GateSpec::U1Q {
                    delta,
                    alpha,
                    theta,
                    beta,
                    ..
                } => {
                    for angle in [delta, alpha, theta, beta] {
                        assert!((0.0..TAU).contains(angle));
                    }
                    u += 1;
                }
                GateSpec::Hadamard { .. } => h += 1,
                GateSpec::Cnot { control, target } => {
                    assert_ne!(control, target);
                    cx += 1;
                }
                GateSpec::Phase { .. } => panic!("phase gates are not in the random mix"),
            }
        }
        assert!(u > 30 && h > 30 && cx > 30, "u={u} h={h} cnot={cx}");
    }

    #[test]
    fn repeater_matches_stated_shape() {
        let c = repeater_circuit();
        assert_eq!(c.num_qubits(), 4);
        assert!((28..=32).contains(&c.num_gates()));
        for gate in c.gates() {
            assert!(
                matches!(gate, GateSpec::Hadamard { .. } | GateSpec::Cnot { .. }),
                "unexpected gate {gate:?}"
            );
        }
        assert_eq!(repeater_circuit(), c);

        let out = c.run(StateVector::basis_state("0000").unwrap()).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn run_empty_circuit_returns_input() {
        let c = Circuit::new(2, vec![]).unwrap();
        let s = StateVector::basis_state("10").unwrap();
        let out = c.run(s.clone()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn run_builds_bell_state() {
        let c = Circuit::new(
            2,
            vec![
                GateSpec::Hadamard { target: 0 },
                GateSpec::Cnot {
                    control: 0,
                    target: 1,
                },
            ],
        )
        .unwrap();
        let out = c.run(StateVector::basis_state("00").unwrap()).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!((out.amplitude(0b00) - h).norm() < 1e-15);
        assert!((out.amplitude(0b11) - h).norm() < 1e-15);
        assert!(out.amplitude(0b01).norm() < 1e-15);
        assert!(out.amplitude(0b10).norm() < 1e-15);
    }

    #[test]
    fn run_rejects_dimension_mismatch() {
        let c = Circuit::new(2, vec![]).unwrap();
        assert!(c.run(StateVector::basis_state("000").unwrap()).is_err());
    }

    #[test]
    fn gate_unitaries() {
        let h = GateSpec::Hadamard { target: 0 }.unitary();
        let w = FRAC_1_SQRT_2;
        for (r, c, sign) in [(0, 0, w), (0, 1, w), (1, 0, w), (1, 1, -w)] {
            assert!((h.entry(r, c) - Complex64::new(sign, 0.0)).norm() < 1e-15);
        }

        let id = GateSpec::U1Q {
            target: 0,
            delta: 0.0,
            alpha: 0.0,
            theta: 0.0,
            beta: 0.0,
        }
        .unitary();
        assert!(id.unitarity_error() < 1e-15);
        assert!((id.entry(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let cx = GateSpec::Cnot {
            control: 0,
            target: 1,
        }
        .unitary();
        assert_eq!(cx.dimension(), 4);
        assert!(cx.is_unitary(1e-15));
    }

    #[test]
    fn every_gate_variant_is_unitary_by_oracle() {
        // A-dagger-A against the identity, computed here rather than with
        // the matrix type's own checker.
        let oracle_unitarity_error = |g: &GateMatrix| {
            let dim = g.dimension();
            let mut worst = 0.0f64;
            for r in 0..dim {
                for c in 0..dim {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for k in 0..dim {
                        sum += g.entry(k, r).conj() * g.entry(k, c);
                    }
                    let expect = if r == c { 1.0 } else { 0.0 };
                    worst = worst.max((sum - Complex64::new(expect, 0.0)).norm());
                }
            }
            worst
        };
        let mut rng = RngSeed::new(19).rng();
        use rand::Rng;
        for _ in 0..50 {
            let gates = [
                GateSpec::U1Q {
                    target: 0,
                    delta: rng.random_range(0.0..TAU),
                    alpha: rng.random_range(0.0..TAU),
                    theta: rng.random_range(0.0..TAU),
                    beta: rng.random_range(0.0..TAU),
                },
                GateSpec::Hadamard { target: 0 },
                GateSpec::Cnot {
                    control: 0,
                    target: 1,
                },
                GateSpec::Phase {
                    target: 0,
                    delta: rng.random_range(0.0..TAU),
                },
            ];
            for gate in &gates {
                let err = oracle_unitarity_error(&gate.unitary());
                assert!(err < 1e-12, "{gate:?}: unitarity error {err:.3e}");
            }
        }
    }

    #[test]
    fn circuit_new_validates_gates() {
        assert!(Circuit::new(2, vec![GateSpec::Hadamard { target: 2 }]).is_err());
        assert!(Circuit::new(
            2,
            vec![GateSpec::Cnot {
                control: 1,
                target: 1
            }]
        )
        .is_err());
        assert!(Circuit::new(
            2,
            vec![GateSpec::Phase {
                target: 0,
                delta: f64::NAN
            }]
        )
        .is_err());
    }

    #[test]
    fn json_round_trip_on_repeater() {
        let c = repeater_circuit();
        let text = c.to_json();
        let back = Circuit::from_json(&text).unwrap();
        assert_eq!(back, c);
    }

    // Byte-for-byte stability promise for the fixed test circuit; a diff
    // here is a compatibility break, not a refactor.
    #[test]
    fn repeater_matches_golden_document() {
        let golden = include_str!("../tests/data/repeater.json");
        assert_eq!(repeater_circuit().to_json(), golden.trim_end());
        assert_eq!(Circuit::from_json(golden).unwrap(), repeater_circuit());
    }

    #[test]
    fn json_rejects_out_of_range_and_unknown_input() {
        let err = Circuit::from_json(
            r#"{"qubits": 4, "gates": [{"type": "cnot", "control": 5, "target": 0}]}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gate 0"), "{msg}");
        assert!(msg.contains("out of range"), "{msg}");

        assert!(
            Circuit::from_json(r#"{"qubits": 2, "gates": [{"type": "swap", "target": 0}]}"#)
                .is_err()
        );
        assert!(Circuit::from_json(
            r#"{"qubits": 2, "gates": [{"type": "h", "target": 0, "extra": 1}]}"#
        )
        .is_err());
        assert!(Circuit::from_json(r#"{"qubits": 2, "gates": [], "notes": "x"}"#).is_err());
        assert!(Circuit::from_json("{\"qubits\": 2").is_err());
    }

    #[test]
    fn rejects_registers_beyond_the_dense_limit() {
        assert!(Circuit::new(64, vec![]).is_err());
        assert!(Circuit::from_json(r#"{"qubits": 10000000000, "gates": []}"#).is_err());
        assert!(StateVector::basis_state(&"0".repeat(64)).is_err());
    }

    #[test]
    fn json_accepts_empty_gate_list() {
        let c = Circuit::from_json(r#"{"qubits": 3, "gates": []}"#).unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.num_gates(), 0);
    }

    proptest! {
        #[test]
        fn json_round_trip_random_circuits(seed in 0u64..1000) {
            let c = random_circuit(4, 12, RngSeed::new(seed)).unwrap();
            let back = Circuit::from_json(&c.to_json()).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn split_execution_matches_whole(seed in 0u64..200, cut in 0usize..=10) {
            let c = random_circuit(3, 10, RngSeed::new(seed)).unwrap();
            let first = Circuit::new(3, c.gates()[..cut].to_vec()).unwrap();
            let second = Circuit::new(3, c.gates()[cut..].to_vec()).unwrap();

            let input = StateVector::basis_state("010").unwrap();
            let whole = c.run(input.clone()).unwrap();
            let split = second.run(first.run(input).unwrap()).unwrap();
            for (a, b) in whole.amplitudes().iter().zip(split.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn run_preserves_norm(seed in 0u64..100) {
            let c = random_circuit(4, 20, RngSeed::new(seed)).unwrap();
            let input = StateVector::basis_state("0110").unwrap();
            let out = c.run(input).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
