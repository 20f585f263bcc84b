//! Accuracy experiments: wire circuit generation, fault injection, swap-test
//! probing, and KNN scoring into reproducible sweeps with CSV output.
//!
//! Everything is a pure function of the [`SweepConfig`]. Per-cell seeds are
//! derived from the master seed and the cell coordinates, per-circuit and
//! per-trial seeds from the cell seed, so cells can run in any order (or in
//! parallel) and a rerun with the same config is byte-identical.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::circuit::{random_circuit, repeater_circuit, Circuit};
use crate::diagnostic::{feature_vector, FeatureVector, InputMode, ProbeConfig, ReferenceMode};
use crate::error::{Error, Result};
use crate::fault::{apply_fault, fault_dataset};
use crate::knn::{accuracy, train_test_split, KnnConfig, Weighting};
use crate::seed::RngSeed;

// Coordinate tags for seed derivation below a cell.
const TAG_CIRCUIT: u64 = 0x01;
const TAG_FAULTS: u64 = 0x02;
const TAG_FEATURES: u64 = 0x03;
const TAG_SPLIT: u64 = 0x04;

/// Mode-index stand-in for seeds shared by every input mode of a sweep
/// value. Circuits, fault draws, and splits come from this scope so the
/// input modes are compared on identical datasets; only shot noise is
/// drawn per mode.
const SHARED_SCOPE: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Fixed gate count, sweep the number of qubits.
    QubitSweep,
    /// Fixed qubit count, sweep the number of gates.
    GateSweep,
    /// The fixed entanglement-swapping test circuit under controlled and
    /// uncontrolled inputs.
    Repeater,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::QubitSweep => "qubit-sweep",
            ExperimentKind::GateSweep => "gate-sweep",
            ExperimentKind::Repeater => "repeater",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qubit-sweep" => Ok(ExperimentKind::QubitSweep),
            "gate-sweep" => Ok(ExperimentKind::GateSweep),
            "repeater" => Ok(ExperimentKind::Repeater),
            other => Err(Error::invalid(format!(
                "unknown experiment {other:?} (expected qubit-sweep, gate-sweep, or repeater)"
            ))),
        }
    }
}

/// Full description of one experiment run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub experiment: ExperimentKind,
    /// Qubit counts visited by the qubit sweep.
    pub qubit_range: Vec<usize>,
    /// Gate counts visited by the gate sweep.
    pub gate_range: Vec<usize>,
    /// Gate count per circuit in the qubit sweep.
    pub fixed_gates: usize,
    /// Qubit count in the gate sweep.
    pub fixed_qubits: usize,
    pub input_modes: Vec<InputMode>,
    pub reference_mode: ReferenceMode,
    pub samples_per_gate: usize,
    pub train_fraction: f64,
    pub knn: KnnConfig,
    /// Feature dimension d: number of probe states per measurement.
    pub num_probes: usize,
    /// 0 = exact probabilities.
    pub shots: u64,
    /// Train/test resplits per circuit.
    pub trials: usize,
    pub circuits_per_cell: usize,
    pub master_seed: RngSeed,
}

impl SweepConfig {
    pub fn new(experiment: ExperimentKind) -> SweepConfig {
        SweepConfig {
            experiment,
            qubit_range: (2..=9).collect(),
            gate_range: vec![10, 20, 30],
            fixed_gates: 10,
            fixed_qubits: 6,
            input_modes: vec![
                InputMode::AllZeros,
                InputMode::BasisStates,
                InputMode::HadamardAll,
                InputMode::Qft,
            ],
            reference_mode: ReferenceMode::Qft,
            samples_per_gate: 200,
            train_fraction: 0.8,
            knn: KnnConfig {
                k: 5,
                weighting: Weighting::InverseDistance,
            },
            num_probes: 4,
            shots: 0,
            trials: 1,
            circuits_per_cell: 5,
            master_seed: RngSeed::new(42),
        }
    }

    /// Check every field against its documented range.
    pub fn validate(&self) -> Result<()> {
        match self.experiment {
            ExperimentKind::QubitSweep if self.qubit_range.is_empty() => {
                return Err(Error::invalid("qubit range must not be empty"));
            }
            ExperimentKind::GateSweep if self.gate_range.is_empty() => {
                return Err(Error::invalid("gate range must not be empty"));
            }
            _ => {}
        }
        if self.input_modes.is_empty() {
            return Err(Error::invalid("at least one input mode is required"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction {} must lie strictly between 0 and 1",
                self.train_fraction
            )));
        }
        if self.samples_per_gate == 0 {
            return Err(Error::invalid("samples per gate must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.circuits_per_cell == 0 {
            return Err(Error::invalid("circuits per cell must be at least 1"));
        }
        if self.num_probes == 0 {
            return Err(Error::invalid("probe count must be at least 1"));
        }
        if self.knn.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        Ok(())
    }
}

/// One row of the results table: the mean accuracy and its standard error
/// for a (sweep value, input mode) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub sweep_value: usize,
    pub input_mode: InputMode,
    pub reference_mode: ReferenceMode,
    pub mean_accuracy: f64,
    pub std_error: f64,
    pub trials: usize,
    pub circuits: usize,
    pub seed: u64,
}

/// Labeled feature dataset for every fault in `samples_per_gate` draws per
/// gate of `circuit`. Entry `e` of the fault dataset is measured with the
/// child seed `feature_seed.derive(e, 0)`; entries are computed in parallel.
pub fn labeled_feature_dataset(
    circuit: &Circuit,
    probe: &ProbeConfig,
    samples_per_gate: usize,
    fault_seed: RngSeed,
    feature_seed: RngSeed,
) -> Result<Vec<FeatureVector>> {
    let faults = fault_dataset(circuit, samples_per_gate, fault_seed)?;
    faults
        .par_iter()
        .enumerate()
        .map(|(e, (fault, label))| {
            let faulted = apply_fault(circuit, fault)?;
            Ok(
                feature_vector(&faulted, probe, feature_seed.derive(e as u64, 0))?
                    .with_label(*label),
            )
        })
        .collect()
}

/// Diagnosis accuracies for one circuit: build the labeled dataset, then
/// split and score once per trial.
///
/// `shared_seed` scopes the fault draws and splits (common to every input
/// mode of the cell's sweep value); `noise_seed` scopes shot sampling and
/// is per mode.
fn circuit_accuracies(
    circuit: &Circuit,
    input_mode: InputMode,
    config: &SweepConfig,
    shared_seed: RngSeed,
    noise_seed: RngSeed,
    circuit_index: usize,
    num_probes: usize,
) -> Result<Vec<f64>> {
    let probe = ProbeConfig::standard(
        input_mode,
        config.reference_mode,
        circuit.num_qubits(),
        num_probes,
        config.shots,
    );
    let c = circuit_index as u64;
    let features = labeled_feature_dataset(
        circuit,
        &probe,
        config.samples_per_gate,
        shared_seed.derive(TAG_FAULTS, c),
        noise_seed.derive(TAG_FEATURES, c),
    )?;
    (0..config.trials)
        .map(|trial| {
            let split_seed = shared_seed.derive(TAG_SPLIT, c << 32 | trial as u64);
            let (train, test) =
                train_test_split(features.clone(), config.train_fraction, split_seed)?;
            accuracy(&train, &test, &config.knn)
        })
        .collect()
}

fn summarize(
    experiment: &str,
    sweep_value: usize,
    input_mode: InputMode,
    config: &SweepConfig,
    circuits: usize,
    accuracies: &[f64],
) -> ResultRow {
    let n = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / n;
    let std_error = if accuracies.len() > 1 {
        let variance = accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (variance / n).sqrt()
    } else {
        0.0
    };
    ResultRow {
        experiment: experiment.to_string(),
        sweep_value,
        input_mode,
        reference_mode: config.reference_mode,
        mean_accuracy: mean,
        std_error,
        trials: config.trials,
        circuits,
        seed: config.master_seed.value(),
    }
}

/// Accuracy versus qubit count at a fixed gate count, one row per
/// (qubit count, input mode).
pub fn run_qubit_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for &n in &config.qubit_range {
        let shared_seed = config.master_seed.derive(n as u64, SHARED_SCOPE);
        for (mode_index, &mode) in config.input_modes.iter().enumerate() {
            let noise_seed = config.master_seed.derive(n as u64, mode_index as u64);
            let mut accuracies = Vec::with_capacity(config.circuits_per_cell * config.trials);
            for c in 0..config.circuits_per_cell {
                let circuit = random_circuit(
                    n,
                    config.fixed_gates,
                    shared_seed.derive(TAG_CIRCUIT, c as u64),
                )?;
                accuracies.extend(circuit_accuracies(
                    &circuit,
                    mode,
                    config,
                    shared_seed,
                    noise_seed,
                    c,
                    config.num_probes,
                )?);
            }
            rows.push(summarize(
                "qubit-sweep",
                n,
                mode,
                config,
                config.circuits_per_cell,
                &accuracies,
            ));
        }
    }
    Ok(rows)
}

/// Accuracy versus gate count at a fixed qubit count.
pub fn run_gate_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for &gates in &config.gate_range {
        let shared_seed = config.master_seed.derive(gates as u64, SHARED_SCOPE);
        for (mode_index, &mode) in config.input_modes.iter().enumerate() {
            let noise_seed = config.master_seed.derive(gates as u64, mode_index as u64);
            let mut accuracies = Vec::with_capacity(config.circuits_per_cell * config.trials);
            for c in 0..config.circuits_per_cell {
                let circuit = random_circuit(
                    config.fixed_qubits,
                    gates,
                    shared_seed.derive(TAG_CIRCUIT, c as u64),
                )?;
                accuracies.extend(circuit_accuracies(
                    &circuit,
                    mode,
                    config,
                    shared_seed,
                    noise_seed,
                    c,
                    config.num_probes,
                )?);
            }
            rows.push(summarize(
                "gate-sweep",
                gates,
                mode,
                config,
                config.circuits_per_cell,
                &accuracies,
            ));
        }
    }
    Ok(rows)
}

/// The fixed repeater circuit under three input conditions, plus a repeat of
/// the all-zeros condition with twice the probes.
///
/// Rows: controlled Hadamard input, controlled QFT input, and all-zeros
/// input at `num_probes` probes, then all-zeros at `2 * num_probes`. The
/// sweep-value column carries the probe count.
pub fn run_repeater_experiment(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let circuit = repeater_circuit();
    let d = config.num_probes;
    let conditions = [
        (InputMode::HadamardAll, d),
        (InputMode::Qft, d),
        (InputMode::AllZeros, d),
        (InputMode::AllZeros, 2 * d),
    ];
    // One fault population for all four conditions; they differ only in
    // how the faults are probed.
    let shared_seed = config.master_seed.derive(0, SHARED_SCOPE);
    let mut rows = Vec::new();
    for (index, &(mode, probes)) in conditions.iter().enumerate() {
        let noise_seed = config.master_seed.derive(index as u64, probes as u64);
        let accuracies =
            circuit_accuracies(&circuit, mode, config, shared_seed, noise_seed, 0, probes)?;
        rows.push(summarize("repeater", probes, mode, config, 1, &accuracies));
    }
    Ok(rows)
}

/// Diagnose a user-supplied circuit: one row per configured input mode,
/// with the gate count in the sweep-value column.
pub fn run_circuit_diagnosis(circuit: &Circuit, config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let shared_seed = config
        .master_seed
        .derive(circuit.num_gates() as u64, SHARED_SCOPE);
    let mut rows = Vec::new();
    for (mode_index, &mode) in config.input_modes.iter().enumerate() {
        let noise_seed = config
            .master_seed
            .derive(circuit.num_gates() as u64, mode_index as u64);
        let accuracies = circuit_accuracies(
            circuit,
            mode,
            config,
            shared_seed,
            noise_seed,
            0,
            config.num_probes,
        )?;
        rows.push(summarize(
            "custom",
            circuit.num_gates(),
            mode,
            config,
            1,
            &accuracies,
        ));
    }
    Ok(rows)
}

/// Dispatch on the configured experiment kind.
pub fn run_experiment(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    match config.experiment {
        ExperimentKind::QubitSweep => run_qubit_sweep(config),
        ExperimentKind::GateSweep => run_gate_sweep(config),
        ExperimentKind::Repeater => run_repeater_experiment(config),
    }
}

/// The labeled feature dataset behind the first result cell of a run, for
/// feature export. Reuses the run's own seed derivation, so the rows match
/// what the sweep measured. `custom` substitutes a user-supplied circuit
/// (the --circuit-file path).
pub fn first_cell_features(
    config: &SweepConfig,
    custom: Option<&Circuit>,
) -> Result<Vec<FeatureVector>> {
    config.validate()?;
    let shared = |value: usize| config.master_seed.derive(value as u64, SHARED_SCOPE);
    let noise = |value: usize| config.master_seed.derive(value as u64, 0);
    let (circuit, shared_seed, noise_seed, mode) = match custom {
        Some(circuit) => (
            circuit.clone(),
            shared(circuit.num_gates()),
            noise(circuit.num_gates()),
            config.input_modes[0],
        ),
        None => match config.experiment {
            ExperimentKind::QubitSweep => {
                let n = config.qubit_range[0];
                (
                    random_circuit(n, config.fixed_gates, shared(n).derive(TAG_CIRCUIT, 0))?,
                    shared(n),
                    noise(n),
                    config.input_modes[0],
                )
            }
            ExperimentKind::GateSweep => {
                let gates = config.gate_range[0];
                (
                    random_circuit(
                        config.fixed_qubits,
                        gates,
                        shared(gates).derive(TAG_CIRCUIT, 0),
                    )?,
                    shared(gates),
                    noise(gates),
                    config.input_modes[0],
                )
            }
            // First repeater condition: controlled Hadamard input.
            ExperimentKind::Repeater => (
                repeater_circuit(),
                shared(0),
                config.master_seed.derive(0, config.num_probes as u64),
                InputMode::HadamardAll,
            ),
        },
    };
    let probe = ProbeConfig::standard(
        mode,
        config.reference_mode,
        circuit.num_qubits(),
        config.num_probes,
        config.shots,
    );
    labeled_feature_dataset(
        &circuit,
        &probe,
        config.samples_per_gate,
        shared_seed.derive(TAG_FAULTS, 0),
        noise_seed.derive(TAG_FEATURES, 0),
    )
}

/// Render rows as the results CSV.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(
        "experiment,sweep_value,input_mode,reference_mode,mean_accuracy,std_error,trials,circuits,seed\n",
    );
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{},{},{}",
            row.experiment,
            row.sweep_value,
            row.input_mode,
            row.reference_mode,
            row.mean_accuracy,
            row.std_error,
            row.trials,
            row.circuits,
            row.seed
        )
        .expect("writing to a string cannot fail");
    }
    out
}

/// Sidecar run manifest: the full configuration and artifact version as
/// `key = value` lines.
pub fn run_manifest(config: &SweepConfig) -> String {
    let join = |values: &[usize]| {
        values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let modes = config
        .input_modes
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let mut out = String::new();
    let mut line = |key: &str, value: String| {
        writeln!(out, "{key} = {value}").expect("writing to a string cannot fail");
    };
    line(
        "artifact",
        format!("gatediag {}", env!("CARGO_PKG_VERSION")),
    );
    line("experiment", config.experiment.to_string());
    line("qubit_range", join(&config.qubit_range));
    line("gate_range", join(&config.gate_range));
    line("fixed_gates", config.fixed_gates.to_string());
    line("fixed_qubits", config.fixed_qubits.to_string());
    line("input_modes", modes);
    line("reference_mode", config.reference_mode.to_string());
    line("samples_per_gate", config.samples_per_gate.to_string());
    line("train_fraction", config.train_fraction.to_string());
    line("k", config.knn.k.to_string());
    line("weighting", config.knn.weighting.to_string());
    line("probes", config.num_probes.to_string());
    line("shots", config.shots.to_string());
    line("trials", config.trials.to_string());
    line("circuits_per_cell", config.circuits_per_cell.to_string());
    line("seed", config.master_seed.value().to_string());
    out
}
