//! Locate the faulty gate in a quantum circuit from swap-test fidelity
//! probes classified with weighted K-Nearest-Neighbors.
//!
//! The pipeline: describe or generate a circuit ([`circuit`]), inject a
//! single coherent gate fault ([`fault`]), probe the faulted circuit with a
//! swap-test diagnostic to get a small probability feature vector
//! ([`diagnostic`]), and train/score a KNN classifier whose classes are the
//! gate positions ([`knn`]). The [`experiment`] module wires those stages
//! into reproducible accuracy sweeps; everything simulates on a dense
//! statevector ([`state`]).

pub mod circuit;
pub mod diagnostic;
pub mod error;
pub mod experiment;
pub mod fault;
pub mod knn;
pub mod seed;
pub mod state;

pub use circuit::{random_circuit, repeater_circuit, Circuit, GateSpec};
pub use diagnostic::{
    default_probe_bitstrings, feature_vector, prepare_input, prepare_reference,
    sampled_probability, swap_test_full_simulation, swap_test_probability, FeatureVector,
    InputMode, ProbeConfig, ReferenceMode,
};
pub use error::{Error, Result};
pub use experiment::{
    first_cell_features, labeled_feature_dataset, results_csv, run_circuit_diagnosis,
    run_experiment, run_gate_sweep, run_manifest, run_qubit_sweep, run_repeater_experiment,
    ExperimentKind, ResultRow, SweepConfig,
};
pub use fault::{apply_fault, fault_dataset, sample_fault, AngleParam, FaultKind, FaultSpec};
pub use knn::{
    accuracy, euclidean_distance, load_training, predict, save_training, train_test_split,
    KnnConfig, TrainingSet, Weighting,
};
pub use seed::RngSeed;
pub use state::{
    cnot_matrix, compose_1q, hadamard, phase_gate, rotation_y, rotation_z, GateMatrix, StateVector,
};
