//! `gatediag`: run the gate-fault diagnosis experiments from the command
//! line and write plot-ready CSV results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use gatediag_core::{
    results_csv, run_circuit_diagnosis, run_experiment, run_manifest, save_training, Circuit,
    ExperimentKind, InputMode, KnnConfig, ReferenceMode, ResultRow, RngSeed, SweepConfig,
    TrainingSet, Weighting,
};

#[derive(Debug, Parser)]
#[command(
    name = "gatediag",
    version,
    about = "Locate faulty gates in quantum circuits with swap-test probing and KNN",
    after_help = "EXAMPLES:\n    \
        gatediag --experiment qubit-sweep --qubits 2..5 --gates 10 --seed 42 --out r.csv\n    \
        gatediag --experiment gate-sweep --qubits 6 --gates 10,20,30 --out gates.csv\n    \
        gatediag --experiment repeater --seed 7\n    \
        gatediag --circuit-file my_circuit.json --input-modes hadamard,qft --out custom.csv"
)]
struct Args {
    /// Which experiment to run: qubit-sweep, gate-sweep, or repeater.
    /// Not needed when --circuit-file is given.
    #[arg(long)]
    experiment: Option<String>,

    /// Qubit counts: a range "2..7" (inclusive) or a list "2,4,6".
    /// Sweep values for qubit-sweep; the fixed qubit count for gate-sweep.
    #[arg(long)]
    qubits: Option<String>,

    /// Gate counts: a range "10..30" (inclusive) or a list "10,20,30".
    /// Sweep values for gate-sweep; the fixed gate count for qubit-sweep.
    #[arg(long)]
    gates: Option<String>,

    /// Comma-separated input modes: all-zeros, basis, hadamard, qft.
    #[arg(long, default_value = "all-zeros,basis,hadamard,qft")]
    input_modes: String,

    /// Reference unitary: hadamard or qft.
    #[arg(long, default_value = "qft")]
    reference_mode: String,

    /// Random faults drawn per gate position.
    #[arg(long, default_value_t = 200)]
    samples_per_gate: usize,

    /// Fraction of each class used for training.
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,

    /// Number of nearest neighbors.
    #[arg(long, default_value_t = 5)]
    k: usize,

    /// Vote weighting: uniform or inverse.
    #[arg(long, default_value = "inverse")]
    weighting: String,

    /// Probe states per feature vector (the feature dimension d).
    #[arg(long, default_value_t = 4)]
    probes: usize,

    /// Measurement shots per probe; 0 = exact probabilities.
    #[arg(long, default_value_t = 0)]
    shots: u64,

    /// Train/test resplits per circuit.
    #[arg(long, default_value_t = 1)]
    trials: usize,

    /// Random circuits per sweep cell.
    #[arg(long, default_value_t = 5)]
    circuits: usize,

    /// Master seed; the entire run is a deterministic function of it.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Results CSV path; stdout when omitted. A run manifest is written
    /// next to the file as OUT.manifest.txt.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write the labeled feature CSV of the first evaluated circuit.
    #[arg(long)]
    save_features: Option<PathBuf>,

    /// Diagnose this circuit document instead of generated circuits.
    #[arg(long)]
    circuit_file: Option<PathBuf>,
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    eprintln!("run with --help for usage");
    ExitCode::from(2)
}

/// "a..b" (inclusive) or "a,b,c".
fn parse_values(text: &str, flag: &str) -> Result<Vec<usize>, String> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("{flag}: {s:?} is not a non-negative integer"))
    };
    if let Some((lo, hi)) = text.split_once("..") {
        let lo = parse_one(lo)?;
        let hi = parse_one(hi)?;
        if lo > hi {
            return Err(format!("{flag}: empty range {lo}..{hi}"));
        }
        Ok((lo..=hi).collect())
    } else {
        text.split(',').map(parse_one).collect()
    }
}

fn single_value(values: &[usize], flag: &str, role: &str) -> Result<usize, String> {
    match values {
        [one] => Ok(*one),
        _ => Err(format!("{flag} must be a single value when it sets {role}")),
    }
}

fn build_config(args: &Args) -> Result<SweepConfig, String> {
    let experiment = match (&args.experiment, &args.circuit_file) {
        (Some(name), _) => name.parse::<ExperimentKind>().map_err(|e| e.to_string())?,
        // Placeholder kind; the circuit-file path never dispatches on it.
        (None, Some(_)) => ExperimentKind::QubitSweep,
        (None, None) => return Err("either --experiment or --circuit-file is required".into()),
    };

    let mut config = SweepConfig::new(experiment);
    config.input_modes = args
        .input_modes
        .split(',')
        .map(|m| m.trim().parse::<InputMode>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    config.reference_mode = args
        .reference_mode
        .parse::<ReferenceMode>()
        .map_err(|e| e.to_string())?;
    config.knn = KnnConfig {
        k: args.k,
        weighting: args
            .weighting
            .parse::<Weighting>()
            .map_err(|e| e.to_string())?,
    };
    config.samples_per_gate = args.samples_per_gate;
    config.train_fraction = args.train_fraction;
    config.num_probes = args.probes;
    config.shots = args.shots;
    config.trials = args.trials;
    config.circuits_per_cell = args.circuits;
    config.master_seed = RngSeed::new(args.seed);

    let qubits = args
        .qubits
        .as_deref()
        .map(|text| parse_values(text, "--qubits"))
        .transpose()?;
    let gates = args
        .gates
        .as_deref()
        .map(|text| parse_values(text, "--gates"))
        .transpose()?;

    if args.circuit_file.is_none() {
        match experiment {
            ExperimentKind::QubitSweep => {
                if let Some(qubits) = qubits {
                    config.qubit_range = qubits;
                }
                if let Some(gates) = gates {
                    config.fixed_gates =
                        single_value(&gates, "--gates", "the qubit sweep's gate count")?;
                }
            }
            ExperimentKind::GateSweep => {
                if let Some(gates) = gates {
                    config.gate_range = gates;
                }
                if let Some(qubits) = qubits {
                    config.fixed_qubits =
                        single_value(&qubits, "--qubits", "the gate sweep's qubit count")?;
                }
            }
            ExperimentKind::Repeater => {}
        }
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn write_features(
    path: &std::path::Path,
    config: &SweepConfig,
    custom: Option<&Circuit>,
) -> gatediag_core::Result<()> {
    let features = gatediag_core::first_cell_features(config, custom)?;
    let set = TrainingSet::new(features)?;
    save_training(&set, path)
}

fn run(args: &Args, config: &SweepConfig) -> Result<Vec<ResultRow>, gatediag_core::Error> {
    let custom = match &args.circuit_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Some(Circuit::from_json(&text)?)
        }
        None => None,
    };
    let rows = match &custom {
        Some(circuit) => run_circuit_diagnosis(circuit, config)?,
        None => run_experiment(config)?,
    };
    if let Some(path) = &args.save_features {
        write_features(path, config, custom.as_ref())?;
    }
    let csv = results_csv(&rows);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            let manifest_path = {
                let mut os = path.clone().into_os_string();
                os.push(".manifest.txt");
                PathBuf::from(os)
            };
            std::fs::write(&manifest_path, run_manifest(config))?;
        }
        None => print!("{csv}"),
    }
    Ok(rows)
}

fn main() -> ExitCode {
    let args = Args::parse();

    // Combination checks clap cannot express; they exit 2 like other
    // usage errors.
    let config = match build_config(&args) {
        Ok(config) => config,
        Err(message) => return usage_error(&message),
    };

    match run(&args, &config) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
