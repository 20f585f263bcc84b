use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use gatediag_core::{
    accuracy, feature_vector, hadamard, labeled_feature_dataset, predict, random_circuit,
    train_test_split, FeatureVector, InputMode, KnnConfig, ProbeConfig, ReferenceMode, RngSeed,
    StateVector, TrainingSet, Weighting,
};

fn bench_gate_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("gate_kernels");
    for n in [10usize, 14, 18] {
        let zeros: String = "0".repeat(n);
        let state = StateVector::basis_state(&zeros).unwrap();
        let h = hadamard();
        group.bench_function(format!("hadamard_{n}q"), |b| {
            b.iter_batched(
                || state.clone(),
                |s| s.apply_1q(black_box(&h), n / 2).unwrap(),
                BatchSize::SmallInput,
            )
        });
        group.bench_function(format!("cnot_{n}q"), |b| {
            b.iter_batched(
                || state.clone(),
                |s| s.apply_cnot(0, n - 1).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    let state = StateVector::basis_state(&"0".repeat(12)).unwrap();
    let targets: Vec<usize> = (0..12).collect();
    group.bench_function("qft_12q_full_register", |b| {
        b.iter_batched(
            || state.clone(),
            |s| s.apply_qft(black_box(&targets)).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn bench_circuit_run(c: &mut Criterion) {
    let circuit = random_circuit(9, 30, RngSeed::new(1)).unwrap();
    let input = StateVector::basis_state(&"0".repeat(9)).unwrap();
    c.bench_function("run_30_gates_9q", |b| {
        b.iter_batched(
            || input.clone(),
            |s| circuit.run(s).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_feature_vector(c: &mut Criterion) {
    let circuit = random_circuit(6, 20, RngSeed::new(2)).unwrap();
    let probe = ProbeConfig::standard(InputMode::HadamardAll, ReferenceMode::Qft, 6, 4, 0);
    c.bench_function("feature_vector_6q_20_gates_d4", |b| {
        b.iter(|| feature_vector(black_box(&circuit), &probe, RngSeed::new(0)).unwrap())
    });
}

fn bench_fault_dataset(c: &mut Criterion) {
    let circuit = random_circuit(5, 10, RngSeed::new(3)).unwrap();
    let probe = ProbeConfig::standard(InputMode::HadamardAll, ReferenceMode::Qft, 5, 4, 0);
    c.bench_function("labeled_dataset_10_gates_50_per_gate", |b| {
        b.iter(|| {
            labeled_feature_dataset(
                black_box(&circuit),
                &probe,
                50,
                RngSeed::new(4),
                RngSeed::new(5),
            )
            .unwrap()
        })
    });
}

fn bench_knn(c: &mut Criterion) {
    let mut rng = RngSeed::new(6).rng();
    use rand::Rng;
    let dataset: Vec<FeatureVector> = (0..2000)
        .map(|i| {
            FeatureVector::labeled((0..4).map(|_| rng.random_range(0.0..1.0)).collect(), i % 10)
        })
        .collect();
    let (train, test) = train_test_split(dataset, 0.8, RngSeed::new(7)).unwrap();
    let config = KnnConfig {
        k: 5,
        weighting: Weighting::InverseDistance,
    };

    c.bench_function("predict_1600_train_d4", |b| {
        b.iter(|| predict(black_box(&train), &test[0], &config).unwrap())
    });
    c.bench_function("accuracy_400_queries_1600_train", |b| {
        b.iter(|| accuracy(black_box(&train), &test, &config).unwrap())
    });

    let single = TrainingSet::new(train.entries().to_vec()).unwrap();
    let uniform = KnnConfig {
        k: 1,
        weighting: Weighting::Uniform,
    };
    c.bench_function("predict_k1_uniform", |b| {
        b.iter(|| predict(black_box(&single), &test[1], &uniform).unwrap())
    });
}

criterion_group!(
    benches,
    bench_gate_kernels,
    bench_circuit_run,
    bench_feature_vector,
    bench_fault_dataset,
    bench_knn
);
criterion_main!(benches);
