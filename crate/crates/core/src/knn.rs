//! Weighted K-Nearest-Neighbors over swap-test feature vectors.
//!
//! Exhaustive scan, Euclidean distance, deterministic tie-breaking:
//! neighbors are ordered by `(distance, label)` and vote ties go to the
//! smallest label, so predictions are invariant under any permutation of
//! the training entries.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::diagnostic::FeatureVector;
use crate::error::{Error, Result};
use crate::seed::RngSeed;

/// Guard added to distances before inversion, so an exact coincidence gets
/// a large finite weight instead of dividing by zero.
pub const DISTANCE_EPSILON: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    /// Each of the k neighbors votes with weight 1.
    Uniform,
    /// Each neighbor votes with weight `1 / (distance + 1e-12)`.
    InverseDistance,
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Weighting::Uniform => "uniform",
            Weighting::InverseDistance => "inverse",
        })
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Weighting::Uniform),
            "inverse" => Ok(Weighting::InverseDistance),
            other => Err(Error::invalid(format!(
                "unknown weighting {other:?} (expected uniform or inverse)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
    pub weighting: Weighting,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: 5,
            weighting: Weighting::InverseDistance,
        }
    }
}

/// Labeled feature vectors of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    entries: Vec<FeatureVector>,
    dimension: usize,
}

impl TrainingSet {
    /// Build from labeled vectors; the dimension comes from the first entry.
    pub fn new(entries: Vec<FeatureVector>) -> Result<Self> {
        let dimension = entries
            .first()
            .ok_or_else(|| Error::invalid("training set needs at least one entry"))?
            .dimension();
        Self::with_dimension(dimension, entries)
    }

    /// Build with an explicit dimension; permits an empty set.
    pub fn with_dimension(dimension: usize, entries: Vec<FeatureVector>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("feature dimension must be at least 1"));
        }
        for (i, entry) in entries.iter().enumerate() {
            if entry.dimension() != dimension {
                return Err(Error::invalid(format!(
                    "entry {i} has dimension {}, expected {dimension}",
                    entry.dimension()
                )));
            }
            if entry.label.is_none() {
                return Err(Error::invalid(format!("entry {i} is unlabeled")));
            }
        }
        Ok(TrainingSet { entries, dimension })
    }

    pub fn entries(&self) -> &[FeatureVector] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

pub fn euclidean_distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    if a.dimension() != b.dimension() {
        return Err(Error::invalid(format!(
            "distance needs equal dimensions, got {} and {}",
            a.dimension(),
            b.dimension()
        )));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Label of `query` by weighted vote of its k nearest training vectors.
pub fn predict(training: &TrainingSet, query: &FeatureVector, config: &KnnConfig) -> Result<usize> {
    if training.is_empty() {
        return Err(Error::InvalidState(
            "cannot predict with an empty training set".into(),
        ));
    }
    if config.k == 0 || config.k > training.len() {
        return Err(Error::invalid(format!(
            "k = {} must be between 1 and the training size {}",
            config.k,
            training.len()
        )));
    }
    if query.dimension() != training.dimension() {
        return Err(Error::invalid(format!(
            "query dimension {} does not match training dimension {}",
            query.dimension(),
            training.dimension()
        )));
    }

    let mut neighbors: Vec<(f64, usize)> = training
        .entries
        .iter()
        .map(|entry| {
            let distance = euclidean_distance(entry, query)?;
            Ok((distance, entry.label.expect("training entries are labeled")))
        })
        .collect::<Result<_>>()?;
    neighbors.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mut votes: BTreeMap<usize, f64> = BTreeMap::new();
    for &(distance, label) in &neighbors[..config.k] {
        let weight = match config.weighting {
            Weighting::Uniform => 1.0,
            Weighting::InverseDistance => 1.0 / (distance + DISTANCE_EPSILON),
        };
        *votes.entry(label).or_insert(0.0) += weight;
    }

    // Ascending label order plus strict `>` breaks weight ties toward the
    // smallest label.
    let mut best: Option<(f64, usize)> = None;
    for (&label, &weight) in &votes {
        if best.is_none_or(|(w, _)| weight > w) {
            best = Some((weight, label));
        }
    }
    Ok(best.expect("k >= 1 guarantees at least one vote").1)
}

/// Stratified split: per label, a seed-deterministic shuffle sends
/// `floor(train_fraction * count)` vectors to training and the rest to test.
pub fn train_test_split(
    dataset: Vec<FeatureVector>,
    train_fraction: f64,
    seed: RngSeed,
) -> Result<(TrainingSet, Vec<FeatureVector>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::invalid("cannot split an empty dataset"));
    }
    let dimension = dataset[0].dimension();

    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, entry) in dataset.iter().enumerate() {
        let label = entry
            .label
            .ok_or_else(|| Error::invalid(format!("entry {i} is unlabeled")))?;
        if entry.dimension() != dimension {
            return Err(Error::invalid(format!(
                "entry {i} has dimension {}, expected {dimension}",
                entry.dimension()
            )));
        }
        by_label.entry(label).or_default().push(i);
    }

    let mut rng = seed.rng();
    let mut to_train = vec![false; dataset.len()];
    for (label, mut indices) in by_label {
        if indices.len() < 2 {
            return Err(Error::invalid(format!(
                "label {label} has {} sample(s); stratified splitting needs at least 2",
                indices.len()
            )));
        }
        indices.shuffle(&mut rng);
        let cut = (train_fraction * indices.len() as f64).floor() as usize;
        for &i in &indices[..cut] {
            to_train[i] = true;
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (entry, goes_to_train) in dataset.into_iter().zip(&to_train) {
        if *goes_to_train {
            train.push(entry);
        } else {
            test.push(entry);
        }
    }
    Ok((TrainingSet::with_dimension(dimension, train)?, test))
}

/// Fraction of test vectors whose prediction matches their label.
pub fn accuracy(training: &TrainingSet, test: &[FeatureVector], config: &KnnConfig) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::invalid("cannot score an empty test set"));
    }
    let hits = test
        .par_iter()
        .map(|entry| {
            let label = entry
                .label
                .ok_or_else(|| Error::invalid("test entries must be labeled"))?;
            Ok(usize::from(predict(training, entry, config)? == label))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(hits as f64 / test.len() as f64)
}

/// Write a training set as CSV: header `p1,...,pd,label`, probabilities with
/// 17 significant digits, label as the integer gate index.
pub fn save_training(set: &TrainingSet, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=set.dimension()).map(|i| format!("p{i}")).collect();
    header.push("label".to_string());
    writer.write_record(&header)?;
    for entry in &set.entries {
        let mut record: Vec<String> = entry.values.iter().map(|v| format!("{v:.16e}")).collect();
        record.push(
            entry
                .label
                .expect("training entries are labeled")
                .to_string(),
        );
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a training set written by [`save_training`]. The feature dimension
/// comes from the header, so a header-only file yields an empty set.
pub fn load_training(path: &Path) -> Result<TrainingSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || headers.iter().next_back() != Some("label") {
        return Err(Error::parse(format!(
            "header must be p1,...,pd,label; got {:?}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let dimension = headers.len() - 1;
    for (i, name) in headers.iter().take(dimension).enumerate() {
        if name != format!("p{}", i + 1) {
            return Err(Error::parse(format!(
                "header column {} must be p{}, got {name:?}",
                i + 1,
                i + 1
            )));
        }
    }

    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| "?".to_string());
        let mut values = Vec::with_capacity(dimension);
        for field in record.iter().take(dimension) {
            values.push(field.parse::<f64>().map_err(|e| {
                Error::parse(format!("line {line}: bad probability {field:?}: {e}"))
            })?);
        }
        let label_field = &record[dimension];
        let label = label_field
            .parse::<usize>()
            .map_err(|e| Error::parse(format!("line {line}: bad label {label_field:?}: {e}")))?;
        entries.push(FeatureVector::labeled(values, label));
    }
    TrainingSet::with_dimension(dimension, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn labeled(values: &[f64], label: usize) -> FeatureVector {
        FeatureVector::labeled(values.to_vec(), label)
    }

    fn random_set(
        rng: &mut rand_chacha::ChaCha8Rng,
        points: usize,
        classes: usize,
        dim: usize,
    ) -> Vec<FeatureVector> {
        (0..points)
            .map(|i| {
                let values: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
                FeatureVector::labeled(values, i % classes)
            })
            .collect()
    }

    /// Independent prediction oracle: selection by repeated minimum scan,
    /// votes tallied in a plain list.
    fn oracle_predict(
        training: &[FeatureVector],
        query: &FeatureVector,
        config: &KnnConfig,
    ) -> usize {
        let mut used = vec![false; training.len()];
        let mut tally: Vec<(usize, f64)> = Vec::new();
        for _ in 0..config.k {
            let mut best: Option<(f64, usize, usize)> = None; // (dist, label, idx)
            for (i, entry) in training.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let dist = entry
                    .values
                    .iter()
                    .zip(&query.values)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let label = entry.label.unwrap();
                let better = match best {
                    None => true,
                    Some((bd, bl, _)) => dist < bd || (dist == bd && label < bl),
                };
                if better {
                    best = Some((dist, label, i));
                }
            }
            let (dist, label, idx) = best.unwrap();
            used[idx] = true;
            let weight = match config.weighting {
                Weighting::Uniform => 1.0,
                Weighting::InverseDistance => 1.0 / (dist + DISTANCE_EPSILON),
            };
            match tally.iter_mut().find(|(l, _)| *l == label) {
                Some((_, w)) => *w += weight,
                None => tally.push((label, weight)),
            }
        }
        let mut best = tally[0];
        for &(label, weight) in &tally[1..] {
            if weight > best.1 || (weight == best.1 && label < best.0) {
                best = (label, weight);
            }
        }
        best.0
    }

    #[test]
    fn euclidean_distance_basics() {
        let a = labeled(&[0.0, 0.0], 0);
        let b = labeled(&[3.0, 4.0], 1);
        assert_eq!(euclidean_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&a, &b).unwrap(), 5.0);
        assert_eq!(
            euclidean_distance(&a, &b).unwrap(),
            euclidean_distance(&b, &a).unwrap()
        );
        assert!(euclidean_distance(&a, &labeled(&[1.0], 0)).is_err());
    }

    #[test]
    fn predict_trivial_cases() {
        let config = KnnConfig {
            k: 1,
            weighting: Weighting::Uniform,
        };
        let single = TrainingSet::new(vec![labeled(&[0.9, 0.9], 7)]).unwrap();
        assert_eq!(
            predict(&single, &FeatureVector::new(vec![0.0, 0.0]), &config).unwrap(),
            7
        );

        let set = TrainingSet::new(vec![
            labeled(&[0.5, 0.5], 0),
            labeled(&[0.9, 0.6], 1),
            labeled(&[0.6, 0.9], 2),
        ])
        .unwrap();
        assert_eq!(
            predict(&set, &FeatureVector::new(vec![0.9, 0.6]), &config).unwrap(),
            1
        );
    }

    #[test]
    fn predict_error_paths() {
        let empty = TrainingSet::with_dimension(2, vec![]).unwrap();
        let query = FeatureVector::new(vec![0.0, 0.0]);
        let config = KnnConfig::default();
        assert!(matches!(
            predict(&empty, &query, &config),
            Err(Error::InvalidState(_))
        ));

        let set = TrainingSet::new(vec![labeled(&[0.0, 0.0], 0)]).unwrap();
        assert!(predict(
            &set,
            &query,
            &KnnConfig {
                k: 2,
                weighting: Weighting::Uniform
            }
        )
        .is_err());
        assert!(predict(
            &set,
            &FeatureVector::new(vec![0.0]),
            &KnnConfig {
                k: 1,
                weighting: Weighting::Uniform
            }
        )
        .is_err());
    }

    #[test]
    fn predict_matches_exhaustive_oracle() {
        let mut rng = RngSeed::new(40).rng();
        let dataset = random_set(&mut rng, 200, 10, 4);
        let training = TrainingSet::new(dataset.clone()).unwrap();
        for k in [1usize, 3, 5] {
            for weighting in [Weighting::Uniform, Weighting::InverseDistance] {
                let config = KnnConfig { k, weighting };
                for _ in 0..250 {
                    let query =
                        FeatureVector::new((0..4).map(|_| rng.random_range(0.0..1.0)).collect());
                    assert_eq!(
                        predict(&training, &query, &config).unwrap(),
                        oracle_predict(&dataset, &query, &config),
                        "k={k} weighting={weighting:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let mut rng = RngSeed::new(41).rng();
        let dataset = random_set(&mut rng, 1000, 5, 4); // 200 per label
        let (train, test) = train_test_split(dataset.clone(), 0.8, RngSeed::new(3)).unwrap();
        assert_eq!(train.len(), 800);
        assert_eq!(test.len(), 200);
        for label in 0..5usize {
            let in_train = train
                .entries()
                .iter()
                .filter(|e| e.label == Some(label))
                .count();
            let in_test = test.iter().filter(|e| e.label == Some(label)).count();
            assert_eq!(in_train, 160);
            assert_eq!(in_test, 40);
        }

        let (train2, test2) = train_test_split(dataset.clone(), 0.8, RngSeed::new(3)).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);

        // Partition: every entry lands in exactly one side.
        let mut recombined: Vec<&FeatureVector> =
            train.entries().iter().chain(test.iter()).collect();
        assert_eq!(recombined.len(), dataset.len());
        let mut original: Vec<&FeatureVector> = dataset.iter().collect();
        let key = |e: &&FeatureVector| {
            (
                e.label,
                e.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            )
        };
        recombined.sort_by_key(key);
        original.sort_by_key(key);
        assert_eq!(recombined, original);
    }

    #[test]
    fn split_rejects_bad_inputs() {
        let dataset = vec![labeled(&[0.1], 0), labeled(&[0.2], 0)];
        assert!(train_test_split(dataset.clone(), 0.0, RngSeed::new(0)).is_err());
        assert!(train_test_split(dataset.clone(), 1.0, RngSeed::new(0)).is_err());
        assert!(train_test_split(vec![], 0.5, RngSeed::new(0)).is_err());
        // A label with a single sample cannot be split.
        let dataset = vec![labeled(&[0.1], 0), labeled(&[0.2], 0), labeled(&[0.9], 1)];
        assert!(train_test_split(dataset, 0.5, RngSeed::new(0)).is_err());
    }

    #[test]
    fn accuracy_on_self_is_perfect_with_k1() {
        let mut rng = RngSeed::new(42).rng();
        let dataset = random_set(&mut rng, 100, 10, 4);
        let training = TrainingSet::new(dataset.clone()).unwrap();
        let config = KnnConfig {
            k: 1,
            weighting: Weighting::InverseDistance,
        };
        assert_eq!(accuracy(&training, &dataset, &config).unwrap(), 1.0);
        assert!(accuracy(&training, &[], &config).is_err());
    }

    #[test]
    fn accuracy_separates_distant_clusters() {
        let mut rng = RngSeed::new(43).rng();
        let mut dataset = Vec::new();
        for label in 0..2usize {
            let center = label as f64 * 100.0;
            for _ in 0..50 {
                dataset.push(FeatureVector::labeled(
                    (0..3)
                        .map(|_| center + rng.random_range(-0.5..0.5))
                        .collect(),
                    label,
                ));
            }
        }
        let (train, test) = train_test_split(dataset, 0.8, RngSeed::new(1)).unwrap();
        let config = KnnConfig {
            k: 5,
            weighting: Weighting::Uniform,
        };
        assert_eq!(accuracy(&train, &test, &config).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_on_shuffled_labels_is_near_chance() {
        // Features carry no class information, so accuracy should sit close
        // to 1/c. Binomial three-sigma bound on 300 test points, c = 5.
        let mut rng = RngSeed::new(44).rng();
        let dataset = random_set(&mut rng, 1500, 5, 4);
        let (train, test) = train_test_split(dataset, 0.8, RngSeed::new(2)).unwrap();
        let config = KnnConfig {
            k: 5,
            weighting: Weighting::InverseDistance,
        };
        let acc = accuracy(&train, &test, &config).unwrap();
        let p = 1.0 / 5.0;
        let sigma = (p * (1.0 - p) / test.len() as f64).sqrt();
        assert!(
            (acc - p).abs() < 3.0 * sigma + 0.02,
            "accuracy {acc} too far from chance {p}"
        );
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = RngSeed::new(45).rng();
        let dataset = random_set(&mut rng, 100, 7, 4);
        let set = TrainingSet::new(dataset).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        save_training(&set, &path).unwrap();
        let loaded = load_training(&path).unwrap();
        assert_eq!(loaded, set);

        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("p1,p2,p3,p4,label\n"));
    }

    #[test]
    fn csv_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();

        let ragged = dir.path().join("ragged.csv");
        std::fs::write(&ragged, "p1,p2,label\n0.5,0.6,1\n0.5,2\n").unwrap();
        let err = load_training(&ragged).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");

        let bad_value = dir.path().join("bad_value.csv");
        std::fs::write(&bad_value, "p1,p2,label\n0.5,huh,1\n").unwrap();
        let msg = load_training(&bad_value).unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");

        let bad_header = dir.path().join("bad_header.csv");
        std::fs::write(&bad_header, "a,b,c\n").unwrap();
        assert!(load_training(&bad_header).is_err());
    }

    #[test]
    fn csv_header_only_gives_empty_set() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "p1,p2,p3,label\n").unwrap();
        let set = load_training(&path).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.dimension(), 3);
    }

    proptest! {
        #[test]
        fn predict_is_permutation_invariant(seed in 0u64..100, perm_seed in 0u64..100) {
            let mut rng = RngSeed::new(seed).rng();
            let dataset = random_set(&mut rng, 40, 6, 3);
            let query = FeatureVector::new(vec![
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
            ]);
            let config = KnnConfig { k: 5, weighting: Weighting::InverseDistance };
            let base = predict(&TrainingSet::new(dataset.clone()).unwrap(), &query, &config).unwrap();

            let mut shuffled = dataset;
            shuffled.shuffle(&mut RngSeed::new(perm_seed).rng());
            let permuted = predict(&TrainingSet::new(shuffled).unwrap(), &query, &config).unwrap();
            prop_assert_eq!(base, permuted);
        }

        #[test]
        fn predict_is_scale_invariant(seed in 0u64..100, scale in 0.1f64..50.0) {
            let mut rng = RngSeed::new(seed).rng();
            let dataset = random_set(&mut rng, 40, 6, 3);
            let query_values: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
            let config = KnnConfig { k: 3, weighting: Weighting::InverseDistance };

            let base = predict(
                &TrainingSet::new(dataset.clone()).unwrap(),
                &FeatureVector::new(query_values.clone()),
                &config,
            ).unwrap();

            let scaled_set: Vec<FeatureVector> = dataset
                .iter()
                .map(|e| FeatureVector::labeled(
                    e.values.iter().map(|v| v * scale).collect(),
                    e.label.unwrap(),
                ))
                .collect();
            let scaled = predict(
                &TrainingSet::new(scaled_set).unwrap(),
                &FeatureVector::new(query_values.iter().map(|v| v * scale).collect()),
                &config,
            ).unwrap();
            prop_assert_eq!(base, scaled);
        }
    }
}
