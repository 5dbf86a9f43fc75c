//! Class rebalancing in feature space: SMOTE oversampling of minority
//! classes and random undersampling of majority classes to a common
//! per-class target. Everything is deterministic under the config seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Dataset, DatasetRow, FeatureVector, RhythmLabel};
use crate::error::{Error, Result};

/// Rebalancing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalanceConfig {
    pub target_per_class: usize,
    pub smote_k: usize,
    pub seed: u64,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            target_per_class: 3451,
            smote_k: 5,
            seed: 42,
        }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the k nearest same-class neighbors of `row` (self excluded).
fn nearest_neighbors(rows: &[&DatasetRow], row: usize, k: usize) -> Vec<usize> {
    let mut dists: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != row)
        .map(|(j, r)| {
            (
                j,
                squared_distance(&rows[row].features.values, &r.features.values),
            )
        })
        .collect();
    dists.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    dists.into_iter().take(k).map(|(j, _)| j).collect()
}

/// Grow `class` to `target` rows by interpolating between each sampled row
/// and one of its k nearest same-class neighbors. Original rows are kept
/// verbatim; classes already at or above the target are returned unchanged.
pub fn smote_oversample(
    dataset: &Dataset,
    class: RhythmLabel,
    target: usize,
    k: usize,
    seed: u64,
) -> Result<Dataset> {
    let class_rows: Vec<&DatasetRow> = dataset
        .rows
        .iter()
        .filter(|r| r.label == class)
        .collect();
    if class_rows.len() < 2 {
        return Err(Error::ClassTooSmall(class.to_string()));
    }
    let mut out = dataset.clone();
    if class_rows.len() >= target {
        return Ok(out);
    }
    let k_eff = k.min(class_rows.len() - 1);
    let neighbors: Vec<Vec<usize>> = (0..class_rows.len())
        .map(|i| nearest_neighbors(&class_rows, i, k_eff))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..target - class_rows.len() {
        let base = rng.gen_range(0..class_rows.len());
        let nn = neighbors[base][rng.gen_range(0..k_eff)];
        let u: f64 = rng.gen_range(0.0..1.0);
        let values: Vec<f64> = class_rows[base]
            .features
            .values
            .iter()
            .zip(&class_rows[nn].features.values)
            .map(|(x, y)| x + u * (y - x))
            .collect();
        out.push(DatasetRow {
            id: format!("{}-smote-{s}", class_rows[base].id),
            features: FeatureVector::new(dataset.mode, values)?,
            label: class,
        })?;
    }
    Ok(out)
}

/// Shrink `class` to exactly `target` rows, a uniform random subset in
/// original row order.
pub fn random_undersample(
    dataset: &Dataset,
    class: RhythmLabel,
    target: usize,
    seed: u64,
) -> Result<Dataset> {
    let class_indices: Vec<usize> = dataset
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label == class)
        .map(|(i, _)| i)
        .collect();
    if class_indices.len() < target {
        return Err(Error::TargetExceedsCount {
            target,
            count: class_indices.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = class_indices.clone();
    shuffled.shuffle(&mut rng);
    let keep: std::collections::HashSet<usize> = shuffled.into_iter().take(target).collect();
    let mut out = Dataset::new(dataset.mode);
    for (i, row) in dataset.rows.iter().enumerate() {
        if row.label != class || keep.contains(&i) {
            out.push(row.clone())?;
        }
    }
    Ok(out)
}

/// Bring every class to `target_per_class` rows: SMOTE up, undersample down.
/// Requires all nine classes to be present.
pub fn balance(dataset: &Dataset, config: &BalanceConfig) -> Result<Dataset> {
    let counts = dataset.class_counts();
    for label in RhythmLabel::ALL {
        if counts[label.index()] == 0 {
            return Err(Error::MissingClass(label.to_string()));
        }
    }
    let mut current = dataset.clone();
    for label in RhythmLabel::ALL {
        let count = current.class_counts()[label.index()];
        let child_seed = config
            .seed
            .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(label.index() as u64 + 1));
        current = match count.cmp(&config.target_per_class) {
            std::cmp::Ordering::Less => smote_oversample(
                &current,
                label,
                config.target_per_class,
                config.smote_k,
                child_seed,
            )?,
            std::cmp::Ordering::Greater => {
                random_undersample(&current, label, config.target_per_class, child_seed)?
            }
            std::cmp::Ordering::Equal => current,
        };
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::FeatureMode;

    /// Table-style per-class counts used in the rebalancing tests.
    pub const NATURAL_COUNTS: [usize; 9] = [14993, 1361, 9353, 3451, 1500, 1526, 538, 754, 33];

    fn stub_dataset(counts: &[usize; 9], seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ds = Dataset::new(FeatureMode::Time48);
        for (ci, (&count, label)) in counts.iter().zip(RhythmLabel::ALL).enumerate() {
            for i in 0..count {
                // cluster classes loosely so neighbors are class-mates
                let values: Vec<f64> = (0..48)
                    .map(|_| ci as f64 * 10.0 + rng.gen_range(-1.0..1.0))
                    .collect();
                ds.push(DatasetRow {
                    id: format!("{label}-{i}"),
                    features: FeatureVector::new(FeatureMode::Time48, values).unwrap(),
                    label,
                })
                .unwrap();
            }
        }
        ds
    }

    #[test]
    fn pac_oversampled_to_target() {
        let mut counts = [4usize; 9];
        counts[RhythmLabel::Pac.index()] = 538;
        let ds = stub_dataset(&counts, 1);
        let out = smote_oversample(&ds, RhythmLabel::Pac, 3451, 5, 7).unwrap();
        assert_eq!(out.class_counts()[RhythmLabel::Pac.index()], 3451);
        // originals preserved verbatim
        for row in &ds.rows {
            assert!(out.rows.iter().any(|r| r.id == row.id && r == row));
        }
    }

    #[test]
    fn synthetic_rows_are_convex_combinations() {
        let mut counts = [4usize; 9];
        counts[RhythmLabel::Pvc.index()] = 33;
        let ds = stub_dataset(&counts, 2);
        let out = smote_oversample(&ds, RhythmLabel::Pvc, 100, 5, 3).unwrap();
        let originals: Vec<&DatasetRow> = ds
            .rows
            .iter()
            .filter(|r| r.label == RhythmLabel::Pvc)
            .collect();
        for col in 0..48 {
            let min = originals
                .iter()
                .map(|r| r.features.values[col])
                .fold(f64::MAX, f64::min);
            let max = originals
                .iter()
                .map(|r| r.features.values[col])
                .fold(f64::MIN, f64::max);
            for row in out.rows.iter().filter(|r| r.id.contains("smote")) {
                let v = row.features.values[col];
                assert!(v >= min - 1e-12 && v <= max + 1e-12);
            }
        }
    }

    #[test]
    fn tiny_class_shrinks_k() {
        let mut counts = [4usize; 9];
        counts[RhythmLabel::Af.index()] = 3;
        let ds = stub_dataset(&counts, 3);
        let out = smote_oversample(&ds, RhythmLabel::Af, 10, 5, 1).unwrap();
        assert_eq!(out.class_counts()[RhythmLabel::Af.index()], 10);

        counts[RhythmLabel::Af.index()] = 1;
        let ds = stub_dataset(&counts, 3);
        assert!(matches!(
            smote_oversample(&ds, RhythmLabel::Af, 10, 5, 1),
            Err(Error::ClassTooSmall(_))
        ));
    }

    #[test]
    fn undersample_examples() {
        let mut counts = [4usize; 9];
        counts[RhythmLabel::Nsr.index()] = 200;
        let ds = stub_dataset(&counts, 4);
        let out = random_undersample(&ds, RhythmLabel::Nsr, 50, 9).unwrap();
        assert_eq!(out.class_counts()[RhythmLabel::Nsr.index()], 50);
        // identity at target == count
        let same = random_undersample(&ds, RhythmLabel::Nsr, 200, 9).unwrap();
        assert_eq!(same.len(), ds.len());
        // determinism
        let again = random_undersample(&ds, RhythmLabel::Nsr, 50, 9).unwrap();
        assert_eq!(out, again);
        // target too large
        assert!(matches!(
            random_undersample(&ds, RhythmLabel::Nsr, 201, 9),
            Err(Error::TargetExceedsCount { target: 201, count: 200 })
        ));
    }

    #[test]
    fn natural_counts_balance_to_target() {
        let ds = stub_dataset(&NATURAL_COUNTS, 5);
        let out = balance(&ds, &BalanceConfig::default()).unwrap();
        assert_eq!(out.class_counts(), [3451; 9]);
        assert_eq!(out.len(), 31059);
    }

    #[test]
    fn balanced_input_unchanged_counts() {
        let ds = stub_dataset(&[10; 9], 6);
        let cfg = BalanceConfig {
            target_per_class: 10,
            ..Default::default()
        };
        let out = balance(&ds, &cfg).unwrap();
        assert_eq!(out.class_counts(), [10; 9]);
        assert_eq!(out, ds);
    }

    #[test]
    fn missing_class_rejected() {
        let mut counts = [10usize; 9];
        counts[RhythmLabel::Pvc.index()] = 0;
        let ds = stub_dataset(&counts, 7);
        assert!(matches!(
            balance(&ds, &BalanceConfig::default()),
            Err(Error::MissingClass(_))
        ));
    }

    #[test]
    fn deterministic_under_seed() {
        let ds = stub_dataset(&[20, 5, 30, 10, 10, 10, 10, 10, 10], 8);
        let cfg = BalanceConfig {
            target_per_class: 10,
            smote_k: 5,
            seed: 99,
        };
        let a = balance(&ds, &cfg).unwrap();
        let b = balance(&ds, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
