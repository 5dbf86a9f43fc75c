//! Classifiers and model serialization: the random forest (primary) plus
//! KNN and single-decision-tree baselines, all behind one `TrainedModel`
//! container with a mandatory version tag.

pub mod forest;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{feature_names, Dataset, FeatureMode, FeatureVector, RhythmLabel};
use crate::error::{Error, Result};

pub use forest::{argmax, grow_forest, grow_forest_on, Forest, ForestParams, Node, Tree, N_CLASSES};

/// Train a forest whose splits only use the given feature indices.
pub fn train_forest_subset(
    dataset: &Dataset,
    params: &ForestParams,
    subset: &[usize],
) -> Result<TrainedModel> {
    let forest = grow_forest_on(dataset, params, Some(subset))?;
    Ok(TrainedModel::container(
        dataset.mode,
        format!("forest:{params:?}:subset{}", subset.len()),
        ModelPayload::Forest(forest),
    ))
}

/// Version tag written into every model file.
pub const MODEL_VERSION: &str = "ecgkit-model-v1";

/// Baseline classifier kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    Knn,
    Dtree,
}

/// K-nearest-neighbor model with z-score standardization fitted on the
/// training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl KnnModel {
    fn standardize(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn predict_proba(&self, features: &[f64]) -> [f64; N_CLASSES] {
        let z = self.standardize(features);
        let mut dists: Vec<(f64, usize)> = self
            .rows
            .iter()
            .zip(&self.labels)
            .map(|(row, &label)| {
                let d: f64 = row.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, label)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let k = self.k.min(dists.len());
        let mut probs = [0.0; N_CLASSES];
        for &(_, label) in dists.iter().take(k) {
            probs[label] += 1.0 / k as f64;
        }
        probs
    }
}

/// Model payload: which classifier this is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelPayload {
    Forest(Forest),
    Tree(Tree),
    Knn(KnnModel),
}

/// Self-describing trained model, serialized as versioned JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: String,
    pub mode: FeatureMode,
    pub feature_names: Vec<String>,
    pub classes: Vec<RhythmLabel>,
    pub fingerprint: String,
    pub payload: ModelPayload,
}

impl TrainedModel {
    fn container(mode: FeatureMode, fingerprint: String, payload: ModelPayload) -> TrainedModel {
        TrainedModel {
            version: MODEL_VERSION.to_string(),
            mode,
            feature_names: feature_names(mode).iter().map(|s| s.to_string()).collect(),
            classes: RhythmLabel::ALL.to_vec(),
            fingerprint,
            payload,
        }
    }

    /// Out-of-bag accuracy, when the payload is a bootstrapped forest.
    pub fn oob_accuracy(&self) -> Option<f64> {
        match &self.payload {
            ModelPayload::Forest(f) => f.oob_accuracy,
            _ => None,
        }
    }
}

/// Train the random forest.
pub fn train_forest(dataset: &Dataset, params: &ForestParams) -> Result<TrainedModel> {
    let forest = grow_forest(dataset, params)?;
    Ok(TrainedModel::container(
        dataset.mode,
        format!("forest:{params:?}"),
        ModelPayload::Forest(forest),
    ))
}

/// Train a baseline: KNN (k = min_samples_leaf is not reused here; k fixed
/// at `knn_k`) or a single full-depth CART tree on all features.
pub fn train_baseline(
    dataset: &Dataset,
    kind: BaselineKind,
    params: &ForestParams,
    knn_k: usize,
) -> Result<TrainedModel> {
    match kind {
        BaselineKind::Dtree => {
            let single = ForestParams {
                n_trees: 1,
                bootstrap: false,
                features_per_split: Some(dataset.mode.dim()),
                ..*params
            };
            let forest = grow_forest(dataset, &single)?;
            Ok(TrainedModel::container(
                dataset.mode,
                format!("dtree:{single:?}"),
                ModelPayload::Tree(forest.trees.into_iter().next().unwrap()),
            ))
        }
        BaselineKind::Knn => {
            let (rows, labels) = forest::dataset_matrix(dataset)?;
            let f = rows[0].len();
            let n = rows.len() as f64;
            let mut means = vec![0.0; f];
            for row in &rows {
                for (m, v) in means.iter_mut().zip(row) {
                    *m += v / n;
                }
            }
            let mut stds = vec![0.0; f];
            for row in &rows {
                for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                    *s += (v - m) * (v - m) / n;
                }
            }
            for s in stds.iter_mut() {
                *s = s.sqrt();
                if *s == 0.0 {
                    *s = 1.0; // constant column: leave it centered only
                }
            }
            let standardized: Vec<Vec<f64>> = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(means.iter().zip(&stds))
                        .map(|(&v, (&m, &s))| (v - m) / s)
                        .collect()
                })
                .collect();
            let model = KnnModel {
                k: knn_k,
                means,
                stds,
                rows: standardized,
                labels,
            };
            Ok(TrainedModel::container(
                dataset.mode,
                format!("knn:k={knn_k}"),
                ModelPayload::Knn(model),
            ))
        }
    }
}

/// Predict one feature vector: class probabilities (sum 1) and the argmax
/// label, ties broken by canonical class order.
pub fn predict(model: &TrainedModel, features: &FeatureVector) -> Result<(RhythmLabel, [f64; N_CLASSES])> {
    if features.mode != model.mode {
        return Err(Error::DimensionMismatch {
            expected: model.mode.dim(),
            got: features.mode.dim(),
        });
    }
    let probs = match &model.payload {
        ModelPayload::Forest(f) => f.predict_proba(&features.values),
        ModelPayload::Tree(t) => t.predict_proba(&features.values),
        ModelPayload::Knn(k) => k.predict_proba(&features.values),
    };
    Ok((RhythmLabel::ALL[argmax(&probs)], probs))
}

/// Write a model as versioned JSON.
pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    let json = serde_json::to_string(model)
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    fs::write(path, json)?;
    Ok(())
}

/// Read a model, rejecting unknown versions and malformed files.
pub fn load_model(path: &Path) -> Result<TrainedModel> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::CorruptModel(e.to_string()))?;
    let found = value
        .get("version")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::CorruptModel("missing version tag".to_string()))?;
    if found != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            expected: MODEL_VERSION.to_string(),
            found: found.to_string(),
        });
    }
    serde_json::from_value(value).map_err(|e| Error::CorruptModel(e.to_string()))
}

#[cfg(test)]
pub mod tests {
    use super::*;
    use crate::domain::DatasetRow;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Two far-separated Gaussian blobs in a 48-d vector (only the first
    /// two coordinates carry signal).
    pub fn blobs(n_per_class: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut ds = Dataset::new(FeatureMode::Time48);
        for (label, center) in [(RhythmLabel::Nsr, -5.0), (RhythmLabel::Af, 5.0)] {
            for i in 0..n_per_class {
                let mut values = vec![0.0; 48];
                values[0] = center + noise.sample(&mut rng);
                values[1] = center + noise.sample(&mut rng);
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
    fn separable_blobs_high_oob() {
        let ds = blobs(200, 11);
        let params = ForestParams {
            n_trees: 50,
            seed: 11,
            ..Default::default()
        };
        let model = train_forest(&ds, &params).unwrap();
        let oob = model.oob_accuracy().unwrap();
        assert!(oob >= 0.99, "OOB {oob}");
    }

    #[test]
    fn full_depth_memorizes_distinct_rows() {
        let ds = blobs(50, 3);
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            features_per_split: Some(48),
            seed: 5,
            ..Default::default()
        };
        let model = train_forest(&ds, &params).unwrap();
        for row in &ds.rows {
            let (label, _) = predict(&model, &row.features).unwrap();
            assert_eq!(label, row.label);
        }
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let mut single = blobs(10, 1);
        single.rows.retain(|r| r.label == RhythmLabel::Nsr);
        assert!(matches!(
            train_forest(&single, &ForestParams::default()),
            Err(Error::DegenerateDataset(_))
        ));
        let tiny = Dataset::new(FeatureMode::Time48);
        assert!(matches!(
            train_forest(&tiny, &ForestParams::default()),
            Err(Error::DegenerateDataset(_))
        ));
    }

    #[test]
    fn probabilities_normalized_and_single_tree_identity() {
        let ds = blobs(50, 7);
        let one = train_forest(
            &ds,
            &ForestParams {
                n_trees: 1,
                seed: 9,
                ..Default::default()
            },
        )
        .unwrap();
        for row in ds.rows.iter().take(20) {
            let (_, probs) = predict(&one, &row.features).unwrap();
            let sum: f64 = probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
            // 1-tree forest equals that tree's leaf distribution
            if let ModelPayload::Forest(f) = &one.payload {
                assert_eq!(probs, f.trees[0].predict_proba(&row.features.values));
            }
        }
    }

    #[test]
    fn determinism_bitwise() {
        let ds = blobs(100, 13);
        let params = ForestParams {
            n_trees: 20,
            seed: 77,
            ..Default::default()
        };
        let a = train_forest(&ds, &params).unwrap();
        let b = train_forest(&ds, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn knn_k1_memorizes_and_baselines_work() {
        let ds = blobs(100, 17);
        let knn1 = train_baseline(&ds, BaselineKind::Knn, &ForestParams::default(), 1).unwrap();
        let mut hits = 0;
        for row in &ds.rows {
            let (label, _) = predict(&knn1, &row.features).unwrap();
            if label == row.label {
                hits += 1;
            }
        }
        assert_eq!(hits, ds.len());

        // all three classifiers separate the blobs
        let test = blobs(50, 18);
        for model in [
            train_forest(
                &ds,
                &ForestParams {
                    n_trees: 30,
                    seed: 1,
                    ..Default::default()
                },
            )
            .unwrap(),
            train_baseline(&ds, BaselineKind::Knn, &ForestParams::default(), 5).unwrap(),
            train_baseline(&ds, BaselineKind::Dtree, &ForestParams::default(), 5).unwrap(),
        ] {
            let hits = test
                .rows
                .iter()
                .filter(|r| predict(&model, &r.features).unwrap().0 == r.label)
                .count();
            assert!(
                hits as f64 / test.len() as f64 >= 0.95,
                "{:?}: {hits}/{}",
                model.fingerprint,
                test.len()
            );
        }
    }

    #[test]
    fn monotone_feature_transform_preserves_predictions() {
        let ds = blobs(80, 23);
        let mut transformed = ds.clone();
        for row in transformed.rows.iter_mut() {
            let v = row.features.values[0];
            row.features.values[0] = v.powi(3); // strictly increasing
        }
        let params = ForestParams {
            n_trees: 15,
            seed: 31,
            ..Default::default()
        };
        let a = train_forest(&ds, &params).unwrap();
        let b = train_forest(&transformed, &params).unwrap();
        for (ra, rb) in ds.rows.iter().zip(&transformed.rows) {
            assert_eq!(
                predict(&a, &ra.features).unwrap().0,
                predict(&b, &rb.features).unwrap().0
            );
        }
    }

    #[test]
    fn duplicate_rows_never_decrease_probability() {
        let ds = blobs(30, 29);
        let probe = ds.rows[0].clone();
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            features_per_split: Some(48),
            seed: 3,
            ..Default::default()
        };
        let base = train_forest(&ds, &params).unwrap();
        let (_, p0) = predict(&base, &probe.features).unwrap();
        let mut bigger = ds.clone();
        for i in 0..5 {
            let mut dup = probe.clone();
            dup.id = format!("dup-{i}");
            bigger.push(dup).unwrap();
        }
        let grown = train_forest(&bigger, &params).unwrap();
        let (_, p1) = predict(&grown, &probe.features).unwrap();
        let ci = probe.label.index();
        assert!(p1[ci] >= p0[ci] - 1e-12, "{} -> {}", p0[ci], p1[ci]);
    }

    #[test]
    fn save_load_roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let ds = blobs(60, 37);
        let model = train_forest(
            &ds,
            &ForestParams {
                n_trees: 10,
                seed: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(model, loaded);
        let probe_ds = blobs(50, 38);
        for row in &probe_ds.rows {
            assert_eq!(
                predict(&model, &row.features).unwrap(),
                predict(&loaded, &row.features).unwrap()
            );
        }

        // truncated file
        let text = std::fs::read_to_string(&path).unwrap();
        let bad = dir.path().join("trunc.json");
        std::fs::write(&bad, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&bad), Err(Error::CorruptModel(_))));

        // unknown version tag
        let wrong = dir.path().join("wrong.json");
        std::fs::write(&wrong, text.replace(MODEL_VERSION, "ecgkit-model-v99")).unwrap();
        assert!(matches!(
            load_model(&wrong),
            Err(Error::VersionMismatch { .. })
        ));

        assert!(matches!(
            load_model(&dir.path().join("nope.json")),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let ds = blobs(30, 41);
        let model = train_forest(
            &ds,
            &ForestParams {
                n_trees: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let wrong = FeatureVector::new(FeatureMode::Wavelet66, vec![0.0; 66]).unwrap();
        assert!(matches!(
            predict(&model, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
