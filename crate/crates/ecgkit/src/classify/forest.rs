//! From-scratch CART trees and the bagged random forest.
//!
//! Splits minimize Gini impurity over candidate thresholds placed at
//! midpoints between consecutive sorted unique values of each sampled
//! feature. Each tree draws its own RNG stream from the master seed, so
//! trees could be grown in parallel without changing the result.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Dataset;
use crate::error::{Error, Result};

pub const N_CLASSES: usize = 9;

/// Forest hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// None = unlimited depth.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// None = ceil(sqrt(F)).
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 200,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: None,
            bootstrap: true,
            seed: 42,
        }
    }
}

impl ForestParams {
    pub fn effective_features_per_split(&self, n_features: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<u32>,
    },
}

/// One CART tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Normalized leaf histogram for one feature vector.
    pub fn predict_proba(&self, features: &[f64]) -> [f64; N_CLASSES] {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if features[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Leaf { counts } => {
                    let total: u32 = counts.iter().sum();
                    let mut probs = [0.0; N_CLASSES];
                    for (p, &c) in probs.iter_mut().zip(counts) {
                        *p = c as f64 / total.max(1) as f64;
                    }
                    return probs;
                }
            }
        }
    }
}

fn gini(counts: &[u32; N_CLASSES], total: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| (c as f64 / t) * (c as f64 / t))
        .sum::<f64>()
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [usize],
    params: ForestParams,
    mtry: usize,
    /// Feature indices splits may use (all features, or an ablation subset).
    pool: &'a [usize],
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn class_counts(&self, sample: &[usize]) -> [u32; N_CLASSES] {
        let mut counts = [0u32; N_CLASSES];
        for &i in sample {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    /// Best (feature, threshold) over `mtry` random candidate features;
    /// None when no split improves impurity.
    fn best_split(
        &self,
        sample: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Option<(usize, f64, Vec<usize>, Vec<usize>)> {
        let candidates: Vec<usize> = rand::seq::index::sample(rng, self.pool.len(), self.mtry)
            .iter()
            .map(|i| self.pool[i])
            .collect();
        let parent_counts = self.class_counts(sample);
        let total = sample.len() as u32;
        let parent_impurity = gini(&parent_counts, total);
        let min_leaf = self.params.min_samples_leaf;

        let mut best: Option<(f64, usize, f64)> = None; // (score, feature, thr)
        for &feat in candidates.iter() {
            let mut vals: Vec<(f64, usize)> = sample
                .iter()
                .map(|&i| (self.rows[i][feat], self.labels[i]))
                .collect();
            vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut left = [0u32; N_CLASSES];
            let mut right = parent_counts;
            for i in 1..vals.len() {
                left[vals[i - 1].1] += 1;
                right[vals[i - 1].1] -= 1;
                if vals[i].0 <= vals[i - 1].0 {
                    continue;
                }
                if i < min_leaf || vals.len() - i < min_leaf {
                    continue;
                }
                let nl = i as u32;
                let nr = total - nl;
                let score = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr))
                    / total as f64;
                if score + 1e-12 < best.map(|b| b.0).unwrap_or(parent_impurity) {
                    best = Some((score, feat, (vals[i - 1].0 + vals[i].0) / 2.0));
                }
            }
        }
        best.map(|(_, feature, threshold)| {
            let (mut l, mut r) = (Vec::new(), Vec::new());
            for &i in sample {
                if self.rows[i][feature] <= threshold {
                    l.push(i);
                } else {
                    r.push(i);
                }
            }
            (feature, threshold, l, r)
        })
    }

    fn grow(&mut self, sample: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.class_counts(&sample);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.params.max_depth.map(|d| depth >= d).unwrap_or(false);
        let too_small = sample.len() < 2 * self.params.min_samples_leaf.max(1);
        if pure || depth_capped || too_small {
            return self.leaf(counts);
        }
        match self.best_split(&sample, rng) {
            Some((feature, threshold, l, r)) => {
                let idx = self.nodes.len();
                self.nodes.push(Node::Leaf { counts: vec![] }); // placeholder
                let left = self.grow(l, depth + 1, rng);
                let right = self.grow(r, depth + 1, rng);
                self.nodes[idx] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                idx
            }
            None => self.leaf(counts),
        }
    }

    fn leaf(&mut self, counts: [u32; N_CLASSES]) -> usize {
        self.nodes.push(Node::Leaf {
            counts: counts.to_vec(),
        });
        self.nodes.len() - 1
    }
}

/// A bagged ensemble plus its out-of-bag accuracy estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    pub oob_accuracy: Option<f64>,
}

impl Forest {
    pub fn predict_proba(&self, features: &[f64]) -> [f64; N_CLASSES] {
        let mut acc = [0.0; N_CLASSES];
        for tree in &self.trees {
            let p = tree.predict_proba(features);
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
        for a in acc.iter_mut() {
            *a /= self.trees.len() as f64;
        }
        acc
    }
}

pub(crate) fn dataset_matrix(dataset: &Dataset) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    if dataset.rows.len() < 2 {
        return Err(Error::DegenerateDataset(format!(
            "{} rows",
            dataset.rows.len()
        )));
    }
    let classes = dataset.class_counts().iter().filter(|&&c| c > 0).count();
    if classes < 2 {
        return Err(Error::DegenerateDataset("single class".to_string()));
    }
    let mut rows = Vec::with_capacity(dataset.rows.len());
    let mut labels = Vec::with_capacity(dataset.rows.len());
    for row in &dataset.rows {
        if !row.features.is_finite() {
            return Err(Error::DegenerateDataset(format!(
                "non-finite features in {}",
                row.id
            )));
        }
        rows.push(row.features.values.clone());
        labels.push(row.label.index());
    }
    Ok((rows, labels))
}

/// Grow the forest. Deterministic under `params.seed`; each tree uses an
/// independent child stream.
pub fn grow_forest(dataset: &Dataset, params: &ForestParams) -> Result<Forest> {
    grow_forest_on(dataset, params, None)
}

/// Like [`grow_forest`], but splits only consider `subset` feature indices
/// (used by feature-subset ablations). Prediction still takes full vectors.
pub fn grow_forest_on(
    dataset: &Dataset,
    params: &ForestParams,
    subset: Option<&[usize]>,
) -> Result<Forest> {
    let (rows, labels) = dataset_matrix(dataset)?;
    let n = rows.len();
    let n_features = rows[0].len();
    let pool: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..n_features).collect(),
    };
    let mtry = params.effective_features_per_split(pool.len());

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut oob_votes = vec![[0.0f64; N_CLASSES]; n];
    let mut oob_seen = vec![false; n];
    for t in 0..params.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(
            params
                .seed
                .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(t as u64 + 1)),
        );
        let sample: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut grower = Grower {
            rows: &rows,
            labels: &labels,
            params: *params,
            mtry,
            pool: &pool,
            nodes: Vec::new(),
        };
        let root = grower.grow(sample.clone(), 0, &mut rng);
        debug_assert_eq!(root, 0);
        let tree = Tree {
            nodes: grower.nodes,
        };
        if params.bootstrap {
            let in_bag: std::collections::HashSet<usize> = sample.into_iter().collect();
            for i in 0..n {
                if !in_bag.contains(&i) {
                    let p = tree.predict_proba(&rows[i]);
                    for (a, v) in oob_votes[i].iter_mut().zip(p) {
                        *a += v;
                    }
                    oob_seen[i] = true;
                }
            }
        }
        trees.push(tree);
    }

    let oob_accuracy = if params.bootstrap {
        let mut hits = 0usize;
        let mut seen = 0usize;
        for i in 0..n {
            if oob_seen[i] {
                seen += 1;
                let pred = argmax(&oob_votes[i]);
                if pred == labels[i] {
                    hits += 1;
                }
            }
        }
        (seen > 0).then(|| hits as f64 / seen as f64)
    } else {
        None
    };

    Ok(Forest {
        trees,
        params: *params,
        oob_accuracy,
    })
}

/// First index of the maximum (ties resolve to the lowest class index).
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}
