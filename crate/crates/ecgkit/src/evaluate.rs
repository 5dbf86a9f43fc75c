//! Cross-validation, confusion matrices and metrics, plus the feature-subset
//! and mother-wavelet ablation drivers.
//!
//! Metrics per class: Acc = (TP+TN)/total, Se = TP/(TP+FN), +P = TP/(TP+FP),
//! F1 = 2TP/(2TP+FP+FN), all in percent. Macro values are unweighted class
//! means; the overall accuracy is trace/total, which equals macro Se on an
//! exactly class-balanced test set.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{self, ForestParams, N_CLASSES};
use crate::domain::{feature_names, Dataset, DatasetRow, EcgRecord, RhythmLabel};
use crate::error::{Error, Result};
use crate::features;
use crate::stats::EntropyParams;
use crate::wavelet::{WaveletName, WaveletSpec};

/// Confusion matrix; rows are truth, columns are predictions, both in
/// canonical class order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub matrix: Vec<Vec<usize>>,
}

impl ConfusionCounts {
    pub fn new() -> Self {
        ConfusionCounts {
            matrix: vec![vec![0; N_CLASSES]; N_CLASSES],
        }
    }

    pub fn from_pairs(pairs: &[(RhythmLabel, RhythmLabel)]) -> Self {
        let mut c = Self::new();
        for (truth, pred) in pairs {
            c.matrix[truth.index()][pred.index()] += 1;
        }
        c
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        for (row, orow) in self.matrix.iter_mut().zip(&other.matrix) {
            for (v, o) in row.iter_mut().zip(orow) {
                *v += o;
            }
        }
    }

    pub fn total(&self) -> usize {
        self.matrix.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..N_CLASSES).map(|i| self.matrix[i][i]).sum()
    }

    pub fn tp(&self, c: usize) -> usize {
        self.matrix[c][c]
    }

    pub fn fn_(&self, c: usize) -> usize {
        self.matrix[c].iter().sum::<usize>() - self.tp(c)
    }

    pub fn fp(&self, c: usize) -> usize {
        self.matrix.iter().map(|row| row[c]).sum::<usize>() - self.tp(c)
    }

    pub fn tn(&self, c: usize) -> usize {
        self.total() - self.tp(c) - self.fp(c) - self.fn_(c)
    }
}

/// Per-class metrics in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub acc: f64,
    pub se: f64,
    pub ppv: f64,
    pub f1: f64,
}

impl ClassMetrics {
    /// Direct evaluation from binary counts; zero denominators yield 0.
    pub fn from_counts(tp: usize, tn: usize, fp: usize, fn_: usize, flags: &mut Vec<String>) -> Self {
        let total = tp + tn + fp + fn_;
        let pct = |num: f64, den: f64, what: &str, flags: &mut Vec<String>| {
            if den == 0.0 {
                flags.push(format!("{what}_zero_denominator"));
                0.0
            } else {
                100.0 * num / den
            }
        };
        ClassMetrics {
            acc: pct((tp + tn) as f64, total as f64, "acc", flags),
            se: pct(tp as f64, (tp + fn_) as f64, "se", flags),
            ppv: pct(tp as f64, (tp + fp) as f64, "ppv", flags),
            f1: pct(2.0 * tp as f64, (2 * tp + fp + fn_) as f64, "f1", flags),
        }
    }
}

/// Summary line: overall accuracy plus macro-averaged Se/+P/F1, percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub acc: f64,
    pub se: f64,
    pub ppv: f64,
    pub f1: f64,
}

/// Full evaluation report: pooled confusion matrix, per-class and macro
/// metrics, and (for cross-validation) the per-fold table with its average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub confusion: ConfusionCounts,
    pub per_class: Vec<ClassMetrics>,
    pub overall: Summary,
    pub folds: Vec<Summary>,
    pub fold_average: Option<Summary>,
    pub flags: Vec<String>,
}

/// Compute the report for one pooled confusion matrix.
pub fn metrics(counts: &ConfusionCounts) -> MetricReport {
    let mut flags = Vec::new();
    let per_class: Vec<ClassMetrics> = (0..N_CLASSES)
        .map(|c| {
            ClassMetrics::from_counts(
                counts.tp(c),
                counts.tn(c),
                counts.fp(c),
                counts.fn_(c),
                &mut flags,
            )
        })
        .collect();
    // Macro averages run over classes that appear in the test data.
    let present: Vec<usize> = (0..N_CLASSES)
        .filter(|&c| counts.matrix[c].iter().sum::<usize>() > 0)
        .collect();
    let macro_mean = |f: fn(&ClassMetrics) -> f64| {
        if present.is_empty() {
            0.0
        } else {
            present.iter().map(|&c| f(&per_class[c])).sum::<f64>() / present.len() as f64
        }
    };
    let overall = Summary {
        acc: if counts.total() > 0 {
            100.0 * counts.trace() as f64 / counts.total() as f64
        } else {
            0.0
        },
        se: macro_mean(|m| m.se),
        ppv: macro_mean(|m| m.ppv),
        f1: macro_mean(|m| m.f1),
    };
    MetricReport {
        confusion: counts.clone(),
        per_class,
        overall,
        folds: Vec::new(),
        fold_average: None,
        flags,
    }
}

/// Stratified partition of row indices into k folds, deterministic under
/// `seed`. Every class present must have at least k rows.
pub fn stratified_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); N_CLASSES];
    for (i, row) in dataset.rows.iter().enumerate() {
        per_class[row.label.index()].push(i);
    }
    for (c, rows) in per_class.iter().enumerate() {
        if !rows.is_empty() && rows.len() < k {
            return Err(Error::ClassTooSmallForK {
                class: RhythmLabel::ALL[c].to_string(),
                count: rows.len(),
                k,
            });
        }
    }
    let mut folds = vec![Vec::new(); k];
    for (c, rows) in per_class.iter().enumerate() {
        let mut shuffled = rows.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
        shuffled.shuffle(&mut rng);
        for (j, idx) in shuffled.into_iter().enumerate() {
            folds[j % k].push(idx);
        }
    }
    Ok(folds)
}

/// k-fold cross-validation of the forest, optionally restricted to a
/// feature subset. Per-fold models are trained from scratch with
/// independent child seeds.
pub fn kfold_crossval_subset(
    dataset: &Dataset,
    k: usize,
    params: &ForestParams,
    seed: u64,
    subset: Option<&[usize]>,
) -> Result<MetricReport> {
    let folds = stratified_folds(dataset, k, seed)?;
    let mut pooled = ConfusionCounts::new();
    let mut fold_summaries = Vec::with_capacity(k);
    for (fi, test_idx) in folds.iter().enumerate() {
        let test_set: std::collections::HashSet<usize> = test_idx.iter().cloned().collect();
        let mut train = Dataset::new(dataset.mode);
        for (i, row) in dataset.rows.iter().enumerate() {
            if !test_set.contains(&i) {
                train.push(row.clone())?;
            }
        }
        let fold_params = ForestParams {
            seed: params.seed.wrapping_add(fi as u64),
            ..*params
        };
        let model = match subset {
            Some(s) => classify::train_forest_subset(&train, &fold_params, s)?,
            None => classify::train_forest(&train, &fold_params)?,
        };
        let pairs: Vec<(RhythmLabel, RhythmLabel)> = test_idx
            .iter()
            .map(|&i| {
                let row = &dataset.rows[i];
                let (pred, _) = classify::predict(&model, &row.features)?;
                Ok((row.label, pred))
            })
            .collect::<Result<_>>()?;
        let fold_counts = ConfusionCounts::from_pairs(&pairs);
        fold_summaries.push(metrics(&fold_counts).overall);
        pooled.add(&fold_counts);
    }
    let mut report = metrics(&pooled);
    let n = fold_summaries.len() as f64;
    report.fold_average = Some(Summary {
        acc: fold_summaries.iter().map(|s| s.acc).sum::<f64>() / n,
        se: fold_summaries.iter().map(|s| s.se).sum::<f64>() / n,
        ppv: fold_summaries.iter().map(|s| s.ppv).sum::<f64>() / n,
        f1: fold_summaries.iter().map(|s| s.f1).sum::<f64>() / n,
    });
    report.folds = fold_summaries;
    Ok(report)
}

/// k-fold cross-validation over the full feature vector.
pub fn kfold_crossval(
    dataset: &Dataset,
    k: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<MetricReport> {
    kfold_crossval_subset(dataset, k, params, seed, None)
}

/// Resolve a subset name like "HRV", "QRS", "D3", "HRV+PRI" or "ALL" to
/// feature column indices by name prefix.
pub fn resolve_subset(mode: crate::domain::FeatureMode, name: &str) -> Result<Vec<usize>> {
    let names = feature_names(mode);
    if name.eq_ignore_ascii_case("ALL") {
        return Ok((0..names.len()).collect());
    }
    let mut indices = Vec::new();
    for part in name.split('+') {
        let prefix = match part.trim() {
            "HRV" => "HR_".to_string(),
            p @ ("P" | "PRI" | "QRS" | "D3" | "D4" | "D5" | "D6" | "D7") => format!("{p}_"),
            other => return Err(Error::UnknownSubset(other.to_string())),
        };
        let before = indices.len();
        indices.extend(
            names
                .iter()
                .enumerate()
                .filter(|(_, n)| {
                    n.starts_with(&prefix)
                        && !(prefix == "P_" && n.starts_with("PRI_"))
                })
                .map(|(i, _)| i),
        );
        if indices.len() == before {
            return Err(Error::UnknownSubset(part.trim().to_string()));
        }
    }
    indices.sort_unstable();
    indices.dedup();
    Ok(indices)
}

/// One cross-validation row per requested feature subset.
pub fn ablation_feature_subsets(
    dataset: &Dataset,
    subsets: &[String],
    k: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<Vec<(String, MetricReport)>> {
    let mut out = Vec::with_capacity(subsets.len());
    for name in subsets {
        let indices = resolve_subset(dataset.mode, name)?;
        let report = kfold_crossval_subset(dataset, k, params, seed, Some(&indices))?;
        out.push((name.clone(), report));
    }
    Ok(out)
}

/// Re-extract the wavelet66 features per mother wavelet and cross-validate
/// each; one row per wavelet. Records must be labeled and come with their
/// detected R peaks.
pub fn ablation_wavelets(
    records: &[(EcgRecord, Vec<usize>)],
    wavelets: &[WaveletName],
    k: usize,
    params: &ForestParams,
    entropy: &EntropyParams,
    seed: u64,
) -> Result<Vec<(WaveletName, MetricReport)>> {
    let mut out = Vec::with_capacity(wavelets.len());
    for &name in wavelets {
        let spec = WaveletSpec::new(name, crate::wavelet::DEFAULT_LEVELS);
        let mut ds = Dataset::new(crate::domain::FeatureMode::Wavelet66);
        for (record, r_peaks) in records {
            let label = record.label.ok_or_else(|| {
                Error::DegenerateDataset(format!("record {} has no label", record.id))
            })?;
            let (features, _) = features::extract_wavelet66(record, r_peaks, &spec, entropy)
                .map_err(|e| e.with_record(&record.id))?;
            ds.push(DatasetRow {
                id: record.id.clone(),
                features,
                label,
            })?;
        }
        out.push((name, kfold_crossval(&ds, k, params, seed)?));
    }
    Ok(out)
}

/// Exhaustive grid search by cross-validated macro F1. Ties resolve to
/// fewer trees, then shallower depth.
pub fn grid_search(
    dataset: &Dataset,
    grid: &[ForestParams],
    k: usize,
    seed: u64,
) -> Result<(ForestParams, Vec<(ForestParams, f64)>)> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut table = Vec::with_capacity(grid.len());
    for params in grid {
        let report = kfold_crossval(dataset, k, params, seed)?;
        table.push((*params, report.overall.f1));
    }
    let depth_rank = |p: &ForestParams| p.max_depth.unwrap_or(usize::MAX);
    let best = *table
        .iter()
        .min_by(|(pa, fa), (pb, fb)| {
            fb.partial_cmp(fa)
                .unwrap()
                .then(pa.n_trees.cmp(&pb.n_trees))
                .then(depth_rank(pa).cmp(&depth_rank(pb)))
        })
        .map(|(p, _)| p)
        .unwrap();
    Ok((best, table))
}
