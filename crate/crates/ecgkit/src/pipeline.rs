//! End-to-end drivers: preprocess -> delineate -> features -> balance ->
//! cross-validation, plus the streaming classify mode used for deployment.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::balance::{self, BalanceConfig};
use crate::classify::{self, ForestParams, TrainedModel};
use crate::delineate::{self, DelineationConfig};
use crate::domain::{Dataset, DatasetRow, EcgRecord, FeatureMode, RhythmLabel};
use crate::error::{Error, Result};
use crate::evaluate::{self, ConfusionCounts, MetricReport};
use crate::features;
use crate::preprocess::{self, DEFAULT_HIGH_HZ, DEFAULT_LOW_HZ, DEFAULT_NOTCH_HZ};
use crate::stats::EntropyParams;
use crate::wavelet::{WaveletName, WaveletSpec, DEFAULT_LEVELS};

/// Everything the end-to-end run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mode: FeatureMode,
    /// Mother wavelet; only consulted in wavelet66 mode.
    pub wavelet: WaveletName,
    pub low_hz: f64,
    pub high_hz: f64,
    /// None disables the powerline notch.
    pub notch_hz: Option<f64>,
    pub delineation: DelineationConfig,
    pub entropy: EntropyParams,
    /// None skips rebalancing.
    pub balance: Option<BalanceConfig>,
    /// Balance only the training folds during cross-validation instead of
    /// the whole dataset up front (leakage-free evaluation mode).
    pub balance_train_only: bool,
    pub forest: ForestParams,
    pub folds: usize,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(mode: FeatureMode) -> Self {
        PipelineConfig {
            mode,
            wavelet: WaveletName::Sym7,
            low_hz: DEFAULT_LOW_HZ,
            high_hz: DEFAULT_HIGH_HZ,
            notch_hz: Some(DEFAULT_NOTCH_HZ),
            delineation: DelineationConfig::default(),
            entropy: EntropyParams::default(),
            balance: None,
            balance_train_only: false,
            forest: ForestParams::default(),
            folds: 10,
            seed: 42,
        }
    }
}

/// Band-pass plus optional notch.
pub fn preprocess_record(record: &EcgRecord, config: &PipelineConfig) -> Result<EcgRecord> {
    let filtered = preprocess::bandpass(record, config.low_hz, config.high_hz)
        .map_err(|e| e.with_record(&record.id))?;
    match config.notch_hz {
        Some(hz) => preprocess::notch(&filtered, hz).map_err(|e| e.with_record(&record.id)),
        None => Ok(filtered),
    }
}

/// Preprocess and extract one record's feature vector.
pub fn extract_record(
    record: &EcgRecord,
    config: &PipelineConfig,
) -> Result<(DatasetRow, Vec<String>)> {
    let clean = preprocess_record(record, config)?;
    let wrap = |e: Error| e.with_record(&record.id);
    let r_peaks = delineate::detect_r_peaks(&clean, &config.delineation).map_err(wrap)?;
    let (features, flags) = match config.mode {
        FeatureMode::Time48 => {
            let fiducials =
                delineate::delineate(&clean, &r_peaks, &config.delineation).map_err(wrap)?;
            features::extract_time48(&clean, &fiducials, &config.entropy).map_err(wrap)?
        }
        FeatureMode::Wavelet66 => {
            let spec = WaveletSpec::new(config.wavelet, DEFAULT_LEVELS);
            features::extract_wavelet66(&clean, &r_peaks, &spec, &config.entropy).map_err(wrap)?
        }
    };
    let label = record.label.ok_or_else(|| {
        Error::DegenerateDataset(format!("record {} has no label", record.id))
    })?;
    Ok((
        DatasetRow {
            id: record.id.clone(),
            features,
            label,
        },
        flags,
    ))
}

/// Extract the whole corpus into a labeled dataset.
pub fn extract_dataset(records: &[EcgRecord], config: &PipelineConfig) -> Result<Dataset> {
    let mut ds = Dataset::new(config.mode);
    for record in records {
        let (row, _) = extract_record(record, config)?;
        ds.push(row)?;
    }
    Ok(ds)
}

/// Cross-validation that rebalances each training fold separately, leaving
/// test folds at their natural class distribution.
pub fn crossval_balance_train_only(
    dataset: &Dataset,
    config: &PipelineConfig,
    balance_cfg: &BalanceConfig,
) -> Result<MetricReport> {
    let folds = evaluate::stratified_folds(dataset, config.folds, config.seed)?;
    let mut pooled = ConfusionCounts::new();
    let mut fold_summaries = Vec::new();
    for (fi, test_idx) in folds.iter().enumerate() {
        let test_set: std::collections::HashSet<usize> = test_idx.iter().cloned().collect();
        let mut train = Dataset::new(dataset.mode);
        for (i, row) in dataset.rows.iter().enumerate() {
            if !test_set.contains(&i) {
                train.push(row.clone())?;
            }
        }
        let balanced = balance::balance(&train, balance_cfg)?;
        let fold_params = ForestParams {
            seed: config.forest.seed.wrapping_add(fi as u64),
            ..config.forest
        };
        let model = classify::train_forest(&balanced, &fold_params)?;
        let pairs: Vec<(RhythmLabel, RhythmLabel)> = test_idx
            .iter()
            .map(|&i| {
                let row = &dataset.rows[i];
                let (pred, _) = classify::predict(&model, &row.features)?;
                Ok((row.label, pred))
            })
            .collect::<Result<_>>()?;
        let counts = ConfusionCounts::from_pairs(&pairs);
        fold_summaries.push(evaluate::metrics(&counts).overall);
        pooled.add(&counts);
    }
    let mut report = evaluate::metrics(&pooled);
    report.folds = fold_summaries;
    Ok(report)
}

/// Output of an end-to-end run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub dataset: Dataset,
    pub report: MetricReport,
    /// Forest retrained on the full (possibly balanced) dataset.
    pub model: TrainedModel,
}

/// The full pipeline: extraction, optional balancing, cross-validation,
/// and a final model trained on everything.
pub fn run_pipeline(records: &[EcgRecord], config: &PipelineConfig) -> Result<PipelineOutput> {
    let dataset = extract_dataset(records, config)?;
    let (cv_dataset, report) = match (&config.balance, config.balance_train_only) {
        (Some(cfg), true) => {
            let report = crossval_balance_train_only(&dataset, config, cfg)?;
            (balance::balance(&dataset, cfg)?, report)
        }
        (Some(cfg), false) => {
            let balanced = balance::balance(&dataset, cfg)?;
            let report =
                evaluate::kfold_crossval(&balanced, config.folds, &config.forest, config.seed)?;
            (balanced, report)
        }
        (None, _) => {
            let report =
                evaluate::kfold_crossval(&dataset, config.folds, &config.forest, config.seed)?;
            (dataset.clone(), report)
        }
    };
    let model = classify::train_forest(&cv_dataset, &config.forest)?;
    Ok(PipelineOutput {
        dataset,
        report,
        model,
    })
}

/// Classify one raw record with a trained model: preprocess, delineate,
/// extract the model's feature mode, predict. Returns the label and the
/// winning class probability.
pub fn classify_record(
    model: &TrainedModel,
    record: &EcgRecord,
    config: &PipelineConfig,
) -> Result<(RhythmLabel, f64)> {
    let clean = preprocess_record(record, config)?;
    let wrap = |e: Error| e.with_record(&record.id);
    let r_peaks = delineate::detect_r_peaks(&clean, &config.delineation).map_err(wrap)?;
    let features = match model.mode {
        FeatureMode::Time48 => {
            let fiducials =
                delineate::delineate(&clean, &r_peaks, &config.delineation).map_err(wrap)?;
            features::extract_time48(&clean, &fiducials, &config.entropy)
                .map_err(wrap)?
                .0
        }
        FeatureMode::Wavelet66 => {
            let spec = WaveletSpec::new(config.wavelet, DEFAULT_LEVELS);
            features::extract_wavelet66(&clean, &r_peaks, &spec, &config.entropy)
                .map_err(wrap)?
                .0
        }
    };
    let (label, probs) = classify::predict(model, &features)?;
    Ok((label, probs[label.index()]))
}

/// One emitted line of the streaming mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamEntry {
    pub id: String,
    /// Classified label, or None when the record failed.
    pub label: Option<RhythmLabel>,
    pub confidence: f64,
    pub latency_ms: f64,
    pub error: Option<String>,
}

/// Classify a stream of records in arrival order, one output line each:
/// `id,label,confidence` on success, `id,ERROR,reason` on failure.
/// Per-record failures never halt the stream.
pub fn stream_classify<W: Write>(
    model: &TrainedModel,
    records: impl Iterator<Item = Result<EcgRecord>>,
    config: &PipelineConfig,
    out: &mut W,
) -> Result<Vec<StreamEntry>> {
    let mut entries = Vec::new();
    for (i, item) in records.enumerate() {
        let start = Instant::now();
        let entry = match item {
            Ok(record) => match classify_record(model, &record, config) {
                Ok((label, confidence)) => StreamEntry {
                    id: record.id.clone(),
                    label: Some(label),
                    confidence,
                    latency_ms: start.elapsed().as_secs_f64() * 1000.0,
                    error: None,
                },
                Err(e) => StreamEntry {
                    id: record.id.clone(),
                    label: None,
                    confidence: 0.0,
                    latency_ms: start.elapsed().as_secs_f64() * 1000.0,
                    error: Some(e.to_string()),
                },
            },
            Err(e) => StreamEntry {
                id: format!("record-{i}"),
                label: None,
                confidence: 0.0,
                latency_ms: start.elapsed().as_secs_f64() * 1000.0,
                error: Some(e.to_string()),
            },
        };
        match (&entry.label, &entry.error) {
            (Some(label), _) => writeln!(out, "{},{},{:.4}", entry.id, label, entry.confidence)?,
            (None, Some(reason)) => {
                writeln!(out, "{},ERROR,{}", entry.id, reason.replace(',', ";"))?
            }
            _ => unreachable!(),
        }
        entries.push(entry);
    }
    Ok(entries)
}
