//! Core data types shared by the whole pipeline: rhythm labels, ECG records,
//! fiducial maps, feature vectors and labeled datasets.

mod format;
mod names;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use format::{
    load_features, load_manifest, load_record, load_records, save_features, save_record,
    ManifestEntry,
};
pub use names::{feature_names, FEATURE_NAMES_TIME48, FEATURE_NAMES_WAVELET66};

/// The nine rhythm classes, in the canonical order used everywhere
/// (feature matrices, confusion matrices, argmax tie-breaking).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RhythmLabel {
    Nsr,
    Sa,
    Sb,
    Stach,
    Af,
    Afl,
    Pac,
    Avb1,
    Pvc,
}

impl RhythmLabel {
    pub const ALL: [RhythmLabel; 9] = [
        RhythmLabel::Nsr,
        RhythmLabel::Sa,
        RhythmLabel::Sb,
        RhythmLabel::Stach,
        RhythmLabel::Af,
        RhythmLabel::Afl,
        RhythmLabel::Pac,
        RhythmLabel::Avb1,
        RhythmLabel::Pvc,
    ];

    /// Canonical abbreviation.
    pub fn abbrev(&self) -> &'static str {
        match self {
            RhythmLabel::Nsr => "NSR",
            RhythmLabel::Sa => "SA",
            RhythmLabel::Sb => "SB",
            RhythmLabel::Stach => "STACH",
            RhythmLabel::Af => "AF",
            RhythmLabel::Afl => "AFL",
            RhythmLabel::Pac => "PAC",
            RhythmLabel::Avb1 => "1AVB",
            RhythmLabel::Pvc => "PVC",
        }
    }

    /// Position in the canonical class order.
    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|l| l == self).unwrap()
    }
}

/// Case-insensitive parse of the canonical abbreviations.
/// "SVPB" is an alias for PAC and "VPB" for PVC.
pub fn parse_label(text: &str) -> Result<RhythmLabel> {
    let up = text.trim().to_ascii_uppercase();
    let label = match up.as_str() {
        "NSR" => RhythmLabel::Nsr,
        "SA" => RhythmLabel::Sa,
        "SB" => RhythmLabel::Sb,
        "STACH" => RhythmLabel::Stach,
        "AF" => RhythmLabel::Af,
        "AFL" => RhythmLabel::Afl,
        "PAC" | "SVPB" => RhythmLabel::Pac,
        "1AVB" => RhythmLabel::Avb1,
        "PVC" | "VPB" => RhythmLabel::Pvc,
        _ => return Err(Error::UnknownLabel(text.to_string())),
    };
    Ok(label)
}

impl FromStr for RhythmLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_label(s)
    }
}

impl fmt::Display for RhythmLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

/// A single-lead ECG record.
#[derive(Debug, Clone, PartialEq)]
pub struct EcgRecord {
    pub id: String,
    pub fs_hz: f64,
    pub samples: Vec<f64>,
    pub label: Option<RhythmLabel>,
}

impl EcgRecord {
    pub fn new(id: impl Into<String>, fs_hz: f64, samples: Vec<f64>) -> Self {
        EcgRecord {
            id: id.into(),
            fs_hz,
            samples,
            label: None,
        }
    }

    pub fn with_label(mut self, label: RhythmLabel) -> Self {
        self.label = Some(label);
        self
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs_hz
    }
}

/// Fiducial indices for one beat. Any component may be absent when its
/// detection criterion failed; absence is recorded, never fabricated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeatFiducials {
    pub p_onset: Option<usize>,
    pub p_peak: Option<usize>,
    pub p_offset: Option<usize>,
    pub qrs_onset: Option<usize>,
    pub qrs_offset: Option<usize>,
    pub t_peak: Option<usize>,
    pub t_offset: Option<usize>,
}

impl BeatFiducials {
    /// Present indices in wave order, with the R peak interleaved.
    fn ordered(&self, r: usize) -> Vec<usize> {
        let mut v = Vec::with_capacity(8);
        for idx in [self.p_onset, self.p_peak, self.p_offset, self.qrs_onset] {
            if let Some(i) = idx {
                v.push(i);
            }
        }
        v.push(r);
        for idx in [self.qrs_offset, self.t_peak, self.t_offset] {
            if let Some(i) = idx {
                v.push(i);
            }
        }
        v
    }
}

/// Per-beat fiducial points for a whole record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiducialMap {
    pub r_peaks: Vec<usize>,
    pub beats: Vec<BeatFiducials>,
}

impl FiducialMap {
    /// Check the structural invariants: r_peaks strictly increasing, all
    /// indices in bounds, and per-beat wave ordering.
    pub fn validate(&self, record_len: usize) -> bool {
        if self.r_peaks.len() != self.beats.len() {
            return false;
        }
        if !self.r_peaks.windows(2).all(|w| w[0] < w[1]) {
            return false;
        }
        for (r, beat) in self.r_peaks.iter().zip(&self.beats) {
            let seq = beat.ordered(*r);
            if seq.iter().any(|&i| i >= record_len) {
                return false;
            }
            if !seq.windows(2).all(|w| w[0] <= w[1]) {
                return false;
            }
        }
        true
    }

    pub fn len(&self) -> usize {
        self.r_peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_peaks.is_empty()
    }
}

/// Which feature set a vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureMode {
    Time48,
    Wavelet66,
}

impl FeatureMode {
    pub fn dim(&self) -> usize {
        match self {
            FeatureMode::Time48 => 48,
            FeatureMode::Wavelet66 => 66,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureMode::Time48 => "time48",
            FeatureMode::Wavelet66 => "wavelet66",
        }
    }
}

impl FromStr for FeatureMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time48" => Ok(FeatureMode::Time48),
            "wavelet66" => Ok(FeatureMode::Wavelet66),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// Ordered, named real-valued features. The name order per mode is a frozen
/// public contract; see [`feature_names`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mode: FeatureMode,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(mode: FeatureMode, values: Vec<f64>) -> Result<Self> {
        if values.len() != mode.dim() {
            return Err(Error::DimensionMismatch {
                expected: mode.dim(),
                got: values.len(),
            });
        }
        Ok(FeatureVector { mode, values })
    }

    pub fn names(&self) -> &'static [&'static str] {
        feature_names(self.mode)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// One labeled row of a feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub id: String,
    pub features: FeatureVector,
    pub label: RhythmLabel,
}

/// A labeled feature matrix; all rows share the mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub mode: FeatureMode,
    pub rows: Vec<DatasetRow>,
}

impl Dataset {
    pub fn new(mode: FeatureMode) -> Self {
        Dataset {
            mode,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: DatasetRow) -> Result<()> {
        if row.features.mode != self.mode {
            return Err(Error::DimensionMismatch {
                expected: self.mode.dim(),
                got: row.features.mode.dim(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Per-class row counts in canonical class order.
    pub fn class_counts(&self) -> [usize; 9] {
        let mut counts = [0usize; 9];
        for row in &self.rows {
            counts[row.label.index()] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_parse_print_roundtrip() {
        for label in RhythmLabel::ALL {
            assert_eq!(parse_label(label.abbrev()).unwrap(), label);
        }
    }

    #[test]
    fn label_aliases_and_case() {
        assert_eq!(parse_label("PVC").unwrap(), RhythmLabel::Pvc);
        assert_eq!(parse_label("svpb").unwrap(), RhythmLabel::Pac);
        assert_eq!(parse_label("vpb").unwrap(), RhythmLabel::Pvc);
        assert_eq!(parse_label("nsr").unwrap(), RhythmLabel::Nsr);
        assert!(matches!(parse_label("XYZ"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn exactly_nine_classes() {
        assert_eq!(RhythmLabel::ALL.len(), 9);
        for (i, label) in RhythmLabel::ALL.iter().enumerate() {
            assert_eq!(label.index(), i);
        }
    }

    #[test]
    fn feature_vector_dimension_checked() {
        assert!(FeatureVector::new(FeatureMode::Time48, vec![0.0; 48]).is_ok());
        assert!(matches!(
            FeatureVector::new(FeatureMode::Time48, vec![0.0; 47]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fiducial_ordering_validated() {
        let map = FiducialMap {
            r_peaks: vec![100, 300],
            beats: vec![
                BeatFiducials {
                    p_onset: Some(40),
                    p_peak: Some(55),
                    p_offset: Some(70),
                    qrs_onset: Some(90),
                    qrs_offset: Some(115),
                    t_peak: Some(180),
                    t_offset: Some(210),
                },
                BeatFiducials::default(),
            ],
        };
        assert!(map.validate(400));

        let bad = FiducialMap {
            r_peaks: vec![100],
            beats: vec![BeatFiducials {
                p_peak: Some(150), // after R
                ..Default::default()
            }],
        };
        assert!(!bad.validate(400));
    }
}
