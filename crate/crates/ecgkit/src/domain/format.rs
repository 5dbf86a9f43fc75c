//! On-disk formats: per-record text files, dataset manifests and feature
//! matrices. All formats are plain delimited text so records converted from
//! other tooling can be dropped in directly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{
    feature_names, parse_label, Dataset, DatasetRow, EcgRecord, FeatureMode, FeatureVector,
    RhythmLabel,
};
use crate::error::{Error, Result};

/// One manifest line: a record path plus an optional label override.
#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Option<RhythmLabel>,
}

/// Parse a manifest file: one `path,label` line per record, `#` comments
/// allowed, label column optional. Relative paths resolve against the
/// manifest's directory.
pub fn load_manifest(manifest_path: &Path) -> Result<Vec<ManifestEntry>> {
    if !manifest_path.exists() {
        return Err(Error::MissingFile(manifest_path.to_path_buf()));
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(manifest_path)?;
    let mut entries = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (path_part, label_part) = match line.split_once(',') {
            Some((p, l)) => (p.trim(), l.trim()),
            None => (line, ""),
        };
        let label = if label_part.is_empty() {
            None
        } else {
            Some(parse_label(label_part)?)
        };
        let mut path = PathBuf::from(path_part);
        if path.is_relative() {
            path = base.join(path);
        }
        entries.push(ManifestEntry { path, label });
    }
    Ok(entries)
}

/// Load every record referenced by a manifest, in manifest order. A label in
/// the manifest wins over one in the record header.
pub fn load_records(manifest_path: &Path) -> Result<Vec<EcgRecord>> {
    let entries = load_manifest(manifest_path)?;
    let mut records = Vec::with_capacity(entries.len());
    for entry in entries {
        let mut record = load_record(&entry.path)?;
        if entry.label.is_some() {
            record.label = entry.label;
        }
        records.push(record);
    }
    Ok(records)
}

/// Parse a single record file: `key: value` header lines (`id`, `fs_hz`,
/// `lead`, optional `label`) followed by one sample per line.
pub fn load_record(path: &Path) -> Result<EcgRecord> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path)?;
    let mut id = None;
    let mut fs_hz = None;
    let mut label = None;
    let mut samples = Vec::new();
    let mut in_header = true;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_header {
            if let Some((key, value)) = line.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "id" => id = Some(value.to_string()),
                    "fs_hz" => {
                        fs_hz = Some(value.parse::<f64>().map_err(|_| Error::MalformedHeader {
                            path: path.to_path_buf(),
                            reason: format!("bad fs_hz {value:?}"),
                        })?)
                    }
                    "label" => label = Some(parse_label(value)?),
                    "lead" => {}
                    other => {
                        return Err(Error::MalformedHeader {
                            path: path.to_path_buf(),
                            reason: format!("unknown header key {other:?}"),
                        })
                    }
                }
                continue;
            }
            in_header = false;
        }
        let v = line.parse::<f64>().map_err(|_| Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: format!("bad sample line {line:?}"),
        })?;
        samples.push(v);
    }
    let fs_hz = fs_hz.ok_or_else(|| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: "missing fs_hz".into(),
    })?;
    if fs_hz <= 0.0 {
        return Err(Error::NonPositiveSamplingRate(path.to_path_buf()));
    }
    if samples.is_empty() {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: "no samples".into(),
        });
    }
    let id = id.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    Ok(EcgRecord {
        id,
        fs_hz,
        samples,
        label,
    })
}

/// Write a record in the text format read by [`load_record`].
pub fn save_record(record: &EcgRecord, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("id: {}\n", record.id));
    out.push_str(&format!("fs_hz: {}\n", record.fs_hz));
    out.push_str("lead: II\n");
    if let Some(label) = record.label {
        out.push_str(&format!("label: {label}\n"));
    }
    for v in &record.samples {
        out.push_str(&format!("{}\n", fmt_f64(*v)));
    }
    fs::write(path, out)?;
    Ok(())
}

/// 17 significant digits: enough for bit-exact f64 round trips.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a feature matrix: header row with canonical names, then one row per
/// record (`id`, features, `label`). Values carry 17 significant digits so
/// the round trip is bit-exact.
pub fn save_features(dataset: &Dataset, path: &Path) -> Result<()> {
    let names = feature_names(dataset.mode);
    let mut out = String::new();
    out.push_str(&format!("id,{},label\n", names.join(",")));
    for row in &dataset.rows {
        out.push_str(&row.id);
        for v in &row.features.values {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push(',');
        out.push_str(row.label.abbrev());
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Read a feature matrix written by [`save_features`]. The mode is inferred
/// from the header column count.
pub fn load_features(path: &Path) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::EmptySignal)?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "id" || *cols.last().unwrap() != "label" {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: cols.len(),
        });
    }
    let n_features = cols.len() - 2;
    let mode = match n_features {
        48 => FeatureMode::Time48,
        66 => FeatureMode::Wavelet66,
        other => {
            return Err(Error::DimensionMismatch {
                expected: 48,
                got: other,
            })
        }
    };
    let expected_names = feature_names(mode);
    if cols[1..cols.len() - 1] != *expected_names {
        return Err(Error::DimensionMismatch {
            expected: n_features,
            got: n_features,
        });
    }
    let mut dataset = Dataset::new(mode);
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::DimensionMismatch {
                expected: cols.len(),
                got: fields.len(),
            });
        }
        let id = fields[0].to_string();
        let values = fields[1..fields.len() - 1]
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::DimensionMismatch {
                    expected: n_features,
                    got: 0,
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let label = parse_label(fields[fields.len() - 1])?;
        dataset.push(DatasetRow {
            id,
            features: FeatureVector::new(mode, values)?,
            label,
        })?;
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample_dataset() -> Dataset {
        let mut ds = Dataset::new(FeatureMode::Time48);
        for (i, label) in [(0, RhythmLabel::Nsr), (1, RhythmLabel::Af)] {
            let values: Vec<f64> = (0..48)
                .map(|j| (i as f64 + 1.0) * 0.1 + (j as f64) * std::f64::consts::PI / 7.0)
                .collect();
            ds.push(DatasetRow {
                id: format!("rec{i}"),
                features: FeatureVector::new(FeatureMode::Time48, values).unwrap(),
                label,
            })
            .unwrap();
        }
        ds
    }

    #[test]
    fn feature_roundtrip_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let ds = sample_dataset();
        save_features(&ds, &path).unwrap();
        let loaded = load_features(&path).unwrap();
        assert_eq!(ds, loaded);
    }

    #[test]
    fn empty_dataset_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let ds = Dataset::new(FeatureMode::Wavelet66);
        save_features(&ds, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1); // header only
        let loaded = load_features(&path).unwrap();
        assert!(loaded.is_empty());
        assert_eq!(loaded.mode, FeatureMode::Wavelet66);
    }

    #[test]
    fn wrong_column_count_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let names: Vec<&str> = crate::domain::FEATURE_NAMES_TIME48[..47].to_vec();
        fs::write(
            &path,
            format!("id,{},label\n", names.join(",")),
        )
        .unwrap();
        assert!(matches!(
            load_features(&path),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn record_roundtrip_and_manifest() {
        let dir = tempdir().unwrap();
        let mut paths = Vec::new();
        for i in 0..3 {
            let record = EcgRecord::new(format!("r{i}"), 500.0, vec![0.5, -1.25, 3.0])
                .with_label(RhythmLabel::Sb);
            let path = dir.path().join(format!("r{i}.txt"));
            save_record(&record, &path).unwrap();
            paths.push(path);
        }
        let manifest = dir.path().join("manifest.csv");
        fs::write(
            &manifest,
            "# corpus\nr0.txt,SB\nr1.txt,AF\nr2.txt\n",
        )
        .unwrap();
        let records = load_records(&manifest).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].id, "r0");
        assert_eq!(records[1].label, Some(RhythmLabel::Af)); // manifest wins
        assert_eq!(records[2].label, Some(RhythmLabel::Sb)); // header kept
        assert_eq!(records[0].samples, vec![0.5, -1.25, 3.0]);
    }

    #[test]
    fn bad_record_files_rejected() {
        let dir = tempdir().unwrap();
        let zero_fs = dir.path().join("zero.txt");
        fs::write(&zero_fs, "id: z\nfs_hz: 0\n1.0\n").unwrap();
        assert!(matches!(
            load_record(&zero_fs),
            Err(Error::NonPositiveSamplingRate(_))
        ));

        let empty = dir.path().join("empty.txt");
        fs::write(&empty, "id: e\nfs_hz: 500\n").unwrap();
        assert!(matches!(
            load_record(&empty),
            Err(Error::MalformedHeader { .. })
        ));

        assert!(matches!(
            load_record(&dir.path().join("nope.txt")),
            Err(Error::MissingFile(_))
        ));
    }
}
