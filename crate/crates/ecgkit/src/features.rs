//! HRV and morphological feature extraction.
//!
//! Produces the two record-level feature vectors consumed by the
//! classifier: `time48` (11 HRV + 18 P-wave + 5 PRI + 14 QRS values) and
//! `wavelet66` (16 HRV + 50 wavelet-coefficient values). Degenerate inputs
//! never yield NaN: zero-variance moment ratios and absent waves fall back
//! to 0 with a quality flag on the record.

use crate::domain::{EcgRecord, FeatureMode, FeatureVector, FiducialMap};
use crate::error::{Error, Result};
use crate::preprocess::pad_to_multiple;
use crate::stats::{self, EntropyParams};
use crate::wavelet::{self, WaveletSpec};

/// Length every wave segment is resampled to before correlation.
pub const CORR_RESAMPLE_LEN: usize = 64;
/// Minimum usable wave-segment length in samples.
const MIN_SEGMENT: usize = 8;

/// Beat-to-beat heart rate in bpm, one value per RR interval.
#[derive(Debug, Clone, PartialEq)]
pub struct HrSeries {
    pub hr: Vec<f64>,
}

impl HrSeries {
    pub fn len(&self) -> usize {
        self.hr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hr.is_empty()
    }
}

/// HR_i = 60 * fs / RR_i for consecutive R peaks.
pub fn heart_rate_series(r_peaks: &[usize], fs_hz: f64) -> Result<HrSeries> {
    if r_peaks.len() < 2 {
        return Err(Error::NoBeatsDetected);
    }
    let hr = r_peaks
        .windows(2)
        .map(|w| 60.0 * fs_hz / (w[1] - w[0]) as f64)
        .collect();
    Ok(HrSeries { hr })
}

/// Which HRV set to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrvMode {
    Basic11,
    Extended16,
}

fn moment_or_zero(r: Result<f64>, what: &str, flags: &mut Vec<String>) -> f64 {
    r.unwrap_or_else(|_| {
        flags.push(format!("{what}_zero_variance"));
        0.0
    })
}

/// The 11 basic (or 16 extended) HRV features, in frozen name order.
pub fn extract_hrv(
    hr: &HrSeries,
    mode: HrvMode,
    params: &EntropyParams,
) -> Result<(Vec<f64>, Vec<String>)> {
    let x = &hr.hr;
    if x.len() < 4 {
        return Err(Error::TooFewBeats(x.len()));
    }
    let mut flags = Vec::new();
    let max = x.iter().cloned().fold(f64::MIN, f64::max);
    let min = x.iter().cloned().fold(f64::MAX, f64::min);
    let mean = stats::mean(x);
    let std = stats::std_pop(x);
    let mut values = vec![
        max,
        min,
        mean,
        std,
        max - min,
        stats::mean_abs_diff(x)?,
        moment_or_zero(stats::kurtosis(x), "HR_kurt", &mut flags),
        moment_or_zero(stats::skewness(x), "HR_skew", &mut flags),
        stats::approx_entropy(x, params)?,
        stats::shannon_entropy_norm(x)?,
        stats::perm_entropy(x, params)?,
    ];
    if mode == HrvMode::Extended16 {
        let abs_diffs: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        values.push(stats::std_pop(&abs_diffs));
        values.push(if mean != 0.0 { std / mean } else { 0.0 });
        // Short HR series: clamp kmax so the Higuchi precondition holds.
        let mut p = *params;
        p.kmax = p.kmax.min(x.len().saturating_sub(2)).max(2);
        values.push(moment_or_zero(
            stats::higuchi_fd(x, &p),
            "HR_HFD",
            &mut flags,
        ));
        match stats::hjorth(x) {
            Ok((mob, comp)) => {
                values.push(mob);
                values.push(comp);
            }
            Err(_) => {
                flags.push("HR_hjorth_zero_variance".to_string());
                values.push(0.0);
                values.push(0.0);
            }
        }
    }
    Ok((values, flags))
}

/// A wave segment with its local linear baseline removed.
fn detrended(seg: &[f64]) -> Vec<f64> {
    let n = seg.len();
    if n < 2 {
        return seg.to_vec();
    }
    let a = seg[0];
    let b = seg[n - 1];
    seg.iter()
        .enumerate()
        .map(|(i, &v)| v - (a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        (0.0, 0.0)
    } else {
        (stats::mean(values), stats::std_pop(values))
    }
}

struct WaveStats {
    peak: Vec<f64>,
    width_ms: Vec<f64>,
    max_dev: Vec<f64>,
    energy: Vec<f64>,
    spen: Vec<f64>,
    saen: Vec<f64>,
    kurt: Vec<f64>,
    skew: Vec<f64>,
    corr: Vec<f64>,
    peak_indices: Vec<usize>,
}

fn collect_wave_stats(
    record: &EcgRecord,
    bounds: impl Iterator<Item = (usize, usize, usize)>,
    params: &EntropyParams,
    with_saen: bool,
    flags: &mut Vec<String>,
    tag: &str,
) -> WaveStats {
    let fs = record.fs_hz;
    let mut ws = WaveStats {
        peak: vec![],
        width_ms: vec![],
        max_dev: vec![],
        energy: vec![],
        spen: vec![],
        saen: vec![],
        kurt: vec![],
        skew: vec![],
        corr: vec![],
        peak_indices: vec![],
    };
    let mut prev_segment: Option<Vec<f64>> = None;
    for (onset, peak, offset) in bounds {
        if offset <= onset || offset >= record.samples.len() || offset - onset < MIN_SEGMENT {
            continue;
        }
        let seg = detrended(&record.samples[onset..=offset]);
        let hi = seg.iter().cloned().fold(f64::MIN, f64::max);
        let lo = seg.iter().cloned().fold(f64::MAX, f64::min);
        ws.peak.push(seg[peak.saturating_sub(onset).min(seg.len() - 1)]);
        ws.width_ms.push((offset - onset) as f64 / fs * 1000.0);
        ws.max_dev.push(hi - lo);
        ws.energy.push(seg.iter().map(|v| v * v).sum());
        match stats::spectral_entropy(&seg) {
            Ok(v) => ws.spen.push(v),
            Err(_) => flags.push(format!("{tag}_spen_failed")),
        }
        if with_saen {
            match stats::sample_entropy(&seg, params) {
                Ok(v) => ws.saen.push(v),
                Err(_) => flags.push(format!("{tag}_saen_failed")),
            }
        }
        ws.kurt.push(stats::kurtosis(&seg).unwrap_or(0.0));
        ws.skew.push(stats::skewness(&seg).unwrap_or(0.0));
        let resampled = stats::resample_linear(&seg, CORR_RESAMPLE_LEN);
        if let Some(prev) = &prev_segment {
            match stats::pearson(prev, &resampled) {
                Ok(c) => ws.corr.push(c),
                Err(_) => flags.push(format!("{tag}_corr_failed")),
            }
        }
        prev_segment = Some(resampled);
        ws.peak_indices.push(peak);
    }
    ws
}

/// 18 P-wave features (7 per-beat statistics as mean/std, consecutive-wave
/// correlation mean/std, atrial-rate mean/std). Beats with an absent P are
/// excluded; fewer than 2 measurable P waves zero-fills the block.
pub fn extract_pwave(
    record: &EcgRecord,
    fiducials: &FiducialMap,
    params: &EntropyParams,
) -> Result<(Vec<f64>, Vec<String>)> {
    if fiducials.len() < 2 {
        return Err(Error::TooFewBeats(fiducials.len()));
    }
    let mut flags = Vec::new();
    let bounds = fiducials.beats.iter().filter_map(|b| {
        match (b.p_onset, b.p_peak, b.p_offset) {
            (Some(on), Some(pk), Some(off)) => Some((on, pk, off)),
            _ => None,
        }
    });
    let ws = collect_wave_stats(record, bounds, params, false, &mut flags, "P");
    if ws.peak.len() < 2 {
        flags.push("p_absent".to_string());
        return Ok((vec![0.0; 18], flags));
    }
    let atrial_hr: Vec<f64> = ws
        .peak_indices
        .windows(2)
        .map(|w| 60.0 * record.fs_hz / (w[1] - w[0]) as f64)
        .collect();
    let mut values = Vec::with_capacity(18);
    for series in [
        &ws.peak,
        &ws.width_ms,
        &ws.max_dev,
        &ws.energy,
        &ws.corr,
        &ws.spen,
        &ws.kurt,
        &ws.skew,
        &atrial_hr,
    ] {
        let (m, s) = mean_std(series);
        values.push(m);
        values.push(s);
    }
    Ok((values, flags))
}

/// 5 PRI features in milliseconds over beats where both P onset and QRS
/// onset exist; fewer than 2 measurable intervals zero-fills the block.
pub fn extract_pri(fiducials: &FiducialMap, fs_hz: f64) -> Result<(Vec<f64>, Vec<String>)> {
    if fiducials.len() < 2 {
        return Err(Error::TooFewBeats(fiducials.len()));
    }
    let mut flags = Vec::new();
    let pri: Vec<f64> = fiducials
        .beats
        .iter()
        .filter_map(|b| match (b.p_onset, b.qrs_onset) {
            (Some(p), Some(q)) if q > p => Some((q - p) as f64 / fs_hz * 1000.0),
            _ => None,
        })
        .collect();
    if pri.len() < 2 {
        flags.push("pri_unmeasurable".to_string());
        return Ok((vec![0.0; 5], flags));
    }
    let max = pri.iter().cloned().fold(f64::MIN, f64::max);
    let min = pri.iter().cloned().fold(f64::MAX, f64::min);
    Ok((
        vec![stats::mean(&pri), stats::std_pop(&pri), max, min, max - min],
        flags,
    ))
}

/// 14 QRS features: mean/std of width, consecutive-complex correlation,
/// energy, spectral entropy, sample entropy, kurtosis, skewness.
pub fn extract_qrs(
    record: &EcgRecord,
    fiducials: &FiducialMap,
    params: &EntropyParams,
) -> Result<(Vec<f64>, Vec<String>)> {
    if fiducials.len() < 2 {
        return Err(Error::TooFewBeats(fiducials.len()));
    }
    let mut flags = Vec::new();
    let bounds = fiducials
        .r_peaks
        .iter()
        .zip(&fiducials.beats)
        .filter_map(|(&r, b)| match (b.qrs_onset, b.qrs_offset) {
            (Some(on), Some(off)) => Some((on, r, off)),
            _ => None,
        });
    let ws = collect_wave_stats(record, bounds, params, true, &mut flags, "QRS");
    if ws.width_ms.len() < 2 {
        flags.push("qrs_unmeasurable".to_string());
        return Ok((vec![0.0; 14], flags));
    }
    let mut values = Vec::with_capacity(14);
    for series in [
        &ws.width_ms,
        &ws.corr,
        &ws.energy,
        &ws.spen,
        &ws.saen,
        &ws.kurt,
        &ws.skew,
    ] {
        let (m, s) = mean_std(series);
        values.push(m);
        values.push(s);
    }
    Ok((values, flags))
}

/// Assemble the full 48-value time-domain vector.
pub fn extract_time48(
    record: &EcgRecord,
    fiducials: &FiducialMap,
    params: &EntropyParams,
) -> Result<(FeatureVector, Vec<String>)> {
    let hr = heart_rate_series(&fiducials.r_peaks, record.fs_hz)?;
    let (hrv, mut flags) = extract_hrv(&hr, HrvMode::Basic11, params)?;
    let (p, f) = extract_pwave(record, fiducials, params)?;
    flags.extend(f);
    let (pri, f) = extract_pri(fiducials, record.fs_hz)?;
    flags.extend(f);
    let (qrs, f) = extract_qrs(record, fiducials, params)?;
    flags.extend(f);
    let mut values = hrv;
    values.extend(p);
    values.extend(pri);
    values.extend(qrs);
    Ok((FeatureVector::new(FeatureMode::Time48, values)?, flags))
}

/// Assemble the full 66-value wavelet vector: 16 extended HRV features plus
/// 50 coefficient features from a 7-level decomposition of the record.
pub fn extract_wavelet66(
    record: &EcgRecord,
    r_peaks: &[usize],
    spec: &WaveletSpec,
    params: &EntropyParams,
) -> Result<(FeatureVector, Vec<String>)> {
    let hr = heart_rate_series(r_peaks, record.fs_hz)?;
    let (hrv, mut flags) = extract_hrv(&hr, HrvMode::Extended16, params)?;
    let padded = pad_to_multiple(&record.samples, spec.block())?;
    let decomp = wavelet::swt(&padded, spec, record.fs_hz)?;
    let (coef, f) = wavelet::extract_wavelet_features(&decomp, params)?;
    flags.extend(f);
    let mut values = hrv;
    values.extend(coef);
    Ok((FeatureVector::new(FeatureMode::Wavelet66, values)?, flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BeatFiducials, RhythmLabel};
    use crate::synthgen::{generate, RhythmScript};
    use crate::wavelet::WaveletName;

    #[test]
    fn heart_rate_series_examples() {
        assert_eq!(
            heart_rate_series(&[0, 500, 1000], 500.0).unwrap().hr,
            vec![60.0, 60.0]
        );
        assert_eq!(heart_rate_series(&[0, 250], 500.0).unwrap().hr, vec![120.0]);
        assert!(matches!(
            heart_rate_series(&[0], 500.0),
            Err(Error::NoBeatsDetected)
        ));
    }

    #[test]
    fn constant_hr_basic11() {
        let hr = HrSeries { hr: vec![60.0; 12] };
        let (v, flags) = extract_hrv(&hr, HrvMode::Basic11, &EntropyParams::default()).unwrap();
        assert_eq!(v.len(), 11);
        assert_eq!(&v[0..6], &[60.0, 60.0, 60.0, 0.0, 0.0, 0.0]);
        assert_eq!(v[6], 0.0); // kurtosis fallback
        assert_eq!(v[7], 0.0); // skewness fallback
        assert!(v[8].abs() < 1e-9); // ApEn of a constant
        assert_eq!(v[9], 0.0); // ShEn, HR_norm = 1
        assert_eq!(v[10], 0.0); // PeEn, single pattern
        assert!(flags.iter().any(|f| f.contains("zero_variance")));
    }

    #[test]
    fn hrv_ordering_invariants() {
        let (record, truth) = generate(&RhythmScript::for_class(RhythmLabel::Sa, 2)).unwrap();
        let hr = heart_rate_series(&truth.r_peaks, record.fs_hz).unwrap();
        let (v, _) = extract_hrv(&hr, HrvMode::Extended16, &EntropyParams::default()).unwrap();
        assert_eq!(v.len(), 16);
        assert!(v[0] >= v[2] && v[2] >= v[1]); // max >= mean >= min
        assert!((v[4] - (v[0] - v[1])).abs() < 1e-12);
        assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn hrv_jittered_mean_in_range() {
        let (record, truth) = generate(&RhythmScript::for_class(RhythmLabel::Nsr, 2)).unwrap();
        let hr = heart_rate_series(&truth.r_peaks, record.fs_hz).unwrap();
        let (v, _) = extract_hrv(&hr, HrvMode::Extended16, &EntropyParams::default()).unwrap();
        assert!((70.0..80.0).contains(&v[2]), "mean HR {}", v[2]);
    }

    #[test]
    fn hrv_shift_invariance() {
        let (record, truth) = generate(&RhythmScript::for_class(RhythmLabel::Nsr, 4)).unwrap();
        let hr_a = heart_rate_series(&truth.r_peaks, record.fs_hz).unwrap();
        let shifted: Vec<usize> = truth.r_peaks.iter().map(|&p| p + 137).collect();
        let hr_b = heart_rate_series(&shifted, record.fs_hz).unwrap();
        assert_eq!(hr_a, hr_b);
    }

    #[test]
    fn too_few_beats() {
        let hr = HrSeries {
            hr: vec![60.0, 62.0, 64.0],
        };
        assert!(matches!(
            extract_hrv(&hr, HrvMode::Basic11, &EntropyParams::default()),
            Err(Error::TooFewBeats(3))
        ));
    }

    /// Record of bitwise-identical beats: one 400-sample template tiled,
    /// with fiducials at fixed per-beat offsets.
    fn tiled_record(beats: usize) -> (EcgRecord, FiducialMap) {
        let mut template = vec![0.0; 400];
        let bump = |t: &mut Vec<f64>, c: f64, sigma: f64, amp: f64| {
            for (i, v) in t.iter_mut().enumerate() {
                *v += amp * (-0.5 * ((i as f64 - c) / sigma).powi(2)).exp();
            }
        };
        bump(&mut template, 120.0, 8.0, 0.15); // P
        bump(&mut template, 200.0, 7.0, 1.0); // R
        bump(&mut template, 290.0, 20.0, 0.3); // T
        let samples: Vec<f64> = template
            .iter()
            .cycle()
            .take(400 * beats)
            .cloned()
            .collect();
        let mut r_peaks = Vec::new();
        let mut fids = Vec::new();
        for k in 0..beats {
            let base = k * 400;
            r_peaks.push(base + 200);
            fids.push(BeatFiducials {
                p_onset: Some(base + 95),
                p_peak: Some(base + 120),
                p_offset: Some(base + 145),
                qrs_onset: Some(base + 178),
                qrs_offset: Some(base + 222),
                t_peak: Some(base + 290),
                t_offset: Some(base + 350),
            });
        }
        let record = EcgRecord::new("tiled", 500.0, samples);
        (record, FiducialMap { r_peaks, beats: fids })
    }

    #[test]
    fn identical_p_waves_correlate_perfectly() {
        let (record, truth) = tiled_record(10);
        let (v, flags) = extract_pwave(&record, &truth, &EntropyParams::default()).unwrap();
        assert_eq!(v.len(), 18);
        assert!((v[8] - 1.0).abs() < 1e-9, "P corr mean {}", v[8]);
        assert!(v[9].abs() < 1e-9, "P corr std {}", v[9]);
        assert!(flags.is_empty());
    }

    #[test]
    fn atrial_hr_matches_ventricular_on_nsr() {
        let (record, truth) = generate(&RhythmScript::for_class(RhythmLabel::Nsr, 7)).unwrap();
        let hr = heart_rate_series(&truth.r_peaks, record.fs_hz).unwrap();
        let (v, _) = extract_pwave(&record, &truth, &EntropyParams::default()).unwrap();
        let ventricular = stats::mean(&hr.hr);
        assert!(
            (v[16] - ventricular).abs() < 5.0,
            "atrial {} vs ventricular {ventricular}",
            v[16]
        );
    }

    #[test]
    fn absent_p_fallback() {
        let (record, truth) = generate(&RhythmScript::for_class(RhythmLabel::Af, 3)).unwrap();
        // ground truth for AF has no P at all
        let (v, flags) = extract_pwave(&record, &truth, &EntropyParams::default()).unwrap();
        assert_eq!(v, vec![0.0; 18]);
        assert!(flags.contains(&"p_absent".to_string()));
    }

    #[test]
    fn pri_examples() {
        let fids = FiducialMap {
            r_peaks: vec![200, 700, 1200],
            beats: vec![
                BeatFiducials {
                    p_onset: Some(100),
                    qrs_onset: Some(180),
                    ..Default::default()
                },
                BeatFiducials {
                    p_onset: Some(600),
                    qrs_onset: Some(680),
                    ..Default::default()
                },
                BeatFiducials {
                    p_onset: Some(1100),
                    qrs_onset: Some(1180),
                    ..Default::default()
                },
            ],
        };
        let (v, flags) = extract_pri(&fids, 500.0).unwrap();
        assert_eq!(v, vec![160.0, 0.0, 160.0, 160.0, 0.0]);
        assert!(flags.is_empty());

        let mixed = FiducialMap {
            r_peaks: vec![200, 700],
            beats: vec![
                BeatFiducials {
                    p_onset: Some(120),
                    qrs_onset: Some(180),
                    ..Default::default()
                },
                BeatFiducials {
                    p_onset: Some(580),
                    qrs_onset: Some(680),
                    ..Default::default()
                },
            ],
        };
        let (v, _) = extract_pri(&mixed, 500.0).unwrap();
        assert_eq!(v, vec![160.0, 40.0, 200.0, 120.0, 80.0]);
        assert!(v[2] >= v[0] && v[0] >= v[3]);
    }

    #[test]
    fn pri_fallback_when_unmeasurable() {
        let fids = FiducialMap {
            r_peaks: vec![200, 700],
            beats: vec![BeatFiducials::default(), BeatFiducials::default()],
        };
        let (v, flags) = extract_pri(&fids, 500.0).unwrap();
        assert_eq!(v, vec![0.0; 5]);
        assert!(flags.contains(&"pri_unmeasurable".to_string()));
    }

    #[test]
    fn identical_qrs_complexes() {
        let (record, truth) = tiled_record(10);
        let (v, _) = extract_qrs(&record, &truth, &EntropyParams::default()).unwrap();
        assert_eq!(v.len(), 14);
        assert!((v[2] - 1.0).abs() < 1e-9, "QRS corr mean {}", v[2]);
        assert!(v[1].abs() < 1e-9, "QRS width std {}", v[1]);
    }

    #[test]
    fn pvc_widens_qrs_width_std() {
        let params = EntropyParams::default();
        let (rec_n, truth_n) = generate(&RhythmScript::for_class(RhythmLabel::Nsr, 8)).unwrap();
        let (rec_v, truth_v) = generate(&RhythmScript::for_class(RhythmLabel::Pvc, 8)).unwrap();
        let (vn, _) = extract_qrs(&rec_n, &truth_n, &params).unwrap();
        let (vv, _) = extract_qrs(&rec_v, &truth_v, &params).unwrap();
        assert!(vv[1] > vn[1], "PVC width std {} vs NSR {}", vv[1], vn[1]);
    }

    #[test]
    fn full_vectors_finite_on_corpus() {
        let params = EntropyParams::default();
        let spec = WaveletSpec::new(WaveletName::Sym7, 7);
        for sr in crate::synthgen::build_corpus(2, 17).unwrap() {
            let (t48, _) = extract_time48(&sr.record, &sr.truth, &params).unwrap();
            assert!(t48.is_finite(), "{} time48", sr.record.id);
            let (w66, _) =
                extract_wavelet66(&sr.record, &sr.truth.r_peaks, &spec, &params).unwrap();
            assert!(w66.is_finite(), "{} wavelet66", sr.record.id);
        }
    }
}
