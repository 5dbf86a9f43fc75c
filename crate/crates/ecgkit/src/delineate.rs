//! R-peak detection and P/QRS/T delineation.
//!
//! The R-peak detector is a Pan-Tompkins-style chain: five-point derivative,
//! squaring, 150 ms moving-window integration, then adaptive dual thresholds
//! with a refractory period. Accepted peaks are refined to the nearest local
//! extremum of the input signal, which makes the output invariant to
//! constant amplitude offsets and (on symmetric beats) to time reversal.
//!
//! Wave boundaries use the slope-threshold method: walk outward from a peak
//! on the smoothed derivative until the slope falls below 10% of the local
//! maximum slope.

use crate::domain::{BeatFiducials, EcgRecord, FiducialMap};
use crate::error::{Error, Result};

/// Search windows and detector timing, all in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelineationConfig {
    /// QRS onset/offset search half-window around R.
    pub qrs_window_ms: f64,
    /// P search window before QRS onset: [qrs_onset - p_early, qrs_onset - p_late].
    pub p_early_ms: f64,
    pub p_late_ms: f64,
    /// T search window after QRS offset: [qrs_offset + t_early, qrs_offset + t_late].
    pub t_early_ms: f64,
    pub t_late_ms: f64,
    /// Minimum gap between detected R peaks.
    pub refractory_ms: f64,
}

impl Default for DelineationConfig {
    fn default() -> Self {
        DelineationConfig {
            qrs_window_ms: 80.0,
            p_early_ms: 240.0,
            p_late_ms: 40.0,
            t_early_ms: 60.0,
            t_late_ms: 400.0,
            refractory_ms: 250.0,
        }
    }
}

impl DelineationConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.qrs_window_ms > 0.0
            && self.p_early_ms > self.p_late_ms
            && self.p_late_ms > 0.0
            && self.t_late_ms > self.t_early_ms
            && self.t_early_ms > 0.0
            && self.refractory_ms >= 120.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidScript("invalid delineation config".to_string()))
        }
    }
}

/// Minimum record duration accepted by the detector, seconds.
pub const MIN_DURATION_S: f64 = 2.0;
const MWI_WINDOW_MS: f64 = 150.0;
const REFINE_BACK_MS: f64 = 150.0;
const REFINE_FWD_MS: f64 = 50.0;
const SLOPE_FRACTION: f64 = 0.1;
/// Smoothing window for P/T peak picking, ms.
const WAVE_SMOOTH_MS: f64 = 30.0;
/// P-wave absence threshold: candidate amplitude vs local noise MAD.
const P_ABSENT_MAD_FACTOR: f64 = 2.0;

fn ms_to_samples(ms: f64, fs: f64) -> usize {
    ((ms / 1000.0) * fs).round() as usize
}

/// Five-point derivative, squared, then integrated over a causal window.
fn integrated_energy(x: &[f64], fs: f64) -> Vec<f64> {
    let n = x.len();
    let mut sq = vec![0.0; n];
    for i in 4..n {
        let d = (2.0 * x[i] + x[i - 1] - x[i - 3] - 2.0 * x[i - 4]) / 8.0;
        sq[i] = d * d;
    }
    let w = ms_to_samples(MWI_WINDOW_MS, fs).max(1);
    let mut mwi = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += sq[i];
        if i >= w {
            acc -= sq[i - w];
        }
        mwi[i] = acc / w as f64;
    }
    mwi
}

fn local_maxima(y: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < y.len() {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > 0.0 {
            peaks.push(i);
        }
        i += 1;
    }
    peaks
}

/// Refine a detector candidate to the local extremum of the input signal
/// (largest deviation from the window mean, hence offset-invariant).
fn refine_to_extremum(x: &[f64], candidate: usize, fs: f64) -> usize {
    let lo = candidate.saturating_sub(ms_to_samples(REFINE_BACK_MS, fs));
    let hi = (candidate + ms_to_samples(REFINE_FWD_MS, fs)).min(x.len() - 1);
    let mean = x[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
    let mut best = candidate;
    let mut best_dev = -1.0;
    for i in lo..=hi {
        let dev = (x[i] - mean).abs();
        if dev > best_dev {
            best_dev = dev;
            best = i;
        }
    }
    best
}

/// Detect R peaks. The record should already be band-pass filtered.
pub fn detect_r_peaks(record: &EcgRecord, config: &DelineationConfig) -> Result<Vec<usize>> {
    config.validate()?;
    if record.samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    if record.duration_s() < MIN_DURATION_S {
        return Err(Error::NoBeatsDetected);
    }
    let fs = record.fs_hz;
    let x = &record.samples;
    let mwi = integrated_energy(x, fs);
    let candidates = local_maxima(&mwi);
    if candidates.is_empty() {
        return Err(Error::NoBeatsDetected);
    }

    // Adaptive dual thresholds in the classic running-average form.
    let init_end = ms_to_samples(2000.0, fs).min(mwi.len());
    let mut spki = mwi[..init_end].iter().cloned().fold(0.0f64, f64::max);
    let mut npki = mwi[..init_end].iter().sum::<f64>() / init_end as f64;
    let refractory = ms_to_samples(config.refractory_ms, fs);
    let mut accepted: Vec<usize> = Vec::new();
    for &c in &candidates {
        let thr = npki + 0.25 * (spki - npki);
        let far_enough = accepted
            .last()
            .map(|&last| c.saturating_sub(last) >= refractory)
            .unwrap_or(true);
        if mwi[c] >= thr && far_enough {
            accepted.push(c);
            spki = 0.125 * mwi[c] + 0.875 * spki;
        } else {
            npki = 0.125 * mwi[c] + 0.875 * npki;
        }
    }

    let mut peaks: Vec<usize> = accepted
        .iter()
        .map(|&c| refine_to_extremum(x, c, fs))
        .collect();
    peaks.sort_unstable();
    peaks.dedup();
    // Refinement can pull two candidates to nearby extrema; keep spacing.
    let mut spaced: Vec<usize> = Vec::with_capacity(peaks.len());
    for p in peaks {
        match spaced.last() {
            Some(&last) if p - last < refractory => {}
            _ => spaced.push(p),
        }
    }
    if spaced.len() < 2 {
        return Err(Error::NoBeatsDetected);
    }
    Ok(spaced)
}

fn moving_average(x: &[f64], w: usize) -> Vec<f64> {
    let w = w.max(1);
    let n = x.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(w / 2);
        let hi = (i + w / 2 + 1).min(n);
        out[i] = x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
    }
    out
}

fn derivative(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        d[i] = (x[i + 1] - x[i - 1]) / 2.0;
    }
    d
}

/// Walk outward from `peak` towards `bound` (inclusive range endpoint) and
/// return the slope-threshold boundary: the first index past the maximum
/// slope where |slope| drops below 10% of that maximum.
fn slope_boundary(d: &[f64], peak: usize, bound: usize) -> usize {
    let (range, forward): (Box<dyn Iterator<Item = usize>>, bool) = if bound >= peak {
        (Box::new(peak..=bound), true)
    } else {
        (Box::new((bound..=peak).rev()), false)
    };
    let idxs: Vec<usize> = range.collect();
    let max_slope = idxs.iter().map(|&i| d[i].abs()).fold(0.0f64, f64::max);
    if max_slope <= 0.0 {
        return bound;
    }
    let thr = SLOPE_FRACTION * max_slope;
    let mut past_max = false;
    for &i in &idxs {
        if d[i].abs() >= max_slope * 0.999 {
            past_max = true;
            continue;
        }
        if past_max && d[i].abs() < thr {
            return i;
        }
    }
    let _ = forward;
    bound
}

/// Median absolute deviation.
fn mad(values: &mut Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let med = median(values);
    let mut dev: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    median(&mut dev)
}

/// Remove the straight line through a window's endpoints.
fn detrend(window: &[f64]) -> Vec<f64> {
    let n = window.len();
    if n < 2 {
        return window.to_vec();
    }
    let a = window[0];
    let b = window[n - 1];
    window
        .iter()
        .enumerate()
        .map(|(i, &v)| v - (a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Delineate P/QRS/T boundaries around the given R peaks.
pub fn delineate(
    record: &EcgRecord,
    r_peaks: &[usize],
    config: &DelineationConfig,
) -> Result<FiducialMap> {
    config.validate()?;
    if r_peaks.len() < 2 {
        return Err(Error::NoBeatsDetected);
    }
    let fs = record.fs_hz;
    let x = &record.samples;
    let n = x.len();
    let smooth = moving_average(x, ms_to_samples(WAVE_SMOOTH_MS, fs));
    let d = derivative(&smooth);

    let qrs_w = ms_to_samples(config.qrs_window_ms, fs);
    let mut beats = Vec::with_capacity(r_peaks.len());
    for (bi, &r) in r_peaks.iter().enumerate() {
        // QRS onset/offset by slope threshold within +/- qrs_window of R.
        let lo = r.saturating_sub(qrs_w);
        let hi = (r + qrs_w).min(n - 1);
        let qrs_onset = slope_boundary(&d, r, lo);
        let qrs_offset = slope_boundary(&d, r, hi);

        let mut fid = BeatFiducials {
            qrs_onset: Some(qrs_onset),
            qrs_offset: Some(qrs_offset),
            ..Default::default()
        };

        // P wave: search before QRS onset, absent when the smoothed
        // candidate does not clear the local noise floor.
        let p_hi = qrs_onset.saturating_sub(ms_to_samples(config.p_late_ms, fs));
        let p_lo = qrs_onset.saturating_sub(ms_to_samples(config.p_early_ms, fs));
        let p_lo = match bi.checked_sub(1) {
            Some(prev) => p_lo.max(r_peaks[prev] + qrs_w),
            None => p_lo,
        };
        if p_hi > p_lo + 4 {
            let raw = &x[p_lo..=p_hi];
            let det = detrend(raw);
            let det_smooth = moving_average(&det, ms_to_samples(WAVE_SMOOTH_MS, fs));
            let (peak_rel, &peak_amp) = det_smooth
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            // Noise floor: MAD of the high-frequency residual in the window.
            let mut residual: Vec<f64> = det
                .iter()
                .zip(&det_smooth)
                .map(|(raw, sm)| raw - sm)
                .collect();
            let noise = mad(&mut residual);
            if peak_amp >= P_ABSENT_MAD_FACTOR * noise.max(1e-12) && peak_amp > 0.0 {
                let dp = derivative(&det_smooth);
                let p_peak = p_lo + peak_rel;
                let p_onset = p_lo + slope_boundary(&dp, peak_rel, 0);
                let p_offset = p_lo + slope_boundary(&dp, peak_rel, det_smooth.len() - 1);
                fid.p_onset = Some(p_onset);
                fid.p_peak = Some(p_peak);
                fid.p_offset = Some(p_offset.min(qrs_onset));
            }
        }

        // T wave: search after QRS offset, bounded by the next beat.
        let t_lo = qrs_offset + ms_to_samples(config.t_early_ms, fs);
        let mut t_hi = qrs_offset + ms_to_samples(config.t_late_ms, fs);
        if let Some(&next_r) = r_peaks.get(bi + 1) {
            t_hi = t_hi.min(next_r.saturating_sub(qrs_w));
        }
        t_hi = t_hi.min(n - 1);
        if t_hi > t_lo + 4 {
            let det = detrend(&x[t_lo..=t_hi]);
            let det_smooth = moving_average(&det, ms_to_samples(WAVE_SMOOTH_MS, fs));
            let (peak_rel, _) = det_smooth
                .iter()
                .enumerate()
                .max_by(|a, b| {
                    a.1.abs().partial_cmp(&b.1.abs()).unwrap()
                })
                .unwrap();
            let dt = derivative(&det_smooth);
            let t_peak = t_lo + peak_rel;
            let t_offset = t_lo + slope_boundary(&dt, peak_rel, det_smooth.len() - 1);
            fid.t_peak = Some(t_peak);
            fid.t_offset = Some(t_offset.max(t_peak));
        }
        beats.push(fid);
    }

    let map = FiducialMap {
        r_peaks: r_peaks.to_vec(),
        beats,
    };
    debug_assert!(map.validate(n));
    Ok(map)
}

/// Convenience: detect then delineate with one call.
pub fn full_delineation(record: &EcgRecord, config: &DelineationConfig) -> Result<FiducialMap> {
    let r_peaks = detect_r_peaks(record, config)?;
    delineate(record, &r_peaks, config)
}
