//! Parameterized synthetic ECG generator with exact ground-truth fiducials.
//!
//! Beats are sums of Gaussian bumps (P, Q, R, S, T), placed on a beat
//! schedule derived from the rhythm script. Because every bump position is
//! chosen analytically, the generator can emit the true fiducial indices
//! alongside the waveform, which makes it the oracle for the delineator and
//! the feature extractors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::domain::{BeatFiducials, EcgRecord, FiducialMap, RhythmLabel};
use crate::error::{Error, Result};

/// Premature-beat type for PAC/PVC schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EctopicKind {
    /// Early beat, narrow QRS, P wave present.
    Pac,
    /// Early beat, wide QRS, no P wave, followed by a compensatory pause.
    Pvc,
}

/// One scheduled premature beat (0-based beat index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ectopic {
    pub kind: EctopicKind,
    pub beat: usize,
}

/// Everything needed to synthesize one labeled record.
#[derive(Debug, Clone, PartialEq)]
pub struct RhythmScript {
    pub label: RhythmLabel,
    pub mean_hr_bpm: f64,
    /// Gaussian RR jitter, as a fraction of the base RR.
    pub hr_jitter: f64,
    /// Sinus-arrhythmia RR modulation depth (fraction of RR) and period.
    pub cyclic_rr: f64,
    pub cyclic_period_beats: f64,
    /// Uniform beat-to-beat RR irregularity (fraction of RR), for AF.
    pub irregular_rr: f64,
    /// P bump amplitude; 0 suppresses the P wave entirely.
    pub p_amplitude: f64,
    /// P onset to QRS onset, milliseconds.
    pub pr_ms: f64,
    pub qrs_width_ms: f64,
    /// Continuous sawtooth flutter-wave amplitude (AFL); 0 disables.
    pub flutter_amplitude: f64,
    pub ectopics: Vec<Ectopic>,
    pub fs_hz: f64,
    pub duration_s: f64,
    /// White-noise signal-to-noise ratio in dB; None for a clean record.
    pub snr_db: Option<f64>,
    /// 50 Hz interference amplitude; 0 disables.
    pub powerline_amplitude: f64,
    pub seed: u64,
}

/// Fixed morphology constants (milliseconds unless noted).
const P_WIDTH_MS: f64 = 90.0;
const T_PEAK_AFTER_QRS_MS: f64 = 200.0;
const T_OFFSET_AFTER_PEAK_MS: f64 = 120.0;
const T_SIGMA_MS: f64 = 40.0;
const PVC_QRS_WIDTH_MS: f64 = 160.0;
const PREMATURITY: f64 = 0.65;
const COMPENSATORY_PAUSE: f64 = 1.35;
const FLUTTER_HZ: f64 = 5.0;

impl RhythmScript {
    /// Canonical script for a class: the textbook definition of each rhythm.
    pub fn for_class(label: RhythmLabel, seed: u64) -> RhythmScript {
        let base = RhythmScript {
            label,
            mean_hr_bpm: 75.0,
            hr_jitter: 0.03,
            cyclic_rr: 0.0,
            cyclic_period_beats: 6.0,
            irregular_rr: 0.0,
            p_amplitude: 0.15,
            pr_ms: 160.0,
            qrs_width_ms: 90.0,
            flutter_amplitude: 0.0,
            ectopics: Vec::new(),
            fs_hz: 500.0,
            duration_s: 10.0,
            snr_db: Some(30.0),
            powerline_amplitude: 0.0,
            seed,
        };
        match label {
            RhythmLabel::Nsr => base,
            RhythmLabel::Sa => RhythmScript {
                cyclic_rr: 0.15,
                ..base
            },
            RhythmLabel::Sb => RhythmScript {
                mean_hr_bpm: 45.0,
                ..base
            },
            RhythmLabel::Stach => RhythmScript {
                mean_hr_bpm: 120.0,
                ..base
            },
            RhythmLabel::Af => RhythmScript {
                p_amplitude: 0.0,
                irregular_rr: 0.2,
                hr_jitter: 0.05,
                mean_hr_bpm: 95.0,
                ..base
            },
            RhythmLabel::Afl => RhythmScript {
                p_amplitude: 0.0,
                flutter_amplitude: 0.1,
                mean_hr_bpm: 100.0,
                ..base
            },
            RhythmLabel::Pac => RhythmScript {
                ectopics: (3..40)
                    .step_by(4)
                    .map(|beat| Ectopic {
                        kind: EctopicKind::Pac,
                        beat,
                    })
                    .collect(),
                ..base
            },
            RhythmLabel::Avb1 => RhythmScript {
                pr_ms: 240.0,
                ..base
            },
            RhythmLabel::Pvc => RhythmScript {
                ectopics: (3..40)
                    .step_by(4)
                    .map(|beat| Ectopic {
                        kind: EctopicKind::Pvc,
                        beat,
                    })
                    .collect(),
                ..base
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let checks = [
            ((20.0..=300.0).contains(&self.mean_hr_bpm), "mean HR outside [20, 300] bpm"),
            (self.duration_s > 0.0, "duration must be positive"),
            (self.fs_hz > 0.0, "sampling rate must be positive"),
            (self.hr_jitter >= 0.0 && self.hr_jitter < 0.5, "hr_jitter outside [0, 0.5)"),
            (self.irregular_rr >= 0.0 && self.irregular_rr < 0.5, "irregular_rr outside [0, 0.5)"),
            (self.cyclic_rr >= 0.0 && self.cyclic_rr < 0.5, "cyclic_rr outside [0, 0.5)"),
            (self.pr_ms > 40.0, "PR interval too short"),
            (self.qrs_width_ms >= 40.0, "QRS width too narrow"),
            (self.p_amplitude >= 0.0, "negative P amplitude"),
        ];
        for (ok, reason) in checks {
            if !ok {
                return Err(Error::InvalidScript(reason.to_string()));
            }
        }
        Ok(())
    }

    fn is_ectopic(&self, beat: usize) -> Option<EctopicKind> {
        self.ectopics
            .iter()
            .find(|e| e.beat == beat)
            .map(|e| e.kind)
    }
}

fn add_bump(samples: &mut [f64], fs: f64, center_s: f64, sigma_ms: f64, amp: f64) {
    let sigma_s = sigma_ms / 1000.0;
    let lo = (((center_s - 4.0 * sigma_s) * fs).floor().max(0.0)) as usize;
    let hi = ((((center_s + 4.0 * sigma_s) * fs).ceil()) as usize).min(samples.len());
    for (i, s) in samples.iter_mut().enumerate().take(hi).skip(lo) {
        let t = i as f64 / fs - center_s;
        *s += amp * (-0.5 * (t / sigma_s).powi(2)).exp();
    }
}

/// Synthesize a record and its exact ground-truth fiducials.
pub fn generate(script: &RhythmScript) -> Result<(EcgRecord, FiducialMap)> {
    script.validate()?;
    let fs = script.fs_hz;
    let n = (script.duration_s * fs).round() as usize;
    let mut samples = vec![0.0f64; n];
    let mut rng = ChaCha8Rng::seed_from_u64(script.seed);
    let jitter_dist = Normal::new(0.0, 1.0).map_err(|_| {
        Error::InvalidScript("jitter distribution".to_string())
    })?;

    let base_rr = 60.0 / script.mean_hr_bpm;
    // Lead-in/lead-out so every beat's P onset and T offset fit in-record.
    let margin_pre = (script.pr_ms + script.qrs_width_ms) / 1000.0 + 0.05;
    let margin_post =
        (script.qrs_width_ms / 2.0 + T_PEAK_AFTER_QRS_MS + T_OFFSET_AFTER_PEAK_MS) / 1000.0 + 0.05;

    let mut beat_times = Vec::new();
    let mut t = margin_pre + 0.05;
    let mut beat_idx = 0usize;
    while t < script.duration_s - margin_post {
        beat_times.push((beat_idx, t));
        let mut rr = base_rr * (1.0 + script.hr_jitter * jitter_dist.sample(&mut rng));
        if script.cyclic_rr > 0.0 {
            rr *= 1.0
                + script.cyclic_rr
                    * (2.0 * std::f64::consts::PI * beat_idx as f64 / script.cyclic_period_beats)
                        .sin();
        }
        if script.irregular_rr > 0.0 {
            rr *= 1.0 + script.irregular_rr * rng.gen_range(-1.0..1.0);
        }
        if script.is_ectopic(beat_idx + 1).is_some() {
            rr *= PREMATURITY;
        } else if script.is_ectopic(beat_idx) == Some(EctopicKind::Pvc) {
            rr *= COMPENSATORY_PAUSE;
        }
        rr = rr.max(0.25);
        t += rr;
        beat_idx += 1;
    }
    if beat_times.len() < 2 {
        return Err(Error::InvalidScript(
            "duration too short for two beats".to_string(),
        ));
    }

    let mut r_peaks = Vec::new();
    let mut beats = Vec::new();
    for &(idx, r_time) in &beat_times {
        let ectopic = script.is_ectopic(idx);
        let (qrs_w, r_amp, t_amp, p_amp) = match ectopic {
            Some(EctopicKind::Pvc) => (PVC_QRS_WIDTH_MS, 1.2, -0.25, 0.0),
            Some(EctopicKind::Pac) => (script.qrs_width_ms, 1.0, 0.3, script.p_amplitude),
            None => (script.qrs_width_ms, 1.0, 0.3, script.p_amplitude),
        };
        let ms = |offset_ms: f64| r_time + offset_ms / 1000.0;

        let qrs_on_ms = -qrs_w / 2.0;
        let qrs_off_ms = qrs_w / 2.0;
        // QRS: small Q and S deflections flanking the R bump.
        add_bump(&mut samples, fs, ms(-0.3 * qrs_w), qrs_w / 8.0, -0.12 * r_amp);
        add_bump(&mut samples, fs, ms(0.0), qrs_w / 6.0, r_amp);
        add_bump(&mut samples, fs, ms(0.3 * qrs_w), qrs_w / 8.0, -0.2 * r_amp);
        // T wave.
        let t_peak_ms = qrs_off_ms + T_PEAK_AFTER_QRS_MS;
        add_bump(&mut samples, fs, ms(t_peak_ms), T_SIGMA_MS, t_amp);

        let mut fid = BeatFiducials {
            qrs_onset: Some((ms(qrs_on_ms) * fs).round() as usize),
            qrs_offset: Some((ms(qrs_off_ms) * fs).round() as usize),
            t_peak: Some((ms(t_peak_ms) * fs).round() as usize),
            t_offset: Some((ms(t_peak_ms + T_OFFSET_AFTER_PEAK_MS) * fs).round() as usize),
            ..Default::default()
        };
        if p_amp > 0.0 {
            let p_on_ms = qrs_on_ms - script.pr_ms;
            add_bump(
                &mut samples,
                fs,
                ms(p_on_ms + P_WIDTH_MS / 2.0),
                P_WIDTH_MS / 6.0,
                p_amp,
            );
            fid.p_onset = Some((ms(p_on_ms) * fs).round() as usize);
            fid.p_peak = Some((ms(p_on_ms + P_WIDTH_MS / 2.0) * fs).round() as usize);
            fid.p_offset = Some((ms(p_on_ms + P_WIDTH_MS) * fs).round() as usize);
        }
        r_peaks.push((r_time * fs).round() as usize);
        beats.push(fid);
    }

    if script.flutter_amplitude > 0.0 {
        for (i, s) in samples.iter_mut().enumerate() {
            let phase = (i as f64 / fs * FLUTTER_HZ).fract();
            *s += script.flutter_amplitude * (2.0 * phase - 1.0);
        }
    }
    if script.powerline_amplitude > 0.0 {
        for (i, s) in samples.iter_mut().enumerate() {
            *s += script.powerline_amplitude
                * (2.0 * std::f64::consts::PI * 50.0 * i as f64 / fs).sin();
        }
    }
    if let Some(snr_db) = script.snr_db {
        let power = samples.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let noise_sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
        let noise = Normal::new(0.0, noise_sigma)
            .map_err(|_| Error::InvalidScript("noise sigma".to_string()))?;
        for s in samples.iter_mut() {
            *s += noise.sample(&mut rng);
        }
    }

    let record = EcgRecord::new(format!("{}-{:08x}", script.label, script.seed), fs, samples)
        .with_label(script.label);
    let truth = FiducialMap { r_peaks, beats };
    debug_assert!(truth.validate(record.samples.len()));
    Ok((record, truth))
}

/// A generated record with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthRecord {
    pub record: EcgRecord,
    pub truth: FiducialMap,
}

/// Build a corpus of `per_class` records per class, varying heart rate and
/// noise across records. Deterministic under `seed`.
pub fn build_corpus(per_class: usize, seed: u64) -> Result<Vec<SynthRecord>> {
    let mut out = Vec::with_capacity(per_class * RhythmLabel::ALL.len());
    for label in RhythmLabel::ALL {
        let mut meta_rng =
            ChaCha8Rng::seed_from_u64(seed ^ (0x9e3779b97f4a7c15u64.wrapping_mul(label.index() as u64 + 1)));
        for k in 0..per_class {
            let mut script = RhythmScript::for_class(label, seed.wrapping_add((label.index() * 100_000 + k) as u64));
            // Spread each class over its defining heart-rate range.
            let scale: f64 = meta_rng.gen_range(0.9..1.1);
            script.mean_hr_bpm = match label {
                RhythmLabel::Sb => meta_rng.gen_range(40.0..55.0),
                RhythmLabel::Stach => meta_rng.gen_range(105.0..150.0),
                _ => (script.mean_hr_bpm * scale).clamp(62.0, 99.0),
            };
            script.snr_db = Some(meta_rng.gen_range(18.0..30.0));
            if k % 3 == 0 {
                script.powerline_amplitude = 0.05;
            }
            script.duration_s = 10.0;
            let (mut record, truth) = generate(&script)?;
            record.id = format!("{}-{:04}", label, k);
            out.push(SynthRecord { record, truth });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nsr_75bpm_seed7_beat_count_and_p_waves() {
        let script = RhythmScript::for_class(RhythmLabel::Nsr, 7);
        let (record, truth) = generate(&script).unwrap();
        assert_eq!(record.fs_hz, 500.0);
        assert_eq!(record.samples.len(), 5000);
        assert!(
            (12..=13).contains(&truth.len()),
            "got {} beats",
            truth.len()
        );
        assert!(truth.beats.iter().all(|b| b.p_peak.is_some()));
        assert!(truth.validate(record.samples.len()));
    }

    #[test]
    fn sb_heart_rate_in_range() {
        let script = RhythmScript::for_class(RhythmLabel::Sb, 3);
        let (record, truth) = generate(&script).unwrap();
        let rr_mean = truth
            .r_peaks
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64)
            .sum::<f64>()
            / (truth.len() - 1) as f64;
        let hr = 60.0 * record.fs_hz / rr_mean;
        assert!((40.0..50.0).contains(&hr), "mean HR {hr}");
    }

    #[test]
    fn af_has_no_p_and_irregular_rr() {
        let script = RhythmScript::for_class(RhythmLabel::Af, 11);
        let (_, truth) = generate(&script).unwrap();
        assert!(truth.beats.iter().all(|b| b.p_peak.is_none()));
        let rrs: Vec<f64> = truth.r_peaks.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
        let mean = rrs.iter().sum::<f64>() / rrs.len() as f64;
        let cv = (rrs.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / rrs.len() as f64).sqrt()
            / mean;
        assert!(cv > 0.05, "AF RR coefficient of variation {cv} too regular");
    }

    #[test]
    fn avb1_pr_interval_by_construction() {
        let script = RhythmScript::for_class(RhythmLabel::Avb1, 5);
        let (record, truth) = generate(&script).unwrap();
        for beat in &truth.beats {
            let pri = (beat.qrs_onset.unwrap() - beat.p_onset.unwrap()) as f64
                / record.fs_hz
                * 1000.0;
            assert!((pri - 240.0).abs() < 3.0, "PRI {pri}");
        }
    }

    #[test]
    fn pvc_ectopics_are_wide_and_p_free() {
        let script = RhythmScript::for_class(RhythmLabel::Pvc, 9);
        let (record, truth) = generate(&script).unwrap();
        let widths: Vec<f64> = truth
            .beats
            .iter()
            .map(|b| (b.qrs_offset.unwrap() - b.qrs_onset.unwrap()) as f64 / record.fs_hz * 1000.0)
            .collect();
        let wide = widths.iter().filter(|&&w| w > 140.0).count();
        assert!(wide >= 2, "expected wide ectopic QRS, widths {widths:?}");
        let p_free = truth.beats.iter().filter(|b| b.p_peak.is_none()).count();
        assert_eq!(p_free, wide);
    }

    #[test]
    fn determinism() {
        let script = RhythmScript::for_class(RhythmLabel::Sa, 21);
        let a = generate(&script).unwrap();
        let b = generate(&script).unwrap();
        assert_eq!(a.0.samples, b.0.samples);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn invalid_scripts_rejected() {
        let mut script = RhythmScript::for_class(RhythmLabel::Nsr, 1);
        script.mean_hr_bpm = 10.0;
        assert!(matches!(generate(&script), Err(Error::InvalidScript(_))));
        let mut script = RhythmScript::for_class(RhythmLabel::Nsr, 1);
        script.duration_s = 0.0;
        assert!(matches!(generate(&script), Err(Error::InvalidScript(_))));
        let mut script = RhythmScript::for_class(RhythmLabel::Nsr, 1);
        script.duration_s = 0.8;
        assert!(matches!(generate(&script), Err(Error::InvalidScript(_))));
    }

    #[test]
    fn corpus_builder_shape_and_validity() {
        let corpus = build_corpus(3, 42).unwrap();
        assert_eq!(corpus.len(), 27);
        for sr in &corpus {
            assert!(sr.truth.validate(sr.record.samples.len()));
            assert!(sr.truth.len() >= 4);
            assert!(sr.record.samples.iter().all(|v| v.is_finite()));
        }
        let again = build_corpus(3, 42).unwrap();
        assert_eq!(corpus[5].record.samples, again[5].record.samples);
    }
}
