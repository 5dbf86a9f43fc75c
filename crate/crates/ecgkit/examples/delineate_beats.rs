//! Detect R peaks and wave boundaries on a synthetic record and compare
//! against the generator's ground truth.

use ecgkit::delineate::{full_delineation, DelineationConfig};
use ecgkit::domain::RhythmLabel;
use ecgkit::synthgen::{generate, RhythmScript};

fn main() -> ecgkit::Result<()> {
    let script = RhythmScript::for_class(RhythmLabel::Nsr, 3);
    let (record, truth) = generate(&script)?;
    let found = full_delineation(&record, &DelineationConfig::default())?;

    let tol = (0.02 * record.fs_hz) as i64; // 20 ms
    let matched = truth
        .r_peaks
        .iter()
        .filter(|&&t| {
            found
                .r_peaks
                .iter()
                .any(|&f| (f as i64 - t as i64).abs() <= tol)
        })
        .count();
    println!(
        "R peaks: truth {} found {} matched@20ms {}",
        truth.r_peaks.len(),
        found.r_peaks.len(),
        matched
    );
    for (r, beat) in found.r_peaks.iter().zip(&found.beats).take(3) {
        println!(
            "beat @ {r}: p {:?} qrs [{:?},{:?}] t {:?}",
            beat.p_peak, beat.qrs_onset, beat.qrs_offset, beat.t_peak
        );
    }
    Ok(())
}
