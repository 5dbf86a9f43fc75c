//! Generate one synthetic record per rhythm class and print what the
//! ground truth looks like.

use ecgkit::domain::RhythmLabel;
use ecgkit::synthgen::{generate, RhythmScript};

fn main() -> ecgkit::Result<()> {
    println!("{:<6} {:>6} {:>8} {:>8} {:>8}", "class", "beats", "dur_s", "hr_bpm", "p_waves");
    for label in RhythmLabel::ALL {
        let script = RhythmScript::for_class(label, 7);
        let (record, truth) = generate(&script)?;
        let n = truth.r_peaks.len();
        let span = (truth.r_peaks[n - 1] - truth.r_peaks[0]) as f64 / record.fs_hz;
        let hr = 60.0 * (n as f64 - 1.0) / span;
        let with_p = truth.beats.iter().filter(|b| b.p_peak.is_some()).count();
        println!(
            "{:<6} {:>6} {:>8.1} {:>8.1} {:>5}/{}",
            label.abbrev(),
            n,
            record.duration_s(),
            hr,
            with_p,
            n
        );
    }
    Ok(())
}
