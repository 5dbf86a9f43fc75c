//! Zero-phase band-pass + notch filtering: measure what survives at a few
//! probe frequencies.

use ecgkit::domain::EcgRecord;
use ecgkit::preprocess::{bandpass, notch};

fn tone(fs: f64, hz: f64, secs: f64) -> Vec<f64> {
    let n = (fs * secs) as usize;
    (0..n)
        .map(|i| (2.0 * std::f64::consts::PI * hz * i as f64 / fs).sin())
        .collect()
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn main() -> ecgkit::Result<()> {
    let fs = 500.0;
    for hz in [0.2, 10.0, 50.0, 200.0] {
        let record = EcgRecord::new(format!("tone-{hz}"), fs, tone(fs, hz, 6.0));
        let filtered = notch(&bandpass(&record, 1.0, 150.0)?, 50.0)?;
        // ignore filter edges
        let core = &filtered.samples[1000..filtered.samples.len() - 1000];
        let gain_db = 20.0 * (rms(core) / rms(&record.samples[1000..record.samples.len() - 1000])).log10();
        println!("{hz:>6.1} Hz -> gain {gain_db:>7.1} dB");
    }
    Ok(())
}
