//! Stationary wavelet decomposition of an ECG record: frequency bands,
//! relative energies, and the 66-feature extraction.

use ecgkit::delineate::{detect_r_peaks, DelineationConfig};
use ecgkit::domain::{FeatureMode, RhythmLabel};
use ecgkit::pipeline::{extract_record, PipelineConfig};
use ecgkit::preprocess::pad_to_multiple;
use ecgkit::stats::EntropyParams;
use ecgkit::synthgen::{generate, RhythmScript};
use ecgkit::wavelet::{band_range, relative_wavelet_energy, swt, WaveletName, WaveletSpec, FEATURE_LEVELS};

fn main() -> ecgkit::Result<()> {
    let (record, _) = generate(&RhythmScript::for_class(RhythmLabel::Af, 5))?;
    let spec = WaveletSpec::new(WaveletName::Sym7, 7);
    let padded = pad_to_multiple(&record.samples, spec.block())?;
    let decomp = swt(&padded, &spec, record.fs_hz)?;

    println!("sym7, 7 levels, fs {} Hz", record.fs_hz);
    for level in FEATURE_LEVELS {
        let (lo, hi) = band_range(level, record.fs_hz)?;
        let rwe = relative_wavelet_energy(&decomp, level)?;
        println!("D{level}: {lo:>6.2}-{hi:>6.2} Hz  RWE {rwe:.4}");
    }

    // the full 66-vector via the pipeline
    let config = PipelineConfig::new(FeatureMode::Wavelet66);
    let (row, _flags) = extract_record(&record, &config)?;
    println!("wavelet66 vector: {} features, first HRV block:", row.features.values.len());
    for (name, value) in row.features.names().iter().zip(&row.features.values).take(16) {
        println!("  {name:<16} {value:>12.4}");
    }

    // direct use of the lower-level pieces
    let clean = ecgkit::pipeline::preprocess_record(&record, &config)?;
    let peaks = detect_r_peaks(&clean, &DelineationConfig::default())?;
    let params = EntropyParams::default();
    let (fv, flags) = ecgkit::features::extract_wavelet66(&clean, &peaks, &spec, &params)?;
    println!("low-level extraction agrees: {}", fv.values.len() == 66 && flags.is_empty());
    Ok(())
}
