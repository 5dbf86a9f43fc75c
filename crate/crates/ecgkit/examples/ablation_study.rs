//! Two ablations: which feature blocks carry the signal, and which mother
//! wavelet works best.

use ecgkit::classify::ForestParams;
use ecgkit::delineate::{detect_r_peaks, DelineationConfig};
use ecgkit::domain::FeatureMode;
use ecgkit::evaluate::{ablation_feature_subsets, ablation_wavelets};
use ecgkit::pipeline::{extract_dataset, preprocess_record, PipelineConfig};
use ecgkit::stats::EntropyParams;
use ecgkit::synthgen::build_corpus;
use ecgkit::wavelet::WaveletName;

fn main() -> ecgkit::Result<()> {
    let corpus = build_corpus(20, 5)?;
    let records: Vec<_> = corpus.into_iter().map(|sr| sr.record).collect();
    let params = ForestParams { n_trees: 80, ..ForestParams::default() };

    let config = PipelineConfig::new(FeatureMode::Time48);
    let dataset = extract_dataset(&records, &config)?;
    let subsets: Vec<String> = ["HRV", "P", "PRI", "QRS", "HRV+QRS", "ALL"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    println!("feature subsets (time48):");
    for (name, report) in ablation_feature_subsets(&dataset, &subsets, 5, &params, 42)? {
        println!("  {:<8} f1 {:>6.2}%", name, report.overall.f1);
    }

    let dconfig = DelineationConfig::default();
    let mut prepared = Vec::new();
    for record in &records {
        let clean = preprocess_record(record, &config)?;
        let peaks = detect_r_peaks(&clean, &dconfig)?;
        prepared.push((clean, peaks));
    }
    println!("mother wavelets (wavelet66):");
    let table = ablation_wavelets(
        &prepared,
        &WaveletName::ALL,
        5,
        &params,
        &EntropyParams::default(),
        42,
    )?;
    for (wavelet, report) in table {
        println!("  {:<8} f1 {:>6.2}%", wavelet.to_string(), report.overall.f1);
    }
    Ok(())
}
