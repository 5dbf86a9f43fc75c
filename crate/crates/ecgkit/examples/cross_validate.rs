//! Stratified 10-fold cross-validation of both feature pipelines on a
//! synthetic corpus, reported side by side.

use ecgkit::classify::ForestParams;
use ecgkit::domain::{FeatureMode, RhythmLabel};
use ecgkit::evaluate::kfold_crossval;
use ecgkit::pipeline::{extract_dataset, PipelineConfig};
use ecgkit::synthgen::build_corpus;

fn main() -> ecgkit::Result<()> {
    let corpus = build_corpus(30, 13)?;
    let records: Vec<_> = corpus.into_iter().map(|sr| sr.record).collect();
    let params = ForestParams { n_trees: 100, ..ForestParams::default() };

    for mode in [FeatureMode::Time48, FeatureMode::Wavelet66] {
        let config = PipelineConfig::new(mode);
        let dataset = extract_dataset(&records, &config)?;
        let report = kfold_crossval(&dataset, 10, &params, 42)?;
        println!(
            "{:<10} acc {:>6.2}%  se {:>6.2}%  +p {:>6.2}%  f1 {:>6.2}%",
            mode.as_str(),
            report.overall.acc,
            report.overall.se,
            report.overall.ppv,
            report.overall.f1
        );
        for (label, m) in RhythmLabel::ALL.iter().zip(&report.per_class) {
            println!("  {:<6} f1 {:>6.2}%", label.abbrev(), m.f1);
        }
    }
    Ok(())
}
