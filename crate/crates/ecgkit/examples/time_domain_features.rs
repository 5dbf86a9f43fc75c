//! Extract the 48 HRV + morphological time-domain features from one record.

use ecgkit::domain::RhythmLabel;
use ecgkit::pipeline::{extract_record, PipelineConfig};
use ecgkit::domain::FeatureMode;
use ecgkit::synthgen::{generate, RhythmScript};

fn main() -> ecgkit::Result<()> {
    let (record, _) = generate(&RhythmScript::for_class(RhythmLabel::Avb1, 11))?;
    let config = PipelineConfig::new(FeatureMode::Time48);
    let (row, flags) = extract_record(&record, &config)?;
    let names = row.features.names();
    for (name, value) in names.iter().zip(row.features.values.iter()) {
        println!("{name:<18} {value:>12.4}");
    }
    println!("flags: {flags:?}");
    println!("(1AVB: note PRI_mean around 240 ms)");
    Ok(())
}
