//! Train a random forest on a small synthetic corpus, save it, reload it,
//! and predict.

use ecgkit::classify::{load_model, predict, save_model, train_forest, ForestParams};
use ecgkit::domain::FeatureMode;
use ecgkit::pipeline::{extract_dataset, PipelineConfig};
use ecgkit::synthgen::build_corpus;

fn main() -> ecgkit::Result<()> {
    let corpus = build_corpus(20, 1)?;
    let records: Vec<_> = corpus.into_iter().map(|sr| sr.record).collect();
    let config = PipelineConfig::new(FeatureMode::Time48);
    let dataset = extract_dataset(&records, &config)?;

    let params = ForestParams { n_trees: 100, ..ForestParams::default() };
    let model = train_forest(&dataset, &params)?;
    println!("out-of-bag accuracy: {:.4}", model.oob_accuracy().unwrap());

    let dir = std::env::temp_dir().join("ecgkit_train_forest_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.json");
    save_model(&model, &path)?;
    let reloaded = load_model(&path)?;

    let row = &dataset.rows[0];
    let (label, probs) = predict(&reloaded, &row.features)?;
    println!(
        "{}: truth {} predicted {} (p={:.2})",
        row.id,
        row.label,
        label,
        probs[label.index()]
    );
    Ok(())
}
