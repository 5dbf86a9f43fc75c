//! Classify a stream of records one at a time, emitting CSV lines and
//! never stopping on a bad record.

use ecgkit::classify::{train_forest, ForestParams};
use ecgkit::domain::{EcgRecord, FeatureMode};
use ecgkit::error::Error;
use ecgkit::pipeline::{extract_dataset, stream_classify, PipelineConfig};
use ecgkit::synthgen::build_corpus;

fn main() -> ecgkit::Result<()> {
    let config = PipelineConfig::new(FeatureMode::Time48);
    let corpus = build_corpus(15, 2)?;
    let records: Vec<_> = corpus.into_iter().map(|sr| sr.record).collect();
    let dataset = extract_dataset(&records, &config)?;
    let model = train_forest(&dataset, &ForestParams { n_trees: 60, ..Default::default() })?;

    // a fresh stream: some good records, one flat line, one unreadable
    let incoming = build_corpus(2, 99)?;
    let mut stream: Vec<ecgkit::Result<EcgRecord>> = incoming
        .into_iter()
        .take(6)
        .map(|sr| Ok(sr.record))
        .collect();
    stream.insert(3, Ok(EcgRecord::new("flatline".to_string(), 500.0, vec![0.0; 5000])));
    stream.insert(5, Err(Error::MissingFile("no/such/record.rec".into())));

    let mut out = Vec::new();
    let entries = stream_classify(&model, stream.into_iter(), &config, &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    let errors = entries.iter().filter(|e| e.error.is_some()).count();
    println!("# {} records, {} errors, mean latency {:.1} ms",
        entries.len(),
        errors,
        entries.iter().map(|e| e.latency_ms).sum::<f64>() / entries.len() as f64
    );
    Ok(())
}
