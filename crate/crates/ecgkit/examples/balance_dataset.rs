//! Rebalance a skewed feature dataset with SMOTE oversampling and random
//! undersampling.

use ecgkit::balance::{balance, BalanceConfig};
use ecgkit::domain::{Dataset, DatasetRow, FeatureMode, FeatureVector, RhythmLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ecgkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let counts = [120usize, 40, 15, 80, 60, 33, 12, 25, 8];
    let mut dataset = Dataset::new(FeatureMode::Time48);
    for (ci, &n) in counts.iter().enumerate() {
        let label = RhythmLabel::ALL[ci];
        for i in 0..n {
            let values: Vec<f64> = (0..48).map(|_| rng.gen_range(-1.0..1.0) + ci as f64).collect();
            dataset.push(DatasetRow {
                id: format!("{label}-{i}"),
                features: FeatureVector::new(FeatureMode::Time48, values)?,
                label,
            })?;
        }
    }

    println!("before: {:?}", dataset.class_counts());
    let config = BalanceConfig { target_per_class: 50, smote_k: 5, seed: 42 };
    let balanced = balance(&dataset, &config)?;
    println!("after:  {:?}", balanced.class_counts());
    let synthetic = balanced.rows.iter().filter(|r| r.id.contains("-smote-")).count();
    println!("synthetic rows: {synthetic}, total {}", balanced.rows.len());
    Ok(())
}
