//! Pairwise verification: cosine similarity scores, per-fold ROC and equal
//! error rate, averaged over ten folds.
//!
//! ```bash
//! cargo run --release --example verification_roc
//! ```

use wssda::dataset::{generate_synthetic, SynthSpec};
use wssda::eval::{kfold_pairwise, sample_pairs};
use wssda::extractor::{train, TrainConfig};
use wssda::partition::{partition_dataset, Strategy, TreeParams};

fn main() -> wssda::Result<()> {
    let spec = SynthSpec {
        class_count: 30,
        samples_per_subclass: 6,
        dim: 40,
        class_spread: 0.5,
        within_scale: (0.3, 1.0),
        ..SynthSpec::default()
    };
    let train_set = generate_synthetic(&spec)?;
    let part = partition_dataset(&train_set, &TreeParams::new(2), Strategy::RpTree)?;
    let fx = train(&train_set, &part, &TrainConfig::with_features(20))?;

    // unseen subjects from the same generator
    let test_set = generate_synthetic(&SynthSpec { seed: 99, ..spec })?;
    let z = fx.extract_rows(test_set.samples())?;
    let row = |i: usize| z.row(i).iter().copied().collect::<Vec<f64>>();
    let pairs: Vec<_> = sample_pairs(&test_set, 2000, 1)?.iter().map(|p| (row(p.a), row(p.b), p.same)).collect();

    let report = kfold_pairwise(&pairs, 10, 101)?;
    for (k, eer) in report.fold_eer.iter().enumerate() {
        println!("fold {k}: EER {:.2}%", eer * 100.0);
    }
    println!("mean EER {:.2}% +- {:.2}", report.mean_eer * 100.0, report.std_eer * 100.0);
    for far in [0.001, 0.01, 0.1] {
        let tar = report.folds.iter().map(|r| r.tar_at(far)).sum::<f64>() / report.folds.len() as f64;
        println!("TAR at FAR {far}: {tar:.3}");
    }
    Ok(())
}
