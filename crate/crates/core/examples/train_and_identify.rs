//! Train extractors on gallery splits and sweep identification error against
//! the number of features, for one and two subclasses per class.
//!
//! ```bash
//! cargo run --release --example train_and_identify
//! ```

use wssda::dataset::{generate_synthetic, SplitSpec, SynthSpec};
use wssda::eval::identification_sweep;
use wssda::extractor::{train, TrainConfig};
use wssda::partition::{partition_dataset, Strategy, TreeParams};

fn main() -> wssda::Result<()> {
    let ds = generate_synthetic(&SynthSpec {
        class_count: 20,
        subclasses_per_class: 2,
        samples_per_subclass: 10,
        dim: 50,
        class_spread: 0.3,
        subclass_mean_spread: 12.0,
        within_scale: (0.1, 1.0),
        seed: 3,
    })?;
    let split = SplitSpec::first_per_class(&ds, 10)?;
    let gallery = ds.subset(&split.gallery)?;
    let d_values = [2, 5, 10, 20, 40];

    println!("{:>4} {:>10} {:>10}", "d", "h=1", "h=2");
    let mut curves = Vec::new();
    for h in [1, 2] {
        let report = identification_sweep(&ds, std::slice::from_ref(&split), &d_values, |_, _, d_max| {
            let part = partition_dataset(&gallery, &TreeParams::new(h), Strategy::KMeans)?;
            train(&gallery, &part, &TrainConfig::with_features(d_max))
        })?;
        curves.push(report.curve);
    }
    for (a, b) in curves[0].iter().zip(&curves[1]) {
        println!("{:>4} {:>10.4} {:>10.4}", a.0, a.1, b.1);
    }
    Ok(())
}
