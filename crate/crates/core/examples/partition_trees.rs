//! Split one class into subclasses with each partition strategy, then
//! partition a whole dataset and print the audit CSV.
//!
//! ```bash
//! cargo run --example partition_trees
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wssda::dataset::{generate_synthetic, SynthSpec};
use wssda::partition::{partition_class, partition_dataset, Strategy, TreeParams};

fn main() -> wssda::Result<()> {
    let ds = generate_synthetic(&SynthSpec {
        class_count: 3,
        subclasses_per_class: 4,
        samples_per_subclass: 5,
        dim: 8,
        subclass_mean_spread: 3.0,
        seed: 7,
        ..SynthSpec::default()
    })?;
    let members = &ds.class_members()[0];
    let points = ds.samples().select_rows(members);
    let truth: Vec<usize> = members.iter().map(|&i| ds.subclass_labels().unwrap()[i]).collect();
    println!("class 0 ground truth: {truth:?}");

    let params = TreeParams::new(4);
    for strategy in Strategy::ALL_TREES {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let part = partition_class(&points, &params, strategy, &mut rng)?;
        let mut label = vec![0; points.nrows()];
        for (j, s) in part.subsets.iter().enumerate() {
            for &i in s {
                label[i] = j;
            }
        }
        println!("{strategy:>7}: depth {} sizes {:?} labels {label:?}", part.depth, part.subsets.iter().map(Vec::len).collect::<Vec<_>>());
    }

    let part = partition_dataset(&ds, &TreeParams::new(2).with_seed(1), Strategy::PcaTree)?;
    println!("subclass counts per class: {:?}", part.counts());
    for line in part.to_csv().lines().take(6) {
        println!("{line}");
    }
    Ok(())
}
