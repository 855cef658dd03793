//! Generate a heteroscedastic synthetic dataset with ground-truth subclasses,
//! write it as CSV and read it back.
//!
//! ```bash
//! cargo run --example synthetic_dataset
//! ```

use wssda::dataset::{generate_synthetic, load_csv, CsvLayout, SynthSpec};

fn main() -> wssda::Result<()> {
    let spec = SynthSpec {
        class_count: 4,
        subclasses_per_class: 3,
        samples_per_subclass: 4,
        dim: 6,
        seed: 42,
        ..SynthSpec::default()
    };
    let ds = generate_synthetic(&spec)?;
    println!("{} samples, {} features, {} classes", ds.len(), ds.dim(), ds.class_count());
    println!("class sizes: {:?}", ds.class_sizes());
    println!("subclass labels of class 0: {:?}", &ds.subclass_labels().unwrap()[..12]);

    let dir = tempfile::tempdir().map_err(|e| wssda::Error::Dataset(e.to_string()))?;
    let path = dir.path().join("synthetic.csv");
    ds.save_csv(&path)?;
    let back = load_csv(&path, CsvLayout::WithSubclass)?;
    println!("round trip identical: {}", back == ds);
    println!("first row: {}", ds.to_csv().lines().next().unwrap());
    Ok(())
}
