//! Save a trained extractor, load it back and check that it produces the same
//! features; then take the leading columns for a smaller feature count.
//!
//! ```bash
//! cargo run --example model_roundtrip
//! ```

use wssda::dataset::{generate_synthetic, SynthSpec};
use wssda::extractor::{train, FeatureExtractor, TrainConfig};
use wssda::partition::{partition_dataset, Strategy, TreeParams};

fn main() -> wssda::Result<()> {
    let ds = generate_synthetic(&SynthSpec::default())?;
    let part = partition_dataset(&ds, &TreeParams::new(2), Strategy::KMeans)?;
    let fx = train(&ds, &part, &TrainConfig::with_features(8))?;

    let dir = tempfile::tempdir().map_err(|e| wssda::Error::Dataset(e.to_string()))?;
    let path = dir.path().join("model.wssda");
    fx.save(&path)?;
    let size = std::fs::metadata(&path).map_err(|e| wssda::Error::Dataset(e.to_string()))?.len();
    let back = FeatureExtractor::load(&path)?;
    println!("{} bytes, {}x{} projection, identical: {}", size, back.dim(), back.features(), back == fx);
    println!("metadata: {:?}", back.meta());

    let x = ds.sample(0);
    let full = back.extract(x.as_slice())?;
    let short = back.leading(3)?.extract(x.as_slice())?;
    println!("8 features: {:.4?}", full.as_slice());
    println!("3 features: {:.4?}", short.as_slice());
    Ok(())
}
