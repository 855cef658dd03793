//! Load a directory of PGM images (one subdirectory per class) and train on
//! the flattened pixels.
//!
//! ```bash
//! cargo run --example pgm_ingest [image-root]
//! ```
//!
//! Without an argument a small set of 8×8 images is written to a temporary
//! directory first.

use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wssda::dataset::{encode_pgm, load_pgm_dir};
use wssda::extractor::{train, TrainConfig};
use wssda::partition::{partition_dataset, Strategy, TreeParams};

fn main() -> wssda::Result<()> {
    let _tmp;
    let root = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            _tmp = tempfile::tempdir().map_err(|e| wssda::Error::Dataset(e.to_string()))?;
            write_demo_images(_tmp.path())?;
            _tmp.path().to_path_buf()
        }
    };
    let ds = load_pgm_dir(&root)?;
    println!("{} images of {} pixels in {} classes", ds.len(), ds.dim(), ds.class_count());

    let part = partition_dataset(&ds, &TreeParams::new(2), Strategy::KdTree)?;
    let fx = train(&ds, &part, &TrainConfig::with_features(5))?;
    let z = fx.extract(ds.sample(0).as_slice())?;
    println!("features of the first image: {:.3?}", z.as_slice());
    Ok(())
}

/// Three "subjects", each a bright square at a subject-specific spot, under
/// two lighting levels.
fn write_demo_images(root: &std::path::Path) -> wssda::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for subject in 0..3 {
        let dir = root.join(format!("s{subject}"));
        fs::create_dir_all(&dir).map_err(|e| wssda::Error::Dataset(e.to_string()))?;
        for shot in 0..6 {
            let light = if shot % 2 == 0 { 0.3 } else { 0.8 };
            let pixels: Vec<f64> = (0..64)
                .map(|i| {
                    let (r, c) = (i / 8, i % 8);
                    let on = (r / 3 == subject) && (c / 3 == (subject + 1) % 3);
                    (if on { light } else { 0.1 }) + 0.05 * rng.random::<f64>()
                })
                .collect();
            fs::write(dir.join(format!("{shot}.pgm")), encode_pgm(8, 8, &pixels)).map_err(|e| wssda::Error::Dataset(e.to_string()))?;
        }
    }
    Ok(())
}
