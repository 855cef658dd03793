//! Class information that lives only in the null space of the within-subclass
//! scatter is kept by the regularized spectrum and lost by truncation.
//!
//! ```bash
//! cargo run --example null_space
//! ```

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wssda::dataset::{LabeledDataset, SplitSpec};
use wssda::eval::identification_sweep;
use wssda::extractor::{train, TrainConfig};
use wssda::partition::{partition_dataset, Strategy, TreeParams};
use wssda::spectrum::SpectrumMode;

fn main() -> wssda::Result<()> {
    let (classes, per_class, dim, noise_dims) = (10, 8, 60, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut x = DMatrix::zeros(classes * per_class, dim);
    let mut labels = Vec::new();
    for c in 0..classes {
        // class means vary only outside the noisy coordinates
        let center: Vec<f64> = (0..dim).map(|k| if k < noise_dims { 0.0 } else { StandardNormal.sample(&mut rng) }).collect();
        for s in 0..per_class {
            for k in 0..dim {
                let noise: f64 = if k < noise_dims { StandardNormal.sample(&mut rng) } else { 0.0 };
                x[(c * per_class + s, k)] = center[k] + noise;
            }
            labels.push(c);
        }
    }
    let ds = LabeledDataset::new(x, labels, None)?;
    let split = SplitSpec::first_per_class(&ds, 3)?;
    let gallery = ds.subset(&split.gallery)?;
    let part = partition_dataset(&gallery, &TreeParams::new(2), Strategy::KMeans)?;

    for mode in [SpectrumMode::Regularized, SpectrumMode::TruncatedBaseline] {
        let cfg = TrainConfig { mode, ..TrainConfig::with_features(4) };
        let report = identification_sweep(&ds, std::slice::from_ref(&split), &[1, 2, 4], |_, _, _| train(&gallery, &part, &cfg))?;
        let errors: Vec<String> = report.curve.iter().map(|(d, e)| format!("d={d}: {e:.3}")).collect();
        println!("{:>11}: {}", mode.as_str(), errors.join("  "));
    }
    Ok(())
}
