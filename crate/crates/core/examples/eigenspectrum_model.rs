//! Within-subclass scatter, its eigenspectrum, the pivot and the 1/f model
//! that replaces the unreliable and null parts of the spectrum.
//!
//! ```bash
//! cargo run --example eigenspectrum_model
//! ```

use wssda::dataset::{generate_synthetic, SynthSpec};
use wssda::partition::{partition_dataset, Strategy, TreeParams};
use wssda::scatter::within_subclass_scatter;
use wssda::spectrum::{eig_symmetric_full, find_pivot, fit_model, SpectrumModel};

fn main() -> wssda::Result<()> {
    // 40 samples in 20 subclasses span at most 20 of 40 dimensions
    let ds = generate_synthetic(&SynthSpec {
        class_count: 10,
        samples_per_subclass: 2,
        dim: 40,
        seed: 5,
        ..SynthSpec::default()
    })?;
    let part = partition_dataset(&ds, &TreeParams::new(2), Strategy::KMeans)?;
    let sws = within_subclass_scatter(&ds, &part)?;
    let es = eig_symmetric_full(&sws.matrix)?;
    println!("dimension {}, rank {} (bound {})", es.dim(), es.rank, sws.rank_bound);

    let pivot = find_pivot(&es, 1.0)?;
    let (alpha, beta) = fit_model(&es, pivot.m)?;
    println!("pivot m = {}, alpha = {alpha:.4e}, beta = {beta:.4}", pivot.m);

    let reg = SpectrumModel::fit(&es, 1.0, false)?;
    let trunc = SpectrumModel::truncated(&es);
    println!("{:>3} {:>12} {:>12} {:>10} {:>10}", "k", "lambda", "lambda_reg", "weight", "truncated");
    let mut rows = vec![1, 2, pivot.m - 1, pivot.m, pivot.m + 1, es.rank, es.rank + 1, es.dim()];
    rows.retain(|&k| (1..=es.dim()).contains(&k));
    rows.dedup();
    for k in rows {
        println!(
            "{k:>3} {:>12.4e} {:>12.4e} {:>10.3} {:>10.3}",
            es.lambda(k),
            reg.lambda_reg[k - 1],
            reg.weights[k - 1],
            trunc.weights[k - 1]
        );
    }
    Ok(())
}
