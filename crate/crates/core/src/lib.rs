//! Whole-space subclass discriminant analysis (WSSDA).
//!
//! Each class is split into subclasses with a spatial partition tree, the
//! within-subclass scatter matrix is eigendecomposed over the *whole* space
//! (range and null space), its eigenspectrum is regularized with a 1/f model
//! fitted through the leading eigenvalue and a median pivot, and the training
//! data are whitened with the resulting weights. A second eigendecomposition
//! of the whitened total-subclass scatter gives the low-dimensional extractor
//! `U`, and features are `z = Uᵀx`.
//!
//! The crate is organised bottom-up:
//!
//! - [`dataset`]: CSV / PGM ingestion, synthetic heteroscedastic data, splits.
//! - [`partition`]: k-d, random projection, PCA and k-means subclass partitions.
//! - [`scatter`]: within-class, within-subclass, between- and total-subclass scatter.
//! - [`spectrum`]: symmetric eigendecomposition, pivot, 1/f model, weights.
//! - [`extractor`]: the training pipeline, feature extraction, model files.
//! - [`eval`]: cosine 1-NN identification sweeps, ROC / EER verification.
//! - [`cli`]: the `wssda` command line (synth, partition, train, eval-id, eval-verify).
//!
//! ```
//! use wssda::dataset::{generate_synthetic, SynthSpec};
//! use wssda::extractor::{train, TrainConfig};
//! use wssda::partition::{partition_dataset, Strategy, TreeParams};
//!
//! let ds = generate_synthetic(&SynthSpec {
//!     class_count: 4,
//!     subclasses_per_class: 2,
//!     samples_per_subclass: 4,
//!     dim: 12,
//!     ..SynthSpec::default()
//! })
//! .unwrap();
//! let part = partition_dataset(&ds, &TreeParams::new(2), Strategy::KMeans).unwrap();
//! let fx = train(&ds, &part, &TrainConfig::with_features(3)).unwrap();
//! let z = fx.extract(ds.sample(0).as_slice()).unwrap();
//! assert_eq!(z.len(), 3);
//! ```

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod extractor;
pub mod partition;
pub mod scatter;
pub mod spectrum;
mod util;

pub use error::{Error, Result};
