//! Scatter matrices with equal class and subclass priors.
//!
//! With `C` classes, class `i` holding `n_i` samples split into `H_i`
//! subclasses of `G_ij` samples:
//!
//! - within-class: `S_w = 1/n Σ_i Σ_k (x_ik − μ_i)(x_ik − μ_i)ᵀ`
//! - within-subclass: `S_ws = Σ_i p_i Σ_j q_i/G_ij Σ_k (x_ijk − μ_ij)(x_ijk − μ_ij)ᵀ`
//! - between-subclass: `S_bs = Σ_i p_i/H_i Σ_j (μ_ij − μ)(μ_ij − μ)ᵀ`
//! - total-subclass: `S_ts = Σ_i p_i/n_i Σ_k (x_ik − μ)(x_ik − μ)ᵀ`
//!
//! where `p_i = 1/C`, `q_i = 1/H_i` and `μ` is the mean of the class means.
//! Every output is symmetrized as `(A + Aᵀ)/2`.

use nalgebra::{DMatrix, DVector, RowDVector, SymmetricEigen};

use crate::dataset::LabeledDataset;
use crate::error::Result;
use crate::partition::SubclassPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterKind {
    WithinClass,
    WithinSubclass,
    BetweenSubclass,
    TotalSubclass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterMatrix {
    pub matrix: DMatrix<f64>,
    pub kind: ScatterKind,
    /// Upper bound on the rank implied by the sample counts.
    pub rank_bound: usize,
}

impl ScatterMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of eigenvalues above `λ_max · 1e-12`.
    pub fn computed_rank(&self) -> usize {
        let eig = SymmetricEigen::new(self.matrix.clone()).eigenvalues;
        let max = eig.max();
        if max <= 0.0 {
            return 0;
        }
        eig.iter().filter(|&&v| v > max * 1e-12).count()
    }
}

/// Equal priors `p_i = 1/C` and `q_i = 1/H_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Priors {
    pub class_count: usize,
}

impl Priors {
    pub fn class(&self) -> f64 {
        1.0 / self.class_count as f64
    }

    pub fn subclass(&self, subclass_count: usize) -> f64 {
        1.0 / subclass_count as f64
    }
}

/// Adds `weight · Σ_k (r_k − mean)(r_k − mean)ᵀ` over the selected rows.
fn accumulate(acc: &mut DMatrix<f64>, samples: &DMatrix<f64>, rows: &[usize], mean: &RowDVector<f64>, weight: f64) {
    let mut dev = samples.select_rows(rows);
    for mut r in dev.row_iter_mut() {
        r -= mean;
    }
    acc.gemm_tr(weight, &dev, &dev, 1.0);
}

fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    m += t;
    m *= 0.5;
    m
}

fn row_mean(samples: &DMatrix<f64>, rows: &[usize]) -> RowDVector<f64> {
    samples.select_rows(rows).row_mean()
}

/// `S_w` of a dataset.
pub fn within_class_scatter(ds: &LabeledDataset) -> ScatterMatrix {
    let x = ds.samples();
    let l = ds.dim();
    let n = ds.len();
    let mut acc = DMatrix::zeros(l, l);
    // same weight expression as the within-subclass path so that h = 1 on
    // balanced data reproduces S_w bit for bit
    let weight = 1.0 / n as f64;
    for members in ds.class_members() {
        accumulate(&mut acc, x, &members, &row_mean(x, &members), weight);
    }
    ScatterMatrix {
        matrix: symmetrize(acc),
        kind: ScatterKind::WithinClass,
        rank_bound: l.min(n - ds.class_count()),
    }
}

/// `S_ws` of a dataset under a subclass partition.
pub fn within_subclass_scatter(ds: &LabeledDataset, part: &SubclassPartition) -> Result<ScatterMatrix> {
    part.validate(ds)?;
    Ok(within_subclass_scatter_of(ds.samples(), part))
}

/// `S_ws` of arbitrary row vectors (e.g. whitened data) grouped by `part`.
/// The partition must already be validated against the rows.
pub fn within_subclass_scatter_of(samples: &DMatrix<f64>, part: &SubclassPartition) -> ScatterMatrix {
    let l = samples.ncols();
    let c = part.class_count();
    let mut acc = DMatrix::zeros(l, l);
    let mut bound = 0;
    for groups in part.groups() {
        let h = groups.len();
        for g in &groups {
            let weight = 1.0 / (c * h * g.len()) as f64;
            accumulate(&mut acc, samples, g, &row_mean(samples, g), weight);
            bound += g.len() - 1;
        }
    }
    ScatterMatrix {
        matrix: symmetrize(acc),
        kind: ScatterKind::WithinSubclass,
        rank_bound: l.min(bound),
    }
}

/// Subclass, class and global means of row vectors grouped by a partition.
/// The global mean is the mean of the class means, not the grand sample mean.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeans {
    pub subclass: Vec<Vec<DVector<f64>>>,
    pub class: Vec<DVector<f64>>,
    pub global: DVector<f64>,
}

pub fn group_means(samples: &DMatrix<f64>, part: &SubclassPartition) -> GroupMeans {
    let groups = part.groups();
    let subclass: Vec<Vec<DVector<f64>>> = groups
        .iter()
        .map(|gs| gs.iter().map(|g| row_mean(samples, g).transpose()).collect())
        .collect();
    let class: Vec<DVector<f64>> = groups
        .iter()
        .map(|gs| row_mean(samples, &gs.concat()).transpose())
        .collect();
    let mut global = DVector::zeros(samples.ncols());
    for m in &class {
        global += m;
    }
    global /= class.len() as f64;
    GroupMeans { subclass, class, global }
}

/// `S_bs = Σ_i (1/C)(1/H_i) Σ_j (μ_ij − μ)(μ_ij − μ)ᵀ` from subclass means.
pub fn between_subclass_scatter(subclass_means: &[Vec<DVector<f64>>], global_mean: &DVector<f64>) -> ScatterMatrix {
    let l = global_mean.len();
    let c = subclass_means.len();
    let mut acc = DMatrix::zeros(l, l);
    let mut total = 0;
    for means in subclass_means {
        let weight = 1.0 / (c * means.len()) as f64;
        for m in means {
            let dev = m - global_mean;
            acc.ger(weight, &dev, &dev, 1.0);
        }
        total += means.len();
    }
    ScatterMatrix {
        matrix: symmetrize(acc),
        kind: ScatterKind::BetweenSubclass,
        rank_bound: l.min(total.saturating_sub(1)),
    }
}

/// `S_ts = Σ_i (1/C)(1/n_i) Σ_k (x_ik − μ)(x_ik − μ)ᵀ` about a given global mean.
pub fn total_subclass_scatter(
    samples: &DMatrix<f64>,
    class_members: &[Vec<usize>],
    global_mean: &DVector<f64>,
) -> ScatterMatrix {
    let l = samples.ncols();
    let c = class_members.len();
    let mean = global_mean.transpose();
    let mut acc = DMatrix::zeros(l, l);
    let mut n = 0;
    for members in class_members {
        let weight = 1.0 / (c * members.len()) as f64;
        accumulate(&mut acc, samples, members, &mean, weight);
        n += members.len();
    }
    ScatterMatrix {
        matrix: symmetrize(acc),
        kind: ScatterKind::TotalSubclass,
        rank_bound: l.min(n.saturating_sub(1)),
    }
}
