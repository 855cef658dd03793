//! Subclass partitioning of each class with spatial partition trees.
//!
//! Binary-split trees (k-d, random projection, PCA) are cut at depth
//! `log2(h)` so that every class receives exactly `h` leaves; each split sends
//! the lower half of the node (by projection, ties broken by index) left, so
//! leaf sizes within a class differ by at most one. The k-means variant is a
//! flat Lloyd clustering with `k = h`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::util::substream;

pub const DEFAULT_MAX_DEPTH: usize = 8;
const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    KdTree,
    RpTree,
    PcaTree,
    KMeans,
    /// Subclass labels supplied with the dataset.
    Provided,
}

impl Strategy {
    pub const ALL_TREES: [Strategy; 4] = [Strategy::KdTree, Strategy::RpTree, Strategy::PcaTree, Strategy::KMeans];

    pub fn is_binary_tree(self) -> bool {
        matches!(self, Strategy::KdTree | Strategy::RpTree | Strategy::PcaTree)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::KdTree => "kd",
            Strategy::RpTree => "rp",
            Strategy::PcaTree => "pca",
            Strategy::KMeans => "kmeans",
            Strategy::Provided => "provided",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Strategy::KdTree => 0,
            Strategy::RpTree => 1,
            Strategy::PcaTree => 2,
            Strategy::KMeans => 3,
            Strategy::Provided => 4,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Strategy::KdTree,
            1 => Strategy::RpTree,
            2 => Strategy::PcaTree,
            3 => Strategy::KMeans,
            4 => Strategy::Provided,
            _ => return None,
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "kd" | "kdtree" => Strategy::KdTree,
            "rp" | "rptree" => Strategy::RpTree,
            "pca" | "pcatree" => Strategy::PcaTree,
            "kmeans" | "nn" => Strategy::KMeans,
            "provided" => Strategy::Provided,
            other => return Err(Error::Config(format!("unknown partition strategy {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// Subclasses per class.
    pub h: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl TreeParams {
    pub fn new(h: usize) -> Self {
        Self {
            h,
            max_depth: DEFAULT_MAX_DEPTH,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, strategy: Strategy) -> Result<()> {
        if self.h == 0 {
            return Err(Error::Config("h must be at least 1".into()));
        }
        if strategy.is_binary_tree() {
            if !self.h.is_power_of_two() {
                return Err(Error::Config(format!("{strategy} tree needs h to be a power of two, got {}", self.h)));
            }
            if self.levels() > self.max_depth {
                return Err(Error::Config(format!(
                    "h = {} needs {} levels, above max_depth {}",
                    self.h,
                    self.levels(),
                    self.max_depth
                )));
            }
        }
        Ok(())
    }

    fn levels(&self) -> usize {
        self.h.trailing_zeros() as usize
    }
}

/// Subclasses of one class as row indices into that class's sample matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    pub subsets: Vec<Vec<usize>>,
    /// Set when the class had fewer than `h` samples and was split into singletons.
    pub deficient: bool,
    /// Tree levels used (1 for a flat clustering, 0 when nothing was split).
    pub depth: usize,
}

/// Splits rows `0..m` so that the lower `ceil(m/2)` projections (ties broken by
/// index) go left.
fn median_split(proj: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..proj.len()).collect();
    order.sort_by(|&a, &b| proj[a].total_cmp(&proj[b]).then(a.cmp(&b)));
    let right = order.split_off(proj.len().div_ceil(2));
    let mut left = order;
    left.sort_unstable();
    let mut right = right;
    right.sort_unstable();
    (left, right)
}

fn require_two(points: &DMatrix<f64>) -> Result<()> {
    if points.nrows() < 2 {
        return Err(Error::Contract(format!("split needs at least 2 points, got {}", points.nrows())));
    }
    Ok(())
}

/// k-d split on the coordinate of largest spread (max − min; lowest axis on ties).
pub fn split_kd(points: &DMatrix<f64>) -> Result<(Vec<usize>, Vec<usize>)> {
    require_two(points)?;
    let mut best_axis = 0;
    let mut best_spread = f64::NEG_INFINITY;
    for (axis, col) in points.column_iter().enumerate() {
        let spread = col.max() - col.min();
        if spread > best_spread {
            best_spread = spread;
            best_axis = axis;
        }
    }
    let proj: Vec<f64> = points.column(best_axis).iter().copied().collect();
    Ok(median_split(&proj))
}

/// Median split along a direction drawn uniformly from the unit sphere.
pub fn split_rp(points: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> Result<(Vec<usize>, Vec<usize>)> {
    require_two(points)?;
    let l = points.ncols();
    let dir = loop {
        let v = DVector::<f64>::from_fn(l, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 0.0 {
            break v / norm;
        }
    };
    let proj = points * dir;
    Ok(median_split(proj.as_slice()))
}

fn center_rows(points: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = points.row_mean();
    let mut centered = points.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    centered
}

/// Median split along the principal eigenvector of the node's covariance.
///
/// The eigenvector is obtained from the `m × m` Gram matrix of the centered
/// points, so the cost does not grow with `l²`. Its sign is fixed so that the
/// largest-magnitude component is positive. Identical points fall back to an
/// index-halves split.
pub fn split_pca(points: &DMatrix<f64>) -> Result<(Vec<usize>, Vec<usize>)> {
    require_two(points)?;
    let m = points.nrows();
    let centered = center_rows(points);
    let gram = &centered * centered.transpose();
    let eig = SymmetricEigen::new(gram);
    let (top, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("m >= 2");
    let scale: f64 = points.iter().map(|v| v * v).sum();
    if lambda.is_nan() || lambda <= 1e-24 * scale.max(f64::MIN_POSITIVE) {
        return Ok(median_split(&vec![0.0; m]));
    }
    let mut dir = centered.transpose() * eig.eigenvectors.column(top);
    dir /= dir.norm();
    let lead = dir.iamax();
    if dir[lead] < 0.0 {
        dir.neg_mut();
    }
    let proj = &centered * dir;
    Ok(median_split(proj.as_slice()))
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centroid: &DVector<f64>) -> f64 {
    points.row(i).iter().zip(centroid.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Lloyd k-means with seeded farthest-point initialization.
///
/// The first center is a uniformly drawn point; each further center is the
/// point farthest from its nearest chosen center. Iterates until the
/// assignment is a fixpoint or 100 iterations. An empty cluster takes the
/// point farthest from its own centroid among clusters with more than one
/// member. Clusters are returned ordered by their smallest member.
pub fn cluster_kmeans(points: &DMatrix<f64>, h: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    let m = points.nrows();
    if h == 0 || m < h {
        return Err(Error::Contract(format!("k-means needs 1 <= h <= m, got h = {h}, m = {m}")));
    }
    let row = |i: usize| -> DVector<f64> { points.row(i).transpose() };

    let mut centroids = vec![row(rng.random_range(0..m))];
    let mut nearest: Vec<f64> = (0..m).map(|i| sq_dist(points, i, &centroids[0])).collect();
    while centroids.len() < h {
        let mut far = 0;
        for i in 1..m {
            if nearest[i] > nearest[far] {
                far = i;
            }
        }
        let c = row(far);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &c));
        }
        centroids.push(c);
    }

    let mut assign = vec![usize::MAX; m];
    for _ in 0..KMEANS_MAX_ITER {
        let mut next: Vec<usize> = (0..m)
            .map(|i| {
                let mut best = 0;
                let mut best_d = sq_dist(points, i, &centroids[0]);
                for (k, c) in centroids.iter().enumerate().skip(1) {
                    let d = sq_dist(points, i, c);
                    if d < best_d {
                        best = k;
                        best_d = d;
                    }
                }
                best
            })
            .collect();

        let mut sizes = vec![0usize; h];
        for &a in &next {
            sizes[a] += 1;
        }
        while let Some(empty) = sizes.iter().position(|&s| s == 0) {
            let mut victim = None;
            let mut victim_d = f64::NEG_INFINITY;
            for i in 0..m {
                if sizes[next[i]] > 1 {
                    let d = sq_dist(points, i, &centroids[next[i]]);
                    if d > victim_d {
                        victim_d = d;
                        victim = Some(i);
                    }
                }
            }
            let v = victim.expect("m >= h leaves a cluster with two members");
            sizes[next[v]] -= 1;
            next[v] = empty;
            sizes[empty] = 1;
            centroids[empty] = row(v);
        }

        let converged = next == assign;
        assign = next;
        if converged {
            break;
        }
        for (k, c) in centroids.iter_mut().enumerate() {
            let mut sum = DVector::zeros(points.ncols());
            for i in (0..m).filter(|&i| assign[i] == k) {
                sum += points.row(i).transpose();
            }
            *c = sum / sizes[k] as f64;
        }
    }

    let mut clusters = vec![Vec::new(); h];
    for (i, &a) in assign.iter().enumerate() {
        clusters[a].push(i);
    }
    clusters.sort_by_key(|c| c[0]);
    Ok(clusters)
}

/// Partitions one class (`m × l` samples) into `params.h` subclasses.
///
/// With `m < h` the class is returned as `m` singletons and flagged deficient.
/// [`Strategy::Provided`] cannot be computed from points alone and is rejected.
pub fn partition_class(
    points: &DMatrix<f64>,
    params: &TreeParams,
    strategy: Strategy,
    rng: &mut ChaCha8Rng,
) -> Result<ClassPartition> {
    params.validate(strategy)?;
    let m = points.nrows();
    if m == 0 {
        return Err(Error::Contract("cannot partition an empty class".into()));
    }
    let h = params.h;
    if m < h {
        return Ok(ClassPartition {
            subsets: (0..m).map(|i| vec![i]).collect(),
            deficient: true,
            depth: 0,
        });
    }
    if h == 1 {
        return Ok(ClassPartition {
            subsets: vec![(0..m).collect()],
            deficient: false,
            depth: 0,
        });
    }
    match strategy {
        Strategy::KMeans => Ok(ClassPartition {
            subsets: cluster_kmeans(points, h, rng)?,
            deficient: false,
            depth: 1,
        }),
        Strategy::Provided => Err(Error::Config("provided subclasses come from dataset labels".into())),
        tree => {
            let mut leaves: Vec<Vec<usize>> = vec![(0..m).collect()];
            for _ in 0..params.levels() {
                let mut next = Vec::with_capacity(leaves.len() * 2);
                for node in leaves {
                    let sub = points.select_rows(&node);
                    let (l, r) = match tree {
                        Strategy::KdTree => split_kd(&sub)?,
                        Strategy::RpTree => split_rp(&sub, rng)?,
                        _ => split_pca(&sub)?,
                    };
                    next.push(l.into_iter().map(|k| node[k]).collect());
                    next.push(r.into_iter().map(|k| node[k]).collect());
                }
                leaves = next;
            }
            Ok(ClassPartition {
                subsets: leaves,
                deficient: false,
                depth: params.levels(),
            })
        }
    }
}

/// Per-sample `(class, subclass)` assignment for a whole dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubclassPartition {
    strategy: Strategy,
    h: usize,
    assignment: Vec<(usize, usize)>,
    counts: Vec<Vec<usize>>,
    deficient: Vec<usize>,
    depth: usize,
}

impl SubclassPartition {
    /// Builds a partition from explicit per-sample subclass ids (dense within
    /// each class). `h` records the requested subclass count.
    pub fn from_subclass_labels(
        ds: &LabeledDataset,
        subclass: &[usize],
        strategy: Strategy,
        h: usize,
    ) -> Result<Self> {
        if subclass.len() != ds.len() {
            return Err(Error::Dimension {
                expected: ds.len(),
                found: subclass.len(),
                context: Some("subclass assignment".into()),
            });
        }
        let mut counts = vec![Vec::new(); ds.class_count()];
        let mut assignment = Vec::with_capacity(ds.len());
        for (&c, &s) in ds.class_labels().iter().zip(subclass) {
            let g: &mut Vec<usize> = &mut counts[c];
            if g.len() <= s {
                g.resize(s + 1, 0);
            }
            g[s] += 1;
            assignment.push((c, s));
        }
        for (c, g) in counts.iter().enumerate() {
            if let Some(j) = g.iter().position(|&k| k == 0) {
                return Err(Error::Partition(format!("class {c}: subclass {j} has no samples")));
            }
        }
        Ok(Self {
            strategy,
            h,
            assignment,
            counts,
            deficient: Vec::new(),
            depth: 0,
        })
    }

    /// One subclass per class.
    pub fn whole_class(ds: &LabeledDataset) -> Self {
        Self::from_subclass_labels(ds, &vec![0; ds.len()], Strategy::Provided, 1).expect("single subclass is valid")
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Requested subclasses per class.
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn class_count(&self) -> usize {
        self.counts.len()
    }

    /// `H_i`, the number of subclasses actually formed in class `i`.
    pub fn subclass_count(&self, class: usize) -> usize {
        self.counts[class].len()
    }

    /// `G_ij` for every class `i` and subclass `j`.
    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn assignment(&self) -> &[(usize, usize)] {
        &self.assignment
    }

    pub fn deficient_classes(&self) -> &[usize] {
        &self.deficient
    }

    /// Deepest tree level used by any class.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Global sample indices grouped as `[class][subclass] -> indices`.
    pub fn groups(&self) -> Vec<Vec<Vec<usize>>> {
        let mut groups: Vec<Vec<Vec<usize>>> = self.counts.iter().map(|g| vec![Vec::new(); g.len()]).collect();
        for (i, &(c, s)) in self.assignment.iter().enumerate() {
            groups[c][s].push(i);
        }
        groups
    }

    /// Checks the partition refers to `ds`: same size, same class labels, no
    /// empty subclass.
    pub fn validate(&self, ds: &LabeledDataset) -> Result<()> {
        if self.assignment.len() != ds.len() || self.counts.len() != ds.class_count() {
            return Err(Error::Partition(format!(
                "partition covers {} samples / {} classes, dataset has {} / {}",
                self.assignment.len(),
                self.counts.len(),
                ds.len(),
                ds.class_count()
            )));
        }
        if let Some(i) = self.assignment.iter().zip(ds.class_labels()).position(|(a, &c)| a.0 != c) {
            return Err(Error::Partition(format!("sample {i} assigned to the wrong class")));
        }
        for (c, g) in self.counts.iter().enumerate() {
            if g.is_empty() || g.contains(&0) {
                return Err(Error::Partition(format!("class {c} has an empty subclass")));
            }
        }
        Ok(())
    }

    /// `sample,class,subclass` CSV with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,class,subclass\n");
        for (i, (c, s)) in self.assignment.iter().enumerate() {
            out.push_str(&format!("{i},{c},{s}\n"));
        }
        out
    }
}

/// Partitions every class of `ds`. Class `i` draws its randomness from its own
/// stream derived from `(params.seed, i)`.
pub fn partition_dataset(ds: &LabeledDataset, params: &TreeParams, strategy: Strategy) -> Result<SubclassPartition> {
    if strategy == Strategy::Provided {
        let labels = ds
            .subclass_labels()
            .ok_or_else(|| Error::Config("strategy 'provided' needs subclass labels in the dataset".into()))?;
        return SubclassPartition::from_subclass_labels(ds, labels, strategy, params.h);
    }
    params.validate(strategy)?;
    let mut subclass = vec![0usize; ds.len()];
    let mut deficient = Vec::new();
    let mut depth = 0;
    for (c, members) in ds.class_members().iter().enumerate() {
        let points = ds.samples().select_rows(members);
        let mut rng = substream(params.seed, "partition", c as u64);
        let part = partition_class(&points, params, strategy, &mut rng)?;
        if part.deficient {
            deficient.push(c);
        }
        depth = depth.max(part.depth);
        for (j, subset) in part.subsets.iter().enumerate() {
            for &k in subset {
                subclass[members[k]] = j;
            }
        }
    }
    let mut out = SubclassPartition::from_subclass_labels(ds, &subclass, strategy, params.h)?;
    out.deficient = deficient;
    out.depth = depth;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use super::Strategy;
    use rand::{Rng, SeedableRng};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn pts(rows: &[&[f64]]) -> DMatrix<f64> {
        let l = rows[0].len();
        DMatrix::from_row_iterator(rows.len(), l, rows.iter().flat_map(|r| r.iter().copied()))
    }

    #[test]
    fn kd_median_split_1d() {
        let p = pts(&[&[1.0], &[2.0], &[3.0], &[4.0]]);
        assert_eq!(split_kd(&p).unwrap(), (vec![0, 1], vec![2, 3]));
    }

    #[test]
    fn kd_picks_widest_axis() {
        let p = pts(&[&[0.0, 0.0], &[0.0, 10.0], &[1.0, 0.0], &[1.0, 10.0]]);
        // split on the second coordinate: the y = 0 points go left
        assert_eq!(split_kd(&p).unwrap(), (vec![0, 2], vec![1, 3]));
    }

    #[test]
    fn identical_points_split_by_index_halves() {
        let p = DMatrix::from_element(4, 3, 2.5);
        let halves = (vec![0, 1], vec![2, 3]);
        assert_eq!(split_kd(&p).unwrap(), halves);
        assert_eq!(split_pca(&p).unwrap(), halves);
        assert_eq!(split_rp(&p, &mut rng(1)).unwrap(), halves);
    }

    #[test]
    fn split_requires_two_points() {
        let p = DMatrix::from_element(1, 2, 0.0);
        assert!(split_kd(&p).is_err());
        assert!(split_pca(&p).is_err());
    }

    #[test]
    fn rp_is_deterministic_per_seed() {
        let p = DMatrix::from_fn(9, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 + i as f64 * 0.1);
        assert_eq!(split_rp(&p, &mut rng(3)).unwrap(), split_rp(&p, &mut rng(3)).unwrap());
    }

    #[test]
    fn rp_collinear_matches_line_median() {
        // points t·v on a line in shuffled order: any non-orthogonal direction
        // orders them like t (up to reversal)
        let v = [0.3, -1.2, 0.7];
        let ts = [4.0, -1.0, 2.5, 0.0, 7.0, 1.0];
        let p = DMatrix::from_fn(ts.len(), 3, |i, j| ts[i] * v[j]);
        let asc = median_split(&ts);
        let neg: Vec<f64> = ts.iter().map(|t| -t).collect();
        let desc = median_split(&neg);
        for seed in 0..20 {
            let got = split_rp(&p, &mut rng(seed)).unwrap();
            assert!(got == asc || got == desc, "seed {seed}: {got:?}");
        }
    }

    #[test]
    fn rp_two_points() {
        let p = pts(&[&[0.0, 1.0], &[3.0, -2.0]]);
        let (l, r) = split_rp(&p, &mut rng(9)).unwrap();
        assert_eq!((l.len(), r.len()), (1, 1));
    }

    #[test]
    fn pca_principal_axis_x() {
        let p = pts(&[&[0.0, 0.0], &[2.0, 0.0], &[10.0, 0.0], &[12.0, 0.0]]);
        assert_eq!(split_pca(&p).unwrap(), (vec![0, 1], vec![2, 3]));
    }

    #[test]
    fn pca_rank_one_diagonal() {
        let ts = [3.0, -2.0, 0.5, 5.0, 1.0, -4.0];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = DMatrix::from_fn(ts.len(), 2, |i, _| ts[i] * s);
        let expected = median_split(&ts);
        let flipped = median_split(&ts.map(|t| -t));
        let got = split_pca(&p).unwrap();
        assert!(got == expected || got == flipped);
    }

    #[test]
    fn pca_sign_invariance() {
        // mirrored data flips the principal eigenvector; the two halves are the same sets
        let p = DMatrix::from_fn(8, 3, |i, j| ((i * 5 + j * 11) % 7) as f64 - 3.0 + 0.01 * i as f64);
        let (l1, r1) = split_pca(&p).unwrap();
        let (l2, r2) = split_pca(&(-&p)).unwrap();
        let mut a = [l1, r1];
        let mut b = [l2, r2];
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    fn sse(points: &DMatrix<f64>, clusters: &[Vec<usize>]) -> f64 {
        clusters
            .iter()
            .map(|c| {
                let sub = points.select_rows(c);
                let mean = sub.row_mean();
                sub.row_iter().map(|r| (r - &mean).norm_squared()).sum::<f64>()
            })
            .sum()
    }

    #[test]
    fn kmeans_separates_blobs_like_brute_force() {
        let mut r = rng(5);
        let mut rows = Vec::new();
        for k in 0..10 {
            let off = if k % 2 == 0 { 0.0 } else { 20.0 };
            rows.push(vec![off + r.random::<f64>(), off + r.random::<f64>()]);
        }
        let p = DMatrix::from_fn(10, 2, |i, j| rows[i][j]);
        // brute force over all 2-clusterings (first point fixed in cluster 0)
        let mut best = (f64::INFINITY, 0u32);
        for mask in 0u32..(1 << 9) {
            let a: Vec<usize> = (0..10).filter(|&i| i > 0 && mask >> (i - 1) & 1 == 1).collect();
            let b: Vec<usize> = (0..10).filter(|i| !a.contains(i)).collect();
            if a.is_empty() {
                continue;
            }
            let e = sse(&p, &[a, b]);
            if e < best.0 {
                best = (e, mask);
            }
        }
        let optimal_b: Vec<usize> = (0..10).filter(|&i| !(i > 0 && best.1 >> (i - 1) & 1 == 1)).collect();
        assert_eq!(optimal_b, vec![0, 2, 4, 6, 8]);
        for seed in 0..5 {
            let got = cluster_kmeans(&p, 2, &mut rng(seed)).unwrap();
            assert_eq!(got, vec![vec![0, 2, 4, 6, 8], vec![1, 3, 5, 7, 9]]);
        }
    }

    #[test]
    fn kmeans_h_equals_m_gives_singletons() {
        let p = pts(&[&[0.0], &[1.0], &[1.0], &[5.0]]);
        let got = cluster_kmeans(&p, 4, &mut rng(0)).unwrap();
        assert_eq!(got, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn kmeans_deterministic() {
        let p = DMatrix::from_fn(30, 5, |i, j| ((i * 13 + j * 7) % 11) as f64);
        assert_eq!(
            cluster_kmeans(&p, 3, &mut rng(2)).unwrap(),
            cluster_kmeans(&p, 3, &mut rng(2)).unwrap()
        );
    }

    #[test]
    fn deficient_class_and_identity_case() {
        let one = DMatrix::from_element(1, 3, 1.0);
        for s in Strategy::ALL_TREES {
            let part = partition_class(&one, &TreeParams::new(2), s, &mut rng(0)).unwrap();
            assert_eq!(part.subsets, vec![vec![0]]);
            assert!(part.deficient);
        }
        let eight = DMatrix::from_fn(8, 2, |i, j| (i + j) as f64);
        for s in Strategy::ALL_TREES {
            let part = partition_class(&eight, &TreeParams::new(1), s, &mut rng(0)).unwrap();
            assert_eq!(part.subsets, vec![(0..8).collect::<Vec<_>>()]);
            let part = partition_class(&eight, &TreeParams::new(2), s, &mut rng(0)).unwrap();
            assert_eq!(part.subsets.len(), 2);
            assert_eq!(part.subsets.iter().map(Vec::len).sum::<usize>(), 8);
            assert!(part.subsets.iter().all(|s| !s.is_empty()));
        }
    }

    #[test]
    fn params_validation() {
        assert!(TreeParams::new(3).validate(Strategy::KdTree).is_err());
        assert!(TreeParams::new(3).validate(Strategy::KMeans).is_ok());
        assert!(TreeParams::new(512).validate(Strategy::RpTree).is_err());
        assert!(TreeParams::new(256).validate(Strategy::PcaTree).is_ok());
        assert!(TreeParams::new(0).validate(Strategy::KMeans).is_err());
    }

    #[test]
    fn provided_requires_labels() {
        let ds = LabeledDataset::new(DMatrix::zeros(2, 2), vec![0, 1], None).unwrap();
        assert!(matches!(
            partition_dataset(&ds, &TreeParams::new(2), Strategy::Provided),
            Err(Error::Config(_))
        ));
        let ds = LabeledDataset::new(DMatrix::zeros(3, 2), vec![0, 0, 1], Some(vec![0, 1, 0])).unwrap();
        let p = partition_dataset(&ds, &TreeParams::new(2), Strategy::Provided).unwrap();
        assert_eq!(p.counts(), &[vec![1, 1], vec![1]]);
    }

    #[test]
    fn dataset_partition_csv() {
        let ds = LabeledDataset::new(DMatrix::from_fn(4, 1, |i, _| i as f64), vec![0, 0, 1, 1], None).unwrap();
        let p = partition_dataset(&ds, &TreeParams::new(2), Strategy::KdTree).unwrap();
        assert_eq!(p.to_csv(), "sample,class,subclass\n0,0,0\n1,0,1\n2,1,0\n3,1,1\n");
        p.validate(&ds).unwrap();
    }

    proptest! {
        #[test]
        fn leaves_cover_and_balance(m in 1usize..40, t in 0u32..4, seed in any::<u64>(), strat in 0usize..3) {
            let h = 1usize << t;
            let s = [Strategy::KdTree, Strategy::RpTree, Strategy::PcaTree][strat];
            let p = DMatrix::from_fn(m, 3, |i, j| ((i * 31 + j * 17 + seed as usize) % 13) as f64);
            let part = partition_class(&p, &TreeParams::new(h), s, &mut rng(seed)).unwrap();
            let mut all: Vec<usize> = part.subsets.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..m).collect::<Vec<_>>());
            prop_assert_eq!(part.subsets.len(), h.min(m));
            if m >= h {
                let sizes: Vec<usize> = part.subsets.iter().map(Vec::len).collect();
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
                prop_assert!(part.depth == t as usize || h == 1);
            }
        }
    }
}
