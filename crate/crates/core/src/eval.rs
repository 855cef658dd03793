//! Identification (cosine 1-NN, error against feature count) and verification
//! (pair scores, ROC, equal error rate, k-fold averaging).

use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::dataset::{LabeledDataset, SplitSpec};
use crate::error::{Error, Result};
use crate::extractor::FeatureExtractor;
use crate::util::{fmt_f64, substream};

/// `1 − a·b / (‖a‖‖b‖)`, clamped to `[0, 2]`.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
            context: Some("cosine distance".into()),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Contract("cosine distance of a zero vector".into()));
    }
    Ok((1.0 - dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 2.0))
}

/// Label of the gallery row nearest to `probe` in cosine distance; the lowest
/// index wins ties.
pub fn nn_classify(gallery: &DMatrix<f64>, labels: &[usize], probe: &[f64]) -> Result<usize> {
    if gallery.nrows() == 0 {
        return Err(Error::Contract("empty gallery".into()));
    }
    if labels.len() != gallery.nrows() {
        return Err(Error::Dimension {
            expected: gallery.nrows(),
            found: labels.len(),
            context: Some("gallery labels".into()),
        });
    }
    if probe.len() != gallery.ncols() {
        return Err(Error::Dimension {
            expected: gallery.ncols(),
            found: probe.len(),
            context: Some("probe features".into()),
        });
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    let mut row = vec![0.0; gallery.ncols()];
    for i in 0..gallery.nrows() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = gallery[(i, j)];
        }
        let d = cosine_distance(probe, &row)?;
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    Ok(labels[best])
}

/// Misclassified fraction of `split.probe` when classifying against
/// `split.gallery`, using the rows of `features` (one per dataset sample).
pub fn identification_error(features: &DMatrix<f64>, labels: &[usize], split: &SplitSpec) -> Result<f64> {
    if split.probe.is_empty() {
        return Err(Error::Protocol("split has no probes".into()));
    }
    let gallery = features.select_rows(&split.gallery);
    let gallery_labels: Vec<usize> = split.gallery.iter().map(|&i| labels[i]).collect();
    let mut wrong = 0usize;
    for &p in &split.probe {
        let z: Vec<f64> = features.row(p).iter().copied().collect();
        if nn_classify(&gallery, &gallery_labels, &z)? != labels[p] {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / split.probe.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationReport {
    /// `(d, error rate averaged over splits)` with strictly increasing `d`.
    pub curve: Vec<(usize, f64)>,
    /// `per_split[s][k]` is the error of split `s` at `curve[k].0`.
    pub per_split: Vec<Vec<f64>>,
}

impl IdentificationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,error\n");
        for (d, e) in &self.curve {
            out.push_str(&format!("{d},{}\n", fmt_f64(*e)));
        }
        out
    }
}

/// Error rate against feature count, averaged over splits.
///
/// `factory(split_index, split, d_max)` supplies an extractor with at least
/// `d_max` features for each split (trained on that split's gallery, or one
/// shared pre-trained model). Smaller `d` use its leading columns, which equals
/// retraining at `d` because the second-stage eigenvectors are nested.
pub fn identification_sweep<F>(
    ds: &LabeledDataset,
    splits: &[SplitSpec],
    d_values: &[usize],
    mut factory: F,
) -> Result<IdentificationReport>
where
    F: FnMut(usize, &SplitSpec, usize) -> Result<FeatureExtractor>,
{
    if splits.is_empty() {
        return Err(Error::Protocol("no splits".into()));
    }
    let mut ds_sorted = d_values.to_vec();
    ds_sorted.sort_unstable();
    ds_sorted.dedup();
    let Some(&d_max) = ds_sorted.last() else {
        return Err(Error::Config("empty d sweep".into()));
    };
    if ds_sorted[0] == 0 || d_max > ds.dim() {
        return Err(Error::Config(format!("d values must lie in [1, {}]", ds.dim())));
    }
    let mut per_split = Vec::with_capacity(splits.len());
    for (s, split) in splits.iter().enumerate() {
        split.validate(ds.len())?;
        let fx = factory(s, split, d_max)?;
        if fx.features() < d_max {
            return Err(Error::Config(format!("extractor has {} features, sweep needs {d_max}", fx.features())));
        }
        let z = fx.extract_rows(ds.samples())?;
        let row = ds_sorted
            .iter()
            .map(|&d| identification_error(&z.columns(0, d).into_owned(), ds.class_labels(), split))
            .collect::<Result<Vec<_>>>()?;
        per_split.push(row);
    }
    let curve = ds_sorted
        .iter()
        .enumerate()
        .map(|(k, &d)| (d, per_split.iter().map(|r| r[k]).sum::<f64>() / splits.len() as f64))
        .collect();
    Ok(IdentificationReport { curve, per_split })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub far: f64,
    pub tar: f64,
    /// Pairs with similarity `>= threshold` are accepted.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocReport {
    /// From `(0, 0)` at an infinite threshold to `(1, 1)`; FAR and TAR non-decreasing.
    pub points: Vec<RocPoint>,
    pub eer: f64,
    pub threshold_at_eer: f64,
}

impl RocReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("far,tar\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", fmt_f64(p.far), fmt_f64(p.tar)));
        }
        out
    }

    /// TAR at a given FAR, linear between ROC vertices (upper envelope at
    /// vertical segments).
    pub fn tar_at(&self, far: f64) -> f64 {
        let k = self.points.iter().rposition(|p| p.far <= far).unwrap_or(0);
        let a = self.points[k];
        if a.far == far || k + 1 == self.points.len() {
            return a.tar;
        }
        let b = self.points[k + 1];
        a.tar + (b.tar - a.tar) * (far - a.far) / (b.far - a.far)
    }
}

/// ROC over every observed similarity threshold. The EER is read off by linear
/// interpolation between the two adjacent points where `FAR − FRR` changes
/// sign.
pub fn roc_from_scores(same: &[f64], diff: &[f64]) -> Result<RocReport> {
    if same.is_empty() || diff.is_empty() {
        return Err(Error::Protocol(format!(
            "verification needs same and different pairs, got {} and {}",
            same.len(),
            diff.len()
        )));
    }
    if same.iter().chain(diff).any(|s| s.is_nan()) {
        return Err(Error::Contract("NaN score".into()));
    }
    let mut scored: Vec<(f64, bool)> = same.iter().map(|&s| (s, true)).chain(diff.iter().map(|&s| (s, false))).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (ns, nd) = (same.len() as f64, diff.len() as f64);

    let mut points = vec![RocPoint {
        far: 0.0,
        tar: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < scored.len() {
        let t = scored[i].0;
        while i < scored.len() && scored[i].0 == t {
            if scored[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            far: fp as f64 / nd,
            tar: tp as f64 / ns,
            threshold: t,
        });
    }

    let gap = |p: &RocPoint| p.far - (1.0 - p.tar);
    let k = points.iter().position(|p| gap(p) >= 0.0).expect("last point has FAR = 1");
    let (eer, threshold_at_eer) = if gap(&points[k]) == 0.0 || k == 0 {
        (points[k].far, points[k].threshold)
    } else {
        let (a, b) = (points[k - 1], points[k]);
        let s = -gap(&a) / (gap(&b) - gap(&a));
        let thr = if a.threshold.is_finite() {
            a.threshold + s * (b.threshold - a.threshold)
        } else {
            b.threshold
        };
        (a.far + s * (b.far - a.far), thr)
    };
    Ok(RocReport {
        points,
        eer,
        threshold_at_eer,
    })
}

/// Scores feature pairs by cosine similarity `1 − cosine_distance` and builds
/// the ROC.
pub fn verification_roc<A: AsRef<[f64]>>(pairs: &[(A, A, bool)]) -> Result<RocReport> {
    let (same, diff) = pair_scores(pairs)?;
    roc_from_scores(&same, &diff)
}

fn pair_scores<A: AsRef<[f64]>>(pairs: &[(A, A, bool)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut same = Vec::new();
    let mut diff = Vec::new();
    for (a, b, is_same) in pairs {
        let s = 1.0 - cosine_distance(a.as_ref(), b.as_ref())?;
        if *is_same {
            same.push(s);
        } else {
            diff.push(s);
        }
    }
    Ok((same, diff))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KFoldReport {
    pub folds: Vec<RocReport>,
    /// `(far, mean tar)` on a uniform FAR grid.
    pub mean_roc: Vec<(f64, f64)>,
    pub fold_eer: Vec<f64>,
    pub mean_eer: f64,
    /// Population standard deviation of the per-fold EERs.
    pub std_eer: f64,
}

impl KFoldReport {
    pub fn roc_csv(&self) -> String {
        let mut out = String::from("far,tar\n");
        for (f, t) in &self.mean_roc {
            out.push_str(&format!("{},{}\n", fmt_f64(*f), fmt_f64(*t)));
        }
        out
    }

    /// `fold,eer_percent` rows followed by `mean` and `std`, two decimals.
    pub fn eer_csv(&self) -> String {
        let mut out = String::from("fold,eer_percent\n");
        for (k, e) in self.fold_eer.iter().enumerate() {
            out.push_str(&format!("{k},{:.2}\n", e * 100.0));
        }
        out.push_str(&format!("mean,{:.2}\nstd,{:.2}\n", self.mean_eer * 100.0, self.std_eer * 100.0));
        out
    }
}

/// Fold of item `j` out of `n` split into `folds` contiguous blocks.
pub fn fold_of(j: usize, n: usize, folds: usize) -> usize {
    j * folds / n
}

/// Per-fold ROC and EER over contiguous blocks of `pairs`, with TAR averaged
/// on `grid` evenly spaced FAR values in `[0, 1]`.
pub fn kfold_pairwise<A: AsRef<[f64]>>(pairs: &[(A, A, bool)], folds: usize, grid: usize) -> Result<KFoldReport> {
    if folds == 0 || pairs.len() < folds {
        return Err(Error::Protocol(format!("cannot split {} pairs into {folds} folds", pairs.len())));
    }
    if grid < 2 {
        return Err(Error::Config("FAR grid needs at least 2 points".into()));
    }
    let (mut same, mut diff) = (vec![Vec::new(); folds], vec![Vec::new(); folds]);
    for (j, (a, b, is_same)) in pairs.iter().enumerate() {
        let f = fold_of(j, pairs.len(), folds);
        let s = 1.0 - cosine_distance(a.as_ref(), b.as_ref())?;
        if *is_same {
            same[f].push(s);
        } else {
            diff[f].push(s);
        }
    }
    let rocs = (0..folds)
        .map(|f| roc_from_scores(&same[f], &diff[f]).map_err(|e| Error::Protocol(format!("fold {f}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let mean_roc = (0..grid)
        .map(|i| {
            let far = i as f64 / (grid - 1) as f64;
            (far, rocs.iter().map(|r| r.tar_at(far)).sum::<f64>() / folds as f64)
        })
        .collect();
    let fold_eer: Vec<f64> = rocs.iter().map(|r| r.eer).collect();
    let mean_eer = fold_eer.iter().sum::<f64>() / folds as f64;
    let std_eer = (fold_eer.iter().map(|e| (e - mean_eer).powi(2)).sum::<f64>() / folds as f64).sqrt();
    Ok(KFoldReport {
        folds: rocs,
        mean_roc,
        fold_eer,
        mean_eer,
        std_eer,
    })
}

/// A verification pair of dataset sample indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexPair {
    pub a: usize,
    pub b: usize,
    pub same: bool,
}

/// Draws `count` pairs, alternating same-class and different-class, from a
/// dedicated `"pairs"` RNG stream.
pub fn sample_pairs(ds: &LabeledDataset, count: usize, seed: u64) -> Result<Vec<IndexPair>> {
    let members = ds.class_members();
    let multi: Vec<&Vec<usize>> = members.iter().filter(|m| m.len() >= 2).collect();
    if multi.is_empty() || members.len() < 2 {
        return Err(Error::Protocol("pair sampling needs two classes and a class with two samples".into()));
    }
    let mut rng = substream(seed, "pairs", 0);
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        if j % 2 == 0 {
            let m = multi[rng.random_range(0..multi.len())];
            let picked: Vec<usize> = m.choose_multiple(&mut rng, 2).copied().collect();
            out.push(IndexPair { a: picked[0], b: picked[1], same: true });
        } else {
            let ca = rng.random_range(0..members.len());
            let mut cb = rng.random_range(0..members.len() - 1);
            if cb >= ca {
                cb += 1;
            }
            let a = *members[ca].choose(&mut rng).expect("non-empty class");
            let b = *members[cb].choose(&mut rng).expect("non-empty class");
            out.push(IndexPair { a, b, same: false });
        }
    }
    Ok(out)
}

pub fn pairs_to_csv(pairs: &[IndexPair]) -> String {
    let mut out = String::from("a,b,label\n");
    for p in pairs {
        out.push_str(&format!("{},{},{}\n", p.a, p.b, if p.same { "same" } else { "diff" }));
    }
    out
}

/// Reads `a,b,same|diff` rows; a header line starting with `a,` is skipped.
/// Errors name the 1-based line.
pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<IndexPair>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("a,")) {
            continue;
        }
        let bad = || Error::format(path, format!("line {}: expected index_a,index_b,same|diff, got {line:?}", i + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [a, b, label] = fields[..] else {
            return Err(bad());
        };
        let same = match label {
            "same" | "1" => true,
            "diff" | "different" | "0" => false,
            _ => return Err(bad()),
        };
        out.push(IndexPair {
            a: a.parse().map_err(|_| bad())?,
            b: b.parse().map_err(|_| bad())?,
            same,
        });
    }
    Ok(out)
}
