//! Labeled sample-vector datasets: CSV and PGM ingestion, a synthetic
//! heteroscedastic Gaussian-mixture generator, and gallery/probe splits.
//!
//! Samples are stored one per row in an `n × l` matrix. Class labels are dense
//! in `[0, C)`; files with arbitrary integer labels are remapped at load time in
//! ascending label order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::util::{fmt_f64, substream, write_atomic};

/// Largest sample dimension accepted by the full-eigenbasis training path.
/// Larger images should be downsampled before ingestion.
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    samples: DMatrix<f64>,
    class_labels: Vec<usize>,
    subclass_labels: Option<Vec<usize>>,
    class_count: usize,
}

impl LabeledDataset {
    /// Builds a dataset from an `n × l` sample matrix and dense labels.
    ///
    /// Every class in `[0, C)` (with `C = max label + 1`) must occur, and when
    /// subclass labels are given the subclass ids of each class must be dense
    /// in `[0, H_i)`.
    pub fn new(
        samples: DMatrix<f64>,
        class_labels: Vec<usize>,
        subclass_labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = samples.nrows();
        if n == 0 || samples.ncols() == 0 {
            return Err(Error::Dataset("dataset must have at least one sample and one dimension".into()));
        }
        if class_labels.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: class_labels.len(),
                context: Some("class label count".into()),
            });
        }
        let class_count = class_labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; class_count];
        for &c in &class_labels {
            seen[c] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Dataset(format!("class {missing} has no samples")));
        }
        if let Some(sub) = &subclass_labels {
            if sub.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: sub.len(),
                    context: Some("subclass label count".into()),
                });
            }
            let mut per_class: Vec<Vec<bool>> = vec![Vec::new(); class_count];
            for (&c, &s) in class_labels.iter().zip(sub) {
                let v = &mut per_class[c];
                if v.len() <= s {
                    v.resize(s + 1, false);
                }
                v[s] = true;
            }
            for (c, v) in per_class.iter().enumerate() {
                if let Some(j) = v.iter().position(|s| !s) {
                    return Err(Error::Dataset(format!("class {c}: subclass {j} is empty")));
                }
            }
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("samples contain non-finite values".into()));
        }
        Ok(Self {
            samples,
            class_labels,
            subclass_labels,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// The `n × l` sample matrix, one sample per row.
    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> DVector<f64> {
        self.samples.row(i).transpose()
    }

    pub fn class_labels(&self) -> &[usize] {
        &self.class_labels
    }

    pub fn subclass_labels(&self) -> Option<&[usize]> {
        self.subclass_labels.as_deref()
    }

    /// Sample indices of each class, in dataset order.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.class_count];
        for (i, &c) in self.class_labels.iter().enumerate() {
            members[c].push(i);
        }
        members
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count];
        for &c in &self.class_labels {
            sizes[c] += 1;
        }
        sizes
    }

    /// Rows `indices` as a new dataset. Classes (and subclasses within each
    /// class) absent from the subset are dropped and the rest relabeled densely,
    /// preserving their relative order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Protocol(format!("index {bad} out of range for {} samples", self.len())));
        }
        let samples = self.samples.select_rows(indices);
        let classes: Vec<i64> = indices.iter().map(|&i| self.class_labels[i] as i64).collect();
        let subclasses = self
            .subclass_labels
            .as_ref()
            .map(|s| indices.iter().map(|&i| s[i] as i64).collect::<Vec<_>>());
        let (class_labels, subclass_labels) = densify(&classes, subclasses.as_deref());
        Self::new(samples, class_labels, subclass_labels)
    }

    /// Writes the dataset in the headerless CSV layout read by [`load_csv`],
    /// including the subclass column when subclass labels are present.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * (self.dim() + 2) * 24);
        for i in 0..self.len() {
            out.push_str(&self.class_labels[i].to_string());
            if let Some(sub) = &self.subclass_labels {
                out.push(',');
                out.push_str(&sub[i].to_string());
            }
            for v in self.samples.row(i).iter() {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Remaps raw labels to dense ids in ascending order; subclasses are densified
/// within each class.
fn densify(classes: &[i64], subclasses: Option<&[i64]>) -> (Vec<usize>, Option<Vec<usize>>) {
    let class_map: BTreeMap<i64, usize> = classes
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(k, v)| (v, k))
        .collect();
    let dense: Vec<usize> = classes.iter().map(|c| class_map[c]).collect();
    let sub = subclasses.map(|subs| {
        let mut maps: Vec<BTreeMap<i64, usize>> = vec![BTreeMap::new(); class_map.len()];
        for (&c, &s) in dense.iter().zip(subs) {
            maps[c].insert(s, 0);
        }
        for m in &mut maps {
            for (k, v) in m.values_mut().enumerate() {
                *v = k;
            }
        }
        dense.iter().zip(subs).map(|(&c, s)| maps[c][s]).collect()
    });
    (dense, sub)
}

/// Whether a dataset CSV carries a subclass label after the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CsvLayout {
    #[default]
    LabelsOnly,
    WithSubclass,
}

/// Reads rows `class_label[,subclass_label],v_1,...,v_l` (no header).
///
/// Labels are remapped to dense ids; row order is preserved. Blank lines are
/// skipped but still counted for error positions.
pub fn load_csv(path: impl AsRef<Path>, layout: CsvLayout) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, layout, path)
}

fn parse_csv(text: &str, layout: CsvLayout, path: &Path) -> Result<LabeledDataset> {
    let label_cols = match layout {
        CsvLayout::LabelsOnly => 1,
        CsvLayout::WithSubclass => 2,
    };
    let mut classes = Vec::new();
    let mut subclasses = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut dim: Option<usize> = None;

    for (row, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse_label = |column: usize| -> Result<i64> {
            fields[column].parse::<i64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row,
                column,
                token: fields[column].to_string(),
            })
        };
        if fields.len() <= label_cols {
            // a lone token may still be a header word; report it as such
            parse_label(0)?;
            return Err(Error::format(path, format!("row {row}: no sample values")));
        }
        classes.push(parse_label(0)?);
        if label_cols == 2 {
            subclasses.push(parse_label(1)?);
        }
        let l = fields.len() - label_cols;
        match dim {
            None => dim = Some(l),
            Some(d) if d != l => {
                return Err(Error::format(
                    path,
                    format!("ragged row {row}: expected {d} values, found {l}"),
                ))
            }
            _ => {}
        }
        for (column, tok) in fields.iter().enumerate().skip(label_cols) {
            let v = tok.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row,
                column,
                token: tok.to_string(),
            })?;
            values.push(v);
        }
    }

    let Some(dim) = dim else {
        return Err(Error::format(path, "empty file"));
    };
    let n = classes.len();
    let samples = DMatrix::from_row_slice(n, dim, &values);
    let (class_labels, subclass_labels) =
        densify(&classes, (label_cols == 2).then_some(subclasses.as_slice()));
    LabeledDataset::new(samples, class_labels, subclass_labels)
}

struct Pgm {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

fn parse_pgm(bytes: &[u8], path: &Path) -> Result<Pgm> {
    let bad = |msg: &str| Error::format(path, msg.to_string());
    let mut pos = 0usize;

    let next_token = |pos: &mut usize| -> Option<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
            *pos += 1;
        }
        (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = next_token(&mut pos).ok_or_else(|| bad("missing PGM magic"))?;
    let binary = match magic.as_str() {
        "P2" => false,
        "P5" => true,
        other => return Err(bad(&format!("unsupported magic {other:?}, expected P2 or P5"))),
    };
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
        let tok = next_token(&mut pos).ok_or_else(|| bad(&format!("missing {name}")))?;
        *slot = tok.parse().map_err(|_| bad(&format!("invalid {name} {tok:?}")))?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad("invalid PGM header values"));
    }
    let count = width * height;
    let scale = 1.0 / maxval as f64;
    let mut pixels = Vec::with_capacity(count);

    if binary {
        // exactly one whitespace byte separates maxval from the raster
        pos += 1;
        let bpp = if maxval < 256 { 1 } else { 2 };
        let raster = bytes.get(pos..pos + count * bpp).ok_or_else(|| bad("truncated raster"))?;
        for chunk in raster.chunks_exact(bpp) {
            let v = if bpp == 1 {
                chunk[0] as usize
            } else {
                (chunk[0] as usize) << 8 | chunk[1] as usize
            };
            if v > maxval {
                return Err(bad("pixel exceeds maxval"));
            }
            pixels.push(v as f64 * scale);
        }
    } else {
        for _ in 0..count {
            let tok = next_token(&mut pos).ok_or_else(|| bad("truncated raster"))?;
            let v: usize = tok.parse().map_err(|_| bad(&format!("invalid pixel {tok:?}")))?;
            if v > maxval {
                return Err(bad("pixel exceeds maxval"));
            }
            pixels.push(v as f64 * scale);
        }
    }
    Ok(Pgm {
        width,
        height,
        pixels,
    })
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("pnm"))
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.file_name().to_string_lossy().starts_with('.') {
            continue;
        }
        out.push(entry.path());
    }
    out.sort();
    Ok(out)
}

/// Loads one class per subdirectory (sorted by name) of P2/P5 images.
///
/// Images are vectorized row by row into `l = width × height` values scaled to
/// `[0, 1]` by the file's maxval. Within a class, images are taken in file name
/// order.
pub fn load_pgm_dir(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let root = path.as_ref();
    let class_dirs: Vec<_> = sorted_entries(root)?.into_iter().filter(|p| p.is_dir()).collect();
    if class_dirs.is_empty() {
        return Err(Error::format(root, "no class subdirectories"));
    }
    let mut shape: Option<(usize, usize)> = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (class, dir) in class_dirs.iter().enumerate() {
        for file in sorted_entries(dir)?.into_iter().filter(|p| p.is_file() && is_pgm(p)) {
            let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
            let img = parse_pgm(&bytes, &file)?;
            match shape {
                None => shape = Some((img.width, img.height)),
                Some((w, h)) if (w, h) != (img.width, img.height) => {
                    return Err(Error::Dimension {
                        expected: w * h,
                        found: img.width * img.height,
                        context: Some(format!(
                            "{} is {}x{}, expected {w}x{h}",
                            file.display(),
                            img.width,
                            img.height
                        )),
                    })
                }
                _ => {}
            }
            values.extend_from_slice(&img.pixels);
            labels.push(class);
        }
    }
    let Some((w, h)) = shape else {
        return Err(Error::format(root, "no PGM images found"));
    };
    let samples = DMatrix::from_row_slice(labels.len(), w * h, &values);
    // empty class directories are dropped by densifying
    let raw: Vec<i64> = labels.iter().map(|&c| c as i64).collect();
    let (labels, _) = densify(&raw, None);
    LabeledDataset::new(samples, labels, None)
}

/// Encodes a `width × height` image with values in `[0, 1]` as an 8-bit
/// binary PGM.
pub fn encode_pgm(width: usize, height: usize, pixels: &[f64]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(pixels.iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

/// Parameters of the synthetic heteroscedastic Gaussian-mixture generator.
///
/// Class centers are drawn from `N(0, class_spread² I)`. Each class has
/// `subclasses_per_class` subclass means placed at distance
/// `subclass_mean_spread` from the class center in a uniformly random
/// direction. Samples of a subclass are isotropic Gaussian around its mean with
/// a standard deviation drawn uniformly from `within_scale`, so covariances
/// differ between subclasses.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub class_count: usize,
    pub subclasses_per_class: usize,
    pub samples_per_subclass: usize,
    pub dim: usize,
    pub class_spread: f64,
    pub subclass_mean_spread: f64,
    pub within_scale: (f64, f64),
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            class_count: 10,
            subclasses_per_class: 2,
            samples_per_subclass: 5,
            dim: 30,
            class_spread: 1.0,
            subclass_mean_spread: 1.0,
            within_scale: (0.1, 0.4),
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.class_count == 0 || self.subclasses_per_class == 0 || self.samples_per_subclass == 0 || self.dim == 0 {
            return Err(Error::Config("synthetic counts must be positive".into()));
        }
        let (lo, hi) = self.within_scale;
        let finite = [self.class_spread, self.subclass_mean_spread, lo, hi].iter().all(|v| v.is_finite());
        if !finite || self.class_spread < 0.0 || self.subclass_mean_spread < 0.0 {
            return Err(Error::Config("spreads must be finite and non-negative".into()));
        }
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::Config(format!("within_scale must satisfy 0 < lo <= hi, got ({lo}, {hi})")));
        }
        Ok(())
    }
}

/// Draws a synthetic dataset with ground-truth subclass labels.
///
/// Rows are grouped by class; within a class the subclasses are interleaved
/// round-robin, so any prefix of a class covers its subclasses evenly. The
/// output is a pure function of `spec`.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let SynthSpec {
        class_count: c,
        subclasses_per_class: h,
        samples_per_subclass: g,
        dim: l,
        ..
    } = *spec;
    let n = c * h * g;
    let mut samples = DMatrix::zeros(n, l);
    let mut classes = Vec::with_capacity(n);
    let mut subclasses = Vec::with_capacity(n);
    let gauss = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };

    let mut row = 0;
    for class in 0..c {
        let mut rng = substream(spec.seed, "synth", class as u64);
        let center: DVector<f64> = DVector::from_fn(l, |_, _| spec.class_spread * gauss(&mut rng));
        let mut means = Vec::with_capacity(h);
        let mut scales = Vec::with_capacity(h);
        for _ in 0..h {
            let dir = loop {
                let v: DVector<f64> = DVector::from_fn(l, |_, _| gauss(&mut rng));
                let norm = v.norm();
                if norm > 0.0 {
                    break v / norm;
                }
            };
            means.push(&center + dir * spec.subclass_mean_spread);
            let (lo, hi) = spec.within_scale;
            scales.push(if hi > lo { rng.random_range(lo..=hi) } else { lo });
        }
        for _ in 0..g {
            for j in 0..h {
                for k in 0..l {
                    samples[(row, k)] = means[j][k] + scales[j] * gauss(&mut rng);
                }
                classes.push(class);
                subclasses.push(j);
                row += 1;
            }
        }
    }
    LabeledDataset::new(samples, classes, Some(subclasses))
}

/// A gallery/probe protocol over sample indices of one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub gallery: Vec<usize>,
    pub probe: Vec<usize>,
}

impl SplitSpec {
    /// Checks that both sets lie in `[0, n)` and are disjoint.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut used = vec![false; n];
        for &i in self.gallery.iter().chain(&self.probe) {
            if i >= n {
                return Err(Error::Protocol(format!("index {i} out of range for {n} samples")));
            }
            if used[i] {
                return Err(Error::Protocol(format!("index {i} used twice")));
            }
            used[i] = true;
        }
        Ok(())
    }

    /// The first `k` samples of every class form the gallery, the remainder the
    /// probes.
    pub fn first_per_class(ds: &LabeledDataset, k: usize) -> Result<Self> {
        let mut gallery = Vec::new();
        let mut probe = Vec::new();
        for (c, members) in ds.class_members().iter().enumerate() {
            if members.len() < k {
                return Err(Error::Protocol(format!("class {c} has {} samples, need {k}", members.len())));
            }
            gallery.extend_from_slice(&members[..k]);
            probe.extend_from_slice(&members[k..]);
        }
        gallery.sort_unstable();
        probe.sort_unstable();
        Ok(Self { gallery, probe })
    }
}

/// Rotating single-image galleries: split `i` uses the `i`-th sample of every
/// class as gallery and all other samples as probes.
pub fn make_gallery_probe_splits(ds: &LabeledDataset, rotations: usize) -> Result<Vec<SplitSpec>> {
    if rotations == 0 {
        return Err(Error::Protocol("at least one rotation is required".into()));
    }
    let members = ds.class_members();
    if let Some((c, m)) = members.iter().enumerate().find(|(_, m)| m.len() < rotations) {
        return Err(Error::Protocol(format!(
            "class {c} has {} samples, fewer than the {rotations} rotations requested",
            m.len()
        )));
    }
    Ok((0..rotations)
        .map(|r| {
            let mut gallery: Vec<usize> = members.iter().map(|m| m[r]).collect();
            gallery.sort_unstable();
            let probe = (0..ds.len()).filter(|i| gallery.binary_search(i).is_err()).collect();
            SplitSpec { gallery, probe }
        })
        .collect())
}
