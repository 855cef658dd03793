//! The WSSDA training pipeline and the resulting feature extractor.
//!
//! Training runs, in order:
//!
//! 1. `S_ws` of the training data under the subclass partition;
//! 2. its full eigendecomposition `(λ_k, ψ_k)`;
//! 3. the regularized spectrum and weights `ω̃_k` (or the truncated baseline);
//! 4. whitening `ỹ = Ψ̃ᵀx` with `Ψ̃ = [ω̃_k ψ_k]`;
//! 5. the whitened total-subclass scatter (or between-subclass scatter);
//! 6. its leading `d` eigenvectors `V_d`;
//! 7. `U = Ψ̃ V_d`.
//!
//! Features are `z = Uᵀx` with no centering of `x`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::dataset::{LabeledDataset, MAX_DIM};
use crate::error::{Error, Result};
use crate::partition::{Strategy, SubclassPartition};
use crate::scatter::{
    between_subclass_scatter, group_means, total_subclass_scatter, within_class_scatter, within_subclass_scatter,
    GroupMeans, ScatterMatrix,
};
use crate::spectrum::{eig_symmetric_full, Eigenspectrum, SpectrumMode, SpectrumModel};
use crate::util::{fmt_f64, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SecondStage {
    #[default]
    TotalSubclass,
    BetweenSubclass,
}

impl SecondStage {
    pub fn as_str(self) -> &'static str {
        match self {
            SecondStage::TotalSubclass => "ts",
            SecondStage::BetweenSubclass => "bs",
        }
    }
}

impl std::str::FromStr for SecondStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ts" | "total" => Ok(SecondStage::TotalSubclass),
            "bs" | "between" => Ok(SecondStage::BetweenSubclass),
            other => Err(Error::Config(format!("unknown second stage {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Number of output features.
    pub d: usize,
    /// Multiplier on the median eigenvalue for the pivot search.
    pub med_factor: f64,
    pub mode: SpectrumMode,
    pub second_stage: SecondStage,
    /// Accept a flat within-subclass spectrum (constant weights) instead of failing.
    pub allow_flat: bool,
}

impl TrainConfig {
    pub fn with_features(d: usize) -> Self {
        Self {
            d,
            med_factor: 1.0,
            mode: SpectrumMode::Regularized,
            second_stage: SecondStage::TotalSubclass,
            allow_flat: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorMeta {
    pub strategy: Strategy,
    pub h: usize,
    pub med_factor: f64,
    pub mode: SpectrumMode,
    pub second_stage: SecondStage,
    pub dim: usize,
    pub class_count: usize,
    pub sample_count: usize,
    /// Pivot `m` of the first-stage spectrum (regularized, non-flat only).
    pub pivot: Option<usize>,
    /// Rank of the first-stage scatter.
    pub rank: usize,
}

/// Linear map `z = Uᵀx` from `l`-dimensional samples to `d` features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureExtractor {
    u: DMatrix<f64>,
    meta: ExtractorMeta,
}

impl FeatureExtractor {
    pub fn new(u: DMatrix<f64>, meta: ExtractorMeta) -> Result<Self> {
        if u.nrows() != meta.dim {
            return Err(Error::Dimension {
                expected: meta.dim,
                found: u.nrows(),
                context: Some("extractor rows".into()),
            });
        }
        if u.ncols() == 0 || u.ncols() > u.nrows() {
            return Err(Error::Config(format!("feature count {} must lie in [1, {}]", u.ncols(), u.nrows())));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Training("extractor has non-finite entries".into()));
        }
        Ok(Self { u, meta })
    }

    /// The `l × d` matrix `U`.
    pub fn projection(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn meta(&self) -> &ExtractorMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn features(&self) -> usize {
        self.u.ncols()
    }

    pub fn extract(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: x.len(),
                context: Some("sample vector".into()),
            });
        }
        Ok(self.u.tr_mul(&DVector::from_column_slice(x)))
    }

    /// Features of every row of an `n × l` matrix, as an `n × d` matrix.
    pub fn extract_rows(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: x.ncols(),
                context: Some("sample matrix columns".into()),
            });
        }
        Ok(x * &self.u)
    }

    /// The extractor restricted to its leading `d` features.
    pub fn leading(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.features() {
            return Err(Error::Config(format!("cannot take {d} of {} features", self.features())));
        }
        Ok(Self {
            u: self.u.columns(0, d).into_owned(),
            meta: self.meta.clone(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Serializes as `"WSSDA1"`, version `u32`, `l u64`, `d u64`, mode `u8`,
    /// strategy `u8`, `h u64`, then `U` row-major as `f64`, then a `u32` count of
    /// metadata pairs each written as `u32` length-prefixed UTF-8 key and value.
    /// All integers and floats are little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (l, d) = self.u.shape();
        let mut out = Vec::with_capacity(HEADER_LEN + l * d * 8 + 256);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&(l as u64).to_le_bytes());
        out.extend_from_slice(&(d as u64).to_le_bytes());
        out.push(match self.meta.mode {
            SpectrumMode::Regularized => 0,
            SpectrumMode::TruncatedBaseline => 1,
        });
        out.push(self.meta.strategy.code());
        out.extend_from_slice(&(self.meta.h as u64).to_le_bytes());
        for i in 0..l {
            for j in 0..d {
                out.extend_from_slice(&self.u[(i, j)].to_le_bytes());
            }
        }
        let m = &self.meta;
        let mut kv: Vec<(&str, String)> = vec![
            ("med_factor", fmt_f64(m.med_factor)),
            ("second_stage", m.second_stage.as_str().to_string()),
            ("class_count", m.class_count.to_string()),
            ("sample_count", m.sample_count.to_string()),
            ("rank", m.rank.to_string()),
        ];
        if let Some(p) = m.pivot {
            kv.push(("pivot", p.to_string()));
        }
        out.extend_from_slice(&(kv.len() as u32).to_le_bytes());
        for (k, v) in kv {
            for s in [k, v.as_str()] {
                out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                out.extend_from_slice(s.as_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::ModelFormat("bad magic".into()));
        }
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                supported: MODEL_VERSION,
            });
        }
        let l = r.u64()? as usize;
        let d = r.u64()? as usize;
        let mode = match r.take(1)?[0] {
            0 => SpectrumMode::Regularized,
            1 => SpectrumMode::TruncatedBaseline,
            x => return Err(Error::ModelFormat(format!("unknown mode code {x}"))),
        };
        let strategy = Strategy::from_code(r.take(1)?[0]).ok_or_else(|| Error::ModelFormat("unknown strategy code".into()))?;
        let h = r.u64()? as usize;
        if l == 0 || l > MAX_DIM || d == 0 || d > l {
            return Err(Error::ModelFormat(format!("invalid shape {l}x{d}")));
        }
        let raw = r.take(l * d * 8)?;
        let values: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        let u = DMatrix::from_row_slice(l, d, &values);

        let count = r.u32()?;
        let mut kv = BTreeMap::new();
        for _ in 0..count {
            let k = r.string()?;
            let v = r.string()?;
            kv.insert(k, v);
        }
        if r.pos != bytes.len() {
            return Err(Error::ModelFormat(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        let get = |key: &str| kv.get(key).ok_or_else(|| Error::ModelFormat(format!("missing metadata {key:?}")));
        let num = |key: &str| -> Result<usize> {
            get(key)?.parse().map_err(|_| Error::ModelFormat(format!("invalid metadata {key:?}")))
        };
        let meta = ExtractorMeta {
            strategy,
            h,
            med_factor: get("med_factor")?.parse().map_err(|_| Error::ModelFormat("invalid med_factor".into()))?,
            mode,
            second_stage: get("second_stage")?.parse().map_err(|_| Error::ModelFormat("invalid second_stage".into()))?,
            dim: l,
            class_count: num("class_count")?,
            sample_count: num("sample_count")?,
            pivot: kv.contains_key("pivot").then(|| num("pivot")).transpose()?,
            rank: num("rank")?,
        };
        Self::new(u, meta).map_err(|e| Error::ModelFormat(e.to_string()))
    }
}

const MAGIC: &[u8; 6] = b"WSSDA1";
pub const MODEL_VERSION: u32 = 1;
const HEADER_LEN: usize = 6 + 4 + 8 + 8 + 1 + 1 + 8;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::ModelFormat(format!("truncated: need {n} bytes at offset {}, file has {}", self.pos, self.bytes.len()))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::ModelFormat("metadata is not UTF-8".into()))
    }
}

/// Training data after the first-stage whitening.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitenedData {
    /// `n × k` whitened samples `ỹ` (`k = l`, or the rank in truncated mode).
    pub samples: DMatrix<f64>,
    pub means: GroupMeans,
}

/// Everything produced by a training run.
#[derive(Debug, Clone)]
pub struct Training {
    pub extractor: FeatureExtractor,
    /// First-stage scatter (`S_ws`, or `S_w` for the whole-class pipeline).
    pub scatter: ScatterMatrix,
    pub eigenspectrum: Eigenspectrum,
    pub spectrum_model: SpectrumModel,
    /// `Ψ̃`, columns `ω̃_k ψ_k`.
    pub whitening: DMatrix<f64>,
    pub whitened: WhitenedData,
    /// Descending eigenvalues of the second-stage scatter.
    pub second_stage_eigenvalues: DVector<f64>,
}

/// Trains the extractor and returns only `U` with its metadata.
pub fn train(ds: &LabeledDataset, part: &SubclassPartition, config: &TrainConfig) -> Result<FeatureExtractor> {
    train_detailed(ds, part, config).map(|t| t.extractor)
}

/// Trains and keeps the intermediate spectra and whitened data.
pub fn train_detailed(ds: &LabeledDataset, part: &SubclassPartition, config: &TrainConfig) -> Result<Training> {
    check_config(ds, config)?;
    let scatter = within_subclass_scatter(ds, part)?;
    run_pipeline(ds, part, scatter, config, part.strategy(), part.h())
}

/// The same pipeline with the pooled within-class scatter `S_w` as the first
/// stage (whole-class eigenfeature regularization).
pub fn train_whole_class(ds: &LabeledDataset, config: &TrainConfig) -> Result<Training> {
    check_config(ds, config)?;
    let part = SubclassPartition::whole_class(ds);
    run_pipeline(ds, &part, within_class_scatter(ds), config, Strategy::Provided, 1)
}

fn check_config(ds: &LabeledDataset, config: &TrainConfig) -> Result<()> {
    if ds.dim() > MAX_DIM {
        return Err(Error::Config(format!(
            "sample dimension {} exceeds {MAX_DIM}; downsample the inputs",
            ds.dim()
        )));
    }
    if config.d == 0 || config.d > ds.dim() {
        return Err(Error::Config(format!("d = {} must lie in [1, l = {}]", config.d, ds.dim())));
    }
    if !(config.med_factor.is_finite() && config.med_factor > 0.0) {
        return Err(Error::Config(format!("med_factor must be positive, got {}", config.med_factor)));
    }
    Ok(())
}

fn run_pipeline(
    ds: &LabeledDataset,
    part: &SubclassPartition,
    scatter: ScatterMatrix,
    config: &TrainConfig,
    strategy: Strategy,
    h: usize,
) -> Result<Training> {
    let es = eig_symmetric_full(&scatter.matrix)?;
    let model = match config.mode {
        SpectrumMode::Regularized => SpectrumModel::fit(&es, config.med_factor, config.allow_flat).map_err(|e| {
            Error::Training(format!("within-subclass spectrum (rank {}): {e}", es.rank))
        })?,
        SpectrumMode::TruncatedBaseline => {
            let m = SpectrumModel::truncated(&es);
            if !m.usable {
                return Err(Error::Training("within-subclass scatter is zero; truncated weights unusable".into()));
            }
            m
        }
    };
    let kept = match config.mode {
        SpectrumMode::Regularized => ds.dim(),
        SpectrumMode::TruncatedBaseline => es.rank,
    };
    if config.d > kept {
        return Err(Error::Config(format!(
            "d = {} exceeds the {kept} dimensions retained by {} weighting",
            config.d,
            config.mode.as_str()
        )));
    }

    let mut whitening = es.eigenvectors.columns(0, kept).into_owned();
    for (k, mut col) in whitening.column_iter_mut().enumerate() {
        col *= model.weights[k];
    }
    let y = ds.samples() * &whitening;
    let means = group_means(&y, part);
    let second = match config.second_stage {
        SecondStage::TotalSubclass => total_subclass_scatter(&y, &ds.class_members(), &means.global),
        SecondStage::BetweenSubclass => between_subclass_scatter(&means.subclass, &means.global),
    };
    let es2 = eig_symmetric_full(&second.matrix)?;
    let u = &whitening * es2.eigenvectors.columns(0, config.d);

    let meta = ExtractorMeta {
        strategy,
        h,
        med_factor: config.med_factor,
        mode: config.mode,
        second_stage: config.second_stage,
        dim: ds.dim(),
        class_count: ds.class_count(),
        sample_count: ds.len(),
        pivot: model.fit.map(|f| f.m),
        rank: es.rank,
    };
    Ok(Training {
        extractor: FeatureExtractor::new(u, meta)?,
        scatter,
        eigenspectrum: es,
        spectrum_model: model,
        whitening,
        whitened: WhitenedData { samples: y, means },
        second_stage_eigenvalues: es2.eigenvalues,
    })
}
