//! Eigenspectra of scatter matrices and their regularization.
//!
//! [`eig_symmetric_full`] returns the full orthonormal eigenbasis (null space
//! included) in descending eigenvalue order. [`SpectrumModel::fit`] locates a
//! median pivot `m`, fits `λ̃_k = α/(k+β)` through `λ_1` and `λ_m`, and builds
//! the regularized spectrum over all `l` dimensions:
//!
//! ```text
//! λ̃_k = λ_k              k < m
//!     = α / (k + β)       m ≤ k ≤ r
//!     = α / (r + 1 + β)   r < k ≤ l
//! ```
//!
//! with weights `ω̃_k = 1/√λ̃_k`. Indices `k`, `m` and `r` are 1-based here and
//! in the public API; storage is 0-based.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dataset::MAX_DIM;
use crate::error::{Error, Result};

/// Relative threshold separating the range from the null space.
pub const RANK_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspectrum {
    /// Descending, clamped at zero.
    pub eigenvalues: DVector<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    /// Count of eigenvalues above `λ_1 · 1e-12`.
    pub rank: usize,
}

impl Eigenspectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `τ_k = √λ_k`.
    pub fn tau(&self) -> DVector<f64> {
        self.eigenvalues.map(f64::sqrt)
    }

    /// 1-based eigenvalue accessor.
    pub fn lambda(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    /// Builds a spectrum from eigenvalues alone (identity eigenvectors), for
    /// working with spectra that did not come from a matrix.
    pub fn from_eigenvalues(values: &[f64]) -> Result<Self> {
        if values.windows(2).any(|w| w[0] < w[1]) || values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Contract("eigenvalues must be finite, non-negative and descending".into()));
        }
        let l = values.len();
        Ok(Self {
            eigenvalues: DVector::from_column_slice(values),
            eigenvectors: DMatrix::identity(l, l),
            rank: rank_of(values),
        })
    }
}

fn rank_of(descending: &[f64]) -> usize {
    match descending.first() {
        Some(&top) if top > 0.0 => descending.iter().filter(|&&v| v > top * RANK_TOLERANCE).count(),
        _ => 0,
    }
}

/// Full eigendecomposition of a symmetric positive semidefinite matrix.
///
/// Eigenvalues are sorted descending and negative round-off is clamped to
/// zero. Each eigenvector is signed so that its largest-magnitude component is
/// positive (first such component on ties).
pub fn eig_symmetric_full(s: &DMatrix<f64>) -> Result<Eigenspectrum> {
    let l = s.nrows();
    if s.ncols() != l {
        return Err(Error::Contract(format!("matrix is {}x{}, not square", l, s.ncols())));
    }
    if l > MAX_DIM {
        return Err(Error::Contract(format!("dimension {l} exceeds the supported maximum {MAX_DIM}")));
    }
    let norm = s.norm();
    if !norm.is_finite() {
        return Err(Error::Contract("matrix has non-finite entries".into()));
    }
    if (s - s.transpose()).norm() > SYMMETRY_TOLERANCE * norm {
        return Err(Error::Contract("matrix is not symmetric".into()));
    }
    if l == 0 {
        return Ok(Eigenspectrum {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
            rank: 0,
        });
    }
    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let mut vectors = DMatrix::zeros(l, l);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let lead = v.iamax();
        if v[lead] < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(dst, &v);
    }
    Ok(Eigenspectrum {
        rank: rank_of(&values),
        eigenvalues: DVector::from_vec(values),
        eigenvectors: vectors,
    })
}

/// Result of the pivot search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pivot {
    /// 1-based pivot index.
    pub m: usize,
    /// `λ_1 == λ_m`: the 1/f model cannot be fitted.
    pub flat: bool,
}

/// Median pivot: the smallest `k` with `λ_k < med_factor · median(λ_1..λ_r)`,
/// clamped to `[2, r − 1]`.
pub fn find_pivot(es: &Eigenspectrum, med_factor: f64) -> Result<Pivot> {
    let r = es.rank;
    if r < 3 {
        return Err(Error::SpectrumTooShort { rank: r });
    }
    let head = &es.eigenvalues.as_slice()[..r];
    // head is descending; the median is symmetric in order
    let median = if r % 2 == 1 {
        head[r / 2]
    } else {
        0.5 * (head[r / 2 - 1] + head[r / 2])
    };
    let cut = med_factor * median;
    let first_below = head.iter().position(|&v| v < cut).map_or(r, |k| k + 1);
    let m = first_below.clamp(2, r - 1);
    Ok(Pivot {
        m,
        flat: head[0] == head[m - 1],
    })
}

/// Closed-form `(α, β)` with `α/(1+β) = λ_1` and `α/(m+β) = λ_m`.
pub fn fit_model(es: &Eigenspectrum, m: usize) -> Result<(f64, f64)> {
    if m < 2 || m > es.dim() {
        return Err(Error::Contract(format!("pivot m = {m} outside [2, {}]", es.dim())));
    }
    let l1 = es.lambda(1);
    let lm = es.lambda(m);
    if lm <= 0.0 {
        return Err(Error::PivotAtNull(m));
    }
    if l1 == lm {
        return Err(Error::FlatSpectrum(l1));
    }
    let mf = m as f64;
    let gap = l1 - lm;
    let alpha = l1 * lm * (mf - 1.0) / gap;
    let beta = (mf * lm - l1) / gap;
    Ok((alpha, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumMode {
    /// Whole-space weights from the regularized spectrum.
    #[default]
    Regularized,
    /// `1/√λ_k` on the range, zero on the null space.
    TruncatedBaseline,
}

impl SpectrumMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumMode::Regularized => "regularized",
            SpectrumMode::TruncatedBaseline => "truncated",
        }
    }
}

impl std::str::FromStr for SpectrumMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regularized" | "reg" => Ok(SpectrumMode::Regularized),
            "truncated" | "baseline" => Ok(SpectrumMode::TruncatedBaseline),
            other => Err(Error::Config(format!("unknown spectrum mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFit {
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    pub mode: SpectrumMode,
    /// Present for a regularized, non-flat spectrum.
    pub fit: Option<ModelFit>,
    /// Regularized mode fell back to a constant spectrum.
    pub flat: bool,
    /// `λ̃_k` (the raw `λ_k` in truncated mode).
    pub lambda_reg: DVector<f64>,
    /// `ω̃_k`; zero beyond the rank in truncated mode.
    pub weights: DVector<f64>,
    /// False when every weight is zero (rank 0 in truncated mode).
    pub usable: bool,
}

impl SpectrumModel {
    /// Regularized spectrum from a fitted pivot model.
    pub fn regularized(es: &Eigenspectrum, m: usize, alpha: f64, beta: f64) -> Result<Self> {
        let l = es.dim();
        let r = es.rank;
        if m < 2 || m > r {
            return Err(Error::Contract(format!("pivot m = {m} outside [2, r = {r}]")));
        }
        let model = |k: usize| alpha / (k as f64 + beta);
        let tail = model(r + 1);
        if !(tail > 0.0 && tail.is_finite()) {
            return Err(Error::Contract(format!("model constants alpha = {alpha}, beta = {beta} are invalid")));
        }
        let mut lambda = DVector::zeros(l);
        for k in 1..=l {
            lambda[k - 1] = if k < m {
                es.lambda(k)
            } else if k <= r {
                // rounding at the pivot must not break monotonicity
                model(k).min(lambda[k - 2])
            } else {
                tail
            };
        }
        Ok(Self::from_lambda(SpectrumMode::Regularized, Some(ModelFit { m, alpha, beta }), false, lambda))
    }

    /// Constant spectrum `λ̃_k = λ_1` used when the pivot search reports a
    /// flat spectrum.
    pub fn flat(es: &Eigenspectrum) -> Result<Self> {
        let top = es.eigenvalues.get(0).copied().unwrap_or(0.0);
        if top <= 0.0 {
            return Err(Error::FlatSpectrum(top));
        }
        Ok(Self::from_lambda(SpectrumMode::Regularized, None, true, DVector::from_element(es.dim(), top)))
    }

    fn from_lambda(mode: SpectrumMode, fit: Option<ModelFit>, flat: bool, lambda: DVector<f64>) -> Self {
        let weights = lambda.map(|v| 1.0 / v.sqrt());
        Self {
            mode,
            fit,
            flat,
            lambda_reg: lambda,
            weights,
            usable: true,
        }
    }

    /// Pivot search, model fit and regularization in one step.
    ///
    /// A flat spectrum is an error unless `allow_flat`, in which case the
    /// constant spectrum is returned.
    pub fn fit(es: &Eigenspectrum, med_factor: f64, allow_flat: bool) -> Result<Self> {
        let pivot = find_pivot(es, med_factor)?;
        if pivot.flat {
            return if allow_flat {
                Self::flat(es)
            } else {
                Err(Error::FlatSpectrum(es.lambda(1)))
            };
        }
        let (alpha, beta) = fit_model(es, pivot.m)?;
        Self::regularized(es, pivot.m, alpha, beta)
    }

    /// Baseline weights `1/√λ_k` for `k ≤ r` and zero beyond.
    pub fn truncated(es: &Eigenspectrum) -> Self {
        let r = es.rank;
        let weights = DVector::from_fn(es.dim(), |k, _| if k < r { 1.0 / es.eigenvalues[k].sqrt() } else { 0.0 });
        Self {
            mode: SpectrumMode::TruncatedBaseline,
            fit: None,
            flat: false,
            lambda_reg: es.eigenvalues.clone(),
            weights,
            usable: r > 0,
        }
    }

    /// `k,lambda,lambda_reg,weight` rows (1-based `k`) with header.
    pub fn to_csv(&self, es: &Eigenspectrum) -> String {
        let f = crate::util::fmt_f64;
        let mut out = String::from("k,lambda,lambda_reg,weight\n");
        for k in 0..es.dim() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                k + 1,
                f(es.eigenvalues[k]),
                f(self.lambda_reg[k]),
                f(self.weights[k])
            ));
        }
        out
    }
}

/// Free-function form of [`SpectrumModel::regularized`].
pub fn regularize(es: &Eigenspectrum, m: usize, alpha: f64, beta: f64) -> Result<SpectrumModel> {
    SpectrumModel::regularized(es, m, alpha, beta)
}

/// Free-function form of [`SpectrumModel::truncated`].
pub fn truncated_weights(es: &Eigenspectrum) -> SpectrumModel {
    SpectrumModel::truncated(es)
}
