//! Command-line experiments: `synth`, `partition`, `train`, `eval-id` and
//! `eval-verify`.
//!
//! Settings come from built-in defaults, then an optional flat `key = value`
//! file (`--config`), then command-line flags. Every command stages its files
//! and renames them into place only after all of them were produced.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataset::{generate_synthetic, load_csv, load_pgm_dir, make_gallery_probe_splits, CsvLayout, LabeledDataset, SplitSpec, SynthSpec};
use crate::error::{Error, Result};
use crate::eval::{identification_sweep, kfold_pairwise, load_pairs, pairs_to_csv, sample_pairs};
use crate::extractor::{train, train_detailed, FeatureExtractor, SecondStage, TrainConfig};
use crate::partition::{partition_dataset, Strategy, TreeParams, DEFAULT_MAX_DEPTH};
use crate::spectrum::SpectrumMode;
use crate::util::OutputBatch;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WSSDA_OUT_DIR";

pub const MODEL_FILE: &str = "model.wssda";
pub const PARTITION_FILE: &str = "partition.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const DATASET_FILE: &str = "dataset.csv";
pub const DATASET_CONFIG_FILE: &str = "dataset.cfg";
pub const PAIRS_FILE: &str = "pairs.csv";
pub const IDENTIFICATION_FILE: &str = "identification.csv";
pub const ROC_FILE: &str = "roc.csv";
pub const EER_FILE: &str = "eer.csv";

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv { path: PathBuf, layout: CsvLayout },
    PgmDir(PathBuf),
    Synth(SynthSpec),
}

/// How `eval-id` builds gallery/probe splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitRule {
    /// The first half (rounded up) of every class is the gallery.
    Half,
    /// The first `k` samples of every class.
    First(usize),
    /// `r` rotating single-sample galleries.
    Rotate(usize),
}

impl std::str::FromStr for SplitRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("split must be half, first:K or rotate:R, got {s:?}"));
        if s == "half" {
            return Ok(SplitRule::Half);
        }
        let (kind, n) = s.split_once(':').ok_or_else(bad)?;
        let n: usize = n.parse().map_err(|_| bad())?;
        match kind {
            "first" if n > 0 => Ok(SplitRule::First(n)),
            "rotate" if n > 0 => Ok(SplitRule::Rotate(n)),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for SplitRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitRule::Half => f.write_str("half"),
            SplitRule::First(k) => write!(f, "first:{k}"),
            SplitRule::Rotate(r) => write!(f, "rotate:{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub strategy: Strategy,
    pub h: usize,
    pub max_depth: usize,
    pub med_factor: f64,
    pub mode: SpectrumMode,
    pub second_stage: SecondStage,
    pub allow_flat: bool,
    /// Feature counts; `train` uses the largest.
    pub d: Vec<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub model: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub split: SplitRule,
    pub folds: usize,
    pub far_grid: usize,
    /// Verification pairs written by `synth`; 0 writes none.
    pub pair_count: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Synth(SynthSpec::default()),
            strategy: Strategy::KMeans,
            h: 2,
            max_depth: DEFAULT_MAX_DEPTH,
            med_factor: 1.0,
            mode: SpectrumMode::Regularized,
            second_stage: SecondStage::TotalSubclass,
            allow_flat: false,
            d: vec![10],
            seed: 0,
            out_dir: PathBuf::from("."),
            model: None,
            pairs: None,
            split: SplitRule::Half,
            folds: 1,
            far_grid: 101,
            pair_count: 0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid value {value:?} for {key}"))),
    }
}

impl ExperimentConfig {
    fn synth_mut(&mut self) -> &mut SynthSpec {
        if !matches!(self.source, DataSource::Synth(_)) {
            self.source = DataSource::Synth(SynthSpec::default());
        }
        match &mut self.source {
            DataSource::Synth(s) => s,
            _ => unreachable!(),
        }
    }

    /// Applies one setting. Keys accept `-` or `_` as separator.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "data" => {
                let layout = match &self.source {
                    DataSource::Csv { layout, .. } => *layout,
                    _ => CsvLayout::LabelsOnly,
                };
                self.source = DataSource::Csv { path: value.into(), layout };
            }
            "subclass_column" => {
                let with = parse_bool(k, value)?;
                if let DataSource::Csv { layout, .. } = &mut self.source {
                    *layout = if with { CsvLayout::WithSubclass } else { CsvLayout::LabelsOnly };
                } else if with {
                    self.source = DataSource::Csv {
                        path: PathBuf::new(),
                        layout: CsvLayout::WithSubclass,
                    };
                }
            }
            "pgm_dir" => self.source = DataSource::PgmDir(value.into()),
            "classes" => self.synth_mut().class_count = parse(k, value)?,
            "subclasses" => self.synth_mut().subclasses_per_class = parse(k, value)?,
            "samples_per_subclass" => self.synth_mut().samples_per_subclass = parse(k, value)?,
            "dim" => self.synth_mut().dim = parse(k, value)?,
            "class_spread" => self.synth_mut().class_spread = parse(k, value)?,
            "subclass_spread" => self.synth_mut().subclass_mean_spread = parse(k, value)?,
            "within_lo" => self.synth_mut().within_scale.0 = parse(k, value)?,
            "within_hi" => self.synth_mut().within_scale.1 = parse(k, value)?,
            "strategy" => self.strategy = value.parse()?,
            "h" => self.h = parse(k, value)?,
            "max_depth" => self.max_depth = parse(k, value)?,
            "med_factor" => self.med_factor = parse(k, value)?,
            "mode" => self.mode = value.parse()?,
            "second_stage" => self.second_stage = value.parse()?,
            "allow_flat" => self.allow_flat = parse_bool(k, value)?,
            "d" => {
                self.d = value
                    .split(',')
                    .map(|t| parse(k, t.trim()))
                    .collect::<Result<Vec<usize>>>()?;
            }
            "seed" => self.seed = parse(k, value)?,
            "out_dir" => self.out_dir = value.into(),
            "model" => self.model = Some(value.into()),
            "pairs" => self.pairs = Some(value.into()),
            "split" => self.split = value.parse()?,
            "folds" => self.folds = parse(k, value)?,
            "far_grid" => self.far_grid = parse(k, value)?,
            "pair_count" => self.pair_count = parse(k, value)?,
            _ => return Err(Error::Config(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(path, format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.h == 0 {
            return Err(Error::Config("h must be at least 1".into()));
        }
        if self.d.is_empty() || self.d.contains(&0) {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if !(self.med_factor > 0.0 && self.med_factor.is_finite()) {
            return Err(Error::Config(format!("med_factor must be positive, got {}", self.med_factor)));
        }
        if self.folds == 0 {
            return Err(Error::Config("folds must be at least 1".into()));
        }
        match &self.source {
            DataSource::Csv { path, .. } | DataSource::PgmDir(path) if !path.exists() => {
                return Err(Error::Config(format!("dataset {} does not exist", path.display())));
            }
            DataSource::Synth(spec) => spec.validate()?,
            _ => {}
        }
        for p in self.model.iter().chain(&self.pairs) {
            if !p.exists() {
                return Err(Error::io(p, std::io::Error::from(std::io::ErrorKind::NotFound)));
            }
        }
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<LabeledDataset> {
        match &self.source {
            DataSource::Csv { path, layout } => load_csv(path, *layout),
            DataSource::PgmDir(path) => load_pgm_dir(path),
            DataSource::Synth(spec) => generate_synthetic(&SynthSpec { seed: self.seed, ..spec.clone() }),
        }
    }

    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            h: self.h,
            max_depth: self.max_depth,
            seed: self.seed,
        }
    }

    pub fn d_max(&self) -> usize {
        self.d.iter().copied().max().unwrap_or(1)
    }

    pub fn train_config(&self, d: usize) -> TrainConfig {
        TrainConfig {
            d,
            med_factor: self.med_factor,
            mode: self.mode,
            second_stage: self.second_stage,
            allow_flat: self.allow_flat,
        }
    }

    /// The synthetic-data settings and seed as a config file that regenerates the data.
    pub fn synth_echo(&self) -> Option<String> {
        let DataSource::Synth(s) = &self.source else {
            return None;
        };
        Some(format!(
            "classes = {}\nsubclasses = {}\nsamples_per_subclass = {}\ndim = {}\nclass_spread = {}\nsubclass_spread = {}\nwithin_lo = {}\nwithin_hi = {}\nseed = {}\n",
            s.class_count,
            s.subclasses_per_class,
            s.samples_per_subclass,
            s.dim,
            s.class_spread,
            s.subclass_mean_spread,
            s.within_scale.0,
            s.within_scale.1,
            self.seed
        ))
    }
}

#[derive(Parser, Debug)]
#[command(name = "wssda", version, about = "Whole-space subclass discriminant analysis experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset with ground-truth subclass labels.
    Synth(Overrides),
    /// Partition every class and write the assignment.
    Partition(Overrides),
    /// Train an extractor; writes the model, partition and spectrum.
    Train(Overrides),
    /// Identification error against feature count.
    EvalId(Overrides),
    /// Verification ROC and equal error rate over a pairs file.
    EvalVerify(Overrides),
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Flat key = value settings applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out_dir: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Headerless dataset CSV: class[,subclass],values...
    #[arg(long)]
    data: Option<String>,
    /// The dataset CSV carries a subclass column.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    subclass_column: Option<String>,
    /// Directory of class subdirectories holding PGM images.
    #[arg(long)]
    pgm_dir: Option<String>,
    #[arg(long)]
    classes: Option<String>,
    #[arg(long)]
    subclasses: Option<String>,
    #[arg(long)]
    samples_per_subclass: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    class_spread: Option<String>,
    #[arg(long)]
    subclass_spread: Option<String>,
    #[arg(long)]
    within_lo: Option<String>,
    #[arg(long)]
    within_hi: Option<String>,
    /// kd, rp, pca, kmeans or provided.
    #[arg(long)]
    strategy: Option<String>,
    /// Subclasses per class.
    #[arg(short = 'H', long = "h")]
    h: Option<String>,
    #[arg(long)]
    max_depth: Option<String>,
    #[arg(long)]
    med_factor: Option<String>,
    /// regularized or truncated.
    #[arg(long)]
    mode: Option<String>,
    /// ts or bs.
    #[arg(long)]
    second_stage: Option<String>,
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    allow_flat: Option<String>,
    /// Feature count, or a comma-separated sweep.
    #[arg(short, long)]
    d: Option<String>,
    /// Trained model; `eval-id` retrains per split without it.
    #[arg(long)]
    model: Option<String>,
    /// Pairs file with rows index_a,index_b,same|diff.
    #[arg(long)]
    pairs: Option<String>,
    /// half, first:K or rotate:R.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    #[arg(long)]
    far_grid: Option<String>,
    /// Verification pairs to write alongside a synthetic dataset.
    #[arg(long)]
    pair_count: Option<String>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(p) = &self.config {
            cfg.apply_file(p)?;
        }
        let flags: [(&str, &Option<String>); 26] = [
            ("seed", &self.seed),
            ("data", &self.data),
            ("subclass_column", &self.subclass_column),
            ("pgm_dir", &self.pgm_dir),
            ("classes", &self.classes),
            ("subclasses", &self.subclasses),
            ("samples_per_subclass", &self.samples_per_subclass),
            ("dim", &self.dim),
            ("class_spread", &self.class_spread),
            ("subclass_spread", &self.subclass_spread),
            ("within_lo", &self.within_lo),
            ("within_hi", &self.within_hi),
            ("strategy", &self.strategy),
            ("h", &self.h),
            ("max_depth", &self.max_depth),
            ("med_factor", &self.med_factor),
            ("mode", &self.mode),
            ("second_stage", &self.second_stage),
            ("allow_flat", &self.allow_flat),
            ("d", &self.d),
            ("model", &self.model),
            ("pairs", &self.pairs),
            ("split", &self.split),
            ("folds", &self.folds),
            ("far_grid", &self.far_grid),
            ("pair_count", &self.pair_count),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        // the env/flag output directory outranks the config file
        if let Some(dir) = &self.out_dir {
            cfg.set("out_dir", dir)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

fn prepare_out_dir(cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))
}

pub fn cmd_synth(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let echo = cfg
        .synth_echo()
        .ok_or_else(|| Error::Config("synth needs synthetic dataset settings, not a data file".into()))?;
    let ds = cfg.load_dataset()?;
    prepare_out_dir(cfg)?;
    let mut batch = OutputBatch::default();
    batch.stage(out_path(cfg, DATASET_FILE), ds.to_csv().as_bytes())?;
    batch.stage(out_path(cfg, DATASET_CONFIG_FILE), echo.as_bytes())?;
    if cfg.pair_count > 0 {
        let pairs = sample_pairs(&ds, cfg.pair_count, cfg.seed)?;
        batch.stage(out_path(cfg, PAIRS_FILE), pairs_to_csv(&pairs).as_bytes())?;
    }
    batch.commit()
}

pub fn cmd_partition(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let ds = cfg.load_dataset()?;
    let part = partition_dataset(&ds, &cfg.tree_params(), cfg.strategy)?;
    prepare_out_dir(cfg)?;
    let mut batch = OutputBatch::default();
    batch.stage(out_path(cfg, PARTITION_FILE), part.to_csv().as_bytes())?;
    batch.commit()
}

pub fn cmd_train(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let ds = cfg.load_dataset()?;
    let part = partition_dataset(&ds, &cfg.tree_params(), cfg.strategy)?;
    let t = train_detailed(&ds, &part, &cfg.train_config(cfg.d_max()))?;
    prepare_out_dir(cfg)?;
    let mut batch = OutputBatch::default();
    batch.stage(out_path(cfg, MODEL_FILE), &t.extractor.to_bytes())?;
    batch.stage(out_path(cfg, PARTITION_FILE), part.to_csv().as_bytes())?;
    batch.stage(out_path(cfg, SPECTRUM_FILE), t.spectrum_model.to_csv(&t.eigenspectrum).as_bytes())?;
    batch.commit()
}

fn splits_for(ds: &LabeledDataset, rule: SplitRule) -> Result<Vec<SplitSpec>> {
    match rule {
        SplitRule::Half => {
            let k = ds.class_sizes().into_iter().min().unwrap_or(0).div_ceil(2);
            Ok(vec![SplitSpec::first_per_class(ds, k)?])
        }
        SplitRule::First(k) => Ok(vec![SplitSpec::first_per_class(ds, k)?]),
        SplitRule::Rotate(r) => make_gallery_probe_splits(ds, r),
    }
}

pub fn cmd_eval_id(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let ds = cfg.load_dataset()?;
    let splits = splits_for(&ds, cfg.split)?;
    let model = cfg.model.as_ref().map(FeatureExtractor::load).transpose()?;
    if let Some(m) = &model {
        if cfg.d_max() > m.features() {
            return Err(Error::Config(format!(
                "d = {} exceeds the model's {} features",
                cfg.d_max(),
                m.features()
            )));
        }
    }
    let report = identification_sweep(&ds, &splits, &cfg.d, |_, split, d_max| match &model {
        Some(m) => Ok(m.clone()),
        None => {
            let gallery = ds.subset(&split.gallery)?;
            let part = partition_dataset(&gallery, &cfg.tree_params(), cfg.strategy)?;
            train(&gallery, &part, &cfg.train_config(d_max))
        }
    })?;
    prepare_out_dir(cfg)?;
    let mut batch = OutputBatch::default();
    batch.stage(out_path(cfg, IDENTIFICATION_FILE), report.to_csv().as_bytes())?;
    batch.commit()
}

pub fn cmd_eval_verify(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let model_path = cfg.model.as_ref().ok_or_else(|| Error::Config("eval-verify needs --model".into()))?;
    let pairs_path = cfg.pairs.as_ref().ok_or_else(|| Error::Config("eval-verify needs --pairs".into()))?;
    let ds = cfg.load_dataset()?;
    let model = FeatureExtractor::load(model_path)?;
    let pairs = load_pairs(pairs_path)?;
    if let Some(p) = pairs.iter().find(|p| p.a >= ds.len() || p.b >= ds.len()) {
        return Err(Error::Protocol(format!(
            "pair ({}, {}) references a sample outside [0, {})",
            p.a,
            p.b,
            ds.len()
        )));
    }
    let z = model.extract_rows(ds.samples())?;
    let row = |i: usize| z.row(i).iter().copied().collect::<Vec<f64>>();
    let features: Vec<(Vec<f64>, Vec<f64>, bool)> = pairs.iter().map(|p| (row(p.a), row(p.b), p.same)).collect();
    let report = kfold_pairwise(&features, cfg.folds, cfg.far_grid)?;
    prepare_out_dir(cfg)?;
    let mut batch = OutputBatch::default();
    let roc = if cfg.folds == 1 { report.folds[0].to_csv() } else { report.roc_csv() };
    batch.stage(out_path(cfg, ROC_FILE), roc.as_bytes())?;
    batch.stage(out_path(cfg, EER_FILE), report.eer_csv().as_bytes())?;
    batch.commit()
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on failure, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Synth(o) => o.resolve().and_then(|c| cmd_synth(&c)),
        Command::Partition(o) => o.resolve().and_then(|c| cmd_partition(&c)),
        Command::Train(o) => o.resolve().and_then(|c| cmd_train(&c)),
        Command::EvalId(o) => o.resolve().and_then(|c| cmd_eval_id(&c)),
        Command::EvalVerify(o) => o.resolve().and_then(|c| cmd_eval_verify(&c)),
    };
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_layering() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("exp.cfg");
        fs::write(&f, "# experiment\nh = 4\nstrategy = pca\nd = 1, 2,4\nmed-factor=0.5\n").unwrap();
        let o = Overrides {
            config: Some(f),
            h: Some("3".into()),
            ..Default::default()
        };
        let cfg = o.resolve().unwrap();
        assert_eq!(cfg.h, 3);
        assert_eq!(cfg.strategy, Strategy::PcaTree);
        assert_eq!(cfg.d, vec![1, 2, 4]);
        assert_eq!(cfg.med_factor, 0.5);
    }

    #[test]
    fn config_errors() {
        let mut cfg = ExperimentConfig::default();
        assert!(matches!(cfg.set("bogus", "1"), Err(Error::Config(_))));
        assert!(matches!(cfg.set("h", "x"), Err(Error::Config(_))));
        cfg.set("h", "0").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = ExperimentConfig::default();
        cfg.set("data", "/nonexistent/data.csv").unwrap();
        assert!(cfg.validate().is_err());

        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("bad.cfg");
        fs::write(&f, "h = 2\nno separator\n").unwrap();
        let err = ExperimentConfig::default().apply_file(&f).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn split_rules() {
        assert_eq!("half".parse::<SplitRule>().unwrap(), SplitRule::Half);
        assert_eq!("first:3".parse::<SplitRule>().unwrap(), SplitRule::First(3));
        assert_eq!("rotate:2".parse::<SplitRule>().unwrap(), SplitRule::Rotate(2));
        assert!("first:0".parse::<SplitRule>().is_err());
        assert!("thirds".parse::<SplitRule>().is_err());
    }

    #[test]
    fn synth_echo_regenerates() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("classes", "3").unwrap();
        cfg.set("seed", "11").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("echo.cfg");
        fs::write(&f, cfg.synth_echo().unwrap()).unwrap();
        let mut again = ExperimentConfig::default();
        again.apply_file(&f).unwrap();
        assert_eq!(again.load_dataset().unwrap(), cfg.load_dataset().unwrap());
    }
}
