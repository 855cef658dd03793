//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, nonzero exit if
//! any criterion fails.

use std::collections::HashSet;
use std::fs;
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use wssda::dataset::{generate_synthetic, LabeledDataset, SplitSpec, SynthSpec};
use wssda::eval::{identification_sweep, roc_from_scores, verification_roc};
use wssda::extractor::{train, train_detailed, train_whole_class, TrainConfig};
use wssda::partition::{partition_class, partition_dataset, Strategy, TreeParams, DEFAULT_MAX_DEPTH};
use wssda::spectrum::{eig_symmetric_full, Eigenspectrum, SpectrumMode, SpectrumModel};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fro(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Eigenvalues by cyclic Jacobi rotations.
fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut a = a.clone();
    for _ in 0..200 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-28 * fro(&a).powi(2).max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)] == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

fn eigen_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_rec, mut worst_res, mut worst_val) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let l = rng.random_range(1..=20);
        let rank = rng.random_range(1..=l);
        let b = DMatrix::from_fn(l, rank, |_, _| gauss(&mut rng));
        let s = &b * b.transpose();
        let es = eig_symmetric_full(&s).map_err(|e| e.to_string())?;
        let psi = &es.eigenvectors;
        let lam = DMatrix::from_diagonal(&es.eigenvalues);
        let norm = fro(&s);
        worst_rec = worst_rec.max(fro(&(psi * lam * psi.transpose() - &s)) / norm);
        for k in 0..l {
            let v = psi.column(k);
            let r = &s * v - v * es.eigenvalues[k];
            worst_res = worst_res.max(r.norm() / norm);
        }
        for (a, b) in es.eigenvalues.iter().zip(jacobi_eigenvalues(&s)) {
            worst_val = worst_val.max((a - b.max(0.0)).abs() / norm);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_rec <= 1e-8 && worst_res <= 1e-8 && worst_val <= 1e-8 && secs < 1.0,
        format!("reconstruction {worst_rec:.1e}, residual {worst_res:.1e}, vs Jacobi {worst_val:.1e}, {secs:.3}s"),
    )
}

fn model_anchors() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..100 {
        let r = rng.random_range(3..=40);
        let zeros = rng.random_range(0..=10);
        let mut v: Vec<f64> = Vec::with_capacity(r + zeros);
        let mut x = rng.random_range(1.0..1e4);
        for _ in 0..r {
            v.push(x);
            x *= rng.random_range(0.3..0.999);
        }
        v.extend(std::iter::repeat_n(0.0, zeros));
        let es = Eigenspectrum::from_eigenvalues(&v).map_err(|e| e.to_string())?;
        let model = SpectrumModel::fit(&es, 1.0, false).map_err(|e| format!("case {case}: {e}"))?;
        let fit = model.fit.ok_or(format!("case {case}: no fit"))?;
        let lam = &model.lambda_reg;
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        let model_at = |k: usize| fit.alpha / (k as f64 + fit.beta);
        if rel(model_at(1), v[0]) > 1e-12 || rel(model_at(fit.m), v[fit.m - 1]) > 1e-12 {
            return Err(format!("case {case}: model misses an anchor"));
        }
        if rel(lam[0], v[0]) > 1e-12 || rel(lam[fit.m - 1], v[fit.m - 1]) > 1e-12 {
            return Err(format!("case {case}: regularized spectrum misses an anchor"));
        }
        if lam.as_slice().windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("case {case}: regularized spectrum increases"));
        }
        if model.weights.as_slice().windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("case {case}: weights decrease"));
        }
    }
    Ok("100 spectra: anchors within 1e-12, monotone".into())
}

fn whitening_identity() -> Outcome {
    let mut checked = (0, 0, 0);
    let (mut worst_head, mut worst_tail, mut band_min) = (0.0f64, 0.0f64, f64::INFINITY);
    // (value, seed, k, m, λ_k, λ̃_k)
    let mut band_max = (0.0f64, 0u64, 0usize, 0usize, 0.0f64, 0.0f64);
    for seed in 0..10u64 {
        let spec = SynthSpec {
            samples_per_subclass: if seed % 2 == 0 { 2 } else { 5 },
            seed,
            ..SynthSpec::default()
        };
        let ds = generate_synthetic(&spec).map_err(|e| e.to_string())?;
        let part = partition_dataset(&ds, &TreeParams::new(2).with_seed(seed), Strategy::KMeans).map_err(|e| e.to_string())?;
        let t = train_detailed(&ds, &part, &TrainConfig::with_features(5)).map_err(|e| e.to_string())?;
        let m = t.spectrum_model.fit.ok_or("no model fit")?.m;
        let r = t.eigenspectrum.rank;
        let psi = &t.whitening;
        let diag = (psi.transpose() * &t.scatter.matrix * psi).diagonal();
        for k in 1..=30 {
            let v = diag[k - 1];
            if k < m {
                worst_head = worst_head.max((v - 1.0).abs());
                checked.0 += 1;
            } else if k <= r {
                if v > band_max.0 {
                    band_max = (v, seed, k, m, t.eigenspectrum.lambda(k), t.spectrum_model.lambda_reg[k - 1]);
                }
                band_min = band_min.min(v);
                checked.1 += 1;
            } else {
                worst_tail = worst_tail.max(v.abs());
                checked.2 += 1;
            }
        }
    }
    let (v, seed, k, m, lam, lam_reg) = band_max;
    check(
        worst_head <= 1e-6 && v <= 1.0 + 1e-12 && band_min > 0.0 && worst_tail <= 1e-10 && checked.2 > 0,
        format!(
            "k<m: max|d-1| {worst_head:.1e} ({} entries); m<=k<=r: in [{band_min:.3}, {v:.3}] ({}), max at seed {seed} k={k} m={m} \
             (lambda {lam:.4e} > model {lam_reg:.4e}); k>r: max {worst_tail:.1e} ({})",
            checked.0, checked.1, checked.2
        ),
    )
}

fn random_dataset(rng: &mut ChaCha8Rng) -> LabeledDataset {
    let c = rng.random_range(2..6);
    let l = rng.random_range(2..8);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for class in 0..c {
        let m = rng.random_range(1..25);
        let scale = rng.random_range(0.1..5.0);
        for _ in 0..m {
            rows.extend((0..l).map(|_| scale * gauss(rng)));
            labels.push(class);
        }
    }
    LabeledDataset::new(DMatrix::from_row_slice(labels.len(), l, &rows), labels, None).unwrap()
}

fn variance_decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut classes = 0;
    for case in 0..20 {
        let ds = random_dataset(&mut rng);
        for strategy in Strategy::ALL_TREES {
            let h = [1, 2, 4][case % 3];
            let part = partition_dataset(&ds, &TreeParams::new(h).with_seed(case as u64), strategy).map_err(|e| e.to_string())?;
            let groups = part.groups();
            for (c, subclasses) in groups.iter().enumerate() {
                let sq = |idx: &[usize]| -> f64 {
                    let pts = ds.samples().select_rows(idx);
                    let mean = pts.row_mean();
                    pts.row_iter().map(|r| (r - &mean).norm_squared()).sum()
                };
                let all: Vec<usize> = subclasses.concat();
                let within_class = sq(&all);
                let within_sub: f64 = subclasses.iter().map(|s| sq(s)).sum();
                if within_sub > within_class * (1.0 + 1e-10) + 1e-300 {
                    return Err(format!("case {case} {strategy} class {c}: {within_sub} > {within_class}"));
                }
                classes += 1;
            }
        }
    }
    Ok(format!("{classes} class partitions over 4 strategies"))
}

/// Per-class identification error of a regularized and a truncated run on a
/// construction whose class means live only in the null space of `S_ws`.
fn null_space_value() -> Outcome {
    let (classes, train_per_class, probes_per_class, l, noise_dims, d) = (10, 3, 5, 60, 8, 4);
    let (mut reg_total, mut trunc_total) = (0.0, 0.0);
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let per_class = train_per_class + probes_per_class;
        let mut x = DMatrix::zeros(classes * per_class, l);
        let mut labels = Vec::new();
        for c in 0..classes {
            let center: Vec<f64> = (0..l).map(|k| if k < noise_dims { 0.0 } else { gauss(&mut rng) }).collect();
            for s in 0..per_class {
                let row = c * per_class + s;
                for k in 0..l {
                    x[(row, k)] = center[k] + if k < noise_dims { gauss(&mut rng) } else { 0.0 };
                }
                labels.push(c);
            }
        }
        let ds = LabeledDataset::new(x, labels, None).map_err(|e| e.to_string())?;
        let split = SplitSpec::first_per_class(&ds, train_per_class).map_err(|e| e.to_string())?;
        let gallery = ds.subset(&split.gallery).map_err(|e| e.to_string())?;
        let part = partition_dataset(&gallery, &TreeParams::new(2).with_seed(seed), Strategy::KMeans).map_err(|e| e.to_string())?;
        for (mode, total) in [(SpectrumMode::Regularized, &mut reg_total), (SpectrumMode::TruncatedBaseline, &mut trunc_total)] {
            let cfg = TrainConfig { mode, ..TrainConfig::with_features(d) };
            let rep = identification_sweep(&ds, std::slice::from_ref(&split), &[d], |_, _, _| train(&gallery, &part, &cfg))
                .map_err(|e| format!("{}: {e}", mode.as_str()))?;
            *total += rep.curve[0].1;
        }
    }
    let (reg, trunc) = (reg_total / 10.0, trunc_total / 10.0);
    check(reg < trunc, format!("d = {d}: regularized error {reg:.3} vs truncated {trunc:.3} over 10 seeds"))
}

fn heteroscedastic_advantage() -> Outcome {
    let start = Instant::now();
    let d_values = [5, 10, 20, 40];
    let seeds = 40u64;
    let (mut wins, mut losses) = (0u64, 0u64);
    let (mut sum1, mut sum2) = (0.0, 0.0);
    for seed in 0..seeds {
        let ds = generate_synthetic(&SynthSpec {
            class_count: 20,
            subclasses_per_class: 2,
            samples_per_subclass: 10,
            dim: 50,
            class_spread: 0.3,
            subclass_mean_spread: 12.0,
            within_scale: (0.1, 1.0),
            seed,
        })
        .map_err(|e| e.to_string())?;
        let split = SplitSpec::first_per_class(&ds, 10).map_err(|e| e.to_string())?;
        let gallery = ds.subset(&split.gallery).map_err(|e| e.to_string())?;
        let mut err = [0.0; 2];
        for (slot, h) in [1usize, 2].into_iter().enumerate() {
            let rep = identification_sweep(&ds, std::slice::from_ref(&split), &d_values, |_, _, d_max| {
                let part = partition_dataset(&gallery, &TreeParams::new(h).with_seed(seed), Strategy::KMeans)?;
                train(&gallery, &part, &TrainConfig::with_features(d_max))
            })
            .map_err(|e| e.to_string())?;
            err[slot] = rep.curve.iter().map(|p| p.1).sum::<f64>() / d_values.len() as f64;
        }
        sum1 += err[0];
        sum2 += err[1];
        if err[1] < err[0] {
            wins += 1;
        } else if err[1] > err[0] {
            losses += 1;
        }
    }
    let n = wins + losses;
    let p = sign_test_p(wins, n);
    let secs = start.elapsed().as_secs_f64();
    let (mean1, mean2) = (sum1 / seeds as f64, sum2 / seeds as f64);
    check(
        mean2 <= mean1 && p < 0.05 && secs < 60.0,
        format!("h=2 {mean2:.4} vs h=1 {mean1:.4}; {wins} wins, {losses} losses over {seeds} seeds; one-sided p = {p:.2e}; {secs:.1}s"),
    )
}

/// `P(X >= wins)` for `X ~ Binomial(n, 1/2)`.
fn sign_test_p(wins: u64, n: u64) -> f64 {
    let ln_choose = |n: u64, k: u64| -> f64 { (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum() };
    (wins..=n).map(|k| (ln_choose(n, k) - n as f64 * std::f64::consts::LN_2).exp()).sum()
}

fn partition_contracts() -> Outcome {
    let mut total = 0;
    for strategy in Strategy::ALL_TREES {
        let mut rng = ChaCha8Rng::seed_from_u64(7 + strategy as u64);
        for case in 0..1000 {
            let m = rng.random_range(1..60);
            let l = rng.random_range(1..6);
            let h = if strategy.is_binary_tree() { 1 << rng.random_range(0..=4) } else { rng.random_range(1..=9) };
            let mut points = DMatrix::from_fn(m, l, |_, _| gauss(&mut rng));
            if case % 7 == 0 && m > 1 {
                // duplicated rows
                let first = points.row(0).into_owned();
                for i in (0..m).step_by(2) {
                    points.set_row(i, &first);
                }
            }
            let params = TreeParams::new(h).with_seed(case);
            let mut part_rng = ChaCha8Rng::seed_from_u64(case);
            let part = partition_class(&points, &params, strategy, &mut part_rng).map_err(|e| format!("{strategy} case {case}: {e}"))?;
            let mut seen = HashSet::new();
            for s in &part.subsets {
                if s.is_empty() {
                    return Err(format!("{strategy} case {case}: empty leaf"));
                }
                for &i in s {
                    if i >= m || !seen.insert(i) {
                        return Err(format!("{strategy} case {case}: leaves overlap or index out of range"));
                    }
                }
            }
            let expected = if m < h { m } else { h };
            if seen.len() != m || part.subsets.len() != expected || part.deficient != (m < h) || part.depth > DEFAULT_MAX_DEPTH {
                return Err(format!(
                    "{strategy} case {case}: m={m} h={h} -> {} leaves, deficient {}, depth {}",
                    part.subsets.len(),
                    part.deficient,
                    part.depth
                ));
            }
            total += 1;
        }
    }
    Ok(format!("{total} classes: disjoint, covering, h leaves (m when deficient), depth <= 8"))
}

fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn roc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..50 {
        let dim = rng.random_range(2..6);
        let mut pairs = Vec::with_capacity(100);
        for j in 0..100 {
            let a: Vec<f64> = (0..dim).map(|_| gauss(&mut rng)).collect();
            let b: Vec<f64> = (0..dim).map(|_| gauss(&mut rng)).collect();
            pairs.push((a, b, j % 3 != 0));
        }
        let roc = verification_roc(&pairs).map_err(|e| e.to_string())?;
        let scores: Vec<(f64, bool)> = pairs.iter().map(|(a, b, s)| (cosine_similarity(a, b), *s)).collect();
        let mut thresholds: Vec<f64> = scores.iter().map(|s| s.0).collect();
        thresholds.sort_by(|x, y| y.total_cmp(x));
        thresholds.insert(0, f64::INFINITY);
        let n_same = scores.iter().filter(|s| s.1).count() as f64;
        let n_diff = scores.len() as f64 - n_same;
        let brute: Vec<(f64, f64)> = thresholds
            .iter()
            .map(|&t| {
                let tp = scores.iter().filter(|s| s.1 && s.0 >= t).count() as f64;
                let fp = scores.iter().filter(|s| !s.1 && s.0 >= t).count() as f64;
                (fp / n_diff, tp / n_same)
            })
            .collect();
        let got: Vec<(f64, f64)> = roc.points.iter().map(|p| (p.far, p.tar)).collect();
        if got != brute {
            return Err(format!("case {case}: ROC differs from brute-force counting"));
        }
    }
    let separated = roc_from_scores(&[0.9, 0.8, 0.75, 0.7], &[0.4, 0.3, 0.2]).map_err(|e| e.to_string())?.eer;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let same: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
    let diff: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
    let chance = roc_from_scores(&same, &diff).map_err(|e| e.to_string())?.eer;
    check(
        separated == 0.0 && (chance - 0.5).abs() < 0.02,
        format!("50 instances match brute force; separated EER {separated}, chance EER {chance:.4}"),
    )
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |args: &[&str]| -> Result<(), String> {
        let out = Command::new(env!("CARGO_BIN_EXE_wssda")).args(args).output().map_err(|e| e.to_string())?;
        if out.status.success() {
            Ok(())
        } else {
            Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr).trim()))
        }
    };
    let mut contents = Vec::new();
    for name in ["a", "b"] {
        let dir = root.path().join(name);
        let out = dir.to_str().unwrap();
        let model = dir.join("model.wssda");
        let base = ["--out-dir", out, "--seed", "17", "--classes", "8", "--dim", "20", "--strategy", "rp", "--h", "2"];
        run(&[&["train", "-d", "6"][..], &base].concat())?;
        run(&[&["eval-id", "-d", "2,4,6", "--split", "rotate:3", "--model", model.to_str().unwrap()][..], &base].concat())?;
        let files = ["model.wssda", "partition.csv", "spectrum.csv", "identification.csv"];
        contents.push(files.map(|f| fs::read(dir.join(f)).unwrap_or_default()));
    }
    check(
        contents[0] == contents[1] && contents[0].iter().all(|c| !c.is_empty()),
        "two train + eval-id runs produce byte-identical model and CSVs".into(),
    )
}

fn reduction() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let ds = generate_synthetic(&SynthSpec { seed, ..SynthSpec::default() }).map_err(|e| e.to_string())?;
        let cfg = TrainConfig::with_features(8);
        for strategy in Strategy::ALL_TREES {
            let part = partition_dataset(&ds, &TreeParams::new(1).with_seed(seed), strategy).map_err(|e| e.to_string())?;
            let u1 = train(&ds, &part, &cfg).map_err(|e| e.to_string())?.projection().clone();
            let uw = train_whole_class(&ds, &cfg).map_err(|e| e.to_string())?.extractor.projection().clone();
            worst = worst.max(fro(&(&u1 - &uw)) / fro(&uw));
        }
    }
    check(worst <= 1e-10, format!("max relative difference of U {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 eigendecomposition oracle", eigen_oracle),
        ("2 spectrum model anchors", model_anchors),
        ("3 whitening identity", whitening_identity),
        ("4 variance decomposition", variance_decomposition),
        ("5 null-space value", null_space_value),
        ("6 heteroscedastic advantage", heteroscedastic_advantage),
        ("7 partition contracts", partition_contracts),
        ("8 ROC/EER oracle", roc_oracle),
        ("9 determinism", determinism),
        ("10 h = 1 reduction", reduction),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
