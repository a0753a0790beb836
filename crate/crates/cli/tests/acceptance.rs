//! Acceptance suite: one PASS/FAIL/SKIPPED line per criterion.
//!
//! Criteria 1-9 need nothing but the shipped fixtures. Criteria 10-15 run
//! the full pipeline on the Kaggle liver patient file named by
//! `STACKLIVER_LDPD` and are skipped when it is unset.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use stackliver::evaluation::{basic_metrics, cohen_kappa, roc_auc, ConfusionMatrix};
use stackliver::explain::{lime_explain, log_odds, morris_ee, shapley_exact, LimeParams, MorrisParams, TrainStats};
use stackliver::learners::gbdt::leaf_value;
use stackliver::learners::tree::Node;
use stackliver::learners::{gbdt_split_gain, CartParams, GbdtParams, Matrix, MlpParams};
use stackliver::numerics::{f_sf, logistic, one_way_anova, reg_inc_beta, Rng};
use stackliver::stacking::{oof_predictions, stack_folds, StackConfig, StackSeeds};
use stackliver::synth::gaussian_mixture;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

enum Status {
    Pass,
    Fail,
    Skipped,
}

fn report(n: u32, title: &str, f: impl FnOnce() -> Outcome) -> Status {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail, status) = match outcome {
        Ok(d) => ("PASS", d, Status::Pass),
        Err(d) => ("FAIL", d, Status::Fail),
    };
    println!("criterion {n:>2} {tag:<7} {title} ({secs:.1}s): {detail}");
    status
}

fn skipped(n: u32, title: &str) -> Status {
    println!("criterion {n:>2} SKIPPED {title}: set STACKLIVER_LDPD to the liver patient CSV to run");
    Status::Skipped
}

// ---------------------------------------------------------------------------
// 1-7: numerical properties
// ---------------------------------------------------------------------------

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = Rng::new(1);
    let mut worst_auc = 0.0f64;
    for _ in 0..1000 {
        let n = 2 + rng.below(499);
        let mut y: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
        y[0] = 0;
        y[1] = 1;
        let coarse = rng.below(2) == 0;
        let s: Vec<f64> = (0..n)
            .map(|_| {
                let v = rng.normal();
                if coarse {
                    (v * 4.0).round() / 4.0
                } else {
                    v
                }
            })
            .collect();
        let d = (roc_auc(&y, &s).map_err(|e| e.to_string())? - oracles::auc_all_pairs(&y, &s)).abs();
        worst_auc = worst_auc.max(d);
    }
    ensure!(worst_auc <= 1e-12, "AUC off by {worst_auc:e}");

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut cell = || if rng.below(10) == 0 { 0 } else { rng.below(300) as u64 };
        let mut cm = ConfusionMatrix {
            tn: cell(),
            fp: cell(),
            fn_: cell(),
            tp: cell(),
        };
        if cm.total() == 0 {
            cm.tn = 1;
        }
        let k = cohen_kappa(&cm).unwrap().kappa;
        worst = worst.max((k - oracles::kappa_2x2(cm.tn, cm.fp, cm.fn_, cm.tp)).abs());
        let m = basic_metrics(&cm).unwrap();
        let pos = oracles::prf(cm.tp, cm.fp, cm.fn_);
        let neg = oracles::prf(cm.tn, cm.fn_, cm.fp);
        let n = cm.total() as f64;
        let (w1, w0) = ((cm.tp + cm.fn_) as f64 / n, (cm.tn + cm.fp) as f64 / n);
        let pairs = [
            (m.positive.precision, pos.0),
            (m.positive.recall, pos.1),
            (m.positive.f1, pos.2),
            (m.negative.precision, neg.0),
            (m.negative.recall, neg.1),
            (m.negative.f1, neg.2),
            (m.macro_avg.precision, (pos.0 + neg.0) / 2.0),
            (m.macro_avg.recall, (pos.1 + neg.1) / 2.0),
            (m.macro_avg.f1, (pos.2 + neg.2) / 2.0),
            (m.weighted.precision, w1 * pos.0 + w0 * neg.0),
            (m.weighted.recall, w1 * pos.1 + w0 * neg.1),
            (m.weighted.f1, w1 * pos.2 + w0 * neg.2),
        ];
        for (a, b) in pairs {
            worst = worst.max((a - b).abs());
        }
    }
    ensure!(worst <= 1e-12, "kappa/PRF off by {worst:e}");
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.1}s");
    Ok(format!("max AUC error {worst_auc:e}, max kappa/PRF error {worst:e}"))
}

fn special_functions() -> Outcome {
    let start = Instant::now();
    let mut rng = Rng::new(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = 0.1 + rng.next_f64() * 50.0;
        let b = 0.1 + rng.next_f64() * 50.0;
        let x = rng.next_f64();
        let s = reg_inc_beta(a, b, x).unwrap() + reg_inc_beta(b, a, 1.0 - x).unwrap();
        worst = worst.max((s - 1.0).abs());
    }
    ensure!(worst <= 1e-12, "reflection off by {worst:e}");
    let p = f_sf(1.5, 1, 4).unwrap();
    ensure!((p - oracles::F_SF_1_5_1_4).abs() < 1e-3, "f_sf(1.5,1,4) = {p}");
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 5.0, "took {secs:.1}s");
    Ok(format!("reflection error {worst:e}, f_sf(1.5,1,4) = {p:.6}"))
}

fn anova_properties() -> Outcome {
    let r = one_way_anova("x", &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0], &[0, 0, 0, 1, 1, 1]).unwrap();
    ensure!((r.f_stat - 1.5).abs() <= 1e-12, "F = {}", r.f_stat);
    let mut rng = Rng::new(3);
    for case in 0..100 {
        let n = 6 + rng.below(200);
        let mut y: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
        y[0] = 0;
        y[1] = 1;
        let effect = rng.normal();
        let v: Vec<f64> = y.iter().map(|&c| effect * f64::from(c) + rng.normal()).collect();
        let base = one_way_anova("x", &v, &y).unwrap().f_stat;
        let shift = rng.uniform(-1e3, 1e3);
        let c = rng.uniform(0.01, 100.0) * if rng.below(2) == 0 { -1.0 } else { 1.0 };
        let shifted = one_way_anova("x", &v.iter().map(|x| x + shift).collect::<Vec<_>>(), &y).unwrap().f_stat;
        let scaled = one_way_anova("x", &v.iter().map(|x| c * x).collect::<Vec<_>>(), &y).unwrap().f_stat;
        let tol = base.max(1.0);
        ensure!((shifted - base).abs() <= 1e-7 * tol, "case {case}: shift changed F {base} -> {shifted}");
        ensure!((scaled - base).abs() <= 1e-9 * tol, "case {case}: scale changed F {base} -> {scaled}");
    }
    Ok("F = 1.5; shift/scale invariant on 100 datasets".into())
}

fn same_tree(node: &Node, oracle: &oracles::OracleTree) -> bool {
    use oracles::OracleTree;
    match (node, oracle) {
        (Node::Leaf { value, .. }, OracleTree::Leaf(v)) => value == v,
        (
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            },
            OracleTree::Split {
                feature: f,
                threshold: t,
                left: l,
                right: r,
            },
        ) => feature == f && threshold == t && same_tree(left, l) && same_tree(right, r),
        _ => false,
    }
}

fn boosting_and_trees() -> Outcome {
    let mut rng = Rng::new(4);
    let xor = {
        let mut d = Vec::new();
        let mut y = Vec::new();
        for _ in 0..300 {
            let (a, b) = (rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            d.extend([a, b]);
            y.push(u8::from((a > 0.0) != (b > 0.0)));
        }
        (Matrix::new(300, 2, d), y)
    };
    let noisy = {
        let (x, mut y) = gaussian_mixture(300, 4, 1, 0.5, 5);
        y.iter_mut().for_each(|v| {
            if rng.next_f64() < 0.2 {
                *v = 1 - *v
            }
        });
        (x, y)
    };
    let params = GbdtParams {
        subsample: 1.0,
        colsample: 1.0,
        ..GbdtParams::base()
    };
    for (i, (x, y)) in [gaussian_mixture(300, 5, 3, 2.0, 6), xor, noisy].iter().enumerate() {
        let m = params.fit(x, y, &mut Rng::new(0)).map_err(|e| e.to_string())?;
        ensure!(m.train_loss.len() == 151, "dataset {i}: {} losses", m.train_loss.len());
        if let Some(w) = m.train_loss.windows(2).find(|w| w[1] > w[0]) {
            return Err(format!("dataset {i}: loss rose {} -> {}", w[0], w[1]));
        }
    }
    ensure!(gbdt_split_gain(1.0, 1.0, -1.0, 1.0, 1.0, 0.0) == 0.5, "split gain example");
    ensure!(leaf_value(2.0, 3.0, 1.0) == -0.5, "leaf value example");

    let rows: Vec<Vec<f64>> = (0..6).map(|_| vec![(rng.normal() * 2.0).round(), rng.normal()]).collect();
    let x = Matrix::from_rows(&rows);
    let idx: Vec<usize> = (0..6).collect();
    for mask in 0u32..64 {
        let y: Vec<u8> = (0..6).map(|i| (mask >> i & 1) as u8).collect();
        let tree = CartParams::default().fit(&x, &y, &mut Rng::new(0)).map_err(|e| e.to_string())?;
        ensure!(same_tree(&tree.root, &oracles::cart_exhaustive(&rows, &y, &idx)), "CART differs for labels {y:?}");
    }
    Ok("loss nonincreasing on 3 datasets; gain/leaf exact; CART = oracle on 64 labelings".into())
}

fn mlp_gradient() -> Outcome {
    const H: f64 = 1e-5;
    const ALPHA: f64 = 1e-3;
    let params = MlpParams {
        hidden: vec![6, 4],
        ..MlpParams::default()
    };
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let mut rng = Rng::new(500 + seed);
        let mut model = params.init(3, &mut rng).unwrap();
        for l in &mut model.layers {
            l.bias.iter_mut().for_each(|b| *b = rng.uniform(-0.5, 0.5));
        }
        let x = Matrix::new(12, 3, (0..36).map(|_| rng.normal()).collect());
        let y: Vec<u8> = (0..12).map(|i| (i % 2) as u8).collect();
        let (_, grads) = model.loss_and_grad(&x, &y, ALPHA).unwrap();
        for (li, g) in grads.iter().enumerate() {
            let analytic: Vec<f64> = g.weights.iter().chain(&g.bias).copied().collect();
            let mut numeric = Vec::with_capacity(analytic.len());
            let n_w = model.layers[li].weights.len();
            for k in 0..analytic.len() {
                let probe = |delta: f64| {
                    let mut m = model.clone();
                    if k < n_w {
                        m.layers[li].weights[k] += delta;
                    } else {
                        m.layers[li].bias[k - n_w] += delta;
                    }
                    m.loss_and_grad(&x, &y, ALPHA).unwrap().0
                };
                numeric.push((probe(H) - probe(-H)) / (2.0 * H));
            }
            let err = oracles::relative_error(&analytic, &numeric);
            ensure!(err < 1e-6, "init {seed} layer {li}: relative error {err:e}");
            worst = worst.max(err);
        }
    }
    Ok(format!("max layer relative error {worst:e} over 10 inits"))
}

fn stacking_leakage() -> Outcome {
    let (x, y) = gaussian_mixture(150, 4, 2, 1.5, 7);
    let config = StackConfig {
        base_gbdt: GbdtParams {
            n_rounds: 20,
            ..GbdtParams::base()
        },
        ..StackConfig::default()
    };
    let seeds = StackSeeds::derive(42, config.k_folds);
    let (_, folds) = stack_folds(&y, config.k_folds, seeds.folds).map_err(|e| e.to_string())?;
    let mut count = vec![0; y.len()];
    folds.iter().flatten().for_each(|&i| count[i] += 1);
    ensure!(count.iter().all(|&c| c == 1), "folds are not a partition");
    let clean = oof_predictions(&x, &y, &folds, &config, &seeds.per_fold).map_err(|e| e.to_string())?;
    ensure!(clean.rows() == y.len(), "meta matrix has {} rows", clean.rows());
    for (i, fold) in folds.iter().enumerate() {
        let mut bad = y.clone();
        fold.iter().for_each(|&r| bad[r] = 1 - bad[r]);
        let dirty = oof_predictions(&x, &bad, &folds, &config, &seeds.per_fold).map_err(|e| e.to_string())?;
        ensure!(fold.iter().all(|&r| clean.row(r) == dirty.row(r)), "fold {i} meta-features moved");
    }
    Ok("meta-features of corrupted folds unchanged; OOF rows partitioned".into())
}

fn explainers() -> Outcome {
    let batch = |f: fn(&[f64]) -> f64| move |m: &Matrix| Ok(m.iter_rows().map(f).collect::<Vec<f64>>());

    let (x, y) = gaussian_mixture(400, 5, 3, 1.5, 8);
    let model = GbdtParams {
        n_rounds: 60,
        ..GbdtParams::base()
    }
    .fit(&x, &y, &mut Rng::new(1))
    .map_err(|e| e.to_string())?;
    let background = x.select_rows(&(0..20).collect::<Vec<_>>());
    let value = log_odds(&model);
    let mut worst = 0.0f64;
    for i in 100..200 {
        worst = worst.max(shapley_exact(&value, x.row(i), &background, 12).map_err(|e| e.to_string())?.efficiency_residual());
    }
    ensure!(worst < 1e-9, "efficiency residual {worst:e}");

    let add = shapley_exact(batch(|r| r[0] + r[1]), &[3.0, -2.0], &Matrix::zeros(1, 2), 12).unwrap();
    ensure!(add.phi == vec![3.0, -2.0], "additive example {:?}", add.phi);
    let int = shapley_exact(batch(|r| r[0] * r[1]), &[1.0, 1.0, 0.0], &Matrix::zeros(1, 3), 12).unwrap();
    ensure!(int.phi == vec![0.5, 0.5, 0.0], "interaction example {:?}", int.phi);

    let mut rng = Rng::new(9);
    let train = Matrix::new(500, 3, (0..1500).map(|_| rng.normal()).collect());
    let stats = TrainStats::from_matrix(&train).unwrap();
    let names: Vec<String> = ["x1", "x2", "x3"].map(String::from).to_vec();
    for seed in 0..5 {
        let e = lime_explain(batch(|r| logistic(3.0 * r[0])), &[0.1, -0.2, 0.3], 0, &names, &stats, &LimeParams::default(), &mut Rng::new(seed))
            .map_err(|e| e.to_string())?;
        let w: Vec<f64> = e.features.iter().map(|f| f.weight).collect();
        ensure!(w[0] > 0.0 && w[0] > w[1].abs() && w[0] > w[2].abs(), "seed {seed}: weights {w:?}");
    }

    let m = morris_ee(batch(|r| 2.0 * r[0]), &[(0.0, 1.0); 3], &names, &MorrisParams::default(), &mut Rng::new(10))
        .map_err(|e| e.to_string())?;
    let x1 = &m.features[0];
    ensure!(x1.mu_star == 2.0 && x1.sigma == 0.0, "Morris x1: mu* {} sigma {}", x1.mu_star, x1.sigma);
    Ok(format!("Shapley residual {worst:e}; examples exact; LIME x1 dominant on 5 seeds; Morris mu*=2, sigma=0"))
}

// ---------------------------------------------------------------------------
// 8-9: end to end on the fixtures
// ---------------------------------------------------------------------------

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn stackliver(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_stackliver"))
        .args(args)
        .env_remove("STACKLIVER_OUT")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("stackliver {args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Report files under `dir`, relative, excluding wall-clock timings, the
/// timestamped bundle and the stage cache.
fn report_files(dir: &Path) -> Vec<PathBuf> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
        for entry in fs::read_dir(dir).into_iter().flatten().flatten() {
            let path = entry.path();
            let rel = path.strip_prefix(root).unwrap().to_path_buf();
            if path.is_dir() {
                if rel != Path::new("cache") {
                    walk(root, &path, out);
                }
            } else if !matches!(rel.to_str(), Some("timings.json" | "model.json")) {
                out.push(rel);
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = fixture("demo.json");
    let config = config.to_str().unwrap();
    let dirs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, threads) in dirs.iter().zip(["1", "1", "8"]) {
        stackliver(&["run-all", "--config", config, "--out", dir.to_str().unwrap(), "--threads", threads, "--no-cache"])?;
    }
    let files = report_files(&dirs[0]);
    ensure!(files.len() >= 10, "only {} reports", files.len());
    for other in &dirs[1..] {
        ensure!(report_files(other) == files, "report sets differ");
        for f in &files {
            let a = fs::read(dirs[0].join(f)).map_err(|e| e.to_string())?;
            let b = fs::read(other.join(f)).map_err(|e| e.to_string())?;
            ensure!(a == b, "{} differs in {}", f.display(), other.display());
        }
    }
    let mut preds = Vec::new();
    for dir in [&dirs[0], &dirs[2]] {
        let out = dir.join("predictions.csv");
        stackliver(&[
            "predict",
            "--bundle",
            dir.join("model.json").to_str().unwrap(),
            "--data",
            fixture("demo.csv").to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ])?;
        preds.push(fs::read(out).map_err(|e| e.to_string())?);
        let mut bundle = read_json(&dir.join("model.json"))?;
        bundle["provenance"]["created_unix"] = Value::Null;
        bundle["config"]["output"] = Value::Null;
        preds.push(serde_json::to_vec(&bundle).unwrap());
    }
    ensure!(preds[0] == preds[2], "--threads 8 predictions differ");
    ensure!(preds[1] == preds[3], "--threads 8 model differs");
    Ok(format!("{} reports byte-identical across 3 runs; threads 8 predictions identical", files.len()))
}

fn mixture_end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tmp.path().join("mix");
    let start = Instant::now();
    stackliver(&["run-all", "--config", fixture("mixture.json").to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-cache"])?;
    let secs = start.elapsed().as_secs_f64();
    let metrics = read_json(&out.join("metrics.json"))?;
    let acc = |m: &str| metrics["models"][m]["test"]["accuracy"].as_f64();
    let stack = acc("stack").ok_or("no stack accuracy")?;
    let models = metrics["models"].as_object().ok_or("no models")?;
    let (best_name, best) = models
        .keys()
        .filter(|k| *k != "stack")
        .filter_map(|k| acc(k).map(|a| (k.clone(), a)))
        .fold((String::new(), f64::MIN), |b, c| if c.1 > b.1 { c } else { b });
    ensure!(!best_name.is_empty(), "no baseline models in metrics.json");
    ensure!(stack >= best - 0.01, "stack {stack:.4} < best base {best_name} {best:.4} - 0.01");
    ensure!(stack >= 0.95, "stack accuracy {stack:.4}");
    ensure!(secs < 60.0, "run-all took {secs:.1}s");
    Ok(format!("stack {stack:.4}, best base {best_name} {best:.4}, run-all {secs:.1}s"))
}

// ---------------------------------------------------------------------------
// 10-15: the liver patient dataset
// ---------------------------------------------------------------------------

struct LdpdRun {
    out: PathBuf,
    _tmp: tempfile::TempDir,
}

fn run_ldpd(data: &Path) -> Result<LdpdRun, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tmp.path().join("ldpd");
    stackliver(&["run-all", "--data", data.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-cache"])?;
    Ok(LdpdRun { out, _tmp: tmp })
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want
}

fn ldpd_split(run: &LdpdRun) -> Outcome {
    let p = read_json(&run.out.join("preprocess.json"))?;
    let pair = |k: &str| (p[k]["class_0"].as_f64().unwrap_or(f64::NAN), p[k]["class_1"].as_f64().unwrap_or(f64::NAN));
    let expected = [("train", (13414.0, 5282.0)), ("undersampled", (5282.0, 5282.0)), ("test", (3335.0, 1339.0))];
    let mut detail = Vec::new();
    for (k, (a, b)) in expected {
        let (x, y) = pair(k);
        detail.push(format!("{k} ({x}, {y})"));
        ensure!(within(x, a, 0.01) && within(y, b, 0.01), "{k} counts ({x}, {y}) vs ({a}, {b})");
    }
    Ok(detail.join(", "))
}

fn ldpd_anova(run: &LdpdRun) -> Outcome {
    let a = read_json(&run.out.join("anova.json"))?;
    let dropped: BTreeSet<&str> = a["dropped"].as_array().ok_or("no dropped list")?.iter().filter_map(Value::as_str).collect();
    ensure!(dropped == BTreeSet::from(["Age", "Gender"]), "dropped {dropped:?}");
    let gender = a["results"]
        .as_array()
        .and_then(|r| r.iter().find(|r| r["feature"] == "Gender"))
        .and_then(|r| r["p_value"].as_f64())
        .ok_or("no Gender p-value")?;
    ensure!((gender - 0.5636).abs() <= 0.05, "Gender p = {gender:.4}");
    Ok(format!("dropped {dropped:?}, Gender p = {gender:.4}"))
}

fn ldpd_selection(run: &LdpdRun) -> Outcome {
    let r = read_json(&run.out.join("rfecv.json"))?;
    let selected: BTreeSet<&str> = r["selected"].as_array().ok_or("no selection")?.iter().filter_map(Value::as_str).collect();
    let want = BTreeSet::from([
        "Total Bilirubin",
        "Alkaline Phosphatase",
        "Aspartate Aminotransferase",
        "Alanine Aminotransferase",
        "Albumin",
    ]);
    ensure!(r["select_size"] == 5, "select size {}", r["select_size"]);
    ensure!(selected == want, "selected {selected:?}");
    Ok(format!("{selected:?}"))
}

fn ldpd_metrics(run: &LdpdRun) -> Outcome {
    let m = read_json(&run.out.join("metrics.json"))?;
    let t = &m["models"]["stack"]["test"];
    let acc = t["accuracy"].as_f64().ok_or("no accuracy")?;
    let kappa = t["kappa"].as_f64().ok_or("no kappa")?;
    let auc = t["auc"].as_f64().ok_or("no auc")?;
    let errors = t["confusion"]["fp"].as_u64().unwrap_or(u64::MAX).saturating_add(t["confusion"]["fn"].as_u64().unwrap_or(u64::MAX));
    let n = t["n"].as_u64().unwrap_or(0);
    let detail = format!("accuracy {acc:.4}, kappa {kappa:.4}, AUC {auc:.4}, {errors} errors of {n}");
    ensure!(acc >= 0.99 && kappa >= 0.99 && auc >= 0.995 && errors <= 25, "{detail}");
    Ok(detail)
}

fn ldpd_cv(run: &LdpdRun) -> Outcome {
    let cv = read_json(&run.out.join("cv.json"))?;
    let mean = cv["stack"]["accuracy"]["mean"].as_f64().ok_or("no stack CV")?;
    let std = cv["stack"]["accuracy"]["std"].as_f64().unwrap_or(f64::NAN);
    ensure!(mean >= 0.99, "CV accuracy {mean:.4} +/- {std:.4}");
    Ok(format!("CV accuracy {mean:.4} +/- {std:.4}"))
}

fn ldpd_timing(run: &LdpdRun) -> Outcome {
    let t = read_json(&run.out.join("timings.json"))?;
    let train = t["models"]["stack"]["train_seconds"].as_f64().ok_or("no train time")?;
    let infer = t["models"]["stack"]["inference_seconds"].as_f64().ok_or("no inference time")?;
    let detail = format!("train {train:.2}s, test-set inference {infer:.3}s");
    ensure!(train < 60.0 && infer < 2.0, "{detail}");
    Ok(detail)
}

fn main() {
    let mut results = vec![
        report(1, "metric oracles", metric_oracles),
        report(2, "special functions", special_functions),
        report(3, "ANOVA", anova_properties),
        report(4, "GBDT loss, gain examples, CART oracle", boosting_and_trees),
        report(5, "MLP gradient check", mlp_gradient),
        report(6, "stacking leakage and OOF partition", stacking_leakage),
        report(7, "explainers", explainers),
        report(8, "run-all determinism", determinism),
        report(9, "Gaussian mixture end to end", mixture_end_to_end),
    ];

    let titles = [
        (10, "LDPD split and undersampling counts"),
        (11, "LDPD ANOVA screen"),
        (12, "LDPD RFE-CV selection"),
        (13, "LDPD stack test metrics"),
        (14, "LDPD 5-fold CV accuracy"),
        (15, "LDPD training and inference time"),
    ];
    match std::env::var_os("STACKLIVER_LDPD").filter(|v| !v.is_empty()) {
        None => results.extend(titles.iter().map(|&(n, t)| skipped(n, t))),
        Some(path) => {
            let checks: [fn(&LdpdRun) -> Outcome; 6] =
                [ldpd_split, ldpd_anova, ldpd_selection, ldpd_metrics, ldpd_cv, ldpd_timing];
            match run_ldpd(Path::new(&path)) {
                Ok(run) => {
                    for (&(n, title), check) in titles.iter().zip(checks) {
                        results.push(report(n, title, || check(&run)));
                    }
                }
                Err(e) => {
                    for &(n, title) in &titles {
                        let e = e.clone();
                        results.push(report(n, title, move || Err(e)));
                    }
                }
            }
        }
    }

    let count = |f: fn(&Status) -> bool| results.iter().filter(|s| f(s)).count();
    let (pass, fail, skip) = (
        count(|s| matches!(s, Status::Pass)),
        count(|s| matches!(s, Status::Fail)),
        count(|s| matches!(s, Status::Skipped)),
    );
    println!("acceptance: {pass} passed, {fail} failed, {skip} skipped");
    if fail > 0 {
        std::process::exit(1);
    }
}
