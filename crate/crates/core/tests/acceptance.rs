//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! A criterion listed in `KNOWN_RED` is expected to fail and is reported as
//! FAIL; the gate exits non-zero on any other failure, and also when a known
//! red criterion starts passing, so the documentation gets revisited.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use embgep::cli;
use embgep::dataset::{self, SummaryTable};
use embgep::evolution::{self, run, Alphabet, GepConfig, Rates, TrainingData};
use embgep::karva::{Function, Gene, Symbol};
use embgep::metrics::{bias, cumulative_frequency, mae_normalized, r_squared, rmse, scatter_index, PredictionSet};
use embgep::models::{
    self, gep_ln_displacement, predict, sensitivity_profile, Anchors, ModelError, ModelId, ModelInput,
    ModelOptions, Response, SensitivityParam, POLE_EPSILON, POLE_PERIOD_RATIO,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const ORACLE_TOLERANCE: f64 = 1e-9;
const ORACLE_POINTS: usize = 100;
const ORACLE_BUDGET: Duration = Duration::from_secs(1);
const OPERATOR_APPLICATIONS: usize = 100_000;
const RECOVERY_SEEDS: u64 = 10;
const RECOVERY_FITNESS: f64 = 950.0;
const RECOVERY_GENERATIONS: usize = 2000;
const RECOVERY_BUDGET: Duration = Duration::from_secs(60);
const SPLIT_SEEDS: u64 = 50;
const SPLIT_TRIALS: usize = 10_000;
const SPLIT_SHARE: f64 = 0.95;

const KNOWN_RED: &[u32] = &[8];

struct Verdict {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Verdict {
    Verdict { pass: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Verdict {
    Verdict { pass: false, detail: detail.into() }
}

struct OraclePoint {
    model: String,
    mw: f64,
    ay_ratio: f64,
    period_ratio: f64,
    amax: f64,
    tm: f64,
    expected: f64,
}

fn oracle_points() -> Vec<OraclePoint> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/oracle_points.csv");
    let mut reader = csv::Reader::from_path(path).expect("oracle fixture");
    reader
        .records()
        .map(|r| {
            let r = r.expect("fixture row");
            let f = |i: usize| r[i].parse::<f64>().expect("fixture number");
            OraclePoint {
                model: r[0].to_string(),
                mw: f(1),
                ay_ratio: f(2),
                period_ratio: f(3),
                amax: f(4),
                tm: f(5),
                expected: f(6),
            }
        })
        .collect()
}

fn criterion_1() -> Verdict {
    let points: Vec<OraclePoint> = oracle_points().into_iter().filter(|p| p.model == "gep").collect();
    assert_eq!(points.len(), ORACLE_POINTS);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in &points {
        assert!((5.55 * p.period_ratio - 7.052).abs() >= 0.05);
        let got = gep_ln_displacement(p.mw, p.ay_ratio, p.period_ratio).expect("off-pole point");
        worst = worst.max((got - p.expected).abs());
    }
    let elapsed = start.elapsed();
    let detail = format!("{} points, max |err| {worst:.2e} (tol {ORACLE_TOLERANCE:e}), {elapsed:.2?}", points.len());
    if worst <= ORACLE_TOLERANCE && elapsed < ORACLE_BUDGET {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn baseline(model: &str, p: &OraclePoint) -> Result<f64, ModelError> {
    let x = p.ay_ratio;
    match model {
        "hynes_griffin" => Ok(models::hynes_griffin(x)),
        "ambraseys_menu" => models::ambraseys_menu(x),
        "jibson" => models::jibson(x),
        "saygili_rathje" => models::saygili_rathje(p.amax, x),
        "madiai" => models::madiai(x),
        "tsai_chien" => models::tsai_chien(p.amax, x, p.tm),
        other => panic!("unexpected model {other}"),
    }
}

fn criterion_2() -> Verdict {
    let points = oracle_points();
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for model in ModelId::ALL.iter().filter(|m| **m != ModelId::Gep) {
        let pts: Vec<&OraclePoint> = points.iter().filter(|p| p.model == model.id()).collect();
        let mut worst = 0.0f64;
        for p in &pts {
            let got = baseline(model.id(), p).expect("in-domain point");
            worst = worst.max((got - p.expected).abs());
        }
        ok &= pts.len() == ORACLE_POINTS && worst <= ORACLE_TOLERANCE;
        parts.push(format!("{} {:.1e}", model.id(), worst));
    }
    let elapsed = start.elapsed();
    let detail = format!("max |err| per model: {} ({elapsed:.2?})", parts.join(", "));
    if ok && elapsed < ORACLE_BUDGET {
        pass(detail)
    } else {
        fail(detail)
    }
}

/// In-process CLI call returning the exit code, without the stdout summary.
fn run_cli(args: &[&str]) -> i32 {
    let parsed = cli::Cli::try_parse_from(std::iter::once("embgep").chain(args.iter().copied())).expect("arguments");
    match cli::execute(&parsed, args.iter().map(|a| a.to_string()).collect()) {
        Ok(_) => 0,
        Err(e) => e.exit_code(),
    }
}

fn no_non_finite_text(path: &Path) -> bool {
    let text = fs::read_to_string(path).expect("output file").to_lowercase();
    !text.contains("nan") && !text.contains("inf")
}

fn criterion_3() -> Verdict {
    let dir = tempfile::tempdir().expect("tempdir");
    let half_band = POLE_EPSILON / 5.55;
    let offsets: Vec<f64> = (-20..=20).map(|k| k as f64 / 20.5 * half_band).collect();

    // library: every point inside the band is a typed error
    let mut library = true;
    for &dr in &offsets {
        let r = POLE_PERIOD_RATIO + dr;
        library &= matches!(gep_ln_displacement(7.0, 0.5, r), Err(ModelError::Pole { .. }));
        let input = ModelInput::new(7.0, 0.3, 0.4, 0.4 * r, 0.1, None).expect("input");
        library &= matches!(predict(ModelId::Gep, &input, &ModelOptions::default()), Err(ModelError::Pole { .. }));
    }
    let profile = sensitivity_profile(
        SensitivityParam::PeriodRatio,
        &offsets.iter().map(|d| POLE_PERIOD_RATIO + d).collect::<Vec<_>>(),
        &Anchors::default(),
    );
    library &= profile.iter().all(|p| p.response == Response::Pole);

    // CLI: predict, compare and sensitivity all emit markers and exit 0
    let csv_path = dir.path().join("pole.csv");
    let mut body = String::from("id,Mw,amax_g,Tp_s,Td_s,ay_g,D_m,Tm_s,H_m,Vs_mps\n");
    for (i, dr) in offsets.iter().enumerate() {
        body.push_str(&format!("P{i},7.0,0.3,0.4,{:?},0.1,0.5,0.5,,\n", 0.4 * (POLE_PERIOD_RATIO + dr)));
    }
    body.push_str("Q,7.0,0.3,0.4,0.8,0.1,0.5,0.5,,\n");
    fs::write(&csv_path, body).expect("write");
    let input = csv_path.to_str().unwrap();
    let out = |name: &str| dir.path().join(name);
    let mut codes = Vec::new();
    codes.push(run_cli(&["--out", out("predict").to_str().unwrap(), "predict", "--model", "gep", "--input", input]));
    codes.push(run_cli(&["--out", out("compare").to_str().unwrap(), "compare", "--input", input]));
    let (lo, hi) = (format!("{:?}", POLE_PERIOD_RATIO - half_band / 2.0), format!("{:?}", POLE_PERIOD_RATIO + half_band / 2.0));
    codes.push(run_cli(&[
        "--out",
        out("sens").to_str().unwrap(),
        "sensitivity",
        "--param",
        "period_ratio",
        "--from",
        &lo,
        "--to",
        &hi,
        "--steps",
        "9",
    ]));
    let exits_ok = codes.iter().all(|&c| c == 0);

    let count_status = |file: &Path, model_col: Option<usize>, status_col: usize| -> (usize, usize) {
        let mut reader = csv::Reader::from_path(file).expect("csv");
        let mut marked = 0;
        let mut total = 0;
        for r in reader.records() {
            let r = r.expect("row");
            if model_col.is_some_and(|c| &r[c] != "gep") {
                continue;
            }
            total += 1;
            marked += (&r[status_col] == "pole") as usize;
        }
        (marked, total)
    };
    let predictions = out("predict").join("predictions.csv");
    let errors = out("compare").join("relative_errors.csv");
    let sens = out("sens").join("sensitivity.csv");
    let (pm, pt) = count_status(&predictions, Some(1), 2);
    let (cm, ct) = count_status(&errors, Some(0), 2);
    let (sm, st) = count_status(&sens, None, 4);
    let markers = pm == offsets.len() && pt == offsets.len() + 1 && cm == offsets.len() && ct == offsets.len() + 1 && sm == st && st == 9;
    let clean = [predictions, errors, sens, out("compare").join("cumulative_frequency.csv")]
        .iter()
        .all(|p| no_non_finite_text(p));

    let detail = format!(
        "{} in-band points: library errors {library}, predict {pm}/{pt}, compare {cm}/{ct}, sensitivity {sm}/{st} marked, exit codes {codes:?}, no NaN/inf text {clean}",
        offsets.len()
    );
    if library && exits_ok && markers && clean {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut identity = true;
    for _ in 0..100 {
        let n = rng.random_range(2..60);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..10.0)).collect();
        let set = PredictionSet::new(y.clone(), y).unwrap();
        identity &= r_squared(&set) == Ok(1.0)
            && mae_normalized(&set) == Ok(0.0)
            && rmse(&set) == 0.0
            && scatter_index(&set) == Ok(0.0)
            && bias(&set) == 0.0;
    }
    let mut bias_ok = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..100);
        let m: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let set = PredictionSet::new(m, p).unwrap();
        bias_ok += (bias(&set) <= rmse(&set)) as usize;
    }
    let grid: Vec<f64> = (-10..=50).map(|k| k as f64 * 10.0).collect();
    let mut monotone = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..200);
        let errors: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..500.0)).collect();
        let curve = cumulative_frequency(&errors, &grid).unwrap();
        monotone += curve.windows(2).all(|w| w[0].fraction <= w[1].fraction) as usize;
    }
    let detail = format!("exact identities {identity}; bias <= rmse {bias_ok}/1000; monotone curves {monotone}/1000");
    if identity && bias_ok == 1000 && monotone == 1000 {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn criterion_5() -> Verdict {
    let config = GepConfig::default();
    let alphabet = Alphabet::new(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut population = evolution::initialize(&config, &alphabet, &mut rng);
    let gene_len = config.gene_len();
    let mut applications = 0;
    let (mut tail_violations, mut length_changes) = (0, 0);
    while applications < OPERATOR_APPLICATIONS {
        evolution::apply_operators(&mut population, &Rates::default(), &alphabet, &mut rng);
        applications += population.len();
        for c in &population {
            tail_violations += c.validate().is_err() as usize;
            length_changes += (c.genes.len() != config.num_genes || c.genes.iter().any(|g| g.len() != gene_len)) as usize;
        }
    }

    // every head-2 gene over {+,-,*,/} x {d0, d1, c0}
    let terminals = [Symbol::Input(0), Symbol::Input(1), Symbol::Const(0)];
    let head_symbols: Vec<Symbol> = Function::ALL.iter().map(|&f| Symbol::Func(f)).chain(terminals).collect();
    let mut genes = 0;
    let mut well_formed = 0;
    for &h0 in &head_symbols {
        for &h1 in &head_symbols {
            for &t0 in &terminals {
                for &t1 in &terminals {
                    for &t2 in &terminals {
                        let gene = Gene::new(vec![h0, h1], vec![t0, t1, t2], vec![0.5]).expect("valid gene");
                        let tree = gene.decode().expect("decodes");
                        let coding = gene.coding_length();
                        let kexpr = tree.to_kexpr();
                        let prefix: Vec<Symbol> = (0..coding).map(|i| gene.symbol(i)).collect();
                        genes += 1;
                        well_formed += (tree.node_count() == coding && kexpr == prefix) as usize;
                    }
                }
            }
        }
    }
    let expected_genes = head_symbols.len().pow(2) * terminals.len().pow(3);
    let detail = format!(
        "{applications} applications: {tail_violations} tail violations, {length_changes} length changes; {well_formed}/{genes} head-2 genes decode well-formed"
    );
    if tail_violations == 0 && length_changes == 0 && genes == expected_genes && well_formed == genes {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn recovery_data() -> TrainingData {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for _ in 0..50 {
        let a: f64 = rng.random_range(-5.0..5.0);
        let b: f64 = rng.random_range(-5.0..5.0);
        rows.push(vec![a, b]);
        targets.push(a + 2.0 * b + noise.sample(&mut rng));
    }
    TrainingData::new(rows, targets).unwrap()
}

fn criterion_6() -> Verdict {
    let data = recovery_data();
    let mut hits = 0;
    let mut monotone = true;
    let mut slowest = Duration::ZERO;
    let mut best = 0.0f64;
    for seed in 0..RECOVERY_SEEDS {
        let config = GepConfig {
            rng_seed: seed,
            max_generations: RECOVERY_GENERATIONS,
            stagnation_limit: 0,
            ..GepConfig::default()
        };
        let start = Instant::now();
        let outcome = run(&config, &data).expect("run");
        slowest = slowest.max(start.elapsed());
        monotone &= outcome.history.windows(2).all(|w| w[0].best_fitness <= w[1].best_fitness);
        hits += (outcome.report.fitness >= RECOVERY_FITNESS) as usize;
        best = best.max(outcome.report.fitness);
    }
    let detail = format!(
        "{hits}/{RECOVERY_SEEDS} seeds reach fitness >= {RECOVERY_FITNESS} (best {best:.1}); histories non-decreasing {monotone}; slowest seed {slowest:.2?}"
    );
    if hits >= 1 && monotone && slowest <= RECOVERY_BUDGET {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn criterion_7() -> Verdict {
    let records = dataset::synthesize(&SummaryTable::published_all_data(), 85, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    let first = dataset::split_matched(&records, 0.75, SPLIT_TRIALS, 0).unwrap();
    let counts = (first.training.len(), first.testing.len());
    let single: Vec<f64> = (0..SPLIT_SEEDS).map(|s| dataset::random_split(&records, 0.75, s).unwrap().score).collect();
    let mut sorted = single.clone();
    sorted.sort_by(f64::total_cmp);
    let median = (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0;
    let wins = (0..SPLIT_SEEDS)
        .filter(|&s| dataset::split_matched(&records, 0.75, SPLIT_TRIALS, s).unwrap().score <= median)
        .count();
    let share = wins as f64 / SPLIT_SEEDS as f64;
    let detail = format!(
        "85 records split {}/{}; matched ({SPLIT_TRIALS} trials) <= single-trial median {median:.4} in {wins}/{SPLIT_SEEDS} seeds",
        counts.0, counts.1
    );
    if counts == (63, 22) && share >= SPLIT_SHARE {
        pass(detail)
    } else {
        fail(detail)
    }
}

/// Brute-force scan: ln D at `n` evenly spaced points.
fn scan(param: SensitivityParam, from: f64, to: f64, n: usize) -> Vec<(f64, f64)> {
    let grid: Vec<f64> = (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect();
    sensitivity_profile(param, &grid, &Anchors::default())
        .into_iter()
        .map(|p| (p.input, p.response.value().expect("off-pole")))
        .collect()
}

fn strictly(points: &[(f64, f64)], increasing: bool) -> bool {
    points.windows(2).all(|w| if increasing { w[1].1 > w[0].1 } else { w[1].1 < w[0].1 })
}

fn criterion_8() -> Verdict {
    const SCAN: usize = 10_001;
    let anchors = Anchors::default();
    let ln_d = |x: f64| gep_ln_displacement(anchors.mw, x, anchors.period_ratio).unwrap();

    let mw_up = strictly(&scan(SensitivityParam::Mw, 4.9, 8.3, SCAN), true);
    let ay_down = ln_d(1.0) < ln_d(0.5);
    let period = scan(SensitivityParam::PeriodRatio, 1.5, 4.0, SCAN);
    let period_down = strictly(&period, false);

    // pinned shape of the period-ratio curve at the anchors: a single
    // interior maximum near 1.7992, rising before it and falling after
    let peak = period.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((peak.0 - 1.7992).abs() < 1e-3, "period-ratio maximum moved to {}", peak.0);
    assert!(strictly(&scan(SensitivityParam::PeriodRatio, 1.5, 1.799, SCAN), true));
    assert!(strictly(&scan(SensitivityParam::PeriodRatio, 1.8, 4.0, SCAN), false));
    assert!(mw_up && ay_down, "magnitude and yield-ratio trends regressed");

    let detail = format!(
        "Mw increasing {mw_up}; lnD(ay_ratio=1.0) {:.4} < lnD(0.5) {:.4} {ay_down}; period_ratio decreasing on [1.5, 4.0] {period_down} (rises to a maximum {:.4} at r = {:.4}, falls after)",
        ln_d(1.0),
        ln_d(0.5),
        peak.1,
        peak.0
    );
    if mw_up && ay_down && period_down {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn criterion_9() -> Verdict {
    let readme = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap_or_default();
    let documented = readme.contains("unpublished") && readme.contains("0.730");

    let dir = tempfile::tempdir().expect("tempdir");
    let data = dir.path().join("synthetic.csv");
    let config = dir.path().join("gep.toml");
    fs::write(&config, "max_generations = 100\n").unwrap();
    let records = dataset::synthesize(&SummaryTable::published_all_data(), 85, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    dataset::save(&records, &data).unwrap();
    let out = dir.path().join("fit");
    let code = run_cli(&[
        "--seed",
        "9",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "fit",
        "--input",
        data.to_str().unwrap(),
        "--trials",
        "1000",
    ]);
    let mut stages = Vec::new();
    let mut all_metrics = true;
    if code == 0 {
        let mut reader = csv::Reader::from_path(out.join("metrics.csv")).unwrap();
        let header = reader.headers().unwrap().clone();
        for name in ["r_squared", "mae_normalized", "rmse", "scatter_index", "bias"] {
            all_metrics &= header.iter().any(|h| h == name);
        }
        for r in reader.records() {
            let r = r.unwrap();
            stages.push(r[0].to_string());
            all_metrics &= r.iter().skip(2).all(|v| v.parse::<f64>().is_ok_and(f64::is_finite));
        }
    }
    let layout = stages == ["Training", "Validation", "All-data"] && all_metrics;
    let detail = format!("irreproducibility documented {documented}; report rows {stages:?} with five finite metrics {layout}");
    if documented && layout {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn digests(dir: &Path) -> Vec<(String, String)> {
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| {
            let path = o["path"].as_str().unwrap().to_string();
            let recorded = o["sha256"].as_str().unwrap().to_string();
            assert_eq!(cli::sha256_hex(&fs::read(dir.join(&path)).unwrap()), recorded, "digest of {path}");
            (path, recorded)
        })
        .collect()
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().expect("tempdir");
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    fs::write(p("gep.toml"), "max_generations = 40\nnumber_of_chromosomes = 30\n").unwrap();
    assert_eq!(run_cli(&["--seed", "10", "--out", &p("data"), "synth", "--n", "85"]), 0);
    let input = p("data/synthetic.csv");
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("synth", vec!["synth".into(), "--n".into(), "40".into()]),
        ("stats", vec!["stats".into(), "--input".into(), input.clone()]),
        ("split", vec!["split".into(), "--input".into(), input.clone(), "--trials".into(), "2000".into()]),
        ("fit", vec!["fit".into(), "--input".into(), input.clone(), "--trials".into(), "500".into()]),
        ("predict", vec!["predict".into(), "--model".into(), "gep".into(), "--input".into(), input.clone()]),
        ("compare", vec!["compare".into(), "--input".into(), input.clone()]),
        (
            "sensitivity",
            ["sensitivity", "--param", "Mw", "--from", "4.9", "--to", "8.3", "--steps", "35", "--family", "ay_ratio", "--levels", "0.2,0.5,1.0"]
                .map(String::from)
                .to_vec(),
        ),
        ("sweep", vec!["sweep".into(), "--input".into(), input.clone(), "--genes".into(), "1-2".into(), "--heads".into(), "3-4".into()]),
    ];
    let config = p("gep.toml");
    let mut identical = Vec::new();
    let mut differing = Vec::new();
    for (name, args) in &commands {
        let mut runs = Vec::new();
        for rerun in 0..2 {
            let out = p(&format!("{name}-{rerun}"));
            let mut full = vec!["--seed", "10", "--config", &config, "--out", &out];
            full.extend(args.iter().map(String::as_str));
            assert_eq!(run_cli(&full), 0, "{name} failed");
            runs.push(digests(Path::new(&out)));
        }
        if runs[0] == runs[1] && !runs[0].is_empty() {
            identical.push(*name);
        } else {
            differing.push(*name);
        }
    }
    let detail = format!("byte-identical reruns: {} of {} commands {identical:?}", identical.len(), commands.len());
    if differing.is_empty() {
        pass(detail)
    } else {
        fail(format!("{detail}; differing {differing:?}"))
    }
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "evolved-model oracle equivalence", criterion_1),
        (2, "baseline oracle equivalence", criterion_2),
        (3, "pole safety", criterion_3),
        (4, "metric identities", criterion_4),
        (5, "genome structural soundness", criterion_5),
        (6, "GEP recovery", criterion_6),
        (7, "split contract", criterion_7),
        (8, "sensitivity trends", criterion_8),
        (9, "irreproducibility documented, report layout", criterion_9),
        (10, "CLI determinism", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (id, title, check) in criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            fail(format!("panicked: {msg}"))
        });
        let known = KNOWN_RED.contains(&id);
        let tag = if verdict.pass { "PASS" } else { "FAIL" };
        let note = if known && !verdict.pass { " [known, documented]" } else { "" };
        println!("criterion {id:>2} {tag}{note}: {title}: {} [{:.2?}]", verdict.detail, start.elapsed());
        if verdict.pass == known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected");
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
