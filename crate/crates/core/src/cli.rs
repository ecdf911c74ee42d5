//! The `embgep` command-line tool.
//!
//! Every command writes its artifacts into `--out` together with a
//! `manifest.json` listing SHA-256 digests of the inputs and outputs.
//! Exit codes: 0 success, 1 internal error, 2 input or validation error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dataset::{self, CaseHistory, DatasetError, SummaryTable};
use crate::evolution::{self, EvolutionError, GepConfig, TrainingData};
use crate::karva::Chromosome;
use crate::metrics::{self, CorrelationMatrix, MetricsReport, PredictionSet, StageReport};
use crate::models::{
    self, check_applicability, predict, sensitivity_family, sensitivity_profile, Anchors, ModelError, ModelId,
    ModelOptions, Response, Scale, SensitivityParam, POLE_PERIOD_RATIO,
};

#[derive(Debug, Parser)]
#[command(name = "embgep", version, about = "Seismic displacement of earth embankments: GEP fitting and model comparison")]
pub struct Cli {
    /// Random seed; overrides the seed in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// GEP configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summary statistics and the correlation table.
    Stats(InputArgs),
    /// Matched training/testing split.
    Split(SplitArgs),
    /// Split, evolve a model on ln D, report metrics.
    Fit(SplitArgs),
    /// Per-row predictions of one registered model.
    Predict(PredictArgs),
    /// Relative errors and their cumulative frequency for every model.
    Compare(CompareArgs),
    /// ln D of the evolved model along one input.
    Sensitivity(SensitivityArgs),
    /// Best fitness over a grid of gene counts and head sizes.
    Sweep(SweepArgs),
    /// Synthetic case histories drawn to the published summary statistics.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.75)]
    pub fraction: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// One of gep, hynes_griffin, ambraseys_menu, jibson, saygili_rathje, madiai, tsai_chien.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub options: ModelFlags,
}

#[derive(Debug, Args)]
pub struct ModelFlags {
    /// Treat the Ambraseys-Menu output as log10 of centimeters.
    #[arg(long)]
    pub ambraseys_cm: bool,
    /// Half-width of the pole band of the evolved model.
    #[arg(long)]
    pub pole_epsilon: Option<f64>,
}

impl ModelFlags {
    fn options(&self) -> Result<ModelOptions, CliError> {
        if let Some(eps) = self.pole_epsilon {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(CliError::Input(format!("--pole-epsilon {eps} must be a finite value >= 0")));
            }
        }
        Ok(ModelOptions { ambraseys_in_centimeters: self.ambraseys_cm, pole_epsilon: self.pole_epsilon })
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub options: ModelFlags,
    /// Largest relative error (percent) on the cumulative-frequency grid.
    #[arg(long, default_value_t = 1000.0)]
    pub er_max: f64,
    /// Grid step in percent; the grid starts at -100.
    #[arg(long, default_value_t = 10.0)]
    pub er_step: f64,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// Mw, ay_ratio or period_ratio.
    #[arg(long)]
    pub param: String,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 35)]
    pub steps: usize,
    /// Hold this parameter at each of `--levels` (one curve per level).
    #[arg(long, requires = "levels")]
    pub family: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long)]
    pub anchor_mw: Option<f64>,
    #[arg(long)]
    pub anchor_ay_ratio: Option<f64>,
    #[arg(long)]
    pub anchor_period_ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Gene counts, e.g. `1-6` or `1,2,4`.
    #[arg(long, default_value = "1-6")]
    pub genes: String,
    /// Head sizes, e.g. `4-12`.
    #[arg(long, default_value = "4-12")]
    pub heads: String,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 85)]
    pub n: usize,
    /// Which published statistics to draw from: all, training or testing.
    #[arg(long, default_value = "all")]
    pub targets: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::Io(_) | EvolutionError::Karva(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written as `manifest.json` next to the outputs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub seed: u64,
    /// Effective GEP configuration, for commands that evolve.
    pub config: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn new() -> Self {
        Artifacts { files: Vec::new() }
    }

    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<(), csv::Error>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf).map_err(internal)?;
        self.add(name, buf);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut buf = serde_json::to_vec_pretty(value).map_err(internal)?;
        buf.push(b'\n');
        self.add(name, buf);
        Ok(())
    }
}

struct Context {
    seed: u64,
    config: GepConfig,
    config_used: bool,
    inputs: Vec<FileDigest>,
}

impl Context {
    fn read_input(&mut self, path: &Path) -> Result<dataset::CaseTable, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(dataset::read_table(bytes.as_slice())?)
    }

    fn read_records(&mut self, path: &Path) -> Result<Vec<CaseHistory>, CliError> {
        let table = self.read_input(path)?;
        if table.records.is_empty() {
            return Err(DatasetError::Empty.into());
        }
        Ok(table.records)
    }

    fn gep_config(&mut self) -> GepConfig {
        self.config_used = true;
        GepConfig { rng_seed: self.seed, ..self.config.clone() }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let arguments = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, arguments) {
        Ok(manifest) => {
            println!("{}: wrote {} files to {}", manifest.command, manifest.outputs.len() + 1, cli.out.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command and writes its artifacts and manifest.
pub fn execute(cli: &Cli, arguments: Vec<String>) -> Result<RunManifest, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            GepConfig::from_toml_str(&text)?
        }
        None => GepConfig::default(),
    };
    let seed = cli.seed.unwrap_or(config.rng_seed);
    config.rng_seed = seed;
    let mut ctx = Context { seed, config, config_used: false, inputs: Vec::new() };
    let mut out = Artifacts::new();

    let name = match &cli.command {
        Command::Stats(a) => {
            cmd_stats(&mut ctx, &mut out, a)?;
            "stats"
        }
        Command::Split(a) => {
            cmd_split(&mut ctx, &mut out, a)?;
            "split"
        }
        Command::Fit(a) => {
            cmd_fit(&mut ctx, &mut out, a)?;
            "fit"
        }
        Command::Predict(a) => {
            cmd_predict(&mut ctx, &mut out, a)?;
            "predict"
        }
        Command::Compare(a) => {
            cmd_compare(&mut ctx, &mut out, a)?;
            "compare"
        }
        Command::Sensitivity(a) => {
            cmd_sensitivity(&mut out, a)?;
            "sensitivity"
        }
        Command::Sweep(a) => {
            cmd_sweep(&mut ctx, &mut out, a)?;
            "sweep"
        }
        Command::Synth(a) => {
            cmd_synth(&ctx, &mut out, a)?;
            "synth"
        }
    };

    fs::create_dir_all(&cli.out).map_err(internal)?;
    let mut outputs = Vec::with_capacity(out.files.len());
    for (file, bytes) in &out.files {
        fs::write(cli.out.join(file), bytes).map_err(internal)?;
        outputs.push(FileDigest { path: file.clone(), sha256: sha256_hex(bytes) });
    }
    let manifest = RunManifest {
        command: name.to_string(),
        arguments,
        seed: ctx.seed,
        config: ctx.config_used.then(|| ctx.config.to_toml_string()),
        inputs: ctx.inputs,
        outputs,
        timestamp: timestamp(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(internal)?;
    bytes.push(b'\n');
    fs::write(cli.out.join("manifest.json"), bytes).map_err(internal)?;
    Ok(manifest)
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn cmd_stats(ctx: &mut Context, out: &mut Artifacts, a: &InputArgs) -> Result<(), CliError> {
    let records = ctx.read_records(&a.input)?;
    let summary = dataset::summarize(&records)?;
    out.csv("summary.csv", |w| summary.write_csv(w))?;
    let corr = CorrelationMatrix::compute(&dataset::parameter_columns(&records))
        .map_err(|e| CliError::Input(format!("correlations: {e}")))?;
    out.csv("correlations.csv", |w| corr.write_csv(w))
}

fn do_split(ctx: &mut Context, a: &SplitArgs) -> Result<(Vec<CaseHistory>, dataset::Split), CliError> {
    let records = ctx.read_records(&a.input)?;
    let split = dataset::split_matched(&records, a.fraction, a.trials, ctx.seed)?;
    Ok((records, split))
}

#[derive(Serialize)]
struct SplitSummary {
    trials: usize,
    fraction: f64,
    training: usize,
    testing: usize,
    score: f64,
}

fn emit_split(out: &mut Artifacts, records: &[CaseHistory], split: &dataset::Split, a: &SplitArgs) -> Result<(), CliError> {
    out.csv("split.csv", |w| split.write_csv(records, w))?;
    for (file, training) in [("split_training_summary.csv", true), ("split_testing_summary.csv", false)] {
        let summary = dataset::summarize(&split.pick(records, training))?;
        out.csv(file, |w| summary.write_csv(w))?;
    }
    out.json(
        "split.json",
        &SplitSummary {
            trials: a.trials,
            fraction: a.fraction,
            training: split.training.len(),
            testing: split.testing.len(),
            score: split.score,
        },
    )
}

fn cmd_split(ctx: &mut Context, out: &mut Artifacts, a: &SplitArgs) -> Result<(), CliError> {
    let (records, split) = do_split(ctx, a)?;
    emit_split(out, &records, &split, a)
}

fn ln_targets(records: &[CaseHistory]) -> Result<TrainingData, CliError> {
    let mut rows = Vec::with_capacity(records.len());
    let mut targets = Vec::with_capacity(records.len());
    for r in records {
        if r.d.is_nan() || r.d <= 0.0 {
            return Err(CliError::Input(format!("record {}: D_m = {} has no logarithm", r.id, r.d)));
        }
        let f = r.features();
        if f.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Input(format!("record {}: non-finite ay_ratio or period_ratio", r.id)));
        }
        rows.push(f.to_vec());
        targets.push(r.d.ln());
    }
    Ok(TrainingData::new(rows, targets)?)
}

#[derive(Serialize)]
struct FitSummary {
    fitness: f64,
    training_rmse: Option<f64>,
    generations: usize,
    expression: String,
    stages: Vec<StageReport>,
    /// Rows whose prediction was non-finite and was left out of each stage.
    excluded: Vec<(String, usize)>,
}

fn stage(name: &str, best: &Chromosome, records: &[CaseHistory]) -> Result<(StageReport, usize, PredictionSet), CliError> {
    let compiled = best.compile().map_err(internal)?;
    let mut pairs = Vec::with_capacity(records.len());
    for r in records {
        if let Some(p) = compiled.evaluate(&r.features()) {
            pairs.push((r.d.ln(), p));
        }
    }
    let excluded = records.len() - pairs.len();
    let set = PredictionSet::from_pairs(&pairs).map_err(|e| internal(format!("{name} metrics: {e}")))?;
    let metrics = MetricsReport::compute(&set).map_err(|e| internal(format!("{name} metrics: {e}")))?;
    Ok((StageReport { stage: name.to_string(), space: "ln_D_m".to_string(), metrics }, excluded, set))
}

const RESIDUAL_BINS: usize = 10;

fn cmd_fit(ctx: &mut Context, out: &mut Artifacts, a: &SplitArgs) -> Result<(), CliError> {
    let (records, split) = do_split(ctx, a)?;
    let training = split.pick(&records, true);
    let data = ln_targets(&training)?;
    ln_targets(&records)?;
    let config = ctx.gep_config();
    let outcome = evolution::run(&config, &data)?;

    emit_split(out, &records, &split, a)?;
    let expression = outcome.best.to_infix().map_err(internal)?;
    out.add(
        "best.kexpr",
        format!("# inputs: d0 = Mw, d1 = ay/amax, d2 = Td/Tp; output ln D (m)\n# {expression}\n{}", outcome.best)
            .into_bytes(),
    );
    out.csv("history.csv", |w| outcome.write_history_csv(w))?;

    let mut stages = Vec::new();
    let mut excluded = Vec::new();
    let mut all_data = None;
    for (name, subset) in [
        ("Training", training),
        ("Validation", split.pick(&records, false)),
        ("All-data", records.clone()),
    ] {
        let (report, skipped, set) = stage(name, &outcome.best, &subset)?;
        stages.push(report);
        excluded.push((name.to_string(), skipped));
        all_data = Some(set);
    }
    let residuals = metrics::residual_summary(&all_data.expect("three stages"), RESIDUAL_BINS).map_err(internal)?;
    out.csv("residual_histogram.csv", |w| residuals.write_histogram_csv(w))?;
    out.csv("metrics.csv", |w| metrics::write_stage_reports_csv(&stages, w))?;
    out.json(
        "metrics.json",
        &FitSummary {
            fitness: outcome.report.fitness,
            training_rmse: outcome.report.rmse,
            generations: outcome.history.len(),
            expression,
            stages,
            excluded,
        },
    )
}

enum Outcome {
    Value(models::Prediction),
    Pole,
    Domain,
    Missing,
}

impl Outcome {
    fn status(&self) -> &'static str {
        match self {
            Outcome::Value(_) => "ok",
            Outcome::Pole => "pole",
            Outcome::Domain => "domain",
            Outcome::Missing => "missing",
        }
    }
}

fn evaluate(model: ModelId, r: &CaseHistory, options: &ModelOptions) -> Outcome {
    match predict(model, &r.model_input(), options) {
        Ok(p) if p.value.is_finite() && p.d_meters.is_finite() => Outcome::Value(p),
        Ok(_) => Outcome::Domain,
        Err(ModelError::Pole { .. }) => Outcome::Pole,
        Err(ModelError::MissingInput { .. }) => Outcome::Missing,
        Err(_) => Outcome::Domain,
    }
}

fn cmd_predict(ctx: &mut Context, out: &mut Artifacts, a: &PredictArgs) -> Result<(), CliError> {
    let model: ModelId = a.model.parse()?;
    let options = a.options.options()?;
    let table = ctx.read_input(&a.input)?;
    if table.records.is_empty() {
        return Err(DatasetError::Empty.into());
    }
    if model == ModelId::TsaiChien && table.records.iter().all(|r| r.tm.is_none()) {
        return Err(CliError::Input("model tsai_chien needs column `Tm_s`, which is absent or empty".into()));
    }
    let scale: Scale = model.scale(&options);
    out.csv("predictions.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["id", "model", "status", "scale", "value", "ln_D_m", "D_m", "in_range", "D_measured_m"])?;
        for r in &table.records {
            let o = evaluate(model, r, &options);
            let (value, ln_d, d) = match &o {
                Outcome::Value(p) => (fmt(p.value), fmt(p.ln_d_meters()), fmt(p.d_meters)),
                _ => Default::default(),
            };
            let in_range = check_applicability(model, &r.model_input()).in_range();
            w.write_record([
                r.id.clone(),
                model.id().to_string(),
                o.status().to_string(),
                scale.tag().to_string(),
                value,
                ln_d,
                d,
                in_range.to_string(),
                fmt(r.d),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}

fn cmd_compare(ctx: &mut Context, out: &mut Artifacts, a: &CompareArgs) -> Result<(), CliError> {
    let options = a.options.options()?;
    if !(a.er_step > 0.0 && a.er_step.is_finite() && a.er_max.is_finite() && a.er_max >= -100.0) {
        return Err(CliError::Input("--er-step must be > 0 and --er-max >= -100".into()));
    }
    let records = ctx.read_records(&a.input)?;
    let steps = ((a.er_max + 100.0) / a.er_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| -100.0 + i as f64 * a.er_step).collect();

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for model in ModelId::ALL {
        let mut errors = Vec::new();
        for r in &records {
            if !check_applicability(model, &r.model_input()).in_range() {
                continue;
            }
            let o = evaluate(model, r, &options);
            let (status, predicted, er) = match &o {
                Outcome::Value(p) => match metrics::relative_error(r.d, p.d_meters) {
                    Ok(er) => {
                        errors.push(er);
                        ("ok", fmt(p.d_meters), fmt(er))
                    }
                    Err(_) => ("zero_measured", fmt(p.d_meters), String::new()),
                },
                other => (other.status(), String::new(), String::new()),
            };
            rows.push([model.id().to_string(), r.id.clone(), status.to_string(), fmt(r.d), predicted, er]);
        }
        let curve = if errors.is_empty() { None } else { metrics::cumulative_frequency(&errors, &grid).ok() };
        curves.push((model, curve));
    }

    out.csv("relative_errors.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["model", "id", "status", "D_measured_m", "D_predicted_m", "E_R_percent"])?;
        for row in &rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.csv("cumulative_frequency.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let mut header = vec!["E_R_percent".to_string()];
        header.extend(curves.iter().map(|(m, _)| m.id().to_string()));
        w.write_record(&header)?;
        for (i, t) in grid.iter().enumerate() {
            let mut rec = vec![fmt(*t)];
            rec.extend(curves.iter().map(|(_, c)| c.as_ref().map(|c| fmt(c[i].fraction)).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    })
}

fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    (0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect()
}

/// Inserts the pole itself between two period-ratio grid points that
/// straddle it, so the curve is visibly broken there.
fn mark_pole(grid: Vec<f64>) -> Vec<f64> {
    let mut marked = Vec::with_capacity(grid.len() + 1);
    for (i, &v) in grid.iter().enumerate() {
        if i > 0 {
            let prev = grid[i - 1];
            let (lo, hi) = if prev < v { (prev, v) } else { (v, prev) };
            if lo < POLE_PERIOD_RATIO && POLE_PERIOD_RATIO < hi {
                marked.push(POLE_PERIOD_RATIO);
            }
        }
        marked.push(v);
    }
    marked
}

fn cmd_sensitivity(out: &mut Artifacts, a: &SensitivityArgs) -> Result<(), CliError> {
    let param: SensitivityParam = a.param.parse()?;
    if a.steps == 0 || !a.from.is_finite() || !a.to.is_finite() {
        return Err(CliError::Input("--steps must be >= 1 and the range finite".into()));
    }
    let defaults = Anchors::default();
    let anchors = Anchors {
        mw: a.anchor_mw.unwrap_or(defaults.mw),
        ay_ratio: a.anchor_ay_ratio.unwrap_or(defaults.ay_ratio),
        period_ratio: a.anchor_period_ratio.unwrap_or(defaults.period_ratio),
    };
    let mut grid = linspace(a.from, a.to, a.steps);
    if param == SensitivityParam::PeriodRatio {
        grid = mark_pole(grid);
    }
    let (family, curves) = match (&a.family, &a.levels) {
        (Some(f), Some(levels)) => {
            let level_param: SensitivityParam = f.parse()?;
            (Some(level_param), sensitivity_family(param, &grid, level_param, levels, &anchors)?)
        }
        _ => (None, vec![(f64::NAN, sensitivity_profile(param, &grid, &anchors))]),
    };
    out.csv("sensitivity.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["family", "level", "param", "value", "status", "ln_D_m", "D_m"])?;
        for (level, points) in &curves {
            for p in points {
                let (status, ln_d, d) = match p.response {
                    Response::LnD(v) => ("ok", fmt(v), fmt(v.exp())),
                    Response::Pole => ("pole", String::new(), String::new()),
                    Response::Undefined => ("domain", String::new(), String::new()),
                };
                w.write_record([
                    family.map(|f| f.name().to_string()).unwrap_or_default(),
                    family.map(|_| fmt(*level)).unwrap_or_default(),
                    param.name().to_string(),
                    fmt(p.input),
                    status.to_string(),
                    ln_d,
                    d,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    })
}

/// Parses `4-12`, `4..12`, `1,2,4` or combinations such as `1-3,6`.
pub fn parse_usize_list(spec: &str) -> Result<Vec<usize>, String> {
    let mut values = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        match range {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| format!("bad range `{part}`"))?;
                let hi: usize = hi.trim().parse().map_err(|_| format!("bad range `{part}`"))?;
                if lo > hi {
                    return Err(format!("empty range `{part}`"));
                }
                values.extend(lo..=hi);
            }
            None => values.push(part.parse().map_err(|_| format!("bad value `{part}`"))?),
        }
    }
    if values.is_empty() {
        return Err(format!("empty list `{spec}`"));
    }
    Ok(values)
}

#[derive(Serialize)]
struct SweepSummary {
    argmax: evolution::SweepCell,
    cells: usize,
}

fn cmd_sweep(ctx: &mut Context, out: &mut Artifacts, a: &SweepArgs) -> Result<(), CliError> {
    let genes = parse_usize_list(&a.genes).map_err(|e| CliError::Input(format!("--genes: {e}")))?;
    let heads = parse_usize_list(&a.heads).map_err(|e| CliError::Input(format!("--heads: {e}")))?;
    let records = ctx.read_records(&a.input)?;
    let data = ln_targets(&records)?;
    let config = ctx.gep_config();
    let cells = evolution::sweep(&config, &data, &genes, &heads)?;
    let best = evolution::sweep_argmax(&cells).ok_or_else(|| internal("empty sweep"))?;
    out.csv("sweep.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["genes", "head", "fitness", "argmax"])?;
        for c in &cells {
            w.write_record([c.genes.to_string(), c.head.to_string(), fmt(c.fitness), (*c == best).to_string()])?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.json("sweep_argmax.json", &SweepSummary { argmax: best, cells: cells.len() })
}

fn cmd_synth(ctx: &Context, out: &mut Artifacts, a: &SynthArgs) -> Result<(), CliError> {
    let targets = match a.targets.as_str() {
        "all" => SummaryTable::published_all_data(),
        "training" => SummaryTable::published_training(),
        "testing" => SummaryTable::published_testing(),
        other => return Err(CliError::Input(format!("unknown targets `{other}` (all, training, testing)"))),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let records = dataset::synthesize(&targets, a.n, &mut rng)?;
    let mut buf = Vec::new();
    dataset::write_csv(&records, &mut buf).map_err(internal)?;
    out.add("synthetic.csv", buf);
    Ok(())
}
