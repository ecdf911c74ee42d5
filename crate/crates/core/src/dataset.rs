//! Case-history records: CSV ingestion and export, per-parameter summaries,
//! the statistically matched training/testing split, and a synthetic
//! generator keyed to published summary statistics.
//!
//! CSV schema (header required, UTF-8, `.` decimal separator):
//!
//! ```text
//! id,Mw,amax_g,Tp_s,Td_s,ay_g,D_m,Tm_s,H_m,Vs_mps
//! ```
//!
//! `Tm_s`, `H_m` and `Vs_mps` may be left blank or omitted from the header.
//! A blank `Td_s` is filled in as `4 H / Vs` when both are present.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal as NormalDist};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::models::{fundamental_period, gep_ln_displacement, EmbankmentGeometry, ModelInput};

pub const REQUIRED_COLUMNS: [&str; 7] = ["id", "Mw", "amax_g", "Tp_s", "Td_s", "ay_g", "D_m"];
pub const OPTIONAL_COLUMNS: [&str; 3] = ["Tm_s", "H_m", "Vs_mps"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("empty dataset")]
    Empty,
    #[error("need at least {needed} records, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("infeasible synthesis targets: {0}")]
    Infeasible(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseHistory {
    pub id: String,
    /// Moment magnitude.
    pub mw: f64,
    /// Peak horizontal acceleration, g.
    pub amax: f64,
    /// Predominant period, s.
    pub tp: f64,
    /// Fundamental period of the embankment, s.
    pub td: f64,
    /// Yield acceleration, g.
    pub ay: f64,
    /// Measured displacement, m.
    pub d: f64,
    /// Mean period, s.
    pub tm: Option<f64>,
    /// Height, m.
    pub h: Option<f64>,
    /// Shear-wave velocity, m/s.
    pub vs: Option<f64>,
}

impl CaseHistory {
    pub fn ay_ratio(&self) -> f64 {
        self.ay / self.amax
    }

    pub fn period_ratio(&self) -> f64 {
        self.td / self.tp
    }

    /// Inputs of the evolved model: `[Mw, ay/amax, Td/Tp]`.
    pub fn features(&self) -> [f64; 3] {
        [self.mw, self.ay_ratio(), self.period_ratio()]
    }

    pub fn model_input(&self) -> ModelInput {
        ModelInput { mw: self.mw, amax: self.amax, tp: self.tp, td: self.td, ay: self.ay, tm: self.tm }
    }
}

/// Records plus the header they were read with.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CaseTable {
    pub records: Vec<CaseHistory>,
    pub columns: Vec<String>,
}

impl CaseTable {
    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c == name)
    }
}

pub fn load(path: impl AsRef<Path>) -> Result<Vec<CaseHistory>, DatasetError> {
    Ok(load_table(path)?.records)
}

pub fn load_table(path: impl AsRef<Path>) -> Result<CaseTable, DatasetError> {
    read_table(File::open(path)?)
}

/// Parses CSV text. An empty input yields an empty table.
pub fn read_table<R: Read>(input: R) -> Result<CaseTable, DatasetError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Ok(CaseTable::default());
    }
    let columns: Vec<String> = header.iter().map(str::to_string).collect();
    let find = |name: &str| columns.iter().position(|c| c == name);
    let mut required = [0usize; 7];
    for (slot, name) in required.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = find(name).ok_or_else(|| DatasetError::MissingColumn(name.to_string()))?;
    }
    let optional = OPTIONAL_COLUMNS.map(find);

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let fail = |message: String| DatasetError::Row { line, message };
        let cell = |i: usize| row.get(i).unwrap_or("");
        let number = |name: &str, i: usize| -> Result<Option<f64>, DatasetError> {
            let text = cell(i);
            if text.is_empty() {
                return Ok(None);
            }
            let v: f64 = text.parse().map_err(|_| fail(format!("{name}: `{text}` is not a number")))?;
            if !v.is_finite() {
                return Err(fail(format!("{name}: non-finite value")));
            }
            Ok(Some(v))
        };
        let need = |name: &str, i: usize| number(name, i)?.ok_or_else(|| fail(format!("{name} is blank")));
        let opt = |k: usize| -> Result<Option<f64>, DatasetError> {
            optional[k].map_or(Ok(None), |i| number(OPTIONAL_COLUMNS[k], i))
        };

        let id = cell(required[0]).to_string();
        let mw = need("Mw", required[1])?;
        let amax = need("amax_g", required[2])?;
        let tp = need("Tp_s", required[3])?;
        let td = number("Td_s", required[4])?;
        let ay = need("ay_g", required[5])?;
        let d = need("D_m", required[6])?;
        let (tm, h, vs) = (opt(0)?, opt(1)?, opt(2)?);

        if amax <= 0.0 {
            return Err(fail(format!("amax_g = {amax} must be > 0")));
        }
        if tp <= 0.0 {
            return Err(fail(format!("Tp_s = {tp} must be > 0")));
        }
        if ay < 0.0 {
            return Err(fail(format!("ay_g = {ay} must be >= 0")));
        }
        if d < 0.0 {
            return Err(fail(format!("D_m = {d} must be >= 0")));
        }
        if let Some(tm) = tm.filter(|&t| t <= 0.0) {
            return Err(fail(format!("Tm_s = {tm} must be > 0")));
        }
        let td = match (td, h, vs) {
            (Some(td), _, _) if td < 0.0 => return Err(fail(format!("Td_s = {td} must be >= 0"))),
            (Some(td), _, _) => td,
            (None, Some(h), Some(vs)) => {
                fundamental_period(&EmbankmentGeometry::new(h, vs).map_err(|e| fail(e.to_string()))?)
            }
            (None, _, _) => return Err(fail("Td_s is blank and H_m/Vs_mps are not both given".into())),
        };
        records.push(CaseHistory { id, mw, amax, tp, td, ay, d, tm, h, vs });
    }
    Ok(CaseTable { records, columns })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Writes the full schema; values use shortest round-trip formatting so
/// reading the file back reproduces every record bit for bit.
pub fn write_csv<W: Write>(records: &[CaseHistory], out: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = REQUIRED_COLUMNS.iter().chain(&OPTIONAL_COLUMNS).copied().collect();
    w.write_record(&header)?;
    for r in records {
        w.write_record([
            r.id.clone(),
            format!("{:?}", r.mw),
            format!("{:?}", r.amax),
            format!("{:?}", r.tp),
            format!("{:?}", r.td),
            format!("{:?}", r.ay),
            format!("{:?}", r.d),
            fmt_opt(r.tm),
            fmt_opt(r.h),
            fmt_opt(r.vs),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save(records: &[CaseHistory], path: impl AsRef<Path>) -> Result<(), DatasetError> {
    write_csv(records, File::create(path)?)
}

/// The eight summarized quantities, in table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Parameter {
    Mw,
    Amax,
    Tp,
    Td,
    Ay,
    AyRatio,
    PeriodRatio,
    D,
}

impl Parameter {
    pub const ALL: [Parameter; 8] = [
        Parameter::Mw,
        Parameter::Amax,
        Parameter::Tp,
        Parameter::Td,
        Parameter::Ay,
        Parameter::AyRatio,
        Parameter::PeriodRatio,
        Parameter::D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Mw => "Mw",
            Parameter::Amax => "amax_g",
            Parameter::Tp => "Tp_s",
            Parameter::Td => "Td_s",
            Parameter::Ay => "ay_g",
            Parameter::AyRatio => "ay_ratio",
            Parameter::PeriodRatio => "period_ratio",
            Parameter::D => "D_m",
        }
    }

    pub fn value(self, r: &CaseHistory) -> f64 {
        match self {
            Parameter::Mw => r.mw,
            Parameter::Amax => r.amax,
            Parameter::Tp => r.tp,
            Parameter::Td => r.td,
            Parameter::Ay => r.ay,
            Parameter::AyRatio => r.ay_ratio(),
            Parameter::PeriodRatio => r.period_ratio(),
            Parameter::D => r.d,
        }
    }

    fn index(self) -> usize {
        Parameter::ALL.iter().position(|&p| p == self).unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub sd: f64,
}

impl ParamStats {
    pub const fn new(min: f64, max: f64, mean: f64, sd: f64) -> Self {
        ParamStats { min, max, mean, sd }
    }

    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count();
        let mean = values.clone().sum::<f64>() / n as f64;
        let (min, max) = values.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let sd = if n > 1 {
            (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        ParamStats { min, max, mean, sd }
    }
}

/// Min / max / mean / SD for each [`Parameter`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryTable {
    pub n: usize,
    pub stats: [ParamStats; 8],
}

impl SummaryTable {
    pub fn get(&self, p: Parameter) -> &ParamStats {
        &self.stats[p.index()]
    }

    /// A single record has no spread.
    pub fn degenerate(&self) -> bool {
        self.n < 2
    }

    /// Published statistics of the full 85-case database.
    pub fn published_all_data() -> Self {
        SummaryTable {
            n: 85,
            stats: [
                ParamStats::new(4.9, 8.3, 7.091, 0.670),
                ParamStats::new(0.06, 0.9, 0.302, 0.177),
                ParamStats::new(0.25, 0.7, 0.377, 0.121),
                ParamStats::new(0.05, 1.58, 0.519, 0.398),
                ParamStats::new(0.0, 0.55, 0.17, 0.115),
                ParamStats::new(0.0, 3.5, 0.770, 0.704),
                ParamStats::new(0.117, 4.0, 1.435, 1.032),
                ParamStats::new(0.001, 7.696, 1.084, 1.811),
            ],
        }
    }

    pub fn published_training() -> Self {
        SummaryTable {
            n: 63,
            stats: [
                ParamStats::new(4.9, 8.2, 7.086, 0.702),
                ParamStats::new(0.06, 0.9, 0.301, 0.181),
                ParamStats::new(0.25, 0.7, 0.382, 0.125),
                ParamStats::new(0.05, 1.58, 0.522, 0.396),
                ParamStats::new(0.0, 0.55, 0.171, 0.118),
                ParamStats::new(0.0, 3.5, 0.797, 0.735),
                ParamStats::new(0.117, 4.0, 1.443, 1.049),
                ParamStats::new(0.001, 7.696, 1.037, 1.787),
            ],
        }
    }

    pub fn published_testing() -> Self {
        SummaryTable {
            n: 22,
            stats: [
                ParamStats::new(5.5, 8.3, 7.105, 0.586),
                ParamStats::new(0.07, 0.7, 0.303, 0.171),
                ParamStats::new(0.25, 0.65, 0.365, 0.111),
                ParamStats::new(0.05, 1.58, 0.512, 0.411),
                ParamStats::new(0.0, 0.37, 0.168, 0.106),
                ParamStats::new(0.0, 2.857, 0.691, 0.615),
                ParamStats::new(0.15, 3.857, 1.415, 1.008),
                ParamStats::new(0.001, 6.061, 1.220, 1.916),
            ],
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["parameter", "min", "max", "mean", "sd"])?;
        for p in Parameter::ALL {
            let s = self.get(p);
            w.write_record([
                p.name().to_string(),
                format!("{:?}", s.min),
                format!("{:?}", s.max),
                format!("{:?}", s.mean),
                format!("{:?}", s.sd),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn summarize(records: &[CaseHistory]) -> Result<SummaryTable, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(SummaryTable {
        n: records.len(),
        stats: Parameter::ALL.map(|p| ParamStats::of(records.iter().map(move |r| p.value(r)))),
    })
}

/// Named value columns for a correlation table, in [`Parameter::ALL`] order.
pub fn parameter_columns(records: &[CaseHistory]) -> Vec<(String, Vec<f64>)> {
    Parameter::ALL
        .iter()
        .map(|p| (p.name().to_string(), records.iter().map(|r| p.value(r)).collect()))
        .collect()
}

/// Index partition of a record list.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Split {
    pub training: Vec<usize>,
    pub testing: Vec<usize>,
    /// Matching score of this partition (lower is closer).
    pub score: f64,
}

impl Split {
    pub fn training_ids<'a>(&self, records: &'a [CaseHistory]) -> Vec<&'a str> {
        self.training.iter().map(|&i| records[i].id.as_str()).collect()
    }

    pub fn testing_ids<'a>(&self, records: &'a [CaseHistory]) -> Vec<&'a str> {
        self.testing.iter().map(|&i| records[i].id.as_str()).collect()
    }

    pub fn pick(&self, records: &[CaseHistory], training: bool) -> Vec<CaseHistory> {
        let idx = if training { &self.training } else { &self.testing };
        idx.iter().map(|&i| records[i].clone()).collect()
    }

    pub fn write_csv<W: Write>(&self, records: &[CaseHistory], out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "set"])?;
        let mut rows: Vec<(usize, &str)> = self
            .training
            .iter()
            .map(|&i| (i, "training"))
            .chain(self.testing.iter().map(|&i| (i, "testing")))
            .collect();
        rows.sort_unstable();
        for (i, set) in rows {
            w.write_record([records[i].id.as_str(), set])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Size of the training subset: `floor(fraction * n)`, kept within `1..n`.
/// For 85 records at 0.75 this gives 63.
pub fn training_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).floor() as usize).clamp(1, n - 1)
}

/// Sum over the summarized parameters of `|Δmean| / range + |ΔSD| / range`
/// between the two subsets, with ranges taken over all records. Parameters
/// with zero range are skipped.
pub fn matching_score(records: &[CaseHistory], training: &[usize], testing: &[usize]) -> f64 {
    let mut score = 0.0;
    for p in Parameter::ALL {
        let all = ParamStats::of(records.iter().map(|r| p.value(r)));
        let range = all.max - all.min;
        if range <= 0.0 {
            continue;
        }
        let a = ParamStats::of(training.iter().map(|&i| p.value(&records[i])));
        let b = ParamStats::of(testing.iter().map(|&i| p.value(&records[i])));
        score += (a.mean - b.mean).abs() / range + (a.sd - b.sd).abs() / range;
    }
    score
}

fn check_split_args(n: usize, fraction: f64) -> Result<(), DatasetError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(fraction));
    }
    if n < 4 {
        return Err(DatasetError::TooFew { needed: 4, got: n });
    }
    Ok(())
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn shuffled_split(records: &[CaseHistory], fraction: f64, rng: &mut ChaCha8Rng) -> Split {
    use rand::seq::SliceRandom;
    let n = records.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut testing = idx.split_off(training_count(n, fraction));
    let mut training = idx;
    training.sort_unstable();
    testing.sort_unstable();
    let score = matching_score(records, &training, &testing);
    Split { training, testing, score }
}

/// Plain random split for `seed` (the first trial of [`split_matched`]).
pub fn random_split(records: &[CaseHistory], fraction: f64, seed: u64) -> Result<Split, DatasetError> {
    check_split_args(records.len(), fraction)?;
    Ok(shuffled_split(records, fraction, &mut trial_rng(seed, 0)))
}

/// Best of `trials` random splits by [`matching_score`]. Trial `t` draws from
/// stream `t` of the seeded generator, so the result does not depend on how
/// trials are scheduled; ties go to the earliest trial.
pub fn split_matched(records: &[CaseHistory], fraction: f64, trials: usize, seed: u64) -> Result<Split, DatasetError> {
    check_split_args(records.len(), fraction)?;
    if trials == 0 {
        return Err(DatasetError::ZeroTrials);
    }
    let best = (0..trials as u64)
        .into_par_iter()
        .map(|t| (t, shuffled_split(records, fraction, &mut trial_rng(seed, t))))
        .reduce_with(|a, b| if b.1.score < a.1.score || (b.1.score == a.1.score && b.0 < a.0) { b } else { a })
        .expect("trials >= 1");
    Ok(best.1)
}

/// Noise added to `ln D` by [`synthesize`].
pub const SYNTH_LN_NOISE_SD: f64 = 0.3;

/// Synthetic rows keep `|5.55 r - 7.052|` at least this far from zero.
const SYNTH_POLE_MARGIN: f64 = 0.05;

const DRAWN: [Parameter; 5] = [
    Parameter::Mw,
    Parameter::Amax,
    Parameter::Tp,
    Parameter::AyRatio,
    Parameter::PeriodRatio,
];

#[derive(Clone, Copy, Debug)]
struct Truncated {
    loc: f64,
    scale: f64,
    lo: f64,
    hi: f64,
}

impl Truncated {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.scale == 0.0 || self.lo == self.hi {
            return self.loc.clamp(self.lo, self.hi);
        }
        let std = Normal::standard();
        let (mut a, mut b) = ((self.lo - self.loc) / self.scale, (self.hi - self.loc) / self.scale);
        // draw in the lower tail, where the CDF keeps its precision
        let flip = a > 0.0;
        if flip {
            (a, b) = (-b, -a);
        }
        let (ca, cb) = (std.cdf(a), std.cdf(b));
        let u = ca + (cb - ca) * rng.random::<f64>();
        let z = std.inverse_cdf(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)).clamp(a, b);
        let z = if flip { -z } else { z };
        (self.loc + self.scale * z).clamp(self.lo, self.hi)
    }
}

struct Synthesizer {
    draws: [Truncated; 5],
    ay: ParamStats,
    td: ParamStats,
    d: ParamStats,
    noise: NormalDist<f64>,
}

impl Synthesizer {
    fn new(targets: &SummaryTable, noise_sd: f64) -> Result<Self, DatasetError> {
        for p in Parameter::ALL {
            let s = targets.get(p);
            if !(s.min <= s.mean && s.mean <= s.max) || s.sd < 0.0 {
                return Err(DatasetError::Infeasible(format!("{}: inconsistent min/mean/max/sd", p.name())));
            }
            if s.sd == 0.0 && s.min < s.max {
                return Err(DatasetError::Infeasible(format!("{}: SD is 0 but min < max", p.name())));
            }
        }
        let draws = DRAWN.map(|p| {
            let s = targets.get(p);
            Truncated { loc: s.mean, scale: s.sd, lo: s.min, hi: s.max }
        });
        let noise = NormalDist::new(0.0, noise_sd)
            .map_err(|e| DatasetError::Infeasible(format!("noise SD {noise_sd}: {e}")))?;
        let mut synth = Synthesizer {
            draws,
            ay: *targets.get(Parameter::Ay),
            td: *targets.get(Parameter::Td),
            d: *targets.get(Parameter::D),
            noise,
        };
        synth.calibrate(targets)?;
        Ok(synth)
    }

    /// Shifts each location so that the accepted records' means land on the
    /// target means despite truncation and rejection.
    fn calibrate(&mut self, targets: &SummaryTable) -> Result<(), DatasetError> {
        const ROUNDS: u64 = 30;
        const SAMPLES: usize = 8000;
        for round in 0..ROUNDS {
            let mut rng = trial_rng(0x5EED_CA11, round);
            let mut sums = [0.0; 5];
            for _ in 0..SAMPLES {
                let (x, _) = self.draw_accepted(&mut rng)?;
                for (s, v) in sums.iter_mut().zip(x) {
                    *s += v;
                }
            }
            for (k, p) in DRAWN.iter().enumerate() {
                let s = targets.get(*p);
                let t = &mut self.draws[k];
                t.loc += s.mean - sums[k] / SAMPLES as f64;
            }
        }
        Ok(())
    }

    fn draw_accepted<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<([f64; 5], f64), DatasetError> {
        const ATTEMPTS: usize = 10_000;
        for _ in 0..ATTEMPTS {
            let x = self.draws.map(|t| t.sample(rng));
            let [mw, amax, tp, ay_ratio, period_ratio] = x;
            let ay = ay_ratio * amax;
            let td = period_ratio * tp;
            if ay < self.ay.min || ay > self.ay.max || td < self.td.min || td > self.td.max {
                continue;
            }
            if (5.55 * period_ratio - 7.052).abs() < SYNTH_POLE_MARGIN {
                continue;
            }
            let Ok(ln_d) = gep_ln_displacement(mw, ay_ratio, period_ratio) else {
                continue;
            };
            let d = (ln_d + self.noise.sample(rng)).exp().clamp(self.d.min, self.d.max);
            return Ok((x, d));
        }
        Err(DatasetError::Infeasible(format!("no acceptable record after {ATTEMPTS} draws")))
    }
}

/// Synthetic case histories shaped by `targets`.
///
/// Magnitude, peak acceleration, predominant period and the two ratios are
/// drawn independently from normals truncated to each `[min, max]`, with
/// locations calibrated so the accepted means match the targets. Yield
/// acceleration and fundamental period follow from the ratios; records whose
/// derived values leave their bounds are redrawn. `D` is the evolved model's
/// prediction with lognormal noise, clipped to the `D` bounds.
pub fn synthesize<R: Rng + ?Sized>(targets: &SummaryTable, n: usize, rng: &mut R) -> Result<Vec<CaseHistory>, DatasetError> {
    synthesize_with_noise(targets, n, SYNTH_LN_NOISE_SD, rng)
}

pub fn synthesize_with_noise<R: Rng + ?Sized>(
    targets: &SummaryTable,
    n: usize,
    ln_noise_sd: f64,
    rng: &mut R,
) -> Result<Vec<CaseHistory>, DatasetError> {
    if n < 2 {
        return Err(DatasetError::TooFew { needed: 2, got: n });
    }
    let synth = Synthesizer::new(targets, ln_noise_sd)?;
    (0..n)
        .map(|i| {
            let ([mw, amax, tp, ay_ratio, period_ratio], d) = synth.draw_accepted(rng)?;
            Ok(CaseHistory {
                id: format!("S{:04}", i + 1),
                mw,
                amax,
                tp,
                td: period_ratio * tp,
                ay: ay_ratio * amax,
                d,
                tm: None,
                h: None,
                vs: None,
            })
        })
        .collect()
}
