//! Accuracy measures for measured/predicted pairs, relative error, Pearson
//! correlation, cumulative-frequency curves and residual summaries.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no pairs")]
    Empty,
    #[error("{measured} measured values but {predicted} predicted")]
    LengthMismatch { measured: usize, predicted: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("measured values are all identical; R² is undefined")]
    ConstantMeasured,
    #[error("sum of measured values is zero")]
    ZeroMeasuredSum,
    #[error("mean of measured values is zero")]
    ZeroMeasuredMean,
    #[error("measured displacement is zero")]
    ZeroMeasured,
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("constant vector; correlation is undefined")]
    ConstantVector,
}

/// Measured (`Y_m`) and predicted (`Y_p`) values, pairwise.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSet {
    measured: Vec<f64>,
    predicted: Vec<f64>,
}

impl PredictionSet {
    pub fn new(measured: Vec<f64>, predicted: Vec<f64>) -> Result<Self, MetricsError> {
        if measured.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch { measured: measured.len(), predicted: predicted.len() });
        }
        if measured.is_empty() {
            return Err(MetricsError::Empty);
        }
        if let Some(i) = measured.iter().zip(&predicted).position(|(m, p)| !m.is_finite() || !p.is_finite()) {
            return Err(MetricsError::NonFinite(i));
        }
        Ok(PredictionSet { measured, predicted })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, MetricsError> {
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn len(&self) -> usize {
        self.measured.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measured.is_empty()
    }

    pub fn measured(&self) -> &[f64] {
        &self.measured
    }

    pub fn predicted(&self) -> &[f64] {
        &self.predicted
    }

    pub fn measured_sum(&self) -> f64 {
        self.measured.iter().sum()
    }

    pub fn mean_measured(&self) -> f64 {
        self.measured_sum() / self.len() as f64
    }

    /// `Y_p - Y_m` per pair.
    pub fn residuals(&self) -> Vec<f64> {
        self.pairs().map(|(m, p)| p - m).collect()
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.measured.iter().copied().zip(self.predicted.iter().copied())
    }

    fn sum_abs_error(&self) -> f64 {
        self.pairs().map(|(m, p)| (p - m).abs()).sum()
    }

    fn sum_sq_error(&self) -> f64 {
        self.pairs().map(|(m, p)| (p - m) * (p - m)).sum()
    }
}

/// Coefficient of determination, `1 - SS_res / SS_tot`.
pub fn r_squared(set: &PredictionSet) -> Result<f64, MetricsError> {
    let mean = set.mean_measured();
    let ss_tot: f64 = set.measured.iter().map(|m| (m - mean) * (m - mean)).sum();
    if ss_tot == 0.0 {
        return Err(MetricsError::ConstantMeasured);
    }
    Ok(1.0 - set.sum_sq_error() / ss_tot)
}

/// MAE in its normalized form `(1/N) * (Σ|Y_p - Y_m| / ΣY_m)`.
pub fn mae_normalized(set: &PredictionSet) -> Result<f64, MetricsError> {
    let sum = set.measured_sum();
    if sum == 0.0 {
        return Err(MetricsError::ZeroMeasuredSum);
    }
    Ok((set.sum_abs_error() / sum) / set.len() as f64)
}

/// Conventional mean absolute error, `(1/N) Σ|Y_p - Y_m|`.
pub fn mae_conventional(set: &PredictionSet) -> f64 {
    set.sum_abs_error() / set.len() as f64
}

pub fn rmse(set: &PredictionSet) -> f64 {
    (set.sum_sq_error() / set.len() as f64).sqrt()
}

/// RMSE over the mean measured value.
pub fn scatter_index(set: &PredictionSet) -> Result<f64, MetricsError> {
    let mean = set.mean_measured();
    if mean == 0.0 {
        return Err(MetricsError::ZeroMeasuredMean);
    }
    Ok(rmse(set) / mean)
}

/// Mean absolute difference; numerically the same quantity as
/// [`mae_conventional`].
pub fn bias(set: &PredictionSet) -> f64 {
    set.sum_abs_error() / set.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n: usize,
    pub r_squared: f64,
    pub mae_normalized: f64,
    pub mae_conventional: f64,
    pub rmse: f64,
    pub scatter_index: f64,
    pub bias: f64,
}

impl MetricsReport {
    pub fn compute(set: &PredictionSet) -> Result<Self, MetricsError> {
        Ok(MetricsReport {
            n: set.len(),
            r_squared: r_squared(set)?,
            mae_normalized: mae_normalized(set)?,
            mae_conventional: mae_conventional(set),
            rmse: rmse(set),
            scatter_index: scatter_index(set)?,
            bias: bias(set),
        })
    }
}

/// One row of a Training / Validation / All-data table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: String,
    /// Space the metrics were computed in, e.g. `ln_D_m`.
    pub space: String,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

pub fn write_stage_reports_csv<W: Write>(rows: &[StageReport], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "stage",
        "space",
        "n",
        "r_squared",
        "mae_normalized",
        "mae_conventional",
        "rmse",
        "scatter_index",
        "bias",
    ])?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.stage.clone(),
            r.space.clone(),
            m.n.to_string(),
            format!("{:?}", m.r_squared),
            format!("{:?}", m.mae_normalized),
            format!("{:?}", m.mae_conventional),
            format!("{:?}", m.rmse),
            format!("{:?}", m.scatter_index),
            format!("{:?}", m.bias),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Signed percent deviation of the prediction from the measurement.
pub fn relative_error(measured: f64, predicted: f64) -> Result<f64, MetricsError> {
    if measured == 0.0 {
        return Err(MetricsError::ZeroMeasured);
    }
    Ok((predicted - measured) / measured * 100.0)
}

/// Product-moment correlation coefficient.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch { measured: x.len(), predicted: y.len() });
    }
    if x.len() < 2 {
        return Err(MetricsError::TooFew { needed: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::ConstantVector);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Lower-triangular correlation table over named columns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// `rows[i]` holds correlations with columns `0..=i`.
    pub rows: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn compute(columns: &[(String, Vec<f64>)]) -> Result<Self, MetricsError> {
        let mut rows = Vec::with_capacity(columns.len());
        for (i, (_, xi)) in columns.iter().enumerate() {
            let mut row = Vec::with_capacity(i + 1);
            for (_, xj) in &columns[..i] {
                row.push(pearson_r(xi, xj)?);
            }
            // validates the column even though the diagonal is 1 by definition
            pearson_r(xi, xi)?;
            row.push(1.0);
            rows.push(row);
        }
        Ok(CorrelationMatrix { names: columns.iter().map(|c| c.0.clone()).collect(), rows })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["parameter".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.names.iter().zip(&self.rows) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| format!("{v:.3}")));
            rec.resize(self.names.len() + 1, String::new());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrequencyPoint {
    pub threshold: f64,
    pub fraction: f64,
}

/// Fraction of `errors` at or below each grid threshold.
pub fn cumulative_frequency(errors: &[f64], grid: &[f64]) -> Result<Vec<FrequencyPoint>, MetricsError> {
    if errors.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&threshold| {
            let count = sorted.partition_point(|&e| e <= threshold);
            FrequencyPoint { threshold, fraction: count as f64 / n }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualSummary {
    pub residuals: Vec<f64>,
    pub mean: f64,
    pub mean_abs: f64,
    /// Sample standard deviation (N - 1 denominator).
    pub sd: f64,
    /// All residuals equal, so the spread carries no information.
    pub degenerate: bool,
    /// Mean minus / plus one SD.
    pub minus_sd: f64,
    pub plus_sd: f64,
    pub histogram: Vec<HistogramBin>,
}

pub fn residual_summary(set: &PredictionSet, bins: usize) -> Result<ResidualSummary, MetricsError> {
    let residuals = set.residuals();
    let n = residuals.len();
    if n < 2 {
        return Err(MetricsError::TooFew { needed: 2, got: n });
    }
    let bins = bins.max(1);
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let mean_abs = residuals.iter().map(|r| r.abs()).sum::<f64>() / n as f64;
    let sd = (residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64).sqrt();
    let lo = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let histogram = if hi > lo {
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for r in &residuals {
            let k = (((r - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(k, count)| HistogramBin {
                low: lo + width * k as f64,
                high: if k + 1 == bins { hi } else { lo + width * (k + 1) as f64 },
                count,
            })
            .collect()
    } else {
        vec![HistogramBin { low: lo, high: hi, count: n }]
    };

    Ok(ResidualSummary {
        residuals,
        mean,
        mean_abs,
        sd,
        degenerate: hi == lo,
        minus_sd: mean - sd,
        plus_sd: mean + sd,
        histogram,
    })
}

impl ResidualSummary {
    pub fn write_histogram_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_low", "bin_high", "count"])?;
        for b in &self.histogram {
            w.write_record([format!("{:?}", b.low), format!("{:?}", b.high), b.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(pairs: &[(f64, f64)]) -> PredictionSet {
        PredictionSet::from_pairs(pairs).unwrap()
    }

    #[test]
    fn perfect_predictions() {
        let s = set(&[(1.0, 1.0), (2.5, 2.5), (4.0, 4.0)]);
        let r = MetricsReport::compute(&s).unwrap();
        assert_eq!((r.r_squared, r.mae_normalized, r.rmse, r.scatter_index, r.bias), (1.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn mean_predictor_has_zero_r_squared() {
        let s = set(&[(1.0, 2.5), (2.0, 2.5), (3.0, 2.5), (4.0, 2.5)]);
        assert_eq!(r_squared(&s).unwrap(), 0.0);
    }

    #[test]
    fn r_squared_hand_value() {
        // mean 2.5, SS_tot = 5, SS_res = 1 + 0 + 1 + 1 = 3
        let s = set(&[(1.0, 2.0), (2.0, 2.0), (3.0, 2.0), (4.0, 3.0)]);
        assert!((r_squared(&s).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn r_squared_needs_spread() {
        assert_eq!(r_squared(&set(&[(2.0, 1.0), (2.0, 3.0)])), Err(MetricsError::ConstantMeasured));
    }

    #[test]
    fn mae_normalized_direct() {
        assert_eq!(mae_normalized(&set(&[(1.0, 2.0), (1.0, 0.0)])).unwrap(), 0.5);
        assert_eq!(mae_normalized(&set(&[(1.0, 2.0), (-1.0, 0.0)])), Err(MetricsError::ZeroMeasuredSum));
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&set(&[(1.0, 1.0)])), 0.0);
        assert_eq!(rmse(&set(&[(0.0, 3.0)])), 3.0);
        assert_eq!(rmse(&set(&[(0.0, 1.0), (0.0, -1.0)])), 1.0);
    }

    #[test]
    fn scatter_index_examples() {
        // rmse 2, mean 4
        assert_eq!(scatter_index(&set(&[(4.0, 6.0), (4.0, 2.0)])).unwrap(), 0.5);
        assert_eq!(scatter_index(&set(&[(-1.0, 0.0), (1.0, 0.0)])), Err(MetricsError::ZeroMeasuredMean));
    }

    #[test]
    fn bias_example() {
        assert_eq!(bias(&set(&[(1.0, 2.0), (5.0, 3.0)])), 1.5);
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(relative_error(2.0, 4.0).unwrap(), 100.0);
        assert_eq!(relative_error(2.0, 1.0).unwrap(), -50.0);
        assert_eq!(relative_error(0.0, 1.0), Err(MetricsError::ZeroMeasured));
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let aff: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson_r(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_r(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson_r(&x, &aff).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pearson_r(&x, &[1.0; 4]), Err(MetricsError::ConstantVector));
        assert!(matches!(pearson_r(&[1.0], &[1.0]), Err(MetricsError::TooFew { .. })));
    }

    #[test]
    fn cumulative_frequency_examples() {
        let e = [-10.0, 0.0, 10.0];
        let cf = cumulative_frequency(&e, &[-20.0, 0.0, 10.0, 50.0]).unwrap();
        let f: Vec<f64> = cf.iter().map(|p| p.fraction).collect();
        assert_eq!(f, vec![0.0, 2.0 / 3.0, 1.0, 1.0]);
        assert!(cumulative_frequency(&[], &[0.0]).is_err());
    }

    #[test]
    fn residual_examples() {
        let same = residual_summary(&set(&[(1.0, 1.0), (2.0, 2.0)]), 5).unwrap();
        assert!(same.degenerate);
        assert_eq!(same.sd, 0.0);
        assert_eq!(same.histogram.iter().map(|b| b.count).sum::<usize>(), 2);

        let two = residual_summary(&set(&[(1.0, 0.0), (1.0, 2.0)]), 4).unwrap();
        assert_eq!(two.mean_abs, 1.0);
        assert!((two.sd - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(two.histogram.len(), 4);
        assert_eq!(two.histogram[0].count + two.histogram[3].count, 2);

        assert!(matches!(residual_summary(&set(&[(1.0, 0.0)]), 4), Err(MetricsError::TooFew { .. })));
    }

    #[test]
    fn correlation_matrix_layout() {
        let cols = vec![
            ("a".to_string(), vec![1.0, 2.0, 3.0]),
            ("b".to_string(), vec![3.0, 1.0, 2.0]),
            ("c".to_string(), vec![2.0, 4.0, 6.5]),
        ];
        let m = CorrelationMatrix::compute(&cols).unwrap();
        assert_eq!(m.rows.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(m.rows.iter().all(|r| *r.last().unwrap() == 1.0));
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("parameter,a,b,c\na,1.000,,\n"), "{text}");
    }

    fn pairs_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.01f64..100.0, -100.0f64..100.0), 1..60)
    }

    proptest! {
        #[test]
        fn bias_never_exceeds_rmse(pairs in pairs_strategy()) {
            let s = set(&pairs);
            prop_assert!(bias(&s) <= rmse(&s) * (1.0 + 1e-12) + 1e-12);
            prop_assert!(bias(&s) >= 0.0);
        }

        #[test]
        fn mae_normalized_is_bias_over_measured_sum(pairs in pairs_strategy()) {
            let s = set(&pairs);
            let lhs = mae_normalized(&s).unwrap();
            let rhs = bias(&s) / s.measured_sum();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn cumulative_frequency_is_monotone(
            errors in prop::collection::vec(-500.0f64..500.0, 1..100),
            mut grid in prop::collection::vec(-600.0f64..600.0, 1..40),
        ) {
            grid.sort_by(f64::total_cmp);
            let cf = cumulative_frequency(&errors, &grid).unwrap();
            prop_assert!(cf.windows(2).all(|w| w[1].fraction >= w[0].fraction));
            prop_assert!(cf.iter().all(|p| (0.0..=1.0).contains(&p.fraction)));
            let max = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(cumulative_frequency(&errors, &[max]).unwrap()[0].fraction, 1.0);
        }

        #[test]
        fn histogram_counts_sum_to_n(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..80), bins in 1usize..20) {
            let s = set(&pairs);
            let h = residual_summary(&s, bins).unwrap();
            prop_assert_eq!(h.histogram.iter().map(|b| b.count).sum::<usize>(), pairs.len());
        }

        #[test]
        fn pearson_affine_invariance(
            x in prop::collection::vec(-50.0f64..50.0, 3..30),
            scale in 0.1f64..10.0,
            shift in -10.0f64..10.0,
        ) {
            let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v * v + i as f64).collect();
            if let Ok(r) = pearson_r(&x, &y) {
                let xs: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
                let xn: Vec<f64> = x.iter().map(|v| -v).collect();
                prop_assert!((pearson_r(&xs, &y).unwrap() - r).abs() < 1e-9);
                prop_assert!((pearson_r(&xn, &y).unwrap() + r).abs() < 1e-9);
            }
        }
    }
}
