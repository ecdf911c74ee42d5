//! Closed-form displacement predictors: the evolved model for `ln D`, six
//! classical rigid-block regressions with their applied ranges, the `4H/Vs`
//! fundamental-period rule, and one-at-a-time sensitivity profiles.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// Default half-width of the excluded band around the pole of the evolved
/// model, measured on its denominator `5.55 r - 7.052`.
pub const POLE_EPSILON: f64 = 1e-3;

/// Period ratio at which the evolved model's second term is singular.
pub const POLE_PERIOD_RATIO: f64 = 7.052 / 5.55;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("period ratio {period_ratio} is within the pole band of {POLE_PERIOD_RATIO:.5}")]
    Pole { period_ratio: f64 },
    #[error("{model}: {reason}")]
    Domain { model: &'static str, reason: String },
    #[error("{model} requires {input}")]
    MissingInput { model: &'static str, input: &'static str },
    #[error("unknown model id `{0}`")]
    UnknownModel(String),
    #[error("unknown sensitivity parameter `{0}` (expected Mw, ay_ratio or period_ratio)")]
    UnknownParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn domain(model: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::Domain { model, reason: reason.into() }
}

/// Ground-motion and embankment quantities for one prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelInput {
    /// Moment magnitude.
    pub mw: f64,
    /// Peak horizontal acceleration, g.
    pub amax: f64,
    /// Predominant period of the motion, s.
    pub tp: f64,
    /// Fundamental period of the embankment, s.
    pub td: f64,
    /// Yield acceleration, g.
    pub ay: f64,
    /// Mean period of the motion, s.
    pub tm: Option<f64>,
}

impl ModelInput {
    pub fn new(mw: f64, amax: f64, tp: f64, td: f64, ay: f64, tm: Option<f64>) -> Result<Self, ModelError> {
        let all = [mw, amax, tp, td, ay, tm.unwrap_or(1.0)];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidInput("non-finite value".into()));
        }
        if amax <= 0.0 {
            return Err(ModelError::InvalidInput(format!("amax = {amax} must be > 0")));
        }
        if tp <= 0.0 {
            return Err(ModelError::InvalidInput(format!("Tp = {tp} must be > 0")));
        }
        if td < 0.0 || ay < 0.0 {
            return Err(ModelError::InvalidInput("Td and ay must be >= 0".into()));
        }
        Ok(ModelInput { mw, amax, tp, td, ay, tm })
    }

    pub fn ay_ratio(&self) -> f64 {
        self.ay / self.amax
    }

    pub fn period_ratio(&self) -> f64 {
        self.td / self.tp
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbankmentGeometry {
    /// Height, m.
    pub height: f64,
    /// Shear-wave velocity, m/s.
    pub shear_wave_velocity: f64,
}

impl EmbankmentGeometry {
    pub fn new(height: f64, shear_wave_velocity: f64) -> Result<Self, ModelError> {
        if !(height > 0.0 && height.is_finite()) || !(shear_wave_velocity > 0.0 && shear_wave_velocity.is_finite()) {
            return Err(ModelError::InvalidInput(format!(
                "H = {height} and Vs = {shear_wave_velocity} must both be positive"
            )));
        }
        Ok(EmbankmentGeometry { height, shear_wave_velocity })
    }
}

/// `T_d = 4 H / V_s`.
pub fn fundamental_period(geom: &EmbankmentGeometry) -> f64 {
    4.0 * geom.height / geom.shear_wave_velocity
}

/// Transformed displacement scale a model reports in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scale {
    #[serde(rename = "ln_D_m")]
    LnMeters,
    #[serde(rename = "log10_D_cm")]
    Log10Centimeters,
    #[serde(rename = "log10_D_m")]
    Log10Meters,
    #[serde(rename = "ln_D_cm")]
    LnCentimeters,
}

impl Scale {
    pub fn tag(self) -> &'static str {
        match self {
            Scale::LnMeters => "ln_D_m",
            Scale::Log10Centimeters => "log10_D_cm",
            Scale::Log10Meters => "log10_D_m",
            Scale::LnCentimeters => "ln_D_cm",
        }
    }

    pub fn to_meters(self, value: f64) -> f64 {
        match self {
            Scale::LnMeters => value.exp(),
            Scale::Log10Centimeters => 10f64.powf(value) / 100.0,
            Scale::Log10Meters => 10f64.powf(value),
            Scale::LnCentimeters => value.exp() / 100.0,
        }
    }

    /// Natural log of the displacement in meters.
    pub fn to_ln_meters(self, value: f64) -> f64 {
        let cm = 100f64.ln();
        match self {
            Scale::LnMeters => value,
            Scale::Log10Centimeters => value * std::f64::consts::LN_10 - cm,
            Scale::Log10Meters => value * std::f64::consts::LN_10,
            Scale::LnCentimeters => value - cm,
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Registry of every predictor, addressable by string id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ModelId {
    Gep,
    HynesGriffin,
    AmbraseysMenu,
    Jibson,
    SaygiliRathje,
    Madiai,
    TsaiChien,
}

impl ModelId {
    pub const ALL: [ModelId; 7] = [
        ModelId::Gep,
        ModelId::HynesGriffin,
        ModelId::AmbraseysMenu,
        ModelId::Jibson,
        ModelId::SaygiliRathje,
        ModelId::Madiai,
        ModelId::TsaiChien,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelId::Gep => "gep",
            ModelId::HynesGriffin => "hynes_griffin",
            ModelId::AmbraseysMenu => "ambraseys_menu",
            ModelId::Jibson => "jibson",
            ModelId::SaygiliRathje => "saygili_rathje",
            ModelId::Madiai => "madiai",
            ModelId::TsaiChien => "tsai_chien",
        }
    }

    pub fn scale(self, options: &ModelOptions) -> Scale {
        match self {
            ModelId::Gep => Scale::LnMeters,
            ModelId::HynesGriffin | ModelId::Jibson | ModelId::Madiai => Scale::Log10Centimeters,
            ModelId::AmbraseysMenu if options.ambraseys_in_centimeters => Scale::Log10Centimeters,
            ModelId::AmbraseysMenu => Scale::Log10Meters,
            ModelId::SaygiliRathje | ModelId::TsaiChien => Scale::LnCentimeters,
        }
    }

    /// Applied range of the relationship. The evolved model carries none.
    pub fn range(self) -> ApplicabilityRange {
        let b = Bounds::new;
        let none = ApplicabilityRange::default();
        match self {
            ModelId::Gep => none,
            ModelId::HynesGriffin => ApplicabilityRange {
                mw: Some(b(None, Some(8.0))),
                ay_ratio: Some(b(Some(0.01), Some(0.6))),
                ..none
            },
            ModelId::AmbraseysMenu => ApplicabilityRange {
                mw: Some(b(Some(6.6), Some(7.2))),
                ay_ratio: Some(b(Some(0.05), Some(0.95))),
                ..none
            },
            ModelId::Jibson => ApplicabilityRange {
                mw: Some(b(Some(5.3), Some(7.6))),
                ay: Some(b(Some(0.05), Some(0.4))),
                ay_ratio: Some(b(None, Some(1.0))),
                ..none
            },
            ModelId::SaygiliRathje => ApplicabilityRange {
                mw: Some(b(Some(4.5), Some(7.9))),
                ay: Some(b(Some(0.05), Some(0.3))),
                amax: Some(b(None, Some(1.0))),
                ay_ratio: Some(b(Some(0.05), Some(1.0))),
            },
            ModelId::Madiai => ApplicabilityRange { ay_ratio: Some(b(Some(0.1), Some(0.9))), ..none },
            ModelId::TsaiChien => ApplicabilityRange {
                mw: Some(b(Some(5.9), Some(7.6))),
                amax: Some(b(None, Some(0.3))),
                ..none
            },
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

/// Inclusive interval; `None` leaves that side open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bounds {
    pub fn new(lower: Option<f64>, upper: Option<f64>) -> Self {
        if let (Some(l), Some(u)) = (lower, upper) {
            assert!(l <= u, "lower bound {l} above upper bound {u}");
        }
        Bounds { lower, upper }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower.is_none_or(|l| v >= l) && self.upper.is_none_or(|u| v <= u)
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => write!(f, "[{l}, {u}]"),
            (Some(l), None) => write!(f, ">= {l}"),
            (None, Some(u)) => write!(f, "<= {u}"),
            (None, None) => f.write_str("any"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ApplicabilityRange {
    pub mw: Option<Bounds>,
    pub ay: Option<Bounds>,
    pub amax: Option<Bounds>,
    pub ay_ratio: Option<Bounds>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quantity {
    Mw,
    Ay,
    Amax,
    AyRatio,
    Tm,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Mw => "Mw",
            Quantity::Ay => "ay",
            Quantity::Amax => "amax",
            Quantity::AyRatio => "ay/amax",
            Quantity::Tm => "Tm",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    OutOfBounds { quantity: Quantity, value: f64, bounds: Bounds },
    Missing(Quantity),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfBounds { quantity, value, bounds } => write!(f, "{quantity}={value} not in {bounds}"),
            Violation::Missing(q) => write!(f, "{q} missing"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Applicability {
    pub violations: Vec<Violation>,
}

impl Applicability {
    pub fn in_range(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every bound of the model's applied range that `input` violates.
pub fn check_applicability(model: ModelId, input: &ModelInput) -> Applicability {
    let range = model.range();
    let mut violations = Vec::new();
    let checks = [
        (Quantity::Mw, range.mw, input.mw),
        (Quantity::Ay, range.ay, input.ay),
        (Quantity::Amax, range.amax, input.amax),
        (Quantity::AyRatio, range.ay_ratio, input.ay_ratio()),
    ];
    for (quantity, bounds, value) in checks {
        if let Some(bounds) = bounds {
            if !bounds.contains(value) {
                violations.push(Violation::OutOfBounds { quantity, value, bounds });
            }
        }
    }
    if model == ModelId::TsaiChien && input.tm.is_none() {
        violations.push(Violation::Missing(Quantity::Tm));
    }
    Applicability { violations }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ModelOptions {
    /// Read the Ambraseys-Menu output as log10 of centimeters instead of meters.
    pub ambraseys_in_centimeters: bool,
    /// Pole band override for the evolved model; `None` uses [`POLE_EPSILON`].
    pub pole_epsilon: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub model: ModelId,
    pub value: f64,
    pub scale: Scale,
    pub in_range: bool,
    pub d_meters: f64,
}

impl Prediction {
    pub fn ln_d_meters(&self) -> f64 {
        self.scale.to_ln_meters(self.value)
    }
}

/// Evolved model:
///
/// ```text
/// ln D = 6.524 M / (M x^4 + 7.864) + (x r - r^2) / (5.55 r - 7.052)
///        + 3.647 / M^2 + x r - x - r - 5.098
/// ```
///
/// with `M` the magnitude, `x = ay/amax`, `r = Td/Tp` and `D` in meters.
pub fn gep_ln_displacement(mw: f64, ay_ratio: f64, period_ratio: f64) -> Result<f64, ModelError> {
    gep_ln_displacement_with(mw, ay_ratio, period_ratio, POLE_EPSILON)
}

pub fn gep_ln_displacement_with(mw: f64, ay_ratio: f64, period_ratio: f64, pole_epsilon: f64) -> Result<f64, ModelError> {
    const NAME: &str = "gep";
    if !(mw.is_finite() && ay_ratio.is_finite() && period_ratio.is_finite()) {
        return Err(domain(NAME, "non-finite input"));
    }
    if mw == 0.0 {
        return Err(domain(NAME, "Mw = 0"));
    }
    let (m, x, r) = (mw, ay_ratio, period_ratio);
    let pole = 5.55 * r - 7.052;
    if pole.abs() < pole_epsilon {
        return Err(ModelError::Pole { period_ratio });
    }
    let first_den = m * x.powi(4) + 7.864;
    if first_den == 0.0 {
        return Err(domain(NAME, "first denominator vanishes"));
    }
    let value = 6.524 * m / first_den + (x * r - r * r) / pole + 3.647 / (m * m) + x * r - x - r - 5.098;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(NAME, "non-finite result"))
    }
}

/// log10 D(cm). Defined for every ratio; only the range check restricts it.
pub fn hynes_griffin(ay_ratio: f64) -> f64 {
    let x = ay_ratio;
    -0.287 - 2.854 * x - 1.733 * x.powi(2) - 0.702 * x.powi(3) - 0.116 * x.powi(4)
}

fn open_unit(model: &'static str, x: f64) -> Result<(), ModelError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(domain(model, format!("ay/amax = {x} outside (0, 1)")))
    }
}

/// log10 D, meters as printed.
pub fn ambraseys_menu(ay_ratio: f64) -> Result<f64, ModelError> {
    let x = ay_ratio;
    open_unit("ambraseys_menu", x)?;
    Ok(0.9 + ((1.0 - x).powf(2.53) * x.powf(-1.09)).log10())
}

/// log10 D(cm).
pub fn jibson(ay_ratio: f64) -> Result<f64, ModelError> {
    let x = ay_ratio;
    open_unit("jibson", x)?;
    Ok(-0.215 + ((1.0 - x).powf(2.341) * x.powf(-1.438)).log10())
}

/// ln D(cm).
pub fn saygili_rathje(amax: f64, ay_ratio: f64) -> Result<f64, ModelError> {
    if amax.is_nan() || amax <= 0.0 {
        return Err(domain("saygili_rathje", format!("amax = {amax} must be > 0")));
    }
    let x = ay_ratio;
    Ok(5.52 + 0.72 * amax.ln() - 4.43 * x - 20.93 * x.powi(2) + 42.61 * x.powi(3) - 28.74 * x.powi(4))
}

/// log10 D(cm).
pub fn madiai(ay_ratio: f64) -> Result<f64, ModelError> {
    let x = ay_ratio;
    open_unit("madiai", x)?;
    Ok(-0.418 - 0.857 * x.log10() + 2.26 * (1.0 - x).log10())
}

/// ln D(cm).
pub fn tsai_chien(amax: f64, ay_ratio: f64, tm: f64) -> Result<f64, ModelError> {
    if amax.is_nan() || amax <= 0.0 || tm.is_nan() || tm <= 0.0 {
        return Err(domain("tsai_chien", format!("amax = {amax} and Tm = {tm} must be > 0")));
    }
    let x = ay_ratio;
    Ok(6.4 - 8.374 * x - 0.419 * x.powi(2) + 6.366 * x.powi(3) - 7.031 * x.powi(4)
        + 0.767 * amax.ln()
        + 1.757 * tm.ln())
}

/// Raw model output in the model's own scale.
pub fn model_value(model: ModelId, input: &ModelInput, options: &ModelOptions) -> Result<f64, ModelError> {
    let x = input.ay_ratio();
    match model {
        ModelId::Gep => gep_ln_displacement_with(
            input.mw,
            x,
            input.period_ratio(),
            options.pole_epsilon.unwrap_or(POLE_EPSILON),
        ),
        ModelId::HynesGriffin => Ok(hynes_griffin(x)),
        ModelId::AmbraseysMenu => ambraseys_menu(x),
        ModelId::Jibson => jibson(x),
        ModelId::SaygiliRathje => saygili_rathje(input.amax, x),
        ModelId::Madiai => madiai(x),
        ModelId::TsaiChien => {
            let tm = input.tm.ok_or(ModelError::MissingInput { model: "tsai_chien", input: "Tm" })?;
            tsai_chien(input.amax, x, tm)
        }
    }
}

pub fn predict(model: ModelId, input: &ModelInput, options: &ModelOptions) -> Result<Prediction, ModelError> {
    let value = model_value(model, input, options)?;
    let scale = model.scale(options);
    Ok(Prediction {
        model,
        value,
        scale,
        in_range: check_applicability(model, input).in_range(),
        d_meters: scale.to_meters(value),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SensitivityParam {
    Mw,
    AyRatio,
    PeriodRatio,
}

impl SensitivityParam {
    pub fn name(self) -> &'static str {
        match self {
            SensitivityParam::Mw => "Mw",
            SensitivityParam::AyRatio => "ay_ratio",
            SensitivityParam::PeriodRatio => "period_ratio",
        }
    }
}

impl FromStr for SensitivityParam {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Mw" | "mw" => Ok(SensitivityParam::Mw),
            "ay_ratio" => Ok(SensitivityParam::AyRatio),
            "period_ratio" => Ok(SensitivityParam::PeriodRatio),
            other => Err(ModelError::UnknownParameter(other.to_string())),
        }
    }
}

/// Values held fixed while one input varies. Defaults are the database means.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Anchors {
    pub mw: f64,
    pub ay_ratio: f64,
    pub period_ratio: f64,
}

impl Default for Anchors {
    fn default() -> Self {
        Anchors { mw: 7.091, ay_ratio: 0.770, period_ratio: 1.435 }
    }
}

impl Anchors {
    pub fn with(mut self, param: SensitivityParam, value: f64) -> Self {
        match param {
            SensitivityParam::Mw => self.mw = value,
            SensitivityParam::AyRatio => self.ay_ratio = value,
            SensitivityParam::PeriodRatio => self.period_ratio = value,
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Response {
    LnD(f64),
    /// Inside the pole band; no value is reported.
    Pole,
    /// Outside the formula's domain (e.g. Mw = 0).
    Undefined,
}

impl Response {
    pub fn value(self) -> Option<f64> {
        match self {
            Response::LnD(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub input: f64,
    pub response: Response,
}

pub fn sensitivity_profile(param: SensitivityParam, grid: &[f64], anchors: &Anchors) -> Vec<ProfilePoint> {
    grid.iter()
        .map(|&input| {
            let a = anchors.with(param, input);
            let response = match gep_ln_displacement(a.mw, a.ay_ratio, a.period_ratio) {
                Ok(v) => Response::LnD(v),
                Err(ModelError::Pole { .. }) => Response::Pole,
                Err(_) => Response::Undefined,
            };
            ProfilePoint { input, response }
        })
        .collect()
}

/// One profile per level of `level_param`, all varying `varied` over `grid`.
pub fn sensitivity_family(
    varied: SensitivityParam,
    grid: &[f64],
    level_param: SensitivityParam,
    levels: &[f64],
    anchors: &Anchors,
) -> Result<Vec<(f64, Vec<ProfilePoint>)>, ModelError> {
    if varied == level_param {
        return Err(ModelError::InvalidInput(format!(
            "family level parameter must differ from the varied parameter `{}`",
            varied.name()
        )));
    }
    Ok(levels
        .iter()
        .map(|&level| (level, sensitivity_profile(varied, grid, &anchors.with(level_param, level))))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(mw: f64, amax: f64, ay: f64) -> ModelInput {
        ModelInput::new(mw, amax, 0.4, 0.5, ay, None).unwrap()
    }

    #[test]
    fn pole_is_an_error_not_infinity() {
        assert_eq!(
            gep_ln_displacement(7.0, 0.5, POLE_PERIOD_RATIO),
            Err(ModelError::Pole { period_ratio: POLE_PERIOD_RATIO })
        );
        let just_outside = (7.052 + 1.5e-3) / 5.55;
        assert!(gep_ln_displacement(7.0, 0.5, just_outside).unwrap().is_finite());
        let just_inside = (7.052 + 0.5e-3) / 5.55;
        assert!(matches!(gep_ln_displacement(7.0, 0.5, just_inside), Err(ModelError::Pole { .. })));
    }

    #[test]
    fn zero_magnitude_is_a_domain_error() {
        assert!(matches!(gep_ln_displacement(0.0, 0.5, 2.0), Err(ModelError::Domain { .. })));
    }

    #[test]
    fn zero_ratio_reduces_the_formula() {
        for &(m, r) in &[(7.0, 2.0), (5.5, 0.3), (8.1, 3.7)] {
            let reduced = 6.524 * m / 7.864 + (-r * r) / (5.55 * r - 7.052) + 3.647 / (m * m) - r - 5.098;
            let got = gep_ln_displacement(m, 0.0, r).unwrap();
            assert!((got - reduced).abs() < 1e-12, "{got} vs {reduced}");
        }
    }

    #[test]
    fn baseline_trivial_values() {
        assert_eq!(hynes_griffin(0.0), -0.287);
        assert_eq!(saygili_rathje(1.0, 0.0).unwrap(), 5.52);
        assert_eq!(tsai_chien(1.0, 0.0, 1.0).unwrap(), 6.4);
        let expect = -0.418 - 0.857 * 0.5f64.log10() + 2.26 * 0.5f64.log10();
        assert!((madiai(0.5).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn baseline_domain_errors() {
        assert!(ambraseys_menu(1.0).is_err());
        assert!(ambraseys_menu(0.0).is_err());
        assert!(jibson(1.0).is_err());
        assert!(madiai(1.0).is_err());
        assert!(madiai(-0.1).is_err());
        assert!(saygili_rathje(0.0, 0.3).is_err());
        assert!(tsai_chien(0.3, 0.3, 0.0).is_err());
        assert!(tsai_chien(-0.3, 0.3, 1.0).is_err());
    }

    #[test]
    fn applied_ranges() {
        let hg = input(7.0, 1.0, 0.3);
        assert!(check_applicability(ModelId::HynesGriffin, &hg).in_range());
        let zero = input(7.0, 1.0, 0.0);
        assert!(!predict(ModelId::HynesGriffin, &zero, &ModelOptions::default()).unwrap().in_range);

        let am = input(7.0, 1.0, 0.05);
        assert!(check_applicability(ModelId::AmbraseysMenu, &am).in_range());

        let jib = input(6.0, 0.4, 0.2);
        assert!(check_applicability(ModelId::Jibson, &jib).in_range());
        let jib8 = input(8.0, 0.4, 0.2);
        let verdict = check_applicability(ModelId::Jibson, &jib8);
        assert_eq!(verdict.violations.len(), 1);
        assert!(matches!(verdict.violations[0], Violation::OutOfBounds { quantity: Quantity::Mw, .. }));

        let sr = input(6.0, 0.5, 0.1);
        assert!(check_applicability(ModelId::SaygiliRathje, &sr).in_range());

        let md = input(7.0, 1.0, 0.1);
        assert!(check_applicability(ModelId::Madiai, &md).in_range());

        let tc = ModelInput { tm: Some(0.5), ..input(7.0, 0.5, 0.1) };
        let verdict = check_applicability(ModelId::TsaiChien, &tc);
        assert!(matches!(verdict.violations[..], [Violation::OutOfBounds { quantity: Quantity::Amax, .. }]));
    }

    #[test]
    fn every_violation_is_listed() {
        let bad = input(9.0, 1.2, 1.3);
        let verdict = check_applicability(ModelId::SaygiliRathje, &bad);
        let q: Vec<Quantity> = verdict
            .violations
            .iter()
            .map(|v| match v {
                Violation::OutOfBounds { quantity, .. } => *quantity,
                Violation::Missing(q) => *q,
            })
            .collect();
        assert_eq!(q, vec![Quantity::Mw, Quantity::Ay, Quantity::Amax, Quantity::AyRatio]);
    }

    #[test]
    fn missing_mean_period() {
        let i = input(7.0, 0.25, 0.075);
        let verdict = check_applicability(ModelId::TsaiChien, &i);
        assert_eq!(verdict.violations, vec![Violation::Missing(Quantity::Tm)]);
        assert_eq!(
            predict(ModelId::TsaiChien, &i, &ModelOptions::default()),
            Err(ModelError::MissingInput { model: "tsai_chien", input: "Tm" })
        );
    }

    #[test]
    fn registry_ids_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.id().parse::<ModelId>().unwrap(), m);
        }
        assert!(matches!("newmark".parse::<ModelId>(), Err(ModelError::UnknownModel(_))));
    }

    #[test]
    fn scale_conversions() {
        let v = 1.7;
        assert!((Scale::LnMeters.to_meters(v) - v.exp()).abs() < 1e-12);
        assert!((Scale::Log10Centimeters.to_meters(2.0) - 1.0).abs() < 1e-12);
        assert!((Scale::Log10Meters.to_meters(0.0) - 1.0).abs() < 1e-12);
        assert!((Scale::LnCentimeters.to_meters(100f64.ln()) - 1.0).abs() < 1e-12);
        for s in [Scale::LnMeters, Scale::Log10Centimeters, Scale::Log10Meters, Scale::LnCentimeters] {
            assert!((s.to_ln_meters(v) - s.to_meters(v).ln()).abs() < 1e-12, "{s}");
        }
        // a log10(cm) model equals a log10(m) model shifted by log10(100)
        let in_m = Scale::Log10Meters.to_meters(v);
        let in_cm = Scale::Log10Centimeters.to_meters(v + 2.0);
        assert!((in_m - in_cm).abs() < 1e-12 * in_m);
    }

    #[test]
    fn ambraseys_units_override() {
        let i = input(7.0, 1.0, 0.5);
        let m = predict(ModelId::AmbraseysMenu, &i, &ModelOptions::default()).unwrap();
        let cm = predict(
            ModelId::AmbraseysMenu,
            &i,
            &ModelOptions { ambraseys_in_centimeters: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(m.value, cm.value);
        assert!((m.d_meters / cm.d_meters - 100.0).abs() < 1e-9);
    }

    #[test]
    fn fundamental_period_rule() {
        assert_eq!(fundamental_period(&EmbankmentGeometry::new(25.0, 200.0).unwrap()), 0.5);
        assert_eq!(fundamental_period(&EmbankmentGeometry::new(100.0, 400.0).unwrap()), 1.0);
        assert!(EmbankmentGeometry::new(0.0, 200.0).is_err());
        assert!(EmbankmentGeometry::new(10.0, -1.0).is_err());
    }

    #[test]
    fn model_input_invariants() {
        assert!(ModelInput::new(7.0, 0.0, 0.4, 0.5, 0.1, None).is_err());
        assert!(ModelInput::new(7.0, 0.3, 0.0, 0.5, 0.1, None).is_err());
        assert!(ModelInput::new(7.0, 0.3, 0.4, -0.5, 0.1, None).is_err());
        let i = ModelInput::new(7.0, 0.3, 0.4, 0.5, 0.1, None).unwrap();
        assert!((i.ay_ratio() * i.amax - i.ay).abs() < 1e-15);
        assert!((i.period_ratio() * i.tp - i.td).abs() < 1e-15);
    }

    #[test]
    fn singleton_profile_equals_direct_call() {
        let a = Anchors::default();
        let p = sensitivity_profile(SensitivityParam::Mw, &[6.3], &a);
        assert_eq!(p[0].response, Response::LnD(gep_ln_displacement(6.3, a.ay_ratio, a.period_ratio).unwrap()));
    }

    #[test]
    fn profile_marks_pole_rows() {
        let p = sensitivity_profile(SensitivityParam::PeriodRatio, &[1.0, POLE_PERIOD_RATIO, 2.0], &Anchors::default());
        assert!(matches!(p[0].response, Response::LnD(_)));
        assert_eq!(p[1].response, Response::Pole);
        assert!(matches!(p[2].response, Response::LnD(_)));
    }

    #[test]
    fn unknown_parameter_rejected() {
        assert!(matches!("Tp".parse::<SensitivityParam>(), Err(ModelError::UnknownParameter(_))));
    }

    #[test]
    fn family_layout() {
        let grid = [5.0, 6.0, 7.0];
        let fam = sensitivity_family(
            SensitivityParam::Mw,
            &grid,
            SensitivityParam::AyRatio,
            &[0.2, 0.5, 1.0],
            &Anchors::default(),
        )
        .unwrap();
        assert_eq!(fam.len(), 3);
        assert!(fam.iter().all(|(_, pts)| pts.len() == 3));
        assert!(sensitivity_family(SensitivityParam::Mw, &grid, SensitivityParam::Mw, &[1.0], &Anchors::default()).is_err());
    }
}
