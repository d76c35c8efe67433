//! Weighted least-squares polynomial trend fitting and extrapolation.
//!
//! The trend is `A(t) = a t^4 + b t^3 + c t^2 + d t + e` on the analysis
//! window's day index. Coefficients minimize `sum_t w_t (y_t - A(t))^2`.
//!
//! Raw day indices up to ~90 make a quartic Vandermonde system badly
//! conditioned, so the solve runs on `s = (t - center) / half_width` in
//! `[-1, 1]` via Householder QR of `sqrt(W) X`, and the result is mapped
//! back to the raw day-index basis with an exact affine basis change.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::least_squares;
use crate::poly::{compose_affine, horner, power_sum};
use crate::scalar::Scalar;

/// Days past the end of the fit window for which predictions are trusted.
pub const VALIDITY_HORIZON_DAYS: i64 = 28;

/// Condition-number ceiling for `f64`; narrower types use `0.01 / epsilon`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("insufficient data: need {needed} observations, have {available}")]
    InsufficientData { needed: usize, available: usize },
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error("observation on day {0} is not finite")]
    NonFinite(i64),
    #[error("weight on day {0} underflows to zero")]
    NonPositiveWeight(i64),
    #[error("singular system: condition estimate {condition:e} exceeds {limit:e}")]
    SingularSystem { condition: f64, limit: f64 },
}

impl FitError {
    pub fn name(&self) -> &'static str {
        match self {
            FitError::InsufficientData { .. } => "InsufficientData",
            FitError::InvalidConfig(_) => "InvalidConfig",
            FitError::NonFinite(_) => "NonFinite",
            FitError::NonPositiveWeight(_) => "NonPositiveWeight",
            FitError::SingularSystem { .. } => "SingularSystem",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitTarget {
    ActiveCases,
    GrowthRate,
    Tpr,
}

/// Observation weights. Written as `uniform` or `exp:<decay>`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightScheme {
    #[default]
    Uniform,
    /// `w_t = decay^(t_last - t)`: the newest observation has weight 1.
    Exponential { decay: f64 },
}

impl WeightScheme {
    fn validate(&self) -> Result<(), FitError> {
        match *self {
            WeightScheme::Exponential { decay } if !(decay > 0.0 && decay <= 1.0) => Err(
                FitError::InvalidConfig(format!("exponential decay {decay} outside (0, 1]")),
            ),
            _ => Ok(()),
        }
    }

    pub fn weight<T: Scalar>(&self, days_before_last: i64) -> T {
        match *self {
            WeightScheme::Uniform => T::one(),
            WeightScheme::Exponential { decay } => {
                T::lit(decay).powi(days_before_last as i32)
            }
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightScheme::Uniform => f.write_str("uniform"),
            WeightScheme::Exponential { decay } => write!(f, "exp:{decay}"),
        }
    }
}

impl FromStr for WeightScheme {
    type Err = FitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let scheme = match s.trim() {
            "uniform" => WeightScheme::Uniform,
            other => {
                let decay = other
                    .strip_prefix("exp:")
                    .and_then(|d| d.parse::<f64>().ok())
                    .ok_or_else(|| {
                        FitError::InvalidConfig(format!("unknown weight scheme {other:?}"))
                    })?;
                WeightScheme::Exponential { decay }
            }
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

impl TryFrom<String> for WeightScheme {
    type Error = FitError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<WeightScheme> for String {
    fn from(value: WeightScheme) -> Self {
        value.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub degree: usize,
    #[serde(rename = "weights")]
    pub weight_scheme: WeightScheme,
    pub window_days: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            degree: 4,
            weight_scheme: WeightScheme::Uniform,
            window_days: 60,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        if self.degree < 1 {
            return Err(FitError::InvalidConfig("degree must be at least 1".into()));
        }
        if self.window_days < self.degree + 1 {
            return Err(FitError::InsufficientData {
                needed: self.degree + 1,
                available: self.window_days,
            });
        }
        self.weight_scheme.validate()
    }
}

/// Values observed on integer day indices, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations<T> {
    pub target: FitTarget,
    pub day_index: Vec<i64>,
    pub values: Vec<T>,
}

impl<T: Scalar> Observations<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations with the last `n` dropped.
    pub fn truncated(&self, drop_last: usize) -> Observations<T> {
        let keep = self.len().saturating_sub(drop_last);
        Observations {
            target: self.target,
            day_index: self.day_index[..keep].to_vec(),
            values: self.values[..keep].to_vec(),
        }
    }
}

/// Raw-basis weighted design: row `t` is `[t^d, ..., t, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    pub target: FitTarget,
    pub degree: usize,
    pub weight_scheme: WeightScheme,
    pub day_index: Vec<i64>,
    pub x: Vec<Vec<T>>,
    pub y: Vec<T>,
    pub w: Vec<T>,
}

impl<T: Scalar> DesignMatrix<T> {
    pub fn rows(&self) -> usize {
        self.x.len()
    }

    pub fn cols(&self) -> usize {
        self.degree + 1
    }

    pub fn column_sums(&self) -> Vec<T> {
        (0..self.cols())
            .map(|j| self.x.iter().fold(T::zero(), |s, row| s + row[j]))
            .collect()
    }
}

/// Takes the trailing `config.window_days` observations into a design matrix.
pub fn build_design<T: Scalar>(
    obs: &Observations<T>,
    config: &FitConfig,
) -> Result<DesignMatrix<T>, FitError> {
    config.validate()?;
    if obs.len() < config.window_days {
        return Err(FitError::InsufficientData {
            needed: config.window_days,
            available: obs.len(),
        });
    }
    let start = obs.len() - config.window_days;
    let day_index = obs.day_index[start..].to_vec();
    let y = obs.values[start..].to_vec();
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(FitError::NonFinite(day_index[i]));
    }

    let last = *day_index.last().expect("window is non-empty");
    let mut w = Vec::with_capacity(day_index.len());
    for &t in &day_index {
        let weight: T = config.weight_scheme.weight(last - t);
        if !(weight > T::zero()) {
            return Err(FitError::NonPositiveWeight(t));
        }
        w.push(weight);
    }

    let x = day_index
        .iter()
        .map(|&t| {
            let t = T::from_day(t);
            (0..=config.degree)
                .map(|j| t.powi((config.degree - j) as i32))
                .collect()
        })
        .collect();
    Ok(DesignMatrix {
        target: obs.target,
        degree: config.degree,
        weight_scheme: config.weight_scheme,
        day_index,
        x,
        y,
        w,
    })
}

/// A fitted trend on the raw day-index basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PolyModel<T: Scalar> {
    pub target: FitTarget,
    pub degree: usize,
    /// Highest power first.
    pub coefficients: Vec<T>,
    pub fit_window: (i64, i64),
    pub weight_scheme: WeightScheme,
    pub residual_rms: T,
}

impl<T: Scalar> PolyModel<T> {
    /// Wraps externally supplied coefficients (highest power first).
    pub fn from_coefficients(target: FitTarget, coefficients: Vec<T>, fit_window: (i64, i64)) -> Self {
        PolyModel {
            target,
            degree: coefficients.len().saturating_sub(1),
            coefficients,
            fit_window,
            weight_scheme: WeightScheme::Uniform,
            residual_rms: T::zero(),
        }
    }

    /// Horner evaluation; logs a warning past the validity horizon.
    pub fn predict(&self, day_index: T) -> T {
        if self.beyond_horizon(day_index) {
            log::warn!(
                "prediction at day {day_index} is more than {VALIDITY_HORIZON_DAYS} days past the fit window end {}",
                self.fit_window.1
            );
        }
        horner(&self.coefficients, day_index)
    }

    pub fn beyond_horizon(&self, day_index: T) -> bool {
        day_index > T::from_day(self.fit_window.1 + VALIDITY_HORIZON_DAYS)
    }

    /// Evaluation by explicit powers, for cross-checking.
    pub fn predict_power_sum(&self, day_index: T) -> T {
        power_sum(&self.coefficients, day_index)
    }

    pub fn end_day(&self) -> i64 {
        self.fit_window.1
    }
}

/// The same trend on the internal scaled variable `s = (t - center) / half_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPoly<T> {
    pub coefficients: Vec<T>,
    pub center: T,
    pub half_width: T,
}

impl<T: Scalar> ScaledPoly<T> {
    pub fn eval(&self, day_index: T) -> T {
        horner(&self.coefficients, (day_index - self.center) / self.half_width)
    }

    pub fn to_raw(&self) -> Vec<T> {
        let scale = T::one() / self.half_width;
        compose_affine(&self.coefficients, scale, -self.center * scale)
    }
}

/// Everything the solve produces, including internals useful for diagnostics.
#[derive(Debug, Clone)]
pub struct FitDetail<T: Scalar> {
    pub model: PolyModel<T>,
    pub scaled: ScaledPoly<T>,
    pub condition: T,
}

fn condition_limit<T: Scalar>() -> T {
    T::lit(MAX_CONDITION).min(T::lit(0.01) / T::epsilon())
}

pub fn fit<T: Scalar>(design: &DesignMatrix<T>) -> Result<PolyModel<T>, FitError> {
    fit_detailed(design).map(|d| d.model)
}

pub fn fit_detailed<T: Scalar>(design: &DesignMatrix<T>) -> Result<FitDetail<T>, FitError> {
    let n = design.rows();
    if n < design.cols() {
        return Err(FitError::InsufficientData {
            needed: design.cols(),
            available: n,
        });
    }
    let first = T::from_day(design.day_index[0]);
    let last = T::from_day(design.day_index[n - 1]);
    let two = T::lit(2.0);
    let center = (first + last) / two;
    let half_width = {
        let h = (last - first) / two;
        if h > T::zero() { h } else { T::one() }
    };

    let rows: Vec<Vec<T>> = design
        .day_index
        .iter()
        .zip(&design.w)
        .map(|(&t, &w)| {
            let s = (T::from_day(t) - center) / half_width;
            let sw = w.sqrt();
            (0..=design.degree)
                .map(|j| sw * s.powi((design.degree - j) as i32))
                .collect()
        })
        .collect();
    let rhs: Vec<T> = design.y.iter().zip(&design.w).map(|(&y, &w)| w.sqrt() * y).collect();

    let limit = condition_limit::<T>();
    let solved = least_squares(&rows, &rhs, limit).map_err(|condition| FitError::SingularSystem {
        condition: condition.to_f64_lossy(),
        limit: limit.to_f64_lossy(),
    })?;

    let scaled = ScaledPoly {
        coefficients: solved.solution,
        center,
        half_width,
    };
    let coefficients = scaled.to_raw();
    let sq = design
        .day_index
        .iter()
        .zip(&design.y)
        .fold(T::zero(), |acc, (&t, &y)| {
            let r = y - horner(&coefficients, T::from_day(t));
            acc + r * r
        });
    let residual_rms = (sq / T::from_count(n as u64)).sqrt();

    Ok(FitDetail {
        model: PolyModel {
            target: design.target,
            degree: design.degree,
            coefficients,
            fit_window: (design.day_index[0], design.day_index[n - 1]),
            weight_scheme: design.weight_scheme,
            residual_rms,
        },
        scaled,
        condition: solved.condition,
    })
}

/// Convenience: design + fit in one step.
pub fn fit_observations<T: Scalar>(
    obs: &Observations<T>,
    config: &FitConfig,
) -> Result<PolyModel<T>, FitError> {
    fit(&build_design(obs, config)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct HeldOutDay<T: Scalar> {
    pub day_index: i64,
    pub observed: T,
    pub predicted: T,
    pub abs_error: T,
    /// `None` when the observed value is zero.
    pub rel_error: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct BacktestReport<T: Scalar> {
    pub model: PolyModel<T>,
    pub days: Vec<HeldOutDay<T>>,
}

/// Fits on the window ending `holdout_days` before the last observation and
/// scores the predictions for the held-out days.
pub fn backtest<T: Scalar>(
    obs: &Observations<T>,
    config: &FitConfig,
    holdout_days: usize,
) -> Result<BacktestReport<T>, FitError> {
    let needed = config.window_days + holdout_days;
    if obs.len() < needed {
        return Err(FitError::InsufficientData {
            needed,
            available: obs.len(),
        });
    }
    let model = fit_observations(&obs.truncated(holdout_days), config)?;
    let start = obs.len() - holdout_days;
    let days = (start..obs.len())
        .map(|i| {
            let t = obs.day_index[i];
            let observed = obs.values[i];
            let predicted = horner(&model.coefficients, T::from_day(t));
            let abs_error = (predicted - observed).abs();
            HeldOutDay {
                day_index: t,
                observed,
                predicted,
                abs_error,
                rel_error: (observed != T::zero()).then(|| abs_error / observed.abs()),
            }
        })
        .collect();
    Ok(BacktestReport { model, days })
}
