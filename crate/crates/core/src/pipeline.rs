//! End-to-end runs shared by the command line and the HTTP service:
//! window selection, fitting, problem assembly, optimization and replay.

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecaster::{fit_observations, FitConfig, FitError, PolyModel};
use crate::optimizer::{
    optimize_delta, OptimizeError, PolicyProblem, PolicyResult, PolicyStatus, DEFAULT_DELTA_MAX,
    DEFAULT_LAG_DAYS,
};
use crate::scalar::Scalar;
use crate::scenario::{Scenario, ScenarioError};
use crate::timeseries::{
    derive_active, rolling_growth_rate, rolling_tpr, window_ending, ActiveSeries, CaseSeries,
    RateSeries, SeriesError,
};

/// Trailing window for growth-rate and TPR statistics.
pub const RATE_WINDOW_DAYS: u32 = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid run: {0}")]
    Usage(String),
}

/// Broad failure class, used for exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl PipelineError {
    pub fn name(&self) -> &'static str {
        match self {
            PipelineError::Series(e) => e.name(),
            PipelineError::Fit(e) => e.name(),
            PipelineError::Optimize(e) => e.name(),
            PipelineError::Scenario(ScenarioError::Malformed(_)) => "MalformedScenario",
            PipelineError::Scenario(ScenarioError::Resource(_)) => "InvalidResource",
            PipelineError::Usage(_) => "UsageError",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            PipelineError::Series(_) | PipelineError::Scenario(_) => ErrorClass::Data,
            PipelineError::Fit(FitError::InsufficientData { .. }) => ErrorClass::Data,
            PipelineError::Fit(FitError::InvalidConfig(_)) => ErrorClass::Usage,
            PipelineError::Fit(_) => ErrorClass::Numerical,
            PipelineError::Optimize(OptimizeError::Resource(_)) => ErrorClass::Data,
            PipelineError::Optimize(_) | PipelineError::Usage(_) => ErrorClass::Usage,
        }
    }
}

/// Run settings. `None` fields fall back to the scenario, then to defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default)]
pub struct RunOptions<T: Scalar> {
    /// Last date of the fit window; defaults to the last date of the data.
    pub end: Option<NaiveDate>,
    #[serde(flatten)]
    pub fit: FitConfig,
    pub lag_days: Option<u32>,
    pub delta_max: Option<u32>,
    pub alpha: Option<T>,
    pub growth_cap: Option<T>,
    pub tpr_cap: Option<T>,
    /// Use these coefficients for active cases instead of fitting.
    #[serde(skip)]
    pub active_model: Option<PolyModel<T>>,
}

impl<T: Scalar> Default for RunOptions<T> {
    fn default() -> Self {
        RunOptions {
            end: None,
            fit: FitConfig::default(),
            lag_days: None,
            delta_max: None,
            alpha: None,
            growth_cap: None,
            tpr_cap: None,
            active_model: None,
        }
    }
}

/// Fit window placed in the calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub days: usize,
}

impl FitWindow {
    pub fn for_series(cs: &CaseSeries, end: Option<NaiveDate>, window_days: usize) -> Result<Self, PipelineError> {
        let end = end.unwrap_or_else(|| cs.last_date());
        let window_days = u32::try_from(window_days)
            .map_err(|_| PipelineError::Usage(format!("window of {window_days} days is too long")))?;
        let (start, end) = window_ending(end, window_days);
        Ok(FitWindow {
            start,
            end,
            days: window_days as usize,
        })
    }

    /// Calendar date of a window day index.
    pub fn date_of(&self, day_index: i64) -> NaiveDate {
        let offset = day_index - 1;
        if offset >= 0 {
            self.start + Days::new(offset as u64)
        } else {
            self.start - Days::new(offset.unsigned_abs())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ActiveFit<T: Scalar> {
    pub window: FitWindow,
    #[serde(skip)]
    pub active: ActiveSeries,
    pub model: PolyModel<T>,
}

/// Fits the active-case trend on the window ending at `end`.
pub fn fit_active<T: Scalar>(
    cs: &CaseSeries,
    end: Option<NaiveDate>,
    config: &FitConfig,
) -> Result<ActiveFit<T>, PipelineError> {
    config.validate()?;
    let window = FitWindow::for_series(cs, end, config.window_days)?;
    let active = derive_active(cs, window.start, window.end)?;
    let model = fit_observations(&active.observations::<T>(), config)?;
    Ok(ActiveFit { window, active, model })
}

/// Fits a rate trend on whatever part of the window has a full rate history.
pub fn fit_rate<T: Scalar>(
    rates: &RateSeries<T>,
    window: &FitWindow,
    config: &FitConfig,
) -> Result<PolyModel<T>, PipelineError> {
    let obs = rates.observations_in(window.start, window.end);
    let config = FitConfig {
        window_days: config.window_days.min(obs.len()),
        ..*config
    };
    Ok(fit_observations(&obs, &config)?)
}

/// Everything produced by one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct OptimizeReport<T: Scalar> {
    pub region: String,
    pub window: FitWindow,
    pub model: PolyModel<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_model: Option<PolyModel<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tpr_model: Option<PolyModel<T>>,
    #[serde(flatten)]
    pub result: PolicyResult<T>,
}

/// Fit + optimize for the window ending at `options.end`.
pub fn run_optimize<T: Scalar>(
    cs: &CaseSeries,
    scenario: &Scenario<T>,
    options: &RunOptions<T>,
) -> Result<OptimizeReport<T>, PipelineError> {
    scenario.validate()?;
    let (window, model) = match &options.active_model {
        Some(model) => {
            let end = options.end.unwrap_or_else(|| cs.last_date());
            let days = usize::try_from(model.end_day())
                .map_err(|_| PipelineError::Usage("model window must end on a positive day".into()))?;
            (FitWindow::for_series(cs, Some(end), days)?, model.clone())
        }
        None => {
            let fit = fit_active(cs, options.end, &options.fit)?;
            (fit.window, fit.model)
        }
    };

    let growth_cap = options.growth_cap.or(scenario.growth_cap);
    let tpr_cap = options.tpr_cap.or(scenario.tpr_cap);
    let growth_model = match growth_cap {
        Some(_) => Some(fit_rate(&rolling_growth_rate(cs, RATE_WINDOW_DAYS)?, &window, &options.fit)?),
        None => None,
    };
    let tpr_model = match tpr_cap {
        Some(_) => Some(fit_rate(&rolling_tpr(cs, RATE_WINDOW_DAYS)?, &window, &options.fit)?),
        None => None,
    };

    let problem = PolicyProblem {
        current_day: window.days as i64,
        current_date: Some(window.end),
        lag_days: options.lag_days.or(scenario.lag_days).unwrap_or(DEFAULT_LAG_DAYS),
        alpha: options.alpha.or(scenario.alpha).unwrap_or_else(T::one),
        delta_max: options.delta_max.or(scenario.delta_max).unwrap_or(DEFAULT_DELTA_MAX),
        growth_cap,
        tpr_cap,
        rate_horizon: scenario.rate_horizon.unwrap_or_default(),
        resources: scenario.resources.clone(),
        active_model: model.clone(),
        growth_model: growth_model.clone(),
        tpr_model: tpr_model.clone(),
    };
    let result = optimize_delta(&problem)?;
    Ok(OptimizeReport {
        region: cs.region().to_string(),
        window,
        model,
        growth_model,
        tpr_model,
        result,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayRow {
    pub date: NaiveDate,
    pub status: PolicyStatus,
    pub delta_opt: Option<u32>,
    pub lockdown_date: Option<NaiveDate>,
    pub binding: Option<String>,
}

/// One optimization per day in `from..=to`, each with the window ending that day.
pub fn replay<T: Scalar>(
    cs: &CaseSeries,
    scenario: &Scenario<T>,
    options: &RunOptions<T>,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<Vec<ReplayRow>, PipelineError> {
    if to < from {
        return Err(PipelineError::Usage(format!("replay end {to} precedes start {from}")));
    }
    from.iter_days()
        .take_while(|d| *d <= to)
        .map(|date| {
            let run = RunOptions {
                end: Some(date),
                ..options.clone()
            };
            let report = run_optimize(cs, scenario, &run)?;
            Ok(ReplayRow {
                date,
                status: report.result.status,
                delta_opt: report.result.delta_opt,
                lockdown_date: report.result.lockdown_date,
                binding: report.result.binding.first().map(|b| format!("{}@{}", b.constraint_id, b.day_index)),
            })
        })
        .collect()
}

/// Replay rows as CSV with header `date,status,delta_opt,lockdown_date,binding`.
pub fn replay_csv(rows: &[ReplayRow]) -> String {
    let mut out = String::from("date,status,delta_opt,lockdown_date,binding\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.date,
            r.status,
            r.delta_opt.map(|d| d.to_string()).unwrap_or_default(),
            r.lockdown_date.map(|d| d.to_string()).unwrap_or_default(),
            r.binding.as_deref().unwrap_or("")
        ));
    }
    out
}

/// Predicted active cases for the `days` days after the window end, floored at zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ForecastPoint<T: Scalar> {
    pub date: NaiveDate,
    pub day_index: i64,
    pub predicted_active: T,
    /// Past the validity horizon of the trend.
    pub low_confidence: bool,
}

pub fn forecast<T: Scalar>(model: &PolyModel<T>, window: &FitWindow, days: u32) -> Vec<ForecastPoint<T>> {
    (1..=i64::from(days))
        .map(|ahead| {
            let day_index = model.end_day() + ahead;
            let t = T::from_day(day_index);
            ForecastPoint {
                date: window.date_of(day_index),
                day_index,
                predicted_active: crate::poly::horner(&model.coefficients, t).max(T::zero()),
                low_confidence: ahead >= crate::forecaster::VALIDITY_HORIZON_DAYS,
            }
        })
        .collect()
}
