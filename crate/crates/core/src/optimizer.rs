//! Lockdown timing: the largest delay `delta` (days from the current day)
//! such that every resource, storage, distribution and rate constraint holds.
//!
//! Resource constraints are checked on every integer day of
//! `[t_c, t_c + lag + delta]` because lockdown only bends the active-case
//! curve after `lag` days. Rate caps are checked on `[t_c, t_c + delta]`
//! unless [`RateHorizon::ThroughLag`] is selected. The objective `alpha * delta`
//! is reported but does not influence the argmax.
//!
//! The constraint windows grow with `delta` and nothing else depends on it,
//! so feasibility is nested: once some `delta` fails, every larger one fails.
//! The scan stops at the first failing `delta`.

use std::fmt;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecaster::PolyModel;
use crate::resource::{validate_resources, ResourceError, ResourceSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("{0} cap is set but no {0} model was supplied")]
    MissingModel(&'static str),
    #[error("invalid policy problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

impl OptimizeError {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizeError::MissingModel(_) => "MissingModel",
            OptimizeError::InvalidProblem(_) => "InvalidProblem",
            OptimizeError::Resource(_) => "InvalidResource",
        }
    }
}

/// Days over which the growth-rate and TPR caps are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateHorizon {
    /// `[t_c, t_c + delta]`
    #[default]
    DecisionWindow,
    /// `[t_c, t_c + lag + delta]`, same as the resource constraints.
    ThroughLag,
}

pub const DEFAULT_LAG_DAYS: u32 = 14;
pub const DEFAULT_DELTA_MAX: u32 = 21;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyProblem<T: Scalar> {
    /// Day index of the current day (end of the fit window).
    pub current_day: i64,
    /// Calendar date of `current_day`, used to report the lockdown date.
    pub current_date: Option<NaiveDate>,
    pub lag_days: u32,
    /// Economic value of one normal day.
    pub alpha: T,
    pub delta_max: u32,
    /// Cap on the daily growth rate, as a fraction.
    pub growth_cap: Option<T>,
    /// Cap on the test positive ratio, as a fraction.
    pub tpr_cap: Option<T>,
    pub rate_horizon: RateHorizon,
    pub resources: Vec<ResourceSpec<T>>,
    pub active_model: PolyModel<T>,
    pub growth_model: Option<PolyModel<T>>,
    pub tpr_model: Option<PolyModel<T>>,
}

impl<T: Scalar> PolicyProblem<T> {
    /// A problem with the default settings: 14 day lag, scan up to 21 days, no caps.
    pub fn new(current_day: i64, active_model: PolyModel<T>, resources: Vec<ResourceSpec<T>>) -> Self {
        PolicyProblem {
            current_day,
            current_date: None,
            lag_days: DEFAULT_LAG_DAYS,
            alpha: T::one(),
            delta_max: DEFAULT_DELTA_MAX,
            growth_cap: None,
            tpr_cap: None,
            rate_horizon: RateHorizon::default(),
            resources,
            active_model,
            growth_model: None,
            tpr_model: None,
        }
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let invalid = |msg: String| Err(OptimizeError::InvalidProblem(msg));
        if self.current_day < 1 {
            return invalid(format!("current day {} must be at least 1", self.current_day));
        }
        if !(self.alpha > T::zero() && self.alpha.is_finite()) {
            return invalid(format!("alpha {} must be positive", self.alpha));
        }
        for (name, cap) in [("growth", self.growth_cap), ("tpr", self.tpr_cap)] {
            if let Some(cap) = cap {
                if !(cap > T::zero() && cap < T::one()) {
                    return invalid(format!("{name} cap {cap} must lie in (0, 1)"));
                }
            }
        }
        if self.growth_cap.is_some() && self.growth_model.is_none() {
            return Err(OptimizeError::MissingModel("growth_rate"));
        }
        if self.tpr_cap.is_some() && self.tpr_model.is_none() {
            return Err(OptimizeError::MissingModel("tpr"));
        }
        validate_resources(&self.resources)?;
        Ok(())
    }

    /// Predicted active cases on `day`, floored at zero.
    pub fn predicted_active(&self, day: i64) -> T {
        self.active_model.predict(T::from_day(day)).max(T::zero())
    }

    /// Last day covered by the resource constraints for `delta`.
    pub fn resource_horizon(&self, delta: u32) -> i64 {
        self.current_day + i64::from(self.lag_days) + i64::from(delta)
    }

    /// Last day covered by the rate caps for `delta`.
    pub fn rate_horizon_end(&self, delta: u32) -> i64 {
        match self.rate_horizon {
            RateHorizon::DecisionWindow => self.current_day + i64::from(delta),
            RateHorizon::ThroughLag => self.resource_horizon(delta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Availability,
    Storage,
    Distribution,
    GrowthRate,
    Tpr,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Availability => "availability",
            ConstraintKind::Storage => "storage",
            ConstraintKind::Distribution => "distribution",
            ConstraintKind::GrowthRate => "growth_rate",
            ConstraintKind::Tpr => "tpr",
        })
    }
}

/// One constraint checked on one day for one candidate delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConstraintReport<T: Scalar> {
    /// `<resource id>:<kind>` for resources, `growth_rate` or `tpr` for caps.
    pub constraint_id: String,
    pub kind: ConstraintKind,
    pub delta: u32,
    pub day_index: i64,
    pub required: T,
    pub limit: T,
    pub margin: T,
    pub satisfied: bool,
}

impl<T: Scalar> ConstraintReport<T> {
    fn new(constraint_id: String, kind: ConstraintKind, delta: u32, day_index: i64, required: T, limit: T) -> Self {
        let margin = limit - required;
        ConstraintReport {
            constraint_id,
            kind,
            delta,
            day_index,
            required,
            limit,
            margin,
            // margin == 0 is feasible; NaN is not
            satisfied: margin >= T::zero(),
        }
    }
}

/// Every constraint for lockdown after `delta` days, ordered by day, then
/// resource order (availability, storage, distribution), then growth, TPR.
pub fn evaluate_constraints<T: Scalar>(
    problem: &PolicyProblem<T>,
    delta: u32,
) -> Result<Vec<ConstraintReport<T>>, OptimizeError> {
    problem.validate()?;
    if delta > problem.delta_max {
        return Err(OptimizeError::InvalidProblem(format!(
            "delta {delta} exceeds delta_max {}",
            problem.delta_max
        )));
    }
    evaluate_unchecked(problem, delta)
}

fn evaluate_unchecked<T: Scalar>(
    problem: &PolicyProblem<T>,
    delta: u32,
) -> Result<Vec<ConstraintReport<T>>, OptimizeError> {
    let resource_end = problem.resource_horizon(delta);
    let rate_end = problem.rate_horizon_end(delta);
    let mut reports = Vec::new();

    for day in problem.current_day..=resource_end.max(rate_end) {
        let t = T::from_day(day);
        if day <= resource_end {
            let active = problem.predicted_active(day);
            for r in &problem.resources {
                let need = r.requirement(active)?;
                reports.push(ConstraintReport::new(
                    format!("{}:availability", r.id),
                    ConstraintKind::Availability,
                    delta,
                    day,
                    need,
                    r.availability.capacity_at(t)?,
                ));
                if let Some(s) = &r.storage {
                    reports.push(ConstraintReport::new(
                        format!("{}:storage", r.id),
                        ConstraintKind::Storage,
                        delta,
                        day,
                        need * s.unit_storage,
                        s.capacity.capacity_at(t)?,
                    ));
                }
                if let Some(d) = &r.distribution {
                    reports.push(ConstraintReport::new(
                        format!("{}:distribution", r.id),
                        ConstraintKind::Distribution,
                        delta,
                        day,
                        need * d.unit_distribution,
                        d.capacity.capacity_at(t)?,
                    ));
                }
            }
        }
        if day <= rate_end {
            let caps = [
                (problem.growth_cap, &problem.growth_model, ConstraintKind::GrowthRate),
                (problem.tpr_cap, &problem.tpr_model, ConstraintKind::Tpr),
            ];
            for (cap, model, kind) in caps {
                if let (Some(cap), Some(model)) = (cap, model) {
                    reports.push(ConstraintReport::new(kind.to_string(), kind, delta, day, model.predict(t), cap));
                }
            }
        }
    }
    Ok(reports)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyStatus {
    /// `delta_opt` is feasible and `delta_opt + 1` is not.
    Optimal,
    /// Constraints already fail with lockdown starting today.
    InfeasibleNow,
    /// Every delay up to `delta_max` is feasible.
    UnboundedAtDeltaMax,
}

impl fmt::Display for PolicyStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyStatus::Optimal => "optimal",
            PolicyStatus::InfeasibleNow => "infeasible_now",
            PolicyStatus::UnboundedAtDeltaMax => "unbounded_at_delta_max",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PolicyResult<T: Scalar> {
    pub status: PolicyStatus,
    pub delta_opt: Option<u32>,
    pub objective: Option<T>,
    /// First lockdown day: the day after `current_date + delta_opt`.
    pub lockdown_date: Option<NaiveDate>,
    pub current_day: i64,
    pub current_date: Option<NaiveDate>,
    pub lag_days: u32,
    pub delta_max: u32,
    /// Violated checks at the first infeasible delay.
    pub binding: Vec<ConstraintReport<T>>,
    /// Every check of every scanned delay, in scan order.
    pub trace: Vec<ConstraintReport<T>>,
}

impl<T: Scalar> PolicyResult<T> {
    /// Reports evaluated for one candidate delay.
    pub fn reports_for(&self, delta: u32) -> impl Iterator<Item = &ConstraintReport<T>> {
        self.trace.iter().filter(move |r| r.delta == delta)
    }
}

/// First lockdown day for a delay of `delta` days after `current_date`.
pub fn lockdown_start(current_date: NaiveDate, delta: u32) -> NaiveDate {
    current_date + Days::new(u64::from(delta) + 1)
}

/// Scans `delta = 0, 1, ..., delta_max` and returns the largest feasible delay.
pub fn optimize_delta<T: Scalar>(problem: &PolicyProblem<T>) -> Result<PolicyResult<T>, OptimizeError> {
    problem.validate()?;
    let mut trace = Vec::new();
    let mut first_failure = None;
    for delta in 0..=problem.delta_max {
        let reports = evaluate_unchecked(problem, delta)?;
        let violated: Vec<_> = reports.iter().filter(|r| !r.satisfied).cloned().collect();
        trace.extend(reports);
        if !violated.is_empty() {
            first_failure = Some((delta, violated));
            break;
        }
    }

    let (status, delta_opt, binding) = match first_failure {
        Some((0, violated)) => (PolicyStatus::InfeasibleNow, None, violated),
        Some((delta, violated)) => (PolicyStatus::Optimal, Some(delta - 1), violated),
        None => (PolicyStatus::UnboundedAtDeltaMax, Some(problem.delta_max), Vec::new()),
    };
    let lockdown_date = match (status, problem.current_date, delta_opt) {
        (PolicyStatus::Optimal, Some(date), Some(delta)) => Some(lockdown_start(date, delta)),
        _ => None,
    };
    Ok(PolicyResult {
        status,
        delta_opt,
        objective: delta_opt.map(|d| problem.alpha * T::from_count(u64::from(d))),
        lockdown_date,
        current_day: problem.current_day,
        current_date: problem.current_date,
        lag_days: problem.lag_days,
        delta_max: problem.delta_max,
        binding,
        trace,
    })
}
