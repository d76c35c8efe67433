//! Helpers shared by integration tests (also included by the acceptance suite).
#![allow(dead_code)]

use lockdown_core::forecaster::{FitTarget, Observations, PolyModel};
use lockdown_core::optimizer::{PolicyProblem, PolicyResult, PolicyStatus, RateHorizon};
use lockdown_core::resource::{CapacityProfile, DistributionSpec, ResourceSpec, StorageSpec};
use lockdown_core::sample;
use lockdown_core::{derive_active, timeseries::window_ending};
use lockdown_oracles::{Capacity, Outcome, Scenario};

pub fn delhi_window() -> Observations<f64> {
    let cs = sample::delhi_series();
    let (start, end) = window_ending(sample::delhi_window_end(), 60);
    derive_active(&cs, start, end).unwrap().observations()
}

fn profile(c: &Capacity) -> CapacityProfile<f64> {
    CapacityProfile::new(c.steps.clone()).unwrap()
}

fn model(coeffs: &[f64], current_day: i64) -> PolyModel<f64> {
    PolyModel::from_coefficients(FitTarget::ActiveCases, coeffs.to_vec(), (current_day - 59, current_day))
}

/// The same scenario expressed as a core optimisation problem.
pub fn to_problem(s: &Scenario) -> PolicyProblem<f64> {
    let resources = s
        .resources
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut spec = ResourceSpec::new(format!("r{i}"), r.factor, profile(&r.availability));
            spec.storage = r
                .storage
                .as_ref()
                .map(|(v, c)| StorageSpec { unit_storage: *v, capacity: profile(c) });
            spec.distribution = r
                .distribution
                .as_ref()
                .map(|(w, c)| DistributionSpec { unit_distribution: *w, capacity: profile(c) });
            spec
        })
        .collect();
    let mut problem = PolicyProblem::new(s.current_day, model(&s.active, s.current_day), resources);
    problem.lag_days = s.lag_days as u32;
    problem.delta_max = s.delta_max as u32;
    if let Some((cap, coeffs)) = &s.growth {
        problem.growth_cap = Some(*cap);
        problem.growth_model = Some(model(coeffs, s.current_day));
    }
    if let Some((cap, coeffs)) = &s.tpr {
        problem.tpr_cap = Some(*cap);
        problem.tpr_model = Some(model(coeffs, s.current_day));
    }
    problem.rate_horizon = if s.rates_through_lag { RateHorizon::ThroughLag } else { RateHorizon::DecisionWindow };
    problem
}

pub fn outcome(result: &PolicyResult<f64>) -> Outcome {
    match result.status {
        PolicyStatus::InfeasibleNow => Outcome::InfeasibleNow,
        PolicyStatus::Optimal => Outcome::Optimal(i64::from(result.delta_opt.unwrap())),
        PolicyStatus::UnboundedAtDeltaMax => Outcome::Unbounded,
    }
}
