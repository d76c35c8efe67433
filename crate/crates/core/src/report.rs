//! Plain-text rendering of a lockdown decision.

use std::fmt::Write;

use crate::optimizer::{ConstraintReport, PolicyResult, PolicyStatus};
use crate::scalar::Scalar;

/// Human-readable decision report with a per-day margin table.
///
/// Lockdown for a delay of `delta` starts on `current_date + delta + 1`.
pub fn explain<T: Scalar>(result: &PolicyResult<T>) -> String {
    let mut out = String::new();
    let today = match result.current_date {
        Some(date) => format!("day {} ({date})", result.current_day),
        None => format!("day {}", result.current_day),
    };
    let _ = writeln!(out, "Lockdown decision as of {today}");
    let _ = writeln!(out, "status: {}", result.status);

    match result.status {
        PolicyStatus::Optimal => {
            let delta = result.delta_opt.unwrap_or(0);
            let _ = writeln!(out, "delta = {delta} day(s) before lockdown must begin");
            if let Some(objective) = result.objective {
                let _ = writeln!(out, "objective J = alpha * delta = {objective}");
            }
            match result.lockdown_date {
                Some(date) => {
                    let _ = writeln!(out, "recommended lockdown start: {date} (current day + delta + 1)");
                }
                None => {
                    let _ = writeln!(
                        out,
                        "recommended lockdown start: day {} (current day + delta + 1)",
                        result.current_day + i64::from(delta) + 1
                    );
                }
            }
        }
        PolicyStatus::InfeasibleNow => {
            let _ = writeln!(
                out,
                "constraints are violated even if lockdown starts today: immediate lockdown recommended"
            );
        }
        PolicyStatus::UnboundedAtDeltaMax => {
            let _ = writeln!(
                out,
                "all constraints hold for every delay up to {} days: no lockdown needed within the horizon; \
                 re-evaluate daily as new data arrives",
                result.delta_max
            );
        }
    }

    if let Some(first) = result.binding.first() {
        let _ = writeln!(
            out,
            "binding constraint: {} on day {} (required {:.2} > limit {:.2})",
            first.constraint_id,
            first.day_index,
            first.required.to_f64_lossy(),
            first.limit.to_f64_lossy()
        );
    }

    // margins for the recommended delay, or for lockdown today when infeasible
    let shown = result.delta_opt.unwrap_or(0);
    let mut rows: Vec<&ConstraintReport<T>> = result.reports_for(shown).collect();
    if result.status == PolicyStatus::Optimal {
        rows.extend(result.binding.iter());
    }
    if !rows.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:>5}  {:<28} {:>14} {:>14} {:>14}  ok",
            "day", "constraint", "required", "limit", "margin"
        );
        for r in rows {
            let _ = writeln!(
                out,
                "{:>5}  {:<28} {:>14.4} {:>14.4} {:>14.4}  {}",
                r.day_index,
                r.constraint_id,
                r.required.to_f64_lossy(),
                r.limit.to_f64_lossy(),
                r.margin.to_f64_lossy(),
                if r.satisfied { "yes" } else { "NO" }
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecaster::{FitTarget, PolyModel};
    use crate::optimizer::{optimize_delta, PolicyProblem};
    use crate::resource::{CapacityProfile, ResourceSpec};

    fn result(capacity: f64) -> PolicyResult<f64> {
        let model = PolyModel::from_coefficients(
            FitTarget::ActiveCases,
            vec![0.006, -0.518, 16.088, -175.330, 1344.983],
            (1, 60),
        );
        let oxygen = ResourceSpec::new("oxygen", 0.00817, CapacityProfile::constant(capacity).unwrap());
        let mut problem = PolicyProblem::new(60, model, vec![oxygen]);
        problem.current_date = Some("2021-04-06".parse().unwrap());
        optimize_delta(&problem).unwrap()
    }

    #[test]
    fn optimal_report_names_delay_and_date() {
        let text = explain(&result(480.0));
        assert!(text.contains("delta = 3"), "{text}");
        assert!(text.contains("2021-04-10"), "{text}");
        assert!(text.contains("oxygen:availability on day 78"), "{text}");
        // days 60..=77 plus the binding day 78
        assert_eq!(text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 19);
    }

    #[test]
    fn infeasible_report_recommends_immediate_lockdown() {
        let text = explain(&result(350.0));
        assert!(text.contains("immediate lockdown"), "{text}");
    }

    #[test]
    fn unbounded_report_recommends_reevaluation() {
        let text = explain(&result(1e9));
        assert!(text.contains("no lockdown needed"), "{text}");
        assert!(text.contains("re-evaluate daily"), "{text}");
    }
}
