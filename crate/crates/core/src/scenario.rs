//! Scenario files: the resources under consideration plus optional policy
//! settings. Day indices in capacity profiles are relative to the fit window
//! (day 1 is its first date).

use serde::{Deserialize, Serialize};

use crate::optimizer::RateHorizon;
use crate::resource::{validate_resources, ResourceError, ResourceSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Scenario<T: Scalar> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub resources: Vec<ResourceSpec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_days: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_cap: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tpr_cap: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_horizon: Option<RateHorizon>,
}

impl<T: Scalar> Default for Scenario<T> {
    fn default() -> Self {
        Scenario {
            name: None,
            resources: Vec::new(),
            alpha: None,
            lag_days: None,
            delta_max: None,
            growth_cap: None,
            tpr_cap: None,
            rate_horizon: None,
        }
    }
}

impl<T: Scalar> Scenario<T> {
    pub fn from_json(raw: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario<T> =
            serde_json::from_str(raw).map_err(|e| ScenarioError::Malformed(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        validate_resources(&self.resources)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("malformed scenario: {0}")]
    Malformed(String),
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_schema() {
        let raw = r#"{"resources": [{"id": "oxygen", "name": "Medical oxygen", "unit": "MT",
                      "requirement_factor": 0.00817, "availability": [[1, 480]]}]}"#;
        let s = Scenario::<f64>::from_json(raw).unwrap();
        assert_eq!(s.resources.len(), 1);
        assert_eq!(s.resources[0].availability.capacity_at(77.0).unwrap(), 480.0);
        assert!(s.lag_days.is_none());
    }

    #[test]
    fn parses_optional_storage_and_policy() {
        let raw = r#"{"lag_days": 10, "tpr_cap": 0.1, "rate_horizon": "through_lag",
            "resources": [{"id": "o2", "requirement_factor": 1, "availability": [[1, 5]],
              "storage": {"unit_storage": 1.2, "capacity": [[1, 10], [30, 20]]},
              "distribution": {"unit_distribution": 0.5, "capacity": [[1, 3]]}}]}"#;
        let s = Scenario::<f64>::from_json(raw).unwrap();
        assert_eq!(s.lag_days, Some(10));
        assert_eq!(s.rate_horizon, Some(RateHorizon::ThroughLag));
        assert_eq!(s.resources[0].storage.as_ref().unwrap().capacity.segments().len(), 2);
    }

    #[test]
    fn rejects_invalid() {
        assert!(matches!(Scenario::<f64>::from_json("{"), Err(ScenarioError::Malformed(_))));
        let dup = r#"{"resources": [{"id": "a", "requirement_factor": 1, "availability": [[1, 5]]},
                                    {"id": "a", "requirement_factor": 1, "availability": [[1, 5]]}]}"#;
        assert!(matches!(Scenario::<f64>::from_json(dup), Err(ScenarioError::Resource(_))));
        let neg = r#"{"resources": [{"id": "a", "requirement_factor": 1, "availability": [[1, -5]]}]}"#;
        assert!(matches!(Scenario::<f64>::from_json(neg), Err(ScenarioError::Malformed(_))));
    }
}
