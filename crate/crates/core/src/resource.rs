//! Critical resources: per-case requirement factors and step-wise capacities.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::timeseries::CaseSeries;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResourceError {
    #[error("active case count {0} is negative")]
    NegativeActive(f64),
    #[error("day {day} precedes the profile start {start}")]
    BeforeProfileStart { day: f64, start: f64 },
    #[error("capacity profile has no segments")]
    EmptyProfile,
    #[error("capacity profile segment starts must strictly increase")]
    UnorderedSegments,
    #[error("capacity value {0} is negative or not finite")]
    InvalidCapacity(f64),
    #[error("resource {id}: {field} must be finite and non-negative")]
    InvalidFactor { id: String, field: &'static str },
    #[error("resource id {0:?} appears more than once")]
    DuplicateId(String),
    #[error("no active cases on {0}")]
    ZeroActive(NaiveDate),
    #[error("{0} is outside the case series")]
    DateOutOfRange(NaiveDate),
}

/// Piecewise-constant capacity over day index. Segment `i` covers
/// `[start_i, start_{i+1})`; the last one extends indefinitely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", try_from = "Vec<(T, T)>", into = "Vec<(T, T)>")]
pub struct CapacityProfile<T: Scalar> {
    segments: Vec<(T, T)>,
}

impl<T: Scalar> CapacityProfile<T> {
    pub fn new(segments: Vec<(T, T)>) -> Result<Self, ResourceError> {
        if segments.is_empty() {
            return Err(ResourceError::EmptyProfile);
        }
        if segments.windows(2).any(|p| !(p[0].0 < p[1].0)) {
            return Err(ResourceError::UnorderedSegments);
        }
        if let Some(&(_, v)) = segments.iter().find(|(s, v)| !s.is_finite() || !v.is_finite() || *v < T::zero()) {
            return Err(ResourceError::InvalidCapacity(v.to_f64_lossy()));
        }
        Ok(CapacityProfile { segments })
    }

    /// A single segment starting on day 1.
    pub fn constant(value: T) -> Result<Self, ResourceError> {
        Self::new(vec![(T::one(), value)])
    }

    pub fn segments(&self) -> &[(T, T)] {
        &self.segments
    }

    pub fn start(&self) -> T {
        self.segments[0].0
    }

    pub fn capacity_at(&self, day_index: T) -> Result<T, ResourceError> {
        if day_index < self.start() {
            return Err(ResourceError::BeforeProfileStart {
                day: day_index.to_f64_lossy(),
                start: self.start().to_f64_lossy(),
            });
        }
        let idx = self.segments.partition_point(|&(start, _)| start <= day_index);
        Ok(self.segments[idx - 1].1)
    }
}

impl<T: Scalar> TryFrom<Vec<(T, T)>> for CapacityProfile<T> {
    type Error = ResourceError;

    fn try_from(value: Vec<(T, T)>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl<T: Scalar> From<CapacityProfile<T>> for Vec<(T, T)> {
    fn from(value: CapacityProfile<T>) -> Self {
        value.segments
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StorageSpec<T: Scalar> {
    /// Storage needed per unit of resource (`v_j`).
    pub unit_storage: T,
    pub capacity: CapacityProfile<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DistributionSpec<T: Scalar> {
    /// Distribution capacity needed per unit of resource (`w_k`).
    pub unit_distribution: T,
    pub capacity: CapacityProfile<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ResourceSpec<T: Scalar> {
    pub id: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub unit: String,
    /// Resource units needed per active case.
    pub requirement_factor: T,
    pub availability: CapacityProfile<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storage: Option<StorageSpec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec<T>>,
}

impl<T: Scalar> ResourceSpec<T> {
    pub fn new(id: impl Into<String>, requirement_factor: T, availability: CapacityProfile<T>) -> Self {
        ResourceSpec {
            id: id.into(),
            name: String::new(),
            unit: String::new(),
            requirement_factor,
            availability,
            storage: None,
            distribution: None,
        }
    }

    pub fn validate(&self) -> Result<(), ResourceError> {
        let check = |value: T, field: &'static str| {
            if value.is_finite() && value >= T::zero() {
                Ok(())
            } else {
                Err(ResourceError::InvalidFactor { id: self.id.clone(), field })
            }
        };
        check(self.requirement_factor, "requirement_factor")?;
        if let Some(s) = &self.storage {
            check(s.unit_storage, "unit_storage")?;
        }
        if let Some(d) = &self.distribution {
            check(d.unit_distribution, "unit_distribution")?;
        }
        Ok(())
    }

    /// Resource needed for `active` cases.
    pub fn requirement(&self, active: T) -> Result<T, ResourceError> {
        if active < T::zero() {
            return Err(ResourceError::NegativeActive(active.to_f64_lossy()));
        }
        Ok(self.requirement_factor * active)
    }
}

/// Checks every resource and that ids are unique.
pub fn validate_resources<T: Scalar>(resources: &[ResourceSpec<T>]) -> Result<(), ResourceError> {
    let mut seen = std::collections::HashSet::new();
    for r in resources {
        r.validate()?;
        if !seen.insert(r.id.as_str()) {
            return Err(ResourceError::DuplicateId(r.id.clone()));
        }
    }
    Ok(())
}

/// Per-case requirement from one observed total demand on a date.
pub fn estimate_requirement_factor<T: Scalar>(
    cs: &CaseSeries,
    observed_demand: T,
    on_date: NaiveDate,
) -> Result<T, ResourceError> {
    let active = cs.active_on(on_date).ok_or(ResourceError::DateOutOfRange(on_date))?;
    if active == 0 {
        return Err(ResourceError::ZeroActive(on_date));
    }
    Ok(observed_demand / T::from_count(active))
}
