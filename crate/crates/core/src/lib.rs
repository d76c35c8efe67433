//! Short-term active case forecasting and resource-constrained lockdown timing.
//!
//! The pipeline is:
//!
//! 1. [`timeseries`]: ingest cumulative confirmed / recovered / deceased
//!    counts, derive active cases and rolling growth / test positive ratios.
//! 2. [`forecaster`]: fit a weighted least-squares polynomial trend (quartic
//!    by default) over the trailing window and extrapolate it.
//! 3. [`resource`]: turn predicted active cases into resource requirements
//!    and compare them with step-wise availability, storage and distribution
//!    capacities.
//! 4. [`optimizer`]: find the largest delay before lockdown such that every
//!    requirement stays within capacity through the lockdown lag.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the type
//! aliases at the crate root fix it to `f64`.

pub mod forecaster;
pub mod linalg;
pub mod optimizer;
pub mod pipeline;
pub mod poly;
pub mod report;
pub mod resource;
pub mod sample;
pub mod scalar;
pub mod scenario;
pub mod timeseries;

pub use forecaster::{
    backtest, build_design, fit, fit_detailed, fit_observations, FitConfig, FitError, FitTarget,
    WeightScheme, VALIDITY_HORIZON_DAYS,
};
pub use optimizer::{
    evaluate_constraints, lockdown_start, optimize_delta, ConstraintKind, OptimizeError,
    PolicyStatus, RateHorizon,
};
pub use pipeline::{ErrorClass, FitWindow, PipelineError, ReplayRow};
pub use report::explain;
pub use resource::{estimate_requirement_factor, ResourceError};
pub use scalar::Scalar;
pub use scenario::ScenarioError;
pub use timeseries::{
    derive_active, parse_case_archive, rolling_growth_rate, rolling_tpr, ActiveSeries,
    ArchiveFormat, CaseRecord, CaseSeries, RateKind, SeriesError,
};

pub type PolyModel = forecaster::PolyModel<f64>;
pub type ScaledPoly = forecaster::ScaledPoly<f64>;
pub type DesignMatrix = forecaster::DesignMatrix<f64>;
pub type Observations = forecaster::Observations<f64>;
pub type BacktestReport = forecaster::BacktestReport<f64>;
pub type RateSeries = timeseries::RateSeries<f64>;
pub type CapacityProfile = resource::CapacityProfile<f64>;
pub type ResourceSpec = resource::ResourceSpec<f64>;
pub type PolicyProblem = optimizer::PolicyProblem<f64>;
pub type PolicyResult = optimizer::PolicyResult<f64>;
pub type ConstraintReport = optimizer::ConstraintReport<f64>;
pub type Scenario = scenario::Scenario<f64>;
pub type RunOptions = pipeline::RunOptions<f64>;
pub type OptimizeReport = pipeline::OptimizeReport<f64>;
pub type ForecastPoint = pipeline::ForecastPoint<f64>;

pub type PolyModel32 = forecaster::PolyModel<f32>;
pub type PolicyProblem32 = optimizer::PolicyProblem<f32>;
