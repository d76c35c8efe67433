//! Bundled Delhi sample inputs (January - April 2021).
//!
//! The archive is a reconstruction calibrated to figures reported for Delhi,
//! not a copy of the upstream feed; `data/reconstruct_delhi.py` regenerates it.

use chrono::NaiveDate;

use crate::forecaster::PolyModel;
use crate::scenario::Scenario;
use crate::timeseries::{parse_case_archive, ArchiveFormat, CaseSeries};

/// Cumulative counts 2021-01-01 ..= 2021-04-20 with daily tests.
pub const DELHI_2021_CSV: &str = include_str!("../data/delhi_2021.csv");
/// The same archive in the covid19india v4 timeseries layout.
pub const DELHI_2021_JSON: &str = include_str!("../data/delhi_2021.json");
/// The 60-day fit window 2021-02-06 ..= 2021-04-06.
pub const DELHI_WINDOW_CSV: &str = include_str!("../data/delhi_window.csv");
/// One oxygen resource: 0.00817 MT per active case against 480 MT.
pub const DELHI_SCENARIO_JSON: &str = include_str!("../data/delhi_scenario.json");
/// Reported quartic trend for active cases on the window above.
pub const DELHI_REPORTED_MODEL_JSON: &str = include_str!("../data/delhi_reported_model.json");

pub fn delhi_series() -> CaseSeries {
    parse_case_archive(DELHI_2021_CSV.as_bytes(), ArchiveFormat::Csv)
        .expect("bundled archive parses")
        .with_region("DL")
}

pub fn delhi_scenario() -> Scenario<f64> {
    Scenario::from_json(DELHI_SCENARIO_JSON).expect("bundled scenario parses")
}

pub fn delhi_reported_model() -> PolyModel<f64> {
    serde_json::from_str(DELHI_REPORTED_MODEL_JSON).expect("bundled model parses")
}

/// Last day of the 60-day fit window.
pub fn delhi_window_end() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 4, 6).unwrap()
}
