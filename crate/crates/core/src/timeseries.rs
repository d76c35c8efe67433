//! Epidemic time series ingestion and derived daily statistics.
//!
//! A [`CaseSeries`] holds cumulative confirmed, recovered and deceased counts
//! (and optionally cumulative tests) for one region on a gap-free daily grid.
//! Active cases, rolling growth rates and rolling test positive ratios are
//! derived from it.

use std::fmt;
use std::io::Read;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecaster::{FitTarget, Observations};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("cumulative {field} decreases on {date}")]
    NonMonotoneSeries { field: &'static str, date: NaiveDate },
    #[error("missing day(s) between {after} and {next}")]
    GappedDates { after: NaiveDate, next: NaiveDate },
    #[error("date {0} appears more than once")]
    DuplicateDate(NaiveDate),
    #[error("recovered + deceased exceeds confirmed on {0}")]
    NegativeActive(NaiveDate),
    #[error("window {start}..={end} is not contained in the series")]
    WindowOutOfRange { start: NaiveDate, end: NaiveDate },
    #[error("need more than {needed} observations, series has {available}")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("window length must be at least one day")]
    ZeroWindow,
    #[error("confirmed count is zero on every base date; growth rate undefined")]
    DivisionByZero,
    #[error("series carries no test counts")]
    MissingTests,
    #[error("no tests recorded in the window ending {0}")]
    ZeroTests(NaiveDate),
}

impl SeriesError {
    /// Stable identifier used in service error bodies and CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            SeriesError::MalformedInput(_) => "MalformedInput",
            SeriesError::NonMonotoneSeries { .. } => "NonMonotoneSeries",
            SeriesError::GappedDates { .. } => "GappedDates",
            SeriesError::DuplicateDate(_) => "DuplicateDate",
            SeriesError::NegativeActive(_) => "NegativeActive",
            SeriesError::WindowOutOfRange { .. } => "WindowOutOfRange",
            SeriesError::InsufficientHistory { .. } => "InsufficientHistory",
            SeriesError::ZeroWindow => "ZeroWindow",
            SeriesError::DivisionByZero => "DivisionByZero",
            SeriesError::MissingTests => "MissingTests",
            SeriesError::ZeroTests(_) => "ZeroTests",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchiveFormat {
    /// covid19india v4 timeseries JSON.
    JsonApi,
    Csv,
}

impl ArchiveFormat {
    /// Guesses the format from the first non-whitespace byte.
    pub fn sniff(raw: &[u8]) -> ArchiveFormat {
        match raw.iter().find(|b| !b.is_ascii_whitespace()) {
            Some(b'{') => ArchiveFormat::JsonApi,
            _ => ArchiveFormat::Csv,
        }
    }
}

/// One dated row of cumulative counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub date: NaiveDate,
    pub confirmed: u64,
    pub recovered: u64,
    pub deceased: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tests: Option<u64>,
}

/// Cumulative case counts for one region on consecutive days.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSeries {
    region: String,
    dates: Vec<NaiveDate>,
    confirmed: Vec<u64>,
    recovered: Vec<u64>,
    deceased: Vec<u64>,
    tests: Option<Vec<u64>>,
}

impl CaseSeries {
    /// Validates and builds a series. Records may arrive in any order.
    pub fn from_records(
        region: impl Into<String>,
        mut records: Vec<CaseRecord>,
    ) -> Result<Self, SeriesError> {
        if records.is_empty() {
            return Err(SeriesError::MalformedInput("no observations".into()));
        }
        records.sort_by_key(|r| r.date);
        for pair in records.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            if prev.date == next.date {
                return Err(SeriesError::DuplicateDate(next.date));
            }
            if prev.date.succ_opt() != Some(next.date) {
                return Err(SeriesError::GappedDates {
                    after: prev.date,
                    next: next.date,
                });
            }
        }

        let has_tests = records.iter().any(|r| r.tests.is_some());
        if has_tests && records.iter().any(|r| r.tests.is_none()) {
            return Err(SeriesError::MalformedInput(
                "test counts present on some dates but not others".into(),
            ));
        }

        let series = CaseSeries {
            region: region.into(),
            dates: records.iter().map(|r| r.date).collect(),
            confirmed: records.iter().map(|r| r.confirmed).collect(),
            recovered: records.iter().map(|r| r.recovered).collect(),
            deceased: records.iter().map(|r| r.deceased).collect(),
            tests: has_tests.then(|| records.iter().map(|r| r.tests.unwrap_or(0)).collect()),
        };
        series.validate()?;
        Ok(series)
    }

    fn validate(&self) -> Result<(), SeriesError> {
        let mut columns = vec![
            ("confirmed", &self.confirmed),
            ("recovered", &self.recovered),
            ("deceased", &self.deceased),
        ];
        if let Some(tests) = &self.tests {
            columns.push(("tests", tests));
        }
        for (field, values) in columns {
            if let Some(i) = (1..values.len()).find(|&i| values[i] < values[i - 1]) {
                return Err(SeriesError::NonMonotoneSeries {
                    field,
                    date: self.dates[i],
                });
            }
        }
        for i in 0..self.len() {
            if self.recovered[i] + self.deceased[i] > self.confirmed[i] {
                return Err(SeriesError::NegativeActive(self.dates[i]));
            }
        }
        Ok(())
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn with_region(mut self, region: impl Into<String>) -> Self {
        self.region = region.into();
        self
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn confirmed(&self) -> &[u64] {
        &self.confirmed
    }

    pub fn recovered(&self) -> &[u64] {
        &self.recovered
    }

    pub fn deceased(&self) -> &[u64] {
        &self.deceased
    }

    pub fn tests(&self) -> Option<&[u64]> {
        self.tests.as_deref()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn last_date(&self) -> NaiveDate {
        self.dates[self.len() - 1]
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.first_date()).num_days();
        (offset >= 0 && (offset as usize) < self.len()).then_some(offset as usize)
    }

    pub fn active_at(&self, index: usize) -> u64 {
        self.confirmed[index] - self.recovered[index] - self.deceased[index]
    }

    pub fn active_on(&self, date: NaiveDate) -> Option<u64> {
        self.index_of(date).map(|i| self.active_at(i))
    }

    pub fn records(&self) -> impl Iterator<Item = CaseRecord> + '_ {
        (0..self.len()).map(move |i| CaseRecord {
            date: self.dates[i],
            confirmed: self.confirmed[i],
            recovered: self.recovered[i],
            deceased: self.deceased[i],
            tests: self.tests.as_ref().map(|t| t[i]),
        })
    }

    /// Sub-series covering `start..=end`.
    pub fn slice(&self, start: NaiveDate, end: NaiveDate) -> Result<CaseSeries, SeriesError> {
        let (lo, hi) = self.window_indices(start, end)?;
        Ok(CaseSeries {
            region: self.region.clone(),
            dates: self.dates[lo..=hi].to_vec(),
            confirmed: self.confirmed[lo..=hi].to_vec(),
            recovered: self.recovered[lo..=hi].to_vec(),
            deceased: self.deceased[lo..=hi].to_vec(),
            tests: self.tests.as_ref().map(|t| t[lo..=hi].to_vec()),
        })
    }

    /// Same counts relabelled `days` later (or earlier when negative).
    pub fn shift_dates(&self, days: i64) -> CaseSeries {
        let shift = |d: NaiveDate| {
            if days >= 0 {
                d + Days::new(days as u64)
            } else {
                d - Days::new(days.unsigned_abs())
            }
        };
        CaseSeries {
            dates: self.dates.iter().copied().map(shift).collect(),
            ..self.clone()
        }
    }

    fn window_indices(&self, start: NaiveDate, end: NaiveDate) -> Result<(usize, usize), SeriesError> {
        match (self.index_of(start), self.index_of(end)) {
            (Some(lo), Some(hi)) if lo <= hi => Ok((lo, hi)),
            _ => Err(SeriesError::WindowOutOfRange { start, end }),
        }
    }

    /// Serializes in the CSV archive layout accepted by [`parse_case_archive`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.tests.is_some() {
            "date,confirmed,recovered,deceased,tests\n"
        } else {
            "date,confirmed,recovered,deceased\n"
        });
        for r in self.records() {
            out.push_str(&format!("{},{},{},{}", r.date, r.confirmed, r.recovered, r.deceased));
            if let Some(t) = r.tests {
                out.push_str(&format!(",{t}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Reads a complete archive from `raw` in the declared format.
pub fn parse_case_archive<R: Read>(mut raw: R, format: ArchiveFormat) -> Result<CaseSeries, SeriesError> {
    let mut bytes = Vec::new();
    raw.read_to_end(&mut bytes)
        .map_err(|e| SeriesError::MalformedInput(e.to_string()))?;
    match format {
        ArchiveFormat::Csv => parse_csv(&bytes),
        ArchiveFormat::JsonApi => parse_json(&bytes),
    }
}

#[derive(Deserialize)]
struct CsvRow {
    date: NaiveDate,
    confirmed: u64,
    recovered: u64,
    deceased: u64,
    #[serde(default)]
    tests: Option<u64>,
}

fn parse_csv(bytes: &[u8]) -> Result<CaseSeries, SeriesError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| SeriesError::MalformedInput(e.to_string()))?
        .clone();
    let expected = ["date", "confirmed", "recovered", "deceased"];
    let names: Vec<&str> = headers.iter().collect();
    let header_ok = names.len() >= 4
        && names[..4] == expected
        && (names.len() == 4 || (names.len() == 5 && names[4] == "tests"));
    if !header_ok {
        return Err(SeriesError::MalformedInput(format!(
            "expected header date,confirmed,recovered,deceased[,tests], found {}",
            names.join(",")
        )));
    }

    let records = reader
        .deserialize::<CsvRow>()
        .map(|row| {
            row.map(|r| CaseRecord {
                date: r.date,
                confirmed: r.confirmed,
                recovered: r.recovered,
                deceased: r.deceased,
                tests: r.tests,
            })
            .map_err(|e| SeriesError::MalformedInput(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    CaseSeries::from_records("unknown", records)
}

fn parse_json(bytes: &[u8]) -> Result<CaseSeries, SeriesError> {
    use serde_json::Value;

    let malformed = |msg: &str| SeriesError::MalformedInput(msg.to_string());
    let root: Value =
        serde_json::from_slice(bytes).map_err(|e| SeriesError::MalformedInput(e.to_string()))?;
    let root = root.as_object().ok_or_else(|| malformed("top level must be an object"))?;

    // Either a bare date map, or the upstream {"DL": {"dates": {...}}} wrapper.
    let wrapped: Vec<(&String, &Value)> = root
        .iter()
        .filter(|(_, v)| v.get("dates").is_some_and(Value::is_object))
        .collect();
    let (region, dates) = match wrapped.as_slice() {
        [] => ("unknown".to_string(), root),
        [(region, value)] => ((*region).clone(), value["dates"].as_object().unwrap()),
        _ => return Err(malformed("archive holds more than one region")),
    };

    let count = |total: &Value, key: &str| -> Result<Option<u64>, SeriesError> {
        match total.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| SeriesError::MalformedInput(format!("{key} is not a count"))),
        }
    };

    let mut records = Vec::with_capacity(dates.len());
    for (date, entry) in dates {
        let date: NaiveDate = date
            .parse()
            .map_err(|_| SeriesError::MalformedInput(format!("bad date {date:?}")))?;
        let total = entry
            .get("total")
            .ok_or_else(|| SeriesError::MalformedInput(format!("{date}: missing \"total\"")))?;
        records.push(CaseRecord {
            date,
            confirmed: count(total, "confirmed")?.unwrap_or(0),
            recovered: count(total, "recovered")?.unwrap_or(0),
            deceased: count(total, "deceased")?.unwrap_or(0),
            tests: count(total, "tested")?,
        });
    }
    // Upstream omits "tested" on some days; keep tests only when complete.
    if records.iter().any(|r| r.tests.is_none()) {
        records.iter_mut().for_each(|r| r.tests = None);
    }
    CaseSeries::from_records(region, records)
}

/// Active cases over an analysis window, indexed from day 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActiveSeries {
    pub region: String,
    pub dates: Vec<NaiveDate>,
    pub active: Vec<u64>,
    pub day_index: Vec<i64>,
}

impl ActiveSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn start(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn end(&self) -> NaiveDate {
        self.dates[self.len() - 1]
    }

    pub fn observations<T: Scalar>(&self) -> Observations<T> {
        Observations {
            target: FitTarget::ActiveCases,
            day_index: self.day_index.clone(),
            values: self.active.iter().map(|&a| T::from_count(a)).collect(),
        }
    }
}

/// Active cases on `window_start..=window_end`, day 1 being `window_start`.
pub fn derive_active(
    cs: &CaseSeries,
    window_start: NaiveDate,
    window_end: NaiveDate,
) -> Result<ActiveSeries, SeriesError> {
    let (lo, hi) = cs.window_indices(window_start, window_end)?;
    let mut active = Vec::with_capacity(hi - lo + 1);
    for i in lo..=hi {
        let removed = cs.recovered[i] + cs.deceased[i];
        if removed > cs.confirmed[i] {
            return Err(SeriesError::NegativeActive(cs.dates[i]));
        }
        active.push(cs.confirmed[i] - removed);
    }
    Ok(ActiveSeries {
        region: cs.region.clone(),
        dates: cs.dates[lo..=hi].to_vec(),
        active,
        day_index: (1..=(hi - lo + 1) as i64).collect(),
    })
}

/// First and last date of the `window_days`-long window ending on `end`.
pub fn window_ending(end: NaiveDate, window_days: u32) -> (NaiveDate, NaiveDate) {
    let back = u64::from(window_days.max(1) - 1);
    (end - Days::new(back), end)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    GrowthRate,
    TestPositiveRatio,
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateKind::GrowthRate => "growth_rate",
            RateKind::TestPositiveRatio => "test_positive_ratio",
        })
    }
}

/// A trailing-window rate, as a fraction, defined only on dates with a full window of history.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct RateSeries<T: Scalar> {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<T>,
    pub window_days: u32,
    pub kind: RateKind,
}

impl<T: Scalar> RateSeries<T> {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn value_on(&self, date: NaiveDate) -> Option<T> {
        self.dates
            .binary_search(&date)
            .ok()
            .map(|i| self.values[i])
    }

    pub fn latest(&self) -> Option<(NaiveDate, T)> {
        self.dates.last().copied().zip(self.values.last().copied())
    }

    /// Values inside `window_start..=window_end`, on the window's day index.
    pub fn observations_in(&self, window_start: NaiveDate, window_end: NaiveDate) -> Observations<T> {
        let (day_index, values) = self
            .dates
            .iter()
            .zip(&self.values)
            .filter(|(d, _)| (window_start..=window_end).contains(*d))
            .map(|(d, v)| ((*d - window_start).num_days() + 1, *v))
            .unzip();
        Observations {
            target: match self.kind {
                RateKind::GrowthRate => FitTarget::GrowthRate,
                RateKind::TestPositiveRatio => FitTarget::Tpr,
            },
            day_index,
            values,
        }
    }
}

fn check_window(cs: &CaseSeries, window_days: u32) -> Result<usize, SeriesError> {
    if window_days == 0 {
        return Err(SeriesError::ZeroWindow);
    }
    let w = window_days as usize;
    if cs.len() <= w {
        return Err(SeriesError::InsufficientHistory {
            needed: w,
            available: cs.len(),
        });
    }
    Ok(w)
}

/// Trailing mean of the day-over-day relative increase of confirmed cases.
///
/// Days whose base count is zero have no growth rate; any window touching
/// one is dropped. Fails only if nothing is left.
pub fn rolling_growth_rate<T: Scalar>(
    cs: &CaseSeries,
    window_days: u32,
) -> Result<RateSeries<T>, SeriesError> {
    let w = check_window(cs, window_days)?;
    let c = &cs.confirmed;
    let daily: Vec<Option<T>> = (1..cs.len())
        .map(|i| {
            (c[i - 1] > 0).then(|| {
                let prev = T::from_count(c[i - 1]);
                (T::from_count(c[i]) - prev) / prev
            })
        })
        .collect();

    let mut dates = Vec::new();
    let mut values = Vec::new();
    let n = T::from_count(w as u64);
    // daily[k] is the growth into date index k + 1
    for end in w..cs.len() {
        let window = &daily[end - w..end];
        if let Some(sum) = window
            .iter()
            .try_fold(T::zero(), |acc, g| g.map(|g| acc + g))
        {
            dates.push(cs.dates[end]);
            values.push(sum / n);
        }
    }
    if dates.is_empty() {
        return Err(SeriesError::DivisionByZero);
    }
    Ok(RateSeries {
        dates,
        values,
        window_days,
        kind: RateKind::GrowthRate,
    })
}

/// New confirmed cases over new tests across a trailing window.
pub fn rolling_tpr<T: Scalar>(cs: &CaseSeries, window_days: u32) -> Result<RateSeries<T>, SeriesError> {
    let tests = cs.tests.as_ref().ok_or(SeriesError::MissingTests)?;
    let w = check_window(cs, window_days)?;
    let c = &cs.confirmed;
    let mut values = Vec::with_capacity(cs.len() - w);
    for end in w..cs.len() {
        let new_tests = tests[end] - tests[end - w];
        if new_tests == 0 {
            return Err(SeriesError::ZeroTests(cs.dates[end]));
        }
        values.push(T::from_count(c[end] - c[end - w]) / T::from_count(new_tests));
    }
    Ok(RateSeries {
        dates: cs.dates[w..].to_vec(),
        values,
        window_days,
        kind: RateKind::TestPositiveRatio,
    })
}
