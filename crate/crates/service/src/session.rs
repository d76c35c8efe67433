use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use lockdown_core::{CaseSeries, FitWindow, PolyModel, Scenario};

use crate::ApiError;

/// The most recent fit of a session, reused by forecasts.
#[derive(Debug, Clone)]
pub struct LastFit {
    pub model: PolyModel,
    pub window: FitWindow,
    pub scenario: Scenario,
}

/// Snapshot of one session.
#[derive(Debug, Clone)]
pub struct Session {
    pub series: Arc<CaseSeries>,
    pub last_fit: Option<LastFit>,
    pub created_at: DateTime<Utc>,
}

struct Entry {
    session: Session,
    last_access: Instant,
}

/// In-memory sessions keyed by an opaque id, dropped after `idle` without use.
pub struct SessionStore {
    idle: Duration,
    entries: Mutex<HashMap<String, Entry>>,
}

impl SessionStore {
    pub fn new(idle: Duration) -> Self {
        SessionStore {
            idle,
            entries: Mutex::new(HashMap::new()),
        }
    }

    fn lock(&self) -> MutexGuard<'_, HashMap<String, Entry>> {
        let mut entries = self.entries.lock().unwrap_or_else(|e| e.into_inner());
        let now = Instant::now();
        entries.retain(|_, e| now.duration_since(e.last_access) < self.idle);
        entries
    }

    pub fn create(&self, series: CaseSeries) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session {
            series: Arc::new(series),
            last_fit: None,
            created_at: Utc::now(),
        };
        self.lock().insert(
            id.clone(),
            Entry {
                session,
                last_access: Instant::now(),
            },
        );
        id
    }

    /// Snapshot of a live session; refreshes its idle timer.
    pub fn get(&self, id: &str) -> Result<Session, ApiError> {
        let mut entries = self.lock();
        let entry = entries
            .get_mut(id)
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))?;
        entry.last_access = Instant::now();
        Ok(entry.session.clone())
    }

    pub fn record_fit(&self, id: &str, model: PolyModel, window: FitWindow, scenario: Scenario) {
        if let Some(entry) = self.lock().get_mut(id) {
            entry.session.last_fit = Some(LastFit { model, window, scenario });
            entry.last_access = Instant::now();
        }
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
