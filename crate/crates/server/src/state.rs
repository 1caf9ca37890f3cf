use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use mobeq_core::city_data::{
    bundled_city, city_to_string, load_city, load_session, save_session, BUNDLED_KEYS,
};
use mobeq_core::{CityModel, Session};
use serde::Serialize;

/// Default upper bound on one solve, including verification.
pub const DEFAULT_SOLVE_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Where uploaded cities and sessions are persisted. In-memory only
    /// when `None`.
    pub data_dir: Option<PathBuf>,
    /// Directory served at `/` for a browser front end.
    pub static_dir: Option<PathBuf>,
    pub solve_timeout: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            data_dir: None,
            static_dir: None,
            solve_timeout: DEFAULT_SOLVE_TIMEOUT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CityEntry {
    pub id: String,
    pub bundled: bool,
    pub city: Arc<CityModel>,
}

/// Listing row for `GET /cities`.
#[derive(Debug, Clone, Serialize)]
pub struct CitySummary {
    pub id: String,
    pub name: String,
    pub bundled: bool,
    pub zones: usize,
    pub populations: usize,
    /// Mode names, walking first.
    pub modes: Vec<String>,
    pub travelers: f64,
    pub notes: Vec<String>,
}

impl CityEntry {
    pub fn summary(&self) -> CitySummary {
        CitySummary {
            id: self.id.clone(),
            name: self.city.name.clone(),
            bundled: self.bundled,
            zones: self.city.n_zones(),
            populations: self.city.n_populations(),
            modes: self.city.all_modes().into_iter().map(|m| m.name).collect(),
            travelers: self.city.demand.total(),
            notes: self.city.notes.clone(),
        }
    }
}

pub struct SessionEntry {
    pub city_id: String,
    pub session: Session,
}

pub type SharedSession = Arc<tokio::sync::Mutex<SessionEntry>>;

pub struct AppState {
    pub config: ServerConfig,
    cities: RwLock<BTreeMap<String, CityEntry>>,
    sessions: RwLock<HashMap<String, SharedSession>>,
}

impl AppState {
    /// Registers the bundled cities and, with a data directory, everything
    /// persisted there.
    pub fn new(config: ServerConfig) -> io::Result<Self> {
        let state = AppState {
            config,
            cities: RwLock::new(BTreeMap::new()),
            sessions: RwLock::new(HashMap::new()),
        };
        for key in BUNDLED_KEYS {
            let city = bundled_city(key).expect("bundled key");
            state.insert_city(key.to_string(), true, city);
        }
        if let Some(dir) = state.config.data_dir.clone() {
            state.load_data_dir(&dir)?;
        }
        Ok(state)
    }

    fn load_data_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir.join("cities"))?;
        fs::create_dir_all(dir.join("sessions"))?;
        for path in sorted_files(&dir.join("cities"), ".city.json")? {
            let id = file_stem(&path, ".city.json");
            match load_city(&path) {
                Ok(city) => self.insert_city(id, false, city),
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
        for path in sorted_files(&dir.join("sessions"), ".mobeq")? {
            match load_session(&path) {
                Ok(session) => {
                    let city_id = self.city_id_for(session.city());
                    self.insert_session(SessionEntry { city_id, session });
                }
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
        Ok(())
    }

    /// Id of a registered city equal to `city`, registering it if needed.
    fn city_id_for(&self, city: &CityModel) -> String {
        let found = self
            .cities
            .read()
            .unwrap()
            .values()
            .find(|e| *e.city == *city)
            .map(|e| e.id.clone());
        found.unwrap_or_else(|| {
            let id = new_id("city");
            self.insert_city(id.clone(), false, city.clone());
            id
        })
    }

    fn insert_city(&self, id: String, bundled: bool, city: CityModel) {
        let entry = CityEntry {
            id: id.clone(),
            bundled,
            city: Arc::new(city),
        };
        self.cities.write().unwrap().insert(id, entry);
    }

    pub fn cities(&self) -> Vec<CityEntry> {
        self.cities.read().unwrap().values().cloned().collect()
    }

    pub fn city(&self, id: &str) -> Option<CityEntry> {
        self.cities.read().unwrap().get(id).cloned()
    }

    /// Stores an uploaded (already validated) city under a fresh id.
    pub fn add_city(&self, city: CityModel) -> io::Result<CityEntry> {
        let id = new_id("city");
        if let Some(dir) = &self.config.data_dir {
            let path = dir.join("cities").join(format!("{id}.city.json"));
            fs::write(path, city_to_string(&city))?;
        }
        self.insert_city(id.clone(), false, city);
        Ok(self.city(&id).expect("just inserted"))
    }

    fn insert_session(&self, entry: SessionEntry) -> SharedSession {
        let id = entry.session.id().to_string();
        let shared = Arc::new(tokio::sync::Mutex::new(entry));
        self.sessions.write().unwrap().insert(id, shared.clone());
        shared
    }

    pub fn add_session(&self, entry: SessionEntry) -> io::Result<SharedSession> {
        self.persist(&entry.session)?;
        Ok(self.insert_session(entry))
    }

    pub fn session(&self, id: &str) -> Option<SharedSession> {
        self.sessions.read().unwrap().get(id).cloned()
    }

    pub fn remove_session(&self, id: &str) -> io::Result<bool> {
        let removed = self.sessions.write().unwrap().remove(id).is_some();
        if removed {
            if let Some(path) = self.session_path(id) {
                if path.exists() {
                    fs::remove_file(path)?;
                }
            }
        }
        Ok(removed)
    }

    fn session_path(&self, id: &str) -> Option<PathBuf> {
        self.config
            .data_dir
            .as_ref()
            .map(|dir| dir.join("sessions").join(format!("{id}.mobeq")))
    }

    /// Writes the session file when persistence is on.
    pub fn persist(&self, session: &Session) -> io::Result<()> {
        match self.session_path(session.id()) {
            Some(path) => save_session(session, path).map_err(|e| io::Error::other(e.to_string())),
            None => Ok(()),
        }
    }
}

fn new_id(prefix: &str) -> String {
    let raw = uuid::Uuid::new_v4().simple().to_string();
    format!("{prefix}-{}", &raw[..12])
}

fn sorted_files(dir: &Path, suffix: &str) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    files.sort();
    Ok(files)
}

fn file_stem(path: &Path, suffix: &str) -> String {
    let name = path.file_name().unwrap_or_default().to_string_lossy();
    name.trim_end_matches(suffix).to_string()
}
