//! Static city description: zones, traveler populations, modes and demand.
//!
//! These types double as the on-disk city format. Every struct rejects
//! unknown keys so that a misspelled field in a hand-edited file fails
//! loudly instead of silently falling back to a default.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Walking speed injected for mode 0, in miles per hour.
pub const WALKING_SPEED_MPH: f64 = 3.1;

/// Default detour factor applied to great-circle distances.
pub const DEFAULT_CIRCUITY: f64 = 1.3;

/// Default planning window, in hours.
pub const DEFAULT_WINDOW_HOURS: f64 = 1.0;

/// Current city/session file schema version.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Zone {
    pub id: usize,
    pub name: String,
    /// Degrees, WGS-84.
    pub latitude: f64,
    /// Degrees, WGS-84.
    pub longitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Population {
    pub id: usize,
    pub name: String,
    /// USD per hour.
    pub value_of_time: f64,
    /// Travelers in this population per window. Must equal the population's
    /// total demand.
    pub size: u64,
}

/// How a mode charges its riders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FareScheme {
    /// Flat USD amount per trip.
    PerTrip(f64),
    /// USD per mile travelled.
    PerMile(f64),
}

impl FareScheme {
    /// The USD amount or rate carried by the scheme.
    pub fn amount(&self) -> f64 {
        match *self {
            FareScheme::PerTrip(a) | FareScheme::PerMile(a) => a,
        }
    }
}

impl fmt::Display for FareScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FareScheme::PerTrip(a) => write!(f, "{a} USD/trip"),
            FareScheme::PerMile(a) => write!(f, "{a} USD/mile"),
        }
    }
}

/// A transportation mode. Mode 0 is always walking and is injected by the
/// engine; city files list only the remaining modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModeRecord")]
pub struct Mode {
    pub id: usize,
    pub name: String,
    /// Miles per hour.
    pub speed: f64,
    pub fare: FareScheme,
    pub seats_per_vehicle: u32,
    /// Grams of CO2 per vehicle-mile.
    pub emissions_rate: f64,
    /// USD per vehicle-hour.
    pub operating_cost: f64,
    pub taxable: bool,
}

impl Mode {
    pub const WALKING: usize = 0;

    pub fn walking() -> Self {
        Self::walking_at(WALKING_SPEED_MPH)
    }

    pub fn walking_at(speed: f64) -> Self {
        Mode {
            id: Self::WALKING,
            name: "walk".to_string(),
            speed,
            fare: FareScheme::PerTrip(0.0),
            seats_per_vehicle: 1,
            emissions_rate: 0.0,
            operating_cost: 0.0,
            taxable: false,
        }
    }
}

/// Documented fallbacks for fields a city file may omit, keyed by the
/// lowercase mode name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDefaults {
    pub seats_per_vehicle: u32,
    pub emissions_rate: f64,
    pub operating_cost: f64,
}

impl ModeDefaults {
    pub fn for_name(name: &str) -> Option<Self> {
        let d = match name.to_ascii_lowercase().as_str() {
            "bus" => ModeDefaults {
                seats_per_vehicle: 50,
                emissions_rate: 2800.0,
                operating_cost: 90.0,
            },
            "amod" => ModeDefaults {
                seats_per_vehicle: 4,
                emissions_rate: 350.0,
                operating_cost: 12.0,
            },
            "bike" => ModeDefaults {
                seats_per_vehicle: 1,
                emissions_rate: 0.0,
                operating_cost: 0.5,
            },
            _ => return None,
        };
        Some(d)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeRecord {
    id: usize,
    name: String,
    speed: f64,
    fare: FareScheme,
    seats_per_vehicle: Option<u32>,
    emissions_rate: Option<f64>,
    operating_cost: Option<f64>,
    #[serde(default)]
    taxable: bool,
}

impl TryFrom<ModeRecord> for Mode {
    type Error = String;

    fn try_from(r: ModeRecord) -> Result<Self, Self::Error> {
        let defaults = ModeDefaults::for_name(&r.name);
        let pick = |field: &str, given: Option<f64>, fallback: Option<f64>| {
            given.or(fallback).ok_or_else(|| {
                format!(
                    "mode `{}` has no built-in default; `{field}` is required",
                    r.name
                )
            })
        };
        let seats = pick(
            "seats_per_vehicle",
            r.seats_per_vehicle.map(f64::from),
            defaults.map(|d| f64::from(d.seats_per_vehicle)),
        )? as u32;
        let emissions_rate = pick("emissions_rate", r.emissions_rate, defaults.map(|d| d.emissions_rate))?;
        let operating_cost = pick("operating_cost", r.operating_cost, defaults.map(|d| d.operating_cost))?;
        Ok(Mode {
            id: r.id,
            name: r.name,
            speed: r.speed,
            fare: r.fare,
            seats_per_vehicle: seats,
            emissions_rate,
            operating_cost,
            taxable: r.taxable,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandEntry {
    pub origin: usize,
    pub destination: usize,
    pub population: usize,
    /// Travelers per window; fractional values are allowed.
    pub count: f64,
}

/// Sparse demand `(origin, destination, population) -> travelers`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DemandEntry>", into = "Vec<DemandEntry>")]
pub struct DemandTensor {
    entries: BTreeMap<(usize, usize, usize), f64>,
}

impl DemandTensor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `d[origin, destination, population]`, replacing any earlier value.
    pub fn set(&mut self, origin: usize, destination: usize, population: usize, count: f64) {
        self.entries.insert((origin, destination, population), count);
    }

    pub fn get(&self, origin: usize, destination: usize, population: usize) -> f64 {
        self.entries
            .get(&(origin, destination, population))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = DemandEntry> + '_ {
        self.entries
            .iter()
            .map(|(&(origin, destination, population), &count)| DemandEntry {
                origin,
                destination,
                population,
                count,
            })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Total demand originating from population `k`.
    pub fn population_total(&self, k: usize) -> f64 {
        self.iter()
            .filter(|e| e.population == k)
            .map(|e| e.count)
            .sum()
    }

    /// Total demand departing zone `i`.
    pub fn origin_total(&self, i: usize) -> f64 {
        self.iter().filter(|e| e.origin == i).map(|e| e.count).sum()
    }
}

impl TryFrom<Vec<DemandEntry>> for DemandTensor {
    type Error = String;

    fn try_from(list: Vec<DemandEntry>) -> Result<Self, Self::Error> {
        let mut t = DemandTensor::new();
        for (n, e) in list.into_iter().enumerate() {
            let key = (e.origin, e.destination, e.population);
            if t.entries.insert(key, e.count).is_some() {
                return Err(format!(
                    "duplicate demand entry #{n} for origin {}, destination {}, population {}",
                    e.origin, e.destination, e.population
                ));
            }
        }
        Ok(t)
    }
}

impl From<DemandTensor> for Vec<DemandEntry> {
    fn from(t: DemandTensor) -> Self {
        t.iter().collect()
    }
}

/// Survey-grade travel time that replaces the distance/speed estimate for
/// one directed OD pair and mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TravelTimeOverride {
    pub origin: usize,
    pub destination: usize,
    pub mode: usize,
    pub hours: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityDefaults {
    #[serde(default = "default_circuity")]
    pub circuity: f64,
    #[serde(default = "default_window")]
    pub window_hours: f64,
}

fn default_circuity() -> f64 {
    DEFAULT_CIRCUITY
}

fn default_window() -> f64 {
    DEFAULT_WINDOW_HOURS
}

impl Default for CityDefaults {
    fn default() -> Self {
        CityDefaults {
            circuity: DEFAULT_CIRCUITY,
            window_hours: DEFAULT_WINDOW_HOURS,
        }
    }
}

/// Everything the engine needs to know about a city, independent of the
/// levers users pull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityModel {
    pub schema_version: String,
    pub name: String,
    /// Free-form provenance and unit notes carried with the file.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default)]
    pub defaults: CityDefaults,
    pub zones: Vec<Zone>,
    pub populations: Vec<Population>,
    /// Non-walking modes, ids starting at 1.
    pub modes: Vec<Mode>,
    pub demand: DemandTensor,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub travel_time_overrides: Vec<TravelTimeOverride>,
}

impl CityModel {
    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn n_populations(&self) -> usize {
        self.populations.len()
    }

    /// Number of modes including walking.
    pub fn n_modes(&self) -> usize {
        self.modes.len() + 1
    }

    /// Walking followed by the city's modes, indexed by mode id.
    pub fn all_modes(&self) -> Vec<Mode> {
        std::iter::once(Mode::walking())
            .chain(self.modes.iter().cloned())
            .collect()
    }

    /// Looks up a mode (including walking) by id.
    pub fn mode(&self, id: usize) -> Option<Mode> {
        if id == Mode::WALKING {
            Some(Mode::walking())
        } else {
            self.modes.iter().find(|m| m.id == id).cloned()
        }
    }

    pub fn mode_by_name(&self, name: &str) -> Option<Mode> {
        self.all_modes()
            .into_iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
    }
}
