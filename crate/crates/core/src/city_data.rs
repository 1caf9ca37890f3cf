//! City and session files.
//!
//! Both are UTF-8 JSON documents with a `schema_version` gate and a strict
//! schema: unknown keys are rejected. Units are fixed: miles, hours, USD,
//! grams of CO2. The machine-readable schema lives in `docs/`.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_city, CityModel, ScenarioControls, ValidationReport, SCHEMA_VERSION};
use crate::session::{EquilibriumReport, Session};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid city:\n{0}")]
    Semantic(ValidationReport),
    #[error("unsupported schema_version \"{0}\" (this build reads \"1\")")]
    UnsupportedVersion(String),
    #[error("corrupted file: {0}")]
    Corrupted(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(e: serde_json::Error) -> LoadError {
    LoadError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn check_version(doc: &serde_json::Value) -> Result<(), LoadError> {
    match doc.get("schema_version") {
        Some(serde_json::Value::String(v)) if v == SCHEMA_VERSION => Ok(()),
        Some(serde_json::Value::String(v)) => Err(LoadError::UnsupportedVersion(v.clone())),
        Some(other) => Err(LoadError::Schema {
            path: "schema_version".into(),
            message: format!("expected a string, found {other}"),
        }),
        None => Err(LoadError::Schema {
            path: "schema_version".into(),
            message: "missing field `schema_version`".into(),
        }),
    }
}

/// Strict typed parse with the failing field path in the error.
fn parse_strict<T: DeserializeOwned>(text: &str) -> Result<T, LoadError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            syntax(inner)
        } else {
            LoadError::Schema {
                path,
                message: inner.to_string(),
            }
        }
    })?;
    de.end().map_err(syntax)?;
    Ok(value)
}

fn checked_city(city: CityModel) -> Result<CityModel, LoadError> {
    let report = validate_city(&city);
    if report.is_valid() {
        return Ok(city);
    }
    if let Some(v) = report.violations.iter().find(|v| v.kind == crate::model::ViolationKind::Field) {
        return Err(LoadError::Schema {
            path: v.path.clone(),
            message: v.message.clone(),
        });
    }
    Err(LoadError::Semantic(report))
}

/// Parses and validates a city document.
pub fn parse_city(text: &str) -> Result<CityModel, LoadError> {
    let doc: serde_json::Value = serde_json::from_str(text).map_err(syntax)?;
    check_version(&doc)?;
    checked_city(parse_strict(text)?)
}

pub fn load_city(path: impl AsRef<Path>) -> Result<CityModel, LoadError> {
    parse_city(&fs::read_to_string(path)?)
}

pub fn load_city_from_reader(mut r: impl Read) -> Result<CityModel, LoadError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    parse_city(&text)
}

pub fn city_to_string(city: &CityModel) -> String {
    serde_json::to_string_pretty(city).expect("city models always serialize")
}

pub fn parse_controls(text: &str) -> Result<ScenarioControls, LoadError> {
    parse_strict(text)
}

pub fn load_controls(path: impl AsRef<Path>) -> Result<ScenarioControls, LoadError> {
    parse_controls(&fs::read_to_string(path)?)
}

pub fn controls_to_string(controls: &ScenarioControls) -> String {
    serde_json::to_string_pretty(controls).expect("controls always serialize")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionFile {
    schema_version: String,
    id: String,
    city: CityModel,
    history: Vec<EquilibriumReport>,
}

pub fn session_to_string(session: &Session) -> String {
    let file = SessionFile {
        schema_version: SCHEMA_VERSION.to_string(),
        id: session.id().to_string(),
        city: session.city().clone(),
        history: session.history().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("sessions always serialize")
}

pub fn parse_session(text: &str) -> Result<Session, LoadError> {
    let doc: serde_json::Value = serde_json::from_str(text).map_err(syntax)?;
    check_version(&doc)?;
    let file: SessionFile = parse_strict(text)?;
    let city = checked_city(file.city)?;
    Session::restore(file.id, city, file.history).map_err(|e| LoadError::Corrupted(e.to_string()))
}

pub fn save_session(session: &Session, path: impl AsRef<Path>) -> Result<(), LoadError> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, session_to_string(session))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_session(path: impl AsRef<Path>) -> Result<Session, LoadError> {
    parse_session(&fs::read_to_string(path)?)
}

const BOSTON: &str = include_str!("../data/boston.city.json");
const LUGANO: &str = include_str!("../data/lugano.city.json");
const KYIV: &str = include_str!("../data/kyiv.city.json");
const BOSTON_NOMINAL: &str = include_str!("../data/boston/nominal.controls.json");
const BOSTON_DOUBLED_BUSES: &str = include_str!("../data/boston/doubled_buses.controls.json");
const BOSTON_DOUBLED_AMOD_FARE: &str = include_str!("../data/boston/doubled_amod_fare.controls.json");

/// Short machine name of a bundled dataset.
pub const BUNDLED_KEYS: [&str; 3] = ["boston", "lugano", "kyiv"];

/// Cities shipped with the engine: Boston/Cambridge with calibrated
/// synthetic demand, plus Lugano and Kyiv scaffolds with placeholder demand.
pub fn bundled_datasets() -> Vec<CityModel> {
    BUNDLED_KEYS
        .iter()
        .map(|k| bundled_city(k).expect("bundled key"))
        .collect()
}

pub fn bundled_city(key: &str) -> Option<CityModel> {
    let text = match key {
        "boston" => BOSTON,
        "lugano" => LUGANO,
        "kyiv" => KYIV,
        _ => return None,
    };
    Some(parse_city(text).expect("bundled city files are valid"))
}

/// Nominal controls for a bundled city: 15 buses, 90 AMoD vehicles and 60
/// bikes per zone, 20% tax on AMoD and bike revenue.
pub fn bundled_nominal_controls(key: &str) -> Option<ScenarioControls> {
    match key {
        "boston" => Some(boston_nominal_controls()),
        "lugano" | "kyiv" => {
            let city = bundled_city(key)?;
            let n = city.n_zones();
            let mode = |name: &str| city.mode_by_name(name).map(|m| m.id);
            let (bus, amod, bike) = (mode("bus")?, mode("amod")?, mode("bike")?);
            Some(
                ScenarioControls::default()
                    .with_uniform_fleet(n, bus, 15)
                    .with_uniform_fleet(n, amod, 90)
                    .with_uniform_fleet(n, bike, 60)
                    .with_tax(amod, 0.2)
                    .with_tax(bike, 0.2),
            )
        }
        _ => None,
    }
}

pub fn boston_nominal_controls() -> ScenarioControls {
    parse_controls(BOSTON_NOMINAL).expect("bundled controls are valid")
}

pub fn boston_doubled_buses_controls() -> ScenarioControls {
    parse_controls(BOSTON_DOUBLED_BUSES).expect("bundled controls are valid")
}

pub fn boston_doubled_amod_fare_controls() -> ScenarioControls {
    parse_controls(BOSTON_DOUBLED_AMOD_FARE).expect("bundled controls are valid")
}
