//! Consistency checks for city models and scenario controls.
//!
//! Violations are data: the checks never fail, they report.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::city::{CityModel, FareScheme, Mode, SCHEMA_VERSION};
use super::controls::ScenarioControls;

/// Relative tolerance for the population-size / demand-total check.
const POPULATION_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A single field holds an out-of-range value.
    Field,
    /// Fields are individually fine but inconsistent with each other.
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Field path such as `zones[3].latitude`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn field(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            kind: ViolationKind::Field,
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn semantic(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            kind: ViolationKind::Semantic,
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn has_field_errors(&self) -> bool {
        self.violations.iter().any(|v| v.kind == ViolationKind::Field)
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn finite_non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

fn check_fare(report: &mut ValidationReport, path: String, fare: &FareScheme) {
    if !finite_non_negative(fare.amount()) {
        report.field(path, format!("fare must be finite and >= 0, got {}", fare.amount()));
    }
}

/// Checks every invariant of a city model, including that each population's
/// size equals its total originating demand.
pub fn validate_city(city: &CityModel) -> ValidationReport {
    let mut r = ValidationReport::default();

    if city.schema_version != SCHEMA_VERSION {
        r.field(
            "schema_version",
            format!("unsupported schema version \"{}\"", city.schema_version),
        );
    }

    let n = city.zones.len();
    if n == 0 {
        r.semantic("zones", "a city needs at least one zone");
    }
    for (pos, z) in city.zones.iter().enumerate() {
        if z.id != pos {
            r.semantic(
                format!("zones[{pos}].id"),
                format!("zone ids must be contiguous 0..{n}; expected {pos}, got {}", z.id),
            );
        }
        if !(z.latitude.is_finite() && (-90.0..=90.0).contains(&z.latitude)) {
            r.field(
                format!("zones[{pos}].latitude"),
                format!("latitude must lie in [-90, 90], got {}", z.latitude),
            );
        }
        if !(z.longitude.is_finite() && (-180.0..=180.0).contains(&z.longitude)) {
            r.field(
                format!("zones[{pos}].longitude"),
                format!("longitude must lie in [-180, 180], got {}", z.longitude),
            );
        }
    }

    let k = city.populations.len();
    for (pos, p) in city.populations.iter().enumerate() {
        if p.id != pos {
            r.semantic(
                format!("populations[{pos}].id"),
                format!("population ids must be contiguous 0..{k}; expected {pos}, got {}", p.id),
            );
        }
        if !finite_non_negative(p.value_of_time) {
            r.field(
                format!("populations[{pos}].value_of_time"),
                format!("value_of_time must be finite and >= 0, got {}", p.value_of_time),
            );
        }
    }

    let mut names = BTreeSet::new();
    names.insert("walk".to_string());
    for (pos, m) in city.modes.iter().enumerate() {
        let path = |f: &str| format!("modes[{pos}].{f}");
        if m.id != pos + 1 {
            r.semantic(
                path("id"),
                format!(
                    "mode ids must be contiguous starting at 1 (0 is walking); expected {}, got {}",
                    pos + 1,
                    m.id
                ),
            );
        }
        if !names.insert(m.name.to_ascii_lowercase()) {
            r.semantic(path("name"), format!("duplicate or reserved mode name `{}`", m.name));
        }
        if !(m.speed.is_finite() && m.speed > 0.0) {
            r.field(path("speed"), format!("speed must be finite and > 0, got {}", m.speed));
        }
        check_fare(&mut r, path("fare"), &m.fare);
        if m.seats_per_vehicle == 0 {
            r.field(path("seats_per_vehicle"), "seats_per_vehicle must be positive");
        }
        if !finite_non_negative(m.emissions_rate) {
            r.field(path("emissions_rate"), "emissions_rate must be finite and >= 0");
        }
        if !finite_non_negative(m.operating_cost) {
            r.field(path("operating_cost"), "operating_cost must be finite and >= 0");
        }
    }
    let n_modes = city.n_modes();

    for (pos, e) in city.demand.iter().enumerate() {
        let path = format!("demand[{pos}]");
        if e.origin >= n || e.destination >= n {
            r.semantic(
                &path,
                format!(
                    "demand references zone {} of {n}",
                    if e.origin >= n { e.origin } else { e.destination }
                ),
            );
        }
        if e.population >= k {
            r.semantic(
                &path,
                format!("demand references population {} of {k}", e.population),
            );
        }
        if !finite_non_negative(e.count) {
            r.field(
                format!("{path}.count"),
                format!("demand count must be finite and >= 0, got {}", e.count),
            );
        }
        if e.origin == e.destination && e.count != 0.0 {
            r.semantic(
                &path,
                format!(
                    "intra-zone demand: d[{}, {}, {}] = {}",
                    e.origin, e.destination, e.population, e.count
                ),
            );
        }
    }

    for p in &city.populations {
        if p.id >= k {
            continue;
        }
        let total = city.demand.population_total(p.id);
        let size = p.size as f64;
        if (total - size).abs() > POPULATION_REL_TOL * size.max(1.0) {
            r.semantic(
                format!("populations[{}].size", p.id),
                format!("population/demand mismatch, k={}, {}≠{}", p.id, p.size, total),
            );
        }
    }

    for (pos, o) in city.travel_time_overrides.iter().enumerate() {
        let path = format!("travel_time_overrides[{pos}]");
        if o.origin >= n || o.destination >= n {
            r.semantic(&path, "override references an unknown zone");
        }
        if o.mode >= n_modes {
            r.semantic(&path, format!("override references mode {} of {n_modes}", o.mode));
        }
        if !finite_non_negative(o.hours) {
            r.field(
                format!("{path}.hours"),
                format!("travel time override must be finite and >= 0, got {}", o.hours),
            );
        }
    }

    if !(city.defaults.circuity.is_finite() && city.defaults.circuity >= 1.0) {
        r.field("defaults.circuity", "circuity must be finite and >= 1");
    }
    if !(city.defaults.window_hours.is_finite() && city.defaults.window_hours > 0.0) {
        r.field("defaults.window_hours", "window_hours must be finite and > 0");
    }

    r
}

/// Checks scenario controls against the city they will be applied to.
pub fn validate_controls(city: &CityModel, controls: &ScenarioControls) -> ValidationReport {
    let mut r = ValidationReport::default();
    let n = city.n_zones();
    let n_modes = city.n_modes();

    let mut seen = BTreeSet::new();
    for (pos, e) in controls.fleet.iter().enumerate() {
        let path = format!("fleet[{pos}]");
        if e.zone >= n {
            r.semantic(&path, format!("fleet references unknown zone {}", e.zone));
        }
        if e.mode == Mode::WALKING {
            r.semantic(&path, "walking has no fleet");
        } else if e.mode >= n_modes {
            r.semantic(&path, format!("fleet references unknown mode {}", e.mode));
        }
        if !seen.insert((e.zone, e.mode)) {
            r.semantic(
                &path,
                format!("duplicate fleet entry for zone {}, mode {}", e.zone, e.mode),
            );
        }
    }

    let mut seen = BTreeSet::new();
    for (pos, o) in controls.fare_overrides.iter().enumerate() {
        let path = format!("fare_overrides[{pos}]");
        if o.mode == Mode::WALKING {
            r.semantic(&path, "walking is always free");
        } else if o.mode >= n_modes {
            r.semantic(&path, format!("fare override references unknown mode {}", o.mode));
        }
        if !seen.insert(o.mode) {
            r.semantic(&path, format!("duplicate fare override for mode {}", o.mode));
        }
        check_fare(&mut r, format!("{path}.fare"), &o.fare);
    }

    let mut seen = BTreeSet::new();
    for (pos, t) in controls.tax_rates.iter().enumerate() {
        let path = format!("tax_rates[{pos}]");
        if t.mode >= n_modes {
            r.semantic(&path, format!("tax rate references unknown mode {}", t.mode));
        }
        if !seen.insert(t.mode) {
            r.semantic(&path, format!("duplicate tax rate for mode {}", t.mode));
        }
        if !(t.rate.is_finite() && (0.0..=1.0).contains(&t.rate)) {
            r.field(
                format!("{path}.rate"),
                format!("tax_rates must lie in [0,1], got {}", t.rate),
            );
        }
    }

    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::city::*;

    fn tiny_city() -> CityModel {
        let mut demand = DemandTensor::new();
        demand.set(0, 1, 0, 60.0);
        demand.set(1, 0, 0, 40.0);
        CityModel {
            schema_version: SCHEMA_VERSION.into(),
            name: "tiny".into(),
            notes: vec![],
            defaults: CityDefaults::default(),
            zones: vec![
                Zone { id: 0, name: "A".into(), latitude: 42.36, longitude: -71.09 },
                Zone { id: 1, name: "B".into(), latitude: 42.37, longitude: -71.06 },
            ],
            populations: vec![Population {
                id: 0,
                name: "all".into(),
                value_of_time: 10.0,
                size: 100,
            }],
            modes: vec![Mode {
                id: 1,
                name: "bus".into(),
                speed: 12.0,
                fare: FareScheme::PerTrip(2.0),
                seats_per_vehicle: 50,
                emissions_rate: 2800.0,
                operating_cost: 90.0,
                taxable: false,
            }],
            demand,
            travel_time_overrides: vec![],
        }
    }

    #[test]
    fn consistent_city_is_valid() {
        let report = validate_city(&tiny_city());
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn intra_zone_demand_is_reported() {
        let mut city = tiny_city();
        city.demand.set(1, 1, 0, 5.0);
        city.populations[0].size = 105;
        let report = validate_city(&city);
        assert_eq!(report.violations.len(), 1, "{report}");
        assert!(report.contains("intra-zone demand"));
    }

    #[test]
    fn population_mismatch_names_both_totals() {
        let mut city = tiny_city();
        city.demand.set(1, 0, 0, 30.0);
        let report = validate_city(&city);
        assert!(report.contains("population/demand mismatch, k=0, 100≠90"), "{report}");
    }

    #[test]
    fn out_of_range_coordinates_are_field_errors() {
        let mut city = tiny_city();
        city.zones[1].latitude = 200.0;
        let report = validate_city(&city);
        assert!(report.has_field_errors());
        assert_eq!(report.violations[0].path, "zones[1].latitude");
    }

    #[test]
    fn demand_to_unknown_zone_is_semantic() {
        let mut city = tiny_city();
        city.demand.set(0, 9, 0, 0.0);
        let report = validate_city(&city);
        assert!(report.contains("zone 9 of 2"), "{report}");
        assert!(!report.has_field_errors());
    }

    #[test]
    fn negative_override_is_rejected() {
        let mut city = tiny_city();
        city.travel_time_overrides.push(TravelTimeOverride {
            origin: 0,
            destination: 1,
            mode: 1,
            hours: -0.5,
        });
        assert!(validate_city(&city).contains("override must be finite and >= 0"));
    }

    #[test]
    fn controls_checks() {
        let city = tiny_city();
        let ok = ScenarioControls::default()
            .with_uniform_fleet(2, 1, 15)
            .with_tax(1, 0.2);
        assert!(validate_controls(&city, &ok).is_valid());

        let bad_tax = ok.clone().with_tax(1, 1.5);
        assert!(validate_controls(&city, &bad_tax).contains("tax_rates must lie in [0,1]"));

        let walking_fleet = ok.clone().with_fleet(0, 0, 3);
        assert!(validate_controls(&city, &walking_fleet).contains("walking has no fleet"));

        let unknown = ok.with_fleet(7, 1, 3).with_fleet(0, 4, 1);
        let r = validate_controls(&city, &unknown);
        assert!(r.contains("unknown zone 7"));
        assert!(r.contains("unknown mode 4"));
    }
}
