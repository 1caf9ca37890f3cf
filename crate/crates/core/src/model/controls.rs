//! Scenario levers: fleet allocation, fare overrides and tax rates.

use serde::{Deserialize, Serialize};

use super::city::FareScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetEntry {
    pub zone: usize,
    pub mode: usize,
    pub vehicles: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FareOverride {
    pub mode: usize,
    pub fare: FareScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxRate {
    pub mode: usize,
    /// Fraction of the mode's fare revenue, in `[0, 1]`.
    pub rate: f64,
}

/// What municipality and operator users set before each iteration.
///
/// Absent fleet entries mean zero vehicles; absent tax rates mean untaxed;
/// absent fare overrides keep the city file's fare.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioControls {
    #[serde(default)]
    pub fleet: Vec<FleetEntry>,
    #[serde(default)]
    pub fare_overrides: Vec<FareOverride>,
    #[serde(default)]
    pub tax_rates: Vec<TaxRate>,
}

impl ScenarioControls {
    /// Places `vehicles` of `mode` in every zone `0..n_zones`, replacing
    /// existing entries for that mode.
    pub fn with_uniform_fleet(mut self, n_zones: usize, mode: usize, vehicles: u32) -> Self {
        self.fleet.retain(|e| e.mode != mode);
        self.fleet
            .extend((0..n_zones).map(|zone| FleetEntry { zone, mode, vehicles }));
        self.fleet.sort_by_key(|e| (e.zone, e.mode));
        self
    }

    pub fn with_fleet(mut self, zone: usize, mode: usize, vehicles: u32) -> Self {
        match self.fleet.iter_mut().find(|e| e.zone == zone && e.mode == mode) {
            Some(e) => e.vehicles = vehicles,
            None => self.fleet.push(FleetEntry { zone, mode, vehicles }),
        }
        self
    }

    pub fn with_fare(mut self, mode: usize, fare: FareScheme) -> Self {
        match self.fare_overrides.iter_mut().find(|o| o.mode == mode) {
            Some(o) => o.fare = fare,
            None => self.fare_overrides.push(FareOverride { mode, fare }),
        }
        self
    }

    pub fn with_tax(mut self, mode: usize, rate: f64) -> Self {
        match self.tax_rates.iter_mut().find(|t| t.mode == mode) {
            Some(t) => t.rate = rate,
            None => self.tax_rates.push(TaxRate { mode, rate }),
        }
        self
    }

    pub fn vehicles(&self, zone: usize, mode: usize) -> u32 {
        self.fleet
            .iter()
            .find(|e| e.zone == zone && e.mode == mode)
            .map_or(0, |e| e.vehicles)
    }

    pub fn fare_override(&self, mode: usize) -> Option<FareScheme> {
        self.fare_overrides
            .iter()
            .find(|o| o.mode == mode)
            .map(|o| o.fare)
    }

    pub fn tax_rate(&self, mode: usize) -> f64 {
        self.tax_rates
            .iter()
            .find(|t| t.mode == mode)
            .map_or(0.0, |t| t.rate)
    }
}
