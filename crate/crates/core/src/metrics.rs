//! Key performance indicators of a solved scenario.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{mode_loads, Configuration};
use crate::error::Error;
use crate::model::{CityModel, GameInstance, ScenarioControls};

/// Per-iteration KPIs. Per-mode vectors are indexed by mode id (walking
/// first); per-zone tables are `[zone][mode]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpiBundle {
    /// Demand-weighted mean travel time, minutes per traveler.
    pub avg_travel_time: f64,
    /// Kilograms of CO2 per window.
    pub co2: f64,
    /// Fares collected per mode, USD.
    pub revenue: Vec<f64>,
    /// Fleet operating cost per mode, USD.
    pub operating_cost: Vec<f64>,
    /// Municipal tax income, USD.
    pub tax_revenue: f64,
    /// Fraction of each zone's departures using each mode.
    pub mode_share: Vec<Vec<f64>>,
    /// Departing travelers per zone and mode.
    pub riders: Vec<Vec<f64>>,
}

/// Element-wise `b - a` of two KPI bundles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiDelta {
    pub avg_travel_time: f64,
    pub co2: f64,
    pub revenue: Vec<f64>,
    pub operating_cost: Vec<f64>,
    pub tax_revenue: f64,
    pub mode_share: Vec<Vec<f64>>,
    pub riders: Vec<Vec<f64>>,
}

fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| y - x).collect()
}

fn sub_table(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter().zip(b).map(|(x, y)| sub_vec(x, y)).collect()
}

impl KpiDelta {
    pub fn between(a: &KpiBundle, b: &KpiBundle) -> Self {
        KpiDelta {
            avg_travel_time: b.avg_travel_time - a.avg_travel_time,
            co2: b.co2 - a.co2,
            revenue: sub_vec(&a.revenue, &b.revenue),
            operating_cost: sub_vec(&a.operating_cost, &b.operating_cost),
            tax_revenue: b.tax_revenue - a.tax_revenue,
            mode_share: sub_table(&a.mode_share, &b.mode_share),
            riders: sub_table(&a.riders, &b.riders),
        }
    }

    pub fn is_zero(&self) -> bool {
        let flat = self
            .revenue
            .iter()
            .chain(&self.operating_cost)
            .chain(self.mode_share.iter().flatten())
            .chain(self.riders.iter().flatten());
        self.avg_travel_time == 0.0
            && self.co2 == 0.0
            && self.tax_revenue == 0.0
            && flat.into_iter().all(|v| *v == 0.0)
    }
}

/// Evaluates KPIs for a configuration of `inst`, which must have been built
/// from `city` and `controls`.
pub fn compute_kpis(
    inst: &GameInstance,
    cfg: &Configuration,
    city: &CityModel,
    controls: &ScenarioControls,
) -> Result<KpiBundle, Error> {
    let d = inst.dims();
    if cfg.dims() != d {
        return Err(Error::Shape {
            expected: d.to_string(),
            found: cfg.dims().to_string(),
        });
    }
    if city.n_modes() != d.modes || city.n_zones() != d.zones {
        return Err(Error::Instance(format!(
            "city `{}` does not match instance dimensions {d}",
            city.name
        )));
    }
    let modes = city.all_modes();
    let dist = inst.distance();

    let mut weighted_time = 0.0;
    let mut revenue = vec![0.0; d.modes];
    let mut passenger_miles = vec![0.0; d.modes];
    for (i, j, k) in inst.active_triples() {
        let dem = inst.demand(i, j, k);
        for m in 0..d.modes {
            let riders = dem * cfg.get(i, j, k, m);
            if riders == 0.0 {
                continue;
            }
            weighted_time += riders * inst.travel_time(i, j, m);
            revenue[m] += riders * inst.fare(i, j, m);
            passenger_miles[m] += riders * dist.get(i, j);
        }
    }
    let total = inst.total_demand();
    let avg_travel_time = if total > 0.0 {
        60.0 * weighted_time / total
    } else {
        0.0
    };

    let co2_grams: f64 = modes
        .iter()
        .map(|mode| {
            let vehicle_miles = passenger_miles[mode.id] / f64::from(mode.seats_per_vehicle);
            mode.emissions_rate * vehicle_miles
        })
        .sum();

    let operating_cost: Vec<f64> = modes
        .iter()
        .map(|mode| {
            let vehicles: f64 = (0..d.zones)
                .map(|i| f64::from(controls.vehicles(i, mode.id)))
                .sum();
            vehicles * mode.operating_cost * inst.window_hours()
        })
        .collect();

    let tax_revenue = modes
        .iter()
        .filter(|mode| mode.taxable)
        .map(|mode| controls.tax_rate(mode.id) * revenue[mode.id])
        .sum();

    let loads = mode_loads(inst, cfg);
    let riders: Vec<Vec<f64>> = (0..d.zones)
        .map(|i| (0..d.modes).map(|m| loads[d.zone_mode(i, m)]).collect())
        .collect();
    let mode_share = riders
        .iter()
        .map(|row| {
            let departures: f64 = row.iter().sum();
            row.iter()
                .map(|r| if departures > 0.0 { r / departures } else { 0.0 })
                .collect()
        })
        .collect();

    Ok(KpiBundle {
        avg_travel_time,
        co2: co2_grams / 1000.0,
        revenue,
        operating_cost,
        tax_revenue,
        mode_share,
        riders,
    })
}
