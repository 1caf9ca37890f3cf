use serde::{Deserialize, Serialize};

use super::{Configuration, FEASIBILITY_TOL, SHARE_EPS};
use crate::error::Error;
use crate::model::GameInstance;

/// Travelers on `(i, j, k)` using `mode` who would pay less on
/// `alternative`, which still has free seats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashWitness {
    pub origin: usize,
    pub destination: usize,
    pub population: usize,
    pub mode: usize,
    pub alternative: usize,
    pub cost: f64,
    pub alternative_cost: f64,
    /// Free seats on the alternative; `None` when unbounded.
    pub alternative_slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashCertificate {
    pub verdict: bool,
    pub witnesses: Vec<NashWitness>,
}

/// Riders per `(zone, mode)`, indexed by [`crate::model::Dims::zone_mode`].
pub fn mode_loads(inst: &GameInstance, cfg: &Configuration) -> Vec<f64> {
    let d = inst.dims();
    let mut loads = vec![0.0; d.zones * d.modes];
    for (i, j, k) in inst.active_triples() {
        let dem = inst.demand(i, j, k);
        for m in 0..d.modes {
            loads[d.zone_mode(i, m)] += dem * cfg.get(i, j, k, m);
        }
    }
    loads
}

/// Checks that no traveler group could lower its cost by moving to another
/// mode with free capacity. Costs do not depend on loads, so each check is
/// a comparison of constants plus a saturation test.
pub fn verify_nash(inst: &GameInstance, cfg: &Configuration) -> Result<NashCertificate, Error> {
    cfg.ensure_matches(inst)?;
    let d = inst.dims();
    let loads = mode_loads(inst, cfg);
    let saturated: Vec<bool> = (0..d.zones)
        .flat_map(|i| (0..d.modes).map(move |m| (i, m)))
        .map(|(i, m)| {
            inst.capacity(i, m)
                .is_saturated(loads[d.zone_mode(i, m)], FEASIBILITY_TOL)
        })
        .collect();

    let mut witnesses = Vec::new();
    for i in 0..d.zones {
        for j in 0..d.zones {
            for k in 0..d.populations {
                for m in 0..d.modes {
                    if cfg.get(i, j, k, m) <= SHARE_EPS {
                        continue;
                    }
                    let cost = inst.cost(i, j, k, m);
                    for alt in (0..d.modes).filter(|&a| a != m) {
                        let alt_cost = inst.cost(i, j, k, alt);
                        if cost <= alt_cost + FEASIBILITY_TOL || saturated[d.zone_mode(i, alt)] {
                            continue;
                        }
                        witnesses.push(NashWitness {
                            origin: i,
                            destination: j,
                            population: k,
                            mode: m,
                            alternative: alt,
                            cost,
                            alternative_cost: alt_cost,
                            alternative_slack: inst
                                .capacity(i, alt)
                                .slack(loads[d.zone_mode(i, alt)]),
                        });
                    }
                }
            }
        }
    }
    Ok(NashCertificate {
        verdict: witnesses.is_empty(),
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::tests::bus_walk_instance;

    #[test]
    fn walkers_facing_a_full_bus_are_in_equilibrium() {
        let inst = bus_walk_instance();
        let mut cfg = Configuration::zeros(inst.dims());
        cfg.set(0, 1, 0, 1, 0.6);
        cfg.set(0, 1, 0, 0, 0.4);
        let cert = verify_nash(&inst, &cfg).unwrap();
        assert!(cert.verdict);
        assert!(cert.witnesses.is_empty());
    }

    #[test]
    fn walkers_next_to_an_empty_seat_are_not() {
        let inst = bus_walk_instance();
        let mut cfg = Configuration::zeros(inst.dims());
        cfg.set(0, 1, 0, 1, 0.4);
        cfg.set(0, 1, 0, 0, 0.6);
        let cert = verify_nash(&inst, &cfg).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.witnesses.len(), 1);
        let w = &cert.witnesses[0];
        assert_eq!((w.mode, w.alternative), (0, 1));
        assert_eq!((w.cost, w.alternative_cost), (10.0, 4.0));
        assert!((w.alternative_slack.unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn everyone_walking_next_to_an_idle_bus_is_not() {
        let inst = bus_walk_instance();
        let cfg = Configuration::all_on_mode(&inst, 0);
        let cert = verify_nash(&inst, &cfg).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.witnesses[0].alternative_slack, Some(60.0));
    }
}
