use serde::{Deserialize, Serialize};

use super::{Configuration, FEASIBILITY_TOL};
use crate::error::Error;
use crate::model::GameInstance;

/// The five feasibility conditions a configuration must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `x >= 0`.
    NonNegativity,
    /// `sum_m x[i, i, k, m] = 0`.
    NoIntraZone,
    /// `sum_m x[i, j, k, m] = 1` wherever `d[i, j, k] > 0`.
    Assignment,
    /// `sum_{i,j,m} d x = P[k]`.
    PopulationTotal,
    /// `sum_{j,k} d x <= C[i, m]`.
    Capacity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityViolation {
    pub condition: Condition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub destination: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<usize>,
    /// Signed amount by which the condition is missed.
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<FeasibilityViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn of(&self, condition: Condition) -> impl Iterator<Item = &FeasibilityViolation> {
        self.violations.iter().filter(move |v| v.condition == condition)
    }
}

fn violation(
    condition: Condition,
    idx: (Option<usize>, Option<usize>, Option<usize>, Option<usize>),
    residual: f64,
) -> FeasibilityViolation {
    FeasibilityViolation {
        condition,
        origin: idx.0,
        destination: idx.1,
        population: idx.2,
        mode: idx.3,
        residual,
    }
}

/// Evaluates every feasibility condition and lists each violation with its
/// indices and residual. Equalities use [`FEASIBILITY_TOL`] scaled by the
/// magnitude of the right-hand side (floored at 1).
pub fn check_feasible(inst: &GameInstance, cfg: &Configuration) -> Result<FeasibilityReport, Error> {
    cfg.ensure_matches(inst)?;
    let d = inst.dims();
    let tol = FEASIBILITY_TOL;
    let mut report = FeasibilityReport::default();

    for i in 0..d.zones {
        for j in 0..d.zones {
            for k in 0..d.populations {
                let mut sum = 0.0;
                for m in 0..d.modes {
                    let x = cfg.get(i, j, k, m);
                    if x < -tol {
                        report.violations.push(violation(
                            Condition::NonNegativity,
                            (Some(i), Some(j), Some(k), Some(m)),
                            x,
                        ));
                    }
                    sum += x;
                }
                if i == j {
                    if sum.abs() > tol {
                        report.violations.push(violation(
                            Condition::NoIntraZone,
                            (Some(i), Some(j), Some(k), None),
                            sum,
                        ));
                    }
                } else if inst.demand(i, j, k) > 0.0 && (sum - 1.0).abs() > tol {
                    report.violations.push(violation(
                        Condition::Assignment,
                        (Some(i), Some(j), Some(k), None),
                        sum - 1.0,
                    ));
                }
            }
        }
    }

    for k in 0..d.populations {
        let mut carried = 0.0;
        for i in 0..d.zones {
            for j in 0..d.zones {
                let dem = inst.demand(i, j, k);
                for m in 0..d.modes {
                    carried += dem * cfg.get(i, j, k, m);
                }
            }
        }
        let size = inst.population_size(k);
        if (carried - size).abs() > tol * size.abs().max(1.0) {
            report.violations.push(violation(
                Condition::PopulationTotal,
                (None, None, Some(k), None),
                carried - size,
            ));
        }
    }

    let loads = super::mode_loads(inst, cfg);
    for i in 0..d.zones {
        for m in 0..d.modes {
            if let Some(c) = inst.capacity(i, m).seats() {
                let load = loads[d.zone_mode(i, m)];
                if load - c > tol * c.abs().max(1.0) {
                    report.violations.push(violation(
                        Condition::Capacity,
                        (Some(i), None, None, Some(m)),
                        load - c,
                    ));
                }
            }
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::tests::bus_walk_instance;
    use crate::model::Dims;

    #[test]
    fn all_walking_is_feasible() {
        let inst = bus_walk_instance();
        let cfg = Configuration::all_on_mode(&inst, 0);
        assert!(check_feasible(&inst, &cfg).unwrap().is_feasible());
    }

    #[test]
    fn partial_assignment_violates_condition_three() {
        let inst = bus_walk_instance();
        let mut cfg = Configuration::all_on_mode(&inst, 0);
        cfg.set(0, 1, 0, 0, 0.9);
        let report = check_feasible(&inst, &cfg).unwrap();
        let v: Vec<_> = report.of(Condition::Assignment).collect();
        assert_eq!(v.len(), 1);
        assert!((v[0].residual + 0.1).abs() < 1e-12);
        assert_eq!((v[0].origin, v[0].destination), (Some(0), Some(1)));
    }

    #[test]
    fn capacity_overrun_by_one_rider() {
        let inst = bus_walk_instance();
        let mut cfg = Configuration::zeros(inst.dims());
        cfg.set(0, 1, 0, 1, 0.61);
        cfg.set(0, 1, 0, 0, 0.39);
        let report = check_feasible(&inst, &cfg).unwrap();
        let v: Vec<_> = report.of(Condition::Capacity).collect();
        assert_eq!(v.len(), 1);
        assert!((v[0].residual - 1.0).abs() < 1e-9);
        assert_eq!(v[0].mode, Some(1));
    }

    #[test]
    fn intra_zone_share_is_reported() {
        let inst = bus_walk_instance();
        let mut cfg = Configuration::all_on_mode(&inst, 0);
        cfg.set(1, 1, 0, 1, 0.5);
        let report = check_feasible(&inst, &cfg).unwrap();
        assert_eq!(report.of(Condition::NoIntraZone).count(), 1);
    }

    #[test]
    fn negative_share_is_reported() {
        let inst = bus_walk_instance();
        let mut cfg = Configuration::all_on_mode(&inst, 0);
        cfg.set(0, 1, 0, 0, 1.1);
        cfg.set(0, 1, 0, 1, -0.1);
        let report = check_feasible(&inst, &cfg).unwrap();
        assert_eq!(report.of(Condition::NonNegativity).count(), 1);
    }

    #[test]
    fn shape_mismatch_is_structural() {
        let inst = bus_walk_instance();
        let cfg = Configuration::zeros(Dims::new(3, 1, 2));
        assert!(matches!(check_feasible(&inst, &cfg), Err(Error::Shape { .. })));
    }
}
