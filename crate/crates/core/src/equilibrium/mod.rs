//! Equilibrium computation.
//!
//! The system-optimal LP over mode splits has no constraint linking
//! different origin zones once the population-total rows are recognized as
//! implied by the assignment rows, so [`solve_equilibrium`] solves one
//! transportation problem per origin. [`oracle_solve`] assembles the full LP
//! instead and serves as an independent cross-check.

mod feasibility;
mod nash;
mod oracle;
pub mod simplex;
mod transport;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{Capacity, Dims, GameInstance};

pub use feasibility::{check_feasible, Condition, FeasibilityReport, FeasibilityViolation};
pub use nash::{mode_loads, verify_nash, NashCertificate, NashWitness};
pub use oracle::{assemble_lp, oracle_solve, AssembledLp, LpShape, ORACLE_VARIABLE_LIMIT};

/// Absolute/relative tolerance for feasibility and Nash checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Shares below this are treated as unused.
pub const SHARE_EPS: f64 = 1e-9;

/// Mode-split tensor `x[i, j, k, m]`: the fraction of `(i, j, k)` travelers
/// taking mode `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    dims: Dims,
    x: Vec<f64>,
}

/// One nonzero entry of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseShare {
    pub origin: usize,
    pub destination: usize,
    pub population: usize,
    pub mode: usize,
    pub share: f64,
}

impl Configuration {
    pub fn zeros(dims: Dims) -> Self {
        Configuration {
            dims,
            x: vec![0.0; dims.n_vars()],
        }
    }

    pub fn from_vec(dims: Dims, x: Vec<f64>) -> Result<Self, Error> {
        if x.len() != dims.n_vars() {
            return Err(Error::Shape {
                expected: format!("{} entries", dims.n_vars()),
                found: format!("{} entries", x.len()),
            });
        }
        Ok(Configuration { dims, x })
    }

    /// Everyone on mode `m` wherever there is demand.
    pub fn all_on_mode(inst: &GameInstance, m: usize) -> Self {
        let mut cfg = Self::zeros(inst.dims());
        for (i, j, k) in inst.active_triples() {
            cfg.set(i, j, k, m, 1.0);
        }
        cfg
    }

    pub fn from_sparse(dims: Dims, entries: &[SparseShare]) -> Result<Self, Error> {
        let mut cfg = Self::zeros(dims);
        for e in entries {
            if e.origin >= dims.zones
                || e.destination >= dims.zones
                || e.population >= dims.populations
                || e.mode >= dims.modes
            {
                return Err(Error::Shape {
                    expected: dims.to_string(),
                    found: format!(
                        "entry ({}, {}, {}, {})",
                        e.origin, e.destination, e.population, e.mode
                    ),
                });
            }
            cfg.set(e.origin, e.destination, e.population, e.mode, e.share);
        }
        Ok(cfg)
    }

    /// Entries above [`SHARE_EPS`], in index order.
    pub fn to_sparse(&self) -> Vec<SparseShare> {
        let d = self.dims;
        let mut out = Vec::new();
        for i in 0..d.zones {
            for j in 0..d.zones {
                for k in 0..d.populations {
                    for m in 0..d.modes {
                        let share = self.get(i, j, k, m);
                        if share > SHARE_EPS {
                            out.push(SparseShare {
                                origin: i,
                                destination: j,
                                population: k,
                                mode: m,
                                share,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn get(&self, i: usize, j: usize, k: usize, m: usize) -> f64 {
        self.x[self.dims.var(i, j, k, m)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, m: usize, v: f64) {
        let idx = self.dims.var(i, j, k, m);
        self.x[idx] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    pub(crate) fn ensure_matches(&self, inst: &GameInstance) -> Result<(), Error> {
        if self.dims != inst.dims() {
            return Err(Error::Shape {
                expected: inst.dims().to_string(),
                found: self.dims.to_string(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Decomposed,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveStats {
    /// Total system cost `sum c * d * x`, USD.
    pub objective: f64,
    /// Augmentations (decomposed) or simplex pivots (oracle, one entry).
    pub per_zone_iterations: Vec<usize>,
    pub wall_time_seconds: f64,
    pub solver_kind: SolverKind,
}

/// Total system cost of a configuration.
pub fn total_cost(inst: &GameInstance, cfg: &Configuration) -> f64 {
    let d = inst.dims();
    let mut total = 0.0;
    for (i, j, k) in inst.active_triples() {
        let demand = inst.demand(i, j, k);
        for m in 0..d.modes {
            total += inst.cost(i, j, k, m) * demand * cfg.get(i, j, k, m);
        }
    }
    total
}

/// Fails unless each population's demand adds up to its size, which is what
/// makes the per-origin decomposition exact.
pub fn check_population_consistency(inst: &GameInstance) -> Result<(), Error> {
    let d = inst.dims();
    for k in 0..d.populations {
        let mut total = 0.0;
        for i in 0..d.zones {
            for j in 0..d.zones {
                total += inst.demand(i, j, k);
            }
        }
        let size = inst.population_size(k);
        if (total - size).abs() > FEASIBILITY_TOL * size.abs().max(1.0) {
            return Err(Error::Precondition(format!(
                "population {k}: demand total {total} differs from size {size}"
            )));
        }
    }
    Ok(())
}

struct ZoneSplit {
    /// `(destination, population, mode, share)`.
    shares: Vec<(usize, usize, usize, f64)>,
    augmentations: usize,
}

fn solve_zone(inst: &GameInstance, i: usize) -> Result<ZoneSplit, Error> {
    let d = inst.dims();
    let bundles: Vec<(usize, usize)> = (0..d.zones)
        .flat_map(|j| (0..d.populations).map(move |k| (j, k)))
        .filter(|&(j, k)| inst.demand(i, j, k) > 0.0)
        .collect();
    let supply: Vec<f64> = bundles.iter().map(|&(j, k)| inst.demand(i, j, k)).collect();
    let capacity: Vec<Option<f64>> = (0..d.modes)
        .map(|m| match inst.capacity(i, m) {
            Capacity::Seats(s) => Some(s),
            Capacity::Unbounded => None,
        })
        .collect();
    let cost: Vec<f64> = bundles
        .iter()
        .flat_map(|&(j, k)| (0..d.modes).map(move |m| inst.cost(i, j, k, m)))
        .collect();

    let solved = transport::solve_transport(&transport::TransportProblem {
        supply: &supply,
        capacity: &capacity,
        cost: &cost,
    })
    .map_err(|e| match e {
        Error::Infeasible(msg) => Error::Infeasible(format!("origin zone {i}: {msg}")),
        other => other,
    })?;

    let mut shares = Vec::new();
    for (b, &(j, k)) in bundles.iter().enumerate() {
        for m in 0..d.modes {
            let f = solved.flow[b * d.modes + m];
            if f > 0.0 {
                shares.push((j, k, m, f / supply[b]));
            }
        }
    }
    Ok(ZoneSplit {
        shares,
        augmentations: solved.augmentations,
    })
}

/// Computes the canonical equilibrium of an instance.
///
/// Origins are solved independently (in parallel) and merged in zone order,
/// so the result is identical to a sequential solve. Among optimal splits
/// the solver prefers the lower mode index, then the lower destination,
/// then the lower population.
pub fn solve_equilibrium(inst: &GameInstance) -> Result<(Configuration, SolveStats), Error> {
    let started = Instant::now();
    check_population_consistency(inst)?;
    let d = inst.dims();

    let zones: Vec<Result<ZoneSplit, Error>> =
        (0..d.zones).into_par_iter().map(|i| solve_zone(inst, i)).collect();

    let mut cfg = Configuration::zeros(d);
    let mut per_zone_iterations = Vec::with_capacity(d.zones);
    for (i, zone) in zones.into_iter().enumerate() {
        let zone = zone?;
        for (j, k, m, share) in zone.shares {
            cfg.set(i, j, k, m, share);
        }
        per_zone_iterations.push(zone.augmentations);
    }

    let stats = SolveStats {
        objective: total_cost(inst, &cfg),
        per_zone_iterations,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        solver_kind: SolverKind::Decomposed,
    };
    Ok((cfg, stats))
}
