//! The full system-optimal LP, assembled row family by row family and
//! solved with the dense simplex. Only practical for small instances.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::simplex::{self, Constraint, LinearProgram, LpOutcome, Sense};
use super::{Configuration, SolveStats, SolverKind};
use crate::error::Error;
use crate::model::{Capacity, GameInstance};

/// Largest LP the oracle will attempt.
pub const ORACLE_VARIABLE_LIMIT: usize = 5000;

/// Size of the assembled LP by row family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpShape {
    /// `N^2 M K` before any exclusion.
    pub full_variables: usize,
    /// Triples `(i, j, k)` with zero demand, whose `M` variables are dropped.
    pub excluded_triples: usize,
    pub variables: usize,
    /// One `<=` row per zone and bounded mode.
    pub capacity_rows: usize,
    /// One `= 1` row per triple with demand.
    pub assignment_rows: usize,
    /// One `= P[k]` row per population.
    pub population_rows: usize,
}

impl LpShape {
    pub fn constraints(&self) -> usize {
        self.capacity_rows + self.assignment_rows + self.population_rows
    }
}

#[derive(Debug, Clone)]
pub struct AssembledLp {
    pub program: LinearProgram,
    /// Column -> `(i, j, k, m)`.
    pub columns: Vec<(usize, usize, usize, usize)>,
    pub shape: LpShape,
}

/// Builds the LP exactly as posed: capacity rows, assignment rows, the
/// (redundant) population-total rows, and non-negativity.
pub fn assemble_lp(inst: &GameInstance) -> AssembledLp {
    let d = inst.dims();
    let triples: Vec<(usize, usize, usize)> = inst.active_triples().collect();

    let mut columns = Vec::with_capacity(triples.len() * d.modes);
    let mut objective = Vec::with_capacity(triples.len() * d.modes);
    for &(i, j, k) in &triples {
        for m in 0..d.modes {
            columns.push((i, j, k, m));
            objective.push(inst.cost(i, j, k, m) * inst.demand(i, j, k));
        }
    }

    let mut constraints = Vec::new();

    let mut capacity_rows = 0;
    for i in 0..d.zones {
        for m in 0..d.modes {
            if let Capacity::Seats(c) = inst.capacity(i, m) {
                let coeffs = columns
                    .iter()
                    .enumerate()
                    .filter(|(_, &(oi, _, _, om))| oi == i && om == m)
                    .map(|(col, &(i, j, k, _))| (col, inst.demand(i, j, k)))
                    .collect();
                constraints.push(Constraint {
                    coeffs,
                    sense: Sense::Le,
                    rhs: c,
                });
                capacity_rows += 1;
            }
        }
    }

    for (t, _) in triples.iter().enumerate() {
        constraints.push(Constraint {
            coeffs: (0..d.modes).map(|m| (t * d.modes + m, 1.0)).collect(),
            sense: Sense::Eq,
            rhs: 1.0,
        });
    }

    for k in 0..d.populations {
        let coeffs = columns
            .iter()
            .enumerate()
            .filter(|(_, &(_, _, ck, _))| ck == k)
            .map(|(col, &(i, j, k, _))| (col, inst.demand(i, j, k)))
            .collect();
        constraints.push(Constraint {
            coeffs,
            sense: Sense::Eq,
            rhs: inst.population_size(k),
        });
    }

    let shape = LpShape {
        full_variables: d.n_vars(),
        excluded_triples: d.n_triples() - triples.len(),
        variables: columns.len(),
        capacity_rows,
        assignment_rows: triples.len(),
        population_rows: d.populations,
    };
    AssembledLp {
        program: LinearProgram {
            n_vars: columns.len(),
            objective,
            constraints,
        },
        columns,
        shape,
    }
}

/// Solves the full LP with the dense simplex.
pub fn oracle_solve(inst: &GameInstance) -> Result<(Configuration, SolveStats), Error> {
    let started = Instant::now();
    let lp = assemble_lp(inst);
    if lp.shape.variables > ORACLE_VARIABLE_LIMIT {
        return Err(Error::OracleTooLarge {
            variables: lp.shape.variables,
            limit: ORACLE_VARIABLE_LIMIT,
        });
    }
    let solution = match simplex::solve(&lp.program)? {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible { residual } => {
            return Err(Error::Infeasible(format!(
                "oracle phase one left residual {residual}"
            )))
        }
        LpOutcome::Unbounded => return Err(Error::Solver("oracle LP is unbounded".into())),
    };
    let mut cfg = Configuration::zeros(inst.dims());
    for (col, &(i, j, k, m)) in lp.columns.iter().enumerate() {
        cfg.set(i, j, k, m, solution.x[col]);
    }
    let stats = SolveStats {
        objective: solution.objective,
        per_zone_iterations: vec![solution.iterations],
        wall_time_seconds: started.elapsed().as_secs_f64(),
        solver_kind: SolverKind::Oracle,
    };
    Ok((cfg, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::tests::bus_walk_instance;

    #[test]
    fn bus_walk_objective() {
        let (cfg, stats) = oracle_solve(&bus_walk_instance()).unwrap();
        assert!((stats.objective - 640.0).abs() < 1e-6);
        assert!((cfg.get(0, 1, 0, 1) - 0.6).abs() < 1e-9);
    }

    #[test]
    fn shape_counts_each_family() {
        let lp = assemble_lp(&bus_walk_instance());
        assert_eq!(
            lp.shape,
            LpShape {
                full_variables: 8,
                excluded_triples: 3,
                variables: 2,
                capacity_rows: 2,
                assignment_rows: 1,
                population_rows: 1,
            }
        );
        assert_eq!(lp.program.constraints.len(), lp.shape.constraints());
    }

    #[test]
    fn inconsistent_population_total_is_infeasible() {
        let inst = bus_walk_instance().with_population_sizes(vec![90.0]).unwrap();
        assert!(matches!(oracle_solve(&inst), Err(Error::Infeasible(_))));
    }
}
