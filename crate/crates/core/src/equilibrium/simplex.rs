//! Dense two-phase primal simplex for `min c^T x  s.t.  A x {<=,=,>=} b, x >= 0`.
//!
//! Meant for cross-checking on small problems, not for speed. Rows are
//! scaled to unit max-coefficient before solving. Entering columns follow
//! Dantzig's rule and fall back to Bland's rule after a run of degenerate
//! pivots so the method cannot cycle.

use crate::error::Error;

const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    /// Sparse `(column, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// Phase one ended with this much artificial mass left.
    Infeasible { residual: f64 },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced costs, one per column, plus the negated objective in the
    /// last slot.
    obj: Vec<f64>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width - 1]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width;
        let p = self.rows[r][e];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][e] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (q, row) in self.rows.iter_mut().enumerate() {
            if q == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for c in 0..w {
                    row[c] -= f * pivot_row[c];
                }
                row[e] = 0.0;
            }
        }
        let f = self.obj[e];
        if f != 0.0 {
            for c in 0..w {
                self.obj[c] -= f * pivot_row[c];
            }
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
    }

    /// Recomputes reduced costs for `cost` over the current basis.
    fn price(&mut self, cost: &[f64]) {
        let w = self.width;
        self.obj = vec![0.0; w];
        self.obj[..cost.len()].copy_from_slice(cost);
        for (r, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..w {
                    self.obj[c] -= cb * row[c];
                }
            }
        }
    }

    /// Runs simplex iterations on the current objective. Columns at or past
    /// `allowed` may not enter. Returns `Ok(false)` on unboundedness.
    fn optimize(&mut self, allowed: usize, iterations: &mut usize, limit: usize) -> Result<bool, Error> {
        let mut degenerate_run = 0;
        loop {
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
            let mut entering = None;
            let mut best = -REDUCED_COST_TOL;
            for c in 0..allowed {
                let d = self.obj[c];
                if d < best {
                    entering = Some(c);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(e) = entering else {
                return Ok(true);
            };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][e];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * lratio.abs().max(1.0);
                            if ratio < lratio && !tie || tie && self.basis[r] < self.basis[lr] {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio.abs() <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e);
            for row in self.rows.iter_mut() {
                let b = &mut row[self.width - 1];
                if *b < 0.0 && *b > -1e-11 {
                    *b = 0.0;
                }
            }
            *iterations += 1;
            if *iterations > limit {
                return Err(Error::Solver(format!("simplex exceeded {limit} iterations")));
            }
        }
    }
}

/// Solves the program with the two-phase method.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, Error> {
    let n = lp.n_vars;
    if lp.objective.len() != n {
        return Err(Error::Solver("objective length does not match n_vars".into()));
    }

    // Normalize: non-negative right-hand sides, unit max coefficient.
    let mut rows: Vec<(Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    for c in &lp.constraints {
        if let Some(&(col, _)) = c.coeffs.iter().find(|(col, _)| *col >= n) {
            return Err(Error::Solver(format!("constraint references column {col} of {n}")));
        }
        let scale = c.coeffs.iter().fold(0.0f64, |a, (_, v)| a.max(v.abs()));
        if scale == 0.0 {
            let ok = match c.sense {
                Sense::Le => c.rhs >= -1e-12,
                Sense::Ge => c.rhs <= 1e-12,
                Sense::Eq => c.rhs.abs() <= 1e-12,
            };
            if !ok {
                return Ok(LpOutcome::Infeasible { residual: c.rhs.abs() });
            }
            continue;
        }
        let (mut coeffs, mut sense, mut rhs) = (c.coeffs.clone(), c.sense, c.rhs / scale);
        for (_, v) in coeffs.iter_mut() {
            *v /= scale;
        }
        if rhs < 0.0 {
            rhs = -rhs;
            for (_, v) in coeffs.iter_mut() {
                *v = -*v;
            }
            sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        rows.push((coeffs, sense, rhs));
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let art0 = n + n_slack;
    let width = art0 + n_art + 1;

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        obj: Vec::new(),
        width,
    };
    let (mut next_slack, mut next_art) = (n, art0);
    for (coeffs, sense, rhs) in &rows {
        let mut row = vec![0.0; width];
        for &(col, v) in coeffs {
            row[col] += v;
        }
        row[width - 1] = *rhs;
        match sense {
            Sense::Le => {
                row[next_slack] = 1.0;
                t.basis.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                t.basis.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = 1.0;
                t.basis.push(next_art);
                next_art += 1;
            }
        }
        t.rows.push(row);
    }

    let limit = 50_000 + 50 * (m + width);
    let mut iterations = 0;

    if n_art > 0 {
        let mut phase_one = vec![0.0; width - 1];
        for c in phase_one.iter_mut().skip(art0) {
            *c = 1.0;
        }
        t.price(&phase_one);
        t.optimize(width - 1, &mut iterations, limit)?;
        let residual: f64 = (0..t.rows.len())
            .filter(|&r| t.basis[r] >= art0)
            .map(|r| t.rhs(r))
            .sum();
        let scale: f64 = rows.iter().map(|r| r.2).sum::<f64>().max(1.0);
        if residual > 1e-9 * scale {
            return Ok(LpOutcome::Infeasible { residual });
        }

        // Drive zero-level artificials out of the basis; rows where that is
        // impossible are linearly dependent on the others and are dropped.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art0 {
                let col = (0..art0)
                    .filter(|&c| t.rows[r][c].abs() > PIVOT_TOL)
                    .max_by(|&a, &b| t.rows[r][a].abs().total_cmp(&t.rows[r][b].abs()));
                match col {
                    Some(c) => t.pivot(r, c),
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut phase_two = vec![0.0; width - 1];
    phase_two[..n].copy_from_slice(&lp.objective);
    t.price(&phase_two);
    if !t.optimize(art0, &mut iterations, limit)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r).max(0.0);
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal(LpSolution {
        x,
        objective,
        iterations,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[(usize, f64)], sense: Sense, rhs: f64) -> Constraint {
        Constraint {
            coeffs: coeffs.to_vec(),
            sense,
            rhs,
        }
    }

    fn optimal(lp: &LinearProgram) -> LpSolution {
        match solve(lp).unwrap() {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![-3.0, -5.0],
            constraints: vec![
                row(&[(0, 1.0)], Sense::Le, 4.0),
                row(&[(1, 2.0)], Sense::Le, 12.0),
                row(&[(0, 3.0), (1, 2.0)], Sense::Le, 18.0),
            ],
        };
        let s = optimal(&lp);
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 10, x >= 3, x <= 6  ->  x = 6, y = 4, obj 14
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![1.0, 2.0],
            constraints: vec![
                row(&[(0, 1.0), (1, 1.0)], Sense::Eq, 10.0),
                row(&[(0, 1.0)], Sense::Ge, 3.0),
                row(&[(0, 1.0)], Sense::Le, 6.0),
            ],
        };
        let s = optimal(&lp);
        assert!((s.objective - 14.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equality_is_tolerated() {
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![1.0, 3.0],
            constraints: vec![
                row(&[(0, 1.0), (1, 1.0)], Sense::Eq, 5.0),
                row(&[(0, 2.0), (1, 2.0)], Sense::Eq, 10.0),
                row(&[(0, 1.0)], Sense::Le, 2.0),
            ],
        };
        let s = optimal(&lp);
        assert!((s.objective - 11.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![1.0, 1.0],
            constraints: vec![
                row(&[(0, 1.0), (1, 1.0)], Sense::Eq, 5.0),
                row(&[(0, 1.0), (1, 1.0)], Sense::Eq, 6.0),
            ],
        };
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Infeasible { .. }));
    }

    #[test]
    fn unbounded_direction_is_reported() {
        let lp = LinearProgram {
            n_vars: 2,
            objective: vec![-1.0, 0.0],
            constraints: vec![row(&[(0, 1.0), (1, -1.0)], Sense::Le, 1.0)],
        };
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x <= -3  <=>  x >= 3
        let lp = LinearProgram {
            n_vars: 1,
            objective: vec![1.0],
            constraints: vec![row(&[(0, -1.0)], Sense::Le, -3.0)],
        };
        assert!((optimal(&lp).objective - 3.0).abs() < 1e-9);
    }
}
