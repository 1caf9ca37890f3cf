//! Iterate-and-compare workflow over a fixed city.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::equilibrium::{
    check_feasible, solve_equilibrium, verify_nash, Configuration, NashCertificate, SolveStats,
    SparseShare,
};
use crate::error::Error;
use crate::metrics::{compute_kpis, KpiBundle, KpiDelta};
use crate::model::{build_instance, validate_city, CityModel, ScenarioControls};

/// Result of one scenario iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumReport {
    /// 1-based position in the session history.
    pub iteration: usize,
    pub controls: ScenarioControls,
    /// Nonzero shares only.
    pub configuration: Vec<SparseShare>,
    pub kpis: KpiBundle,
    pub nash: NashCertificate,
    pub stats: SolveStats,
    pub timestamp: DateTime<Utc>,
}

impl EquilibriumReport {
    /// True when everything except timing metadata is identical.
    pub fn same_outcome(&self, other: &EquilibriumReport) -> bool {
        self.iteration == other.iteration
            && self.controls == other.controls
            && self.configuration == other.configuration
            && self.kpis == other.kpis
            && self.nash == other.nash
            && self.stats.objective == other.stats.objective
    }
}

/// Solves one scenario and checks the result before handing it out.
///
/// An infeasible or non-Nash solution is an engine defect and is returned
/// as an error carrying the diagnostics.
pub fn evaluate(
    city: &CityModel,
    controls: &ScenarioControls,
    iteration: usize,
) -> Result<EquilibriumReport, Error> {
    let inst = build_instance(city, controls)?;
    let (cfg, stats) = solve_equilibrium(&inst)?;
    let feasibility = check_feasible(&inst, &cfg)?;
    if !feasibility.is_feasible() {
        return Err(Error::Solver(format!(
            "solver produced an infeasible configuration: {:?}",
            feasibility.violations
        )));
    }
    let nash = verify_nash(&inst, &cfg)?;
    if !nash.verdict {
        return Err(Error::NashViolation(Box::new(nash)));
    }
    let kpis = compute_kpis(&inst, &cfg, city, controls)?;
    Ok(EquilibriumReport {
        iteration,
        controls: controls.clone(),
        configuration: cfg.to_sparse(),
        kpis,
        nash,
        stats,
        timestamp: Utc::now(),
    })
}

/// Per-iteration comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDiff {
    pub a: usize,
    pub b: usize,
    pub delta: KpiDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    id: String,
    city: CityModel,
    history: Vec<EquilibriumReport>,
}

impl Session {
    /// Opens an empty session on a validated city.
    pub fn create(city: CityModel) -> Result<Self, Error> {
        let report = validate_city(&city);
        if !report.is_valid() {
            return Err(Error::InvalidCity(report));
        }
        Ok(Session {
            id: Uuid::new_v4().to_string(),
            city,
            history: Vec::new(),
        })
    }

    /// Reassembles a session from stored parts, checking that iterations
    /// are numbered `1..=len`.
    pub fn restore(id: String, city: CityModel, history: Vec<EquilibriumReport>) -> Result<Self, Error> {
        let report = validate_city(&city);
        if !report.is_valid() {
            return Err(Error::InvalidCity(report));
        }
        for (n, r) in history.iter().enumerate() {
            if r.iteration != n + 1 {
                return Err(Error::Precondition(format!(
                    "history entry {n} is numbered {}, expected {}",
                    r.iteration,
                    n + 1
                )));
            }
        }
        Ok(Session { id, city, history })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn city(&self) -> &CityModel {
        &self.city
    }

    pub fn history(&self) -> &[EquilibriumReport] {
        &self.history
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn report(&self, iteration: usize) -> Result<&EquilibriumReport, Error> {
        iteration
            .checked_sub(1)
            .and_then(|n| self.history.get(n))
            .ok_or(Error::MissingIteration(iteration))
    }

    /// Solves `controls` and appends the report. Nothing is stored when the
    /// solve or its verification fails.
    pub fn run_iteration(&mut self, controls: &ScenarioControls) -> Result<&EquilibriumReport, Error> {
        let report = evaluate(&self.city, controls, self.history.len() + 1)?;
        self.push_report(report)
    }

    /// Appends a report produced by [`evaluate`] elsewhere, e.g. on a worker
    /// thread. It must carry the next iteration number.
    pub fn push_report(&mut self, report: EquilibriumReport) -> Result<&EquilibriumReport, Error> {
        let next = self.history.len() + 1;
        if report.iteration != next {
            return Err(Error::Precondition(format!(
                "report is numbered {}, expected {next}",
                report.iteration
            )));
        }
        self.history.push(report);
        Ok(self.history.last().expect("just pushed"))
    }

    /// Re-solves the last iteration's controls as a new iteration.
    pub fn rerun(&mut self) -> Result<&EquilibriumReport, Error> {
        let controls = self
            .history
            .last()
            .map(|r| r.controls.clone())
            .ok_or(Error::MissingIteration(1))?;
        self.run_iteration(&controls)
    }

    /// Clears the history.
    pub fn reset(&mut self) {
        self.history.clear();
    }

    pub fn diff(&self, a: usize, b: usize) -> Result<IterationDiff, Error> {
        let ra = self.report(a)?;
        let rb = self.report(b)?;
        Ok(IterationDiff {
            a,
            b,
            delta: KpiDelta::between(&ra.kpis, &rb.kpis),
        })
    }

    /// Re-solves every stored iteration from scratch.
    pub fn replay(&self) -> Result<Vec<EquilibriumReport>, Error> {
        self.history
            .iter()
            .map(|r| evaluate(&self.city, &r.controls, r.iteration))
            .collect()
    }

    /// Rebuilds the dense configuration of a stored report.
    pub fn configuration(&self, iteration: usize) -> Result<Configuration, Error> {
        let report = self.report(iteration)?;
        let inst = build_instance(&self.city, &report.controls)?;
        Configuration::from_sparse(inst.dims(), &report.configuration)
    }
}

pub fn create_session(city: CityModel) -> Result<Session, Error> {
    Session::create(city)
}

pub fn run_iteration<'s>(
    session: &'s mut Session,
    controls: &ScenarioControls,
) -> Result<&'s EquilibriumReport, Error> {
    session.run_iteration(controls)
}

pub fn diff_iterations(session: &Session, a: usize, b: usize) -> Result<IterationDiff, Error> {
    session.diff(a, b)
}
