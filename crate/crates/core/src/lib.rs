//! Equilibrium engine for multi-modal city mobility games.
//!
//! Travelers are grouped by origin zone, destination zone and population
//! (each population sharing one value of time) and choose among walking and
//! a set of capacitated modes. The engine computes the cost-minimizing mode
//! split, which is also a Nash equilibrium of the traveler game, and reports
//! the KPIs a municipality or operator cares about.
//!
//! ```no_run
//! use mobeq_core::{city_data, session::Session};
//!
//! let city = city_data::bundled_city("boston").unwrap();
//! let mut session = Session::create(city).unwrap();
//! let report = session.run_iteration(&city_data::boston_nominal_controls()).unwrap();
//! println!("avg travel time: {:.1} min", report.kpis.avg_travel_time);
//! ```

pub mod city_data;
pub mod equilibrium;
pub mod error;
pub mod metrics;
pub mod model;
pub mod session;
pub mod synthetic;
pub mod travel_cost;

pub use equilibrium::{
    check_feasible, oracle_solve, solve_equilibrium, verify_nash, Configuration, NashCertificate,
    SolveStats,
};
pub use error::{Error, Result};
pub use metrics::{compute_kpis, KpiBundle, KpiDelta};
pub use model::{build_instance, validate_city, CityModel, GameInstance, ScenarioControls};
pub use session::{EquilibriumReport, Session};
