use thiserror::Error;

use crate::equilibrium::NashCertificate;
use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid city:\n{0}")]
    InvalidCity(ValidationReport),

    #[error("invalid scenario controls:\n{0}")]
    InvalidControls(ValidationReport),

    #[error("invalid game instance: {0}")]
    Instance(String),

    #[error("configuration shape {found} does not match instance shape {expected}")]
    Shape { expected: String, found: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear program is infeasible: {0}")]
    Infeasible(String),

    #[error("oracle LP has {variables} variables, above the limit of {limit}")]
    OracleTooLarge { variables: usize, limit: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("solver output failed Nash verification ({} witnesses)", .0.witnesses.len())]
    NashViolation(Box<NashCertificate>),

    #[error("iteration {0} does not exist")]
    MissingIteration(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
