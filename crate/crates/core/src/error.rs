use thiserror::Error;

/// Input outside the domain of an operation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("{what} must be >= 0, got {value}")]
    Negative { what: &'static str, value: f64 },
    #[error("{what} must be > 0, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("axial position {z_mm} mm lies outside the tube [0, {length_mm}] mm")]
    OutsideTube { z_mm: f64, length_mm: f64 },
    #[error("invalid gait: {0}")]
    Gait(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Failures of the quasi-static integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("axial balance did not converge in phase {phase} (residual {residual_n:e} N)")]
    NonConvergence { phase: usize, residual_n: f64 },
    #[error("no equilibrium in phase {phase}: net axial load {net_load_n} N exceeds the holding capacity")]
    Unheld { phase: usize, net_load_n: f64 },
    #[error("robot station {station_mm} mm left the tube (length {length_mm} mm) during phase {phase} ({label})")]
    StationOutside {
        phase: usize,
        label: String,
        station_mm: f64,
        length_mm: f64,
    },
    #[error("contact state does not match bristle state ({contacts} contacts, {bristles} bristles)")]
    Mismatch { contacts: usize, bristles: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Failures surfaced by the experiment layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}
