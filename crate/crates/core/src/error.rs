use thiserror::Error;

/// Errors raised by grid construction, state preparation and the measurement pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative frequency bound {omega_min} (frequencies live on (0, inf))")]
    NegativeFrequency { omega_min: f64 },
    #[error("grid needs at least 2 points, got {n_points}")]
    TooFewPoints { n_points: usize },
    #[error("empty frequency interval [{omega_min}, {omega_max}]")]
    EmptyInterval { omega_min: f64, omega_max: f64 },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("operands live on different frequency grids")]
    GridMismatch,
    #[error("{mass:e} of the spectral mass lies outside the grid (limit {limit:e})")]
    MassOutsideGrid { mass: f64, limit: f64 },
    #[error("correlation coefficient {mu} must satisfy |mu| < 1")]
    DegenerateCorrelation { mu: f64 },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("cannot normalize an all-zero amplitude vector")]
    ZeroVector,
    #[error("outcome (t = {t}, omega_minus = {omega_minus}) is not on the outcome lattice")]
    OffGridOutcome { t: f64, omega_minus: f64 },
    #[error("outcome density {density:e} is too small to condition on")]
    ZeroProbabilityOutcome { density: f64 },
    #[error("mirror center {mirror_center} does not map the packet onto the grid")]
    MirrorOffGrid { mirror_center: f64 },
    #[error("acceptance window {t_width} s x {omega_width} rad/s exceeds the outcome grid")]
    WindowExceedsGrid { t_width: f64, omega_width: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
