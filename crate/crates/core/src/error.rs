use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("momentum {q:?} is not commensurate with the lattice (imaginary residue {residue:.3e})")]
    IncommensurateMomentum { q: Vec<f64>, residue: f64 },

    #[error("{aborted} of {total} trajectories aborted (first seed stream {first_stream})")]
    TooManyAborts {
        aborted: usize,
        total: usize,
        first_stream: u64,
    },

    #[error("no finite-temperature order: {0}")]
    NoFiniteTemperatureOrder(String),

    #[error("marginal case p = {p} in d = {d}: scaling carries logarithmic corrections")]
    MarginalCase { p: f64, d: u32 },

    #[error("bisection did not converge in [{lo}, {hi}]: {reason}")]
    Bisection { lo: f64, hi: f64, reason: String },

    #[error("no boundary in range [{lo}, {hi}]")]
    NoBoundary { lo: f64, hi: f64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("krylov evolution failed: {0}")]
    Krylov(String),

    #[error("integration step {dt} violates stability bound {bound}")]
    Stability { dt: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
