use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The configuration reduces to a simpler problem (a coupling that makes
    /// one delta transparent, or a coth pole at zero mass coupling).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A linear system was singular or too ill-conditioned to trust.
    #[error("numerical degeneracy at k = {k}: {reason}")]
    Singular { k: f64, reason: String },

    #[error("root scan found {found} roots at {points} grid points, more than the {limit} allowed")]
    TooManyRoots { found: usize, points: usize, limit: usize },

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("extrapolation failed to converge: {0}")]
    Extrapolation(String),

    #[error("coupling (q = {q}, lambda = {lambda}) does not define a unitary boundary condition")]
    NotUnitary { q: f64, lambda: f64 },
}
