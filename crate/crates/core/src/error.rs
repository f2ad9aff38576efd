use crate::distributions::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected dimension {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("invalid parameters: {}", join(.0))]
    Validation(Vec<Violation>),

    #[error("{what} did not converge after {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate tensor: all eigenvalues are zero")]
    DegenerateTensor,

    #[error("anisotropy ratio is unbounded: smallest eigenvalue is {min:e} (largest {max:e})")]
    UnboundedRatio { min: f64, max: f64 },
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
