use thiserror::Error;

/// Failure modes of the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WvaError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("state is not normalized (norm = {norm:.12e})")]
    Unnormalized { norm: f64 },

    #[error(
        "qubit amplitudes not normalized: alpha = {alpha}, beta = {beta}, alpha^2 + beta^2 = {sum}"
    )]
    QubitNorm { alpha: f64, beta: f64, sum: f64 },

    #[error("undefined weak value, P = 0")]
    UndefinedWeakValue,

    #[error("post-selection practically impossible (P = {probability:.3e})")]
    PostselectionImpossible { probability: f64 },

    #[error("degenerate branch: {0}")]
    DegenerateBranch(String),

    #[error("momentum translation aliases on the grid: {0}")]
    Aliasing(String),

    #[error("Fock cutoff not converged (delta = {delta:.3e})")]
    CutoffNotConverged { delta: f64 },

    #[error("detector window [{lo}, {hi}] lies outside the grid")]
    WindowOutsideGrid { lo: f64, hi: f64 },

    #[error("invalid detector setup: {0}")]
    InvalidDetector(String),

    #[error("zero expected counts in the reference detector")]
    ZeroCounts,

    #[error("insufficient Monte Carlo statistics: {trials} trials (minimum 30)")]
    InsufficientTrials { trials: usize },
}

pub type Result<T> = std::result::Result<T, WvaError>;
