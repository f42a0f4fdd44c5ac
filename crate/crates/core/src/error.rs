use thiserror::Error;

/// Errors raised by evaluation, operator assembly and transforms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the family's domain (e.g. `a <= -1`).
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),
    /// A point where the requested quantity is not finite.
    #[error("evaluation outside domain: {0}")]
    EvaluationDomain(String),
    /// Malformed request (bad ladder number, invalid index, ...).
    #[error("invalid usage: {0}")]
    Usage(String),
    /// Operands tagged with incompatible bases.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    /// A recurrence denominator vanishes for these parameters.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    /// The shifted operator is singular at degree `n`.
    #[error("resonance at degree n = {n}: lambda = {lambda} equals eigenvalue {eigenvalue}")]
    Resonance { n: usize, lambda: f64, eigenvalue: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
