//! Error type shared across the crate.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("negative dissipation rate {0}")]
    NegativeRate(f64),

    #[error("eigensolver failed to converge (index {0})")]
    EigConvergence(usize),

    #[error("no eigenvalue within the zero threshold; steady state not found")]
    NoSteadyState,

    /// Degenerate kernel: every vector spanning the steady-state manifold is
    /// returned so callers can decide how to combine them.
    #[error("degenerate steady state: kernel dimension {}", .0.len())]
    DegenerateSteadyState(Vec<Array2<Complex64>>),

    #[error("non-physical density matrix: {0}")]
    NonPhysicalState(String),

    #[error("state reconstruction identity violated (max deviation {0:.3e})")]
    Reconstruction(f64),

    #[error("Kossakowski matrix not positive semidefinite (min eigenvalue {0:.3e})")]
    InvalidKossakowski(f64),

    #[error("rank deficiency beyond the known kernel (expected nullity {expected}, found {found})")]
    RankDeficient { expected: usize, found: usize },

    #[error("integrator step size underflow at t = {0:.6e}")]
    StepUnderflow(f64),

    #[error("integrator exceeded the step budget at t = {0:.6e}")]
    StepBudget(f64),

    #[error("non-oscillatory signal: {0}")]
    NonOscillatory(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
