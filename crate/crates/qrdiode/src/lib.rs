//! Steady-state nonreciprocal heat transport in dissipatively driven qubit–resonator models.
//!
//! The crate builds the two-photon quantum Rabi Hamiltonian (and three
//! two-qubit comparison couplers), derives the global Lindblad master
//! equation for two independent Ohmic baths, solves for the steady state,
//! and evaluates heat currents, rectification, and photon detection rates.
//! Natural units throughout: hbar = k_B = 1, energies in units of the
//! resonator frequency omega_0.

pub mod dissipation;
pub mod models;
pub mod numerics;
pub mod observables;
pub mod runner;
pub mod steady;

use thiserror::Error;

/// Bath / port label. `L` drives the resonator, `R` drives the qubit
/// (for the two-qubit models: left and right qubit respectively).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Bath {
    L,
    R,
}

impl std::fmt::Display for Bath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bath::L => write!(f, "L"),
            Bath::R => write!(f, "R"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e}, tolerance {tol:.3e})")]
    NonHermitianInput { residual: f64, tol: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigendecomposition(String),

    #[error("rate matrix null space has numerical nullity {nullity}, expected 1")]
    DegenerateSteadyState { nullity: usize },

    #[error("coupling g = {g} reaches the two-photon spectral-collapse bound omega_L/2 = {bound}")]
    SpectralCollapse { g: f64, bound: f64 },

    #[error("Fock truncation n_fock = {n_fock} is too small (need at least 2)")]
    TruncationTooSmall { n_fock: usize },

    #[error("unknown unit kind `{0}` (expected frequency, temperature, or power)")]
    UnknownUnitKind(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("operands refer to different bases or dimensions: {0}")]
    BasisMismatch(String),

    #[error("time evolution not converged: {0}")]
    NotConverged(String),

    #[error("state is not physical: {0}")]
    NonPhysical(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
