use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Separation below the point-dipole cutoff.
    #[error(
        "near-field singularity: delta = {delta:e} is below delta_min = {delta_min:e} \
         (small-delta limit of the collective damping is sqrt(gamma_a*gamma_b) = {limit})"
    )]
    NearFieldSingularity { delta: f64, delta_min: f64, limit: f64 },

    #[error("pulse normalization {norm} deviates from 1 by more than {tol:e}")]
    Normalization { norm: f64, tol: f64 },

    #[error("sampling violation: {0}")]
    Nyquist(String),

    #[error("step size underflow at t = {t} (h = {h:e}); {context}")]
    Stiffness { t: f64, h: f64, context: String },

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("state left physical bounds at t = {t}: {variable} = {value}")]
    Divergence { t: f64, variable: &'static str, value: f64 },

    #[error("density matrix has eigenvalue {eigenvalue:e} below -1e-6 (integrator tolerance too loose?)")]
    Positivity { eigenvalue: f64 },

    #[error("density matrix is not an X state (off-X element magnitude {magnitude:e})")]
    NotXState { magnitude: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("golden manifest: {0}")]
    Manifest(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
