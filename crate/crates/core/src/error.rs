use thiserror::Error;

use crate::operator::BasisTag;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: BasisTag, right: BasisTag },

    #[error("transition index {index} out of range (ladder has {transitions} transitions)")]
    TransitionOutOfRange { index: usize, transitions: usize },

    #[error("invalid ladder: {0}")]
    InvalidLadder(String),

    #[error("ladder carries no dipole metadata")]
    MissingDipoleMetadata,

    #[error("trap state (N={n}, M={m}) is not a valid oscillator label")]
    InvalidTrapState { n: u32, m: i32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator is not Hermitian (max |H - H^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state norm {norm} deviates from 1 beyond 1e-9")]
    NotNormalized { norm: f64 },

    #[error("expected a composite internal x trap basis, got {0}")]
    NotComposite(BasisTag),

    #[error("density matrix has negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("probe discrimination needs at least three internal levels, ladder has {0}")]
    LadderTooSmall(usize),

    #[error("integrator step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("integrator failed: {0}")]
    Integration(String),

    #[error("norm drift {drift:e} exceeds limit {limit:e}")]
    NormDrift { drift: f64, limit: f64 },

    #[error("momentum grid aliasing: edge tail mass {tail_mass:e} exceeds 1e-6")]
    Aliasing { tail_mass: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
