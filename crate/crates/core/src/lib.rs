//! Single atom in a 2D harmonic trap driven by a circularly polarized
//! Laguerre-Gaussian beam.
//!
//! Internal circular states and quantized center-of-mass motion exchange
//! spin and orbital angular momentum with the beam; the crate builds the
//! operators, evolves states under the sideband Hamiltonians and quantifies
//! the resulting internal-external entanglement. Units throughout: `hbar = 1`,
//! trap frequency `nu = 1`.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod internal_ladder;
pub mod lg_field;
pub mod operator;
pub mod trap_fock;

pub use error::{Error, Result};
pub use operator::{BasisTag, OperatorMatrix, C64};
