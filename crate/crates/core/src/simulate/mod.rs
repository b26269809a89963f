//! Hamiltonians, propagation, Magnus terms and robustness sweeps.

mod hamiltonian;
mod propagate;
mod sweep;

pub use hamiltonian::*;
pub use propagate::*;
pub use sweep::*;

use crate::algebra::AlgebraError;
use crate::sequence::SequenceError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid input: {0}")]
    Spec(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("toggling frame needs ideal pulses")]
    FinitePulses,
    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("non-finite value in propagator")]
    NonFinite,
    #[error("config error: {0}")]
    Config(String),
    #[error("empty sweep grid")]
    EmptyGrid,
}
