//! Simulation toolkit for preparing a position–momentum EPR state in the
//! motion of two distant trapped atoms, each driven through its cavity by one
//! output beam of a nondegenerate parametric amplifier.
//!
//! Two independent representations are provided and cross-check each other:
//!
//! * [`lindblad`]: the two-mode master equation on a truncated Fock space;
//! * [`gaussian`]: exact first/second-moment dynamics, including the full
//!   cascaded amplifier → atoms model.
//!
//! Quadrature convention everywhere: `Q = b + b†`, `P = −i(b − b†)`, vacuum
//! variance 1. Wigner functions use phase-space variables `q = Q/2`, `p = P/2`
//! (displacement `α = q + ip`), which is the normalization in which the
//! two-mode vacuum peaks at `4/π²` and the distribution integrates to one.

mod blocktri;
pub mod error;
pub mod feasibility;
pub mod gaussian;
pub mod hilbert;
pub mod lindblad;
pub mod metrics;
pub mod nopa;
pub mod par;
pub mod sparse;
pub mod states;

pub use error::{Error, Result};
pub use hilbert::{C64, DensityMatrix, FockBasis, ModeOperator, PureState};
pub use par::Execution;
