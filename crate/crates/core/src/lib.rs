//! Dense simulation and verification toolkit for catalytic and asymptotic
//! entanglement manipulation under LOCC.
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`]: multipartite layouts, density matrices, tensor bookkeeping,
//!   distances, entropies and random sampling.
//! - [`locc`]: Kraus channels, instruments and a protocol builder that only
//!   admits local instruments plus classical branching.
//! - [`purecat`]: majorization, catalytic majorization and explicit pure-state
//!   conversion protocols.
//! - [`catfactory`]: correlated-catalyst construction from an n-copy protocol,
//!   iterative catalyst reuse, and the catalysis / marginal-reduction verifiers.
//! - [`measures`]: hashing bounds, conditional mutual information, squashed
//!   entanglement upper bounds, rate bounds, decoupling and superadditive
//!   composition checks.
//! - [`distill`]: Werner states, recurrence distillation and approximate
//!   catalyst synthesis through noisy teleportation.

#![forbid(unsafe_code)]

pub mod catfactory;
pub mod distill;
mod error;
pub mod locc;
pub mod measures;
pub mod purecat;
pub mod qstate;

pub use error::{Error, Result};

pub use locc::{Channel, Instrument, LoccProtocol};
pub use qstate::{Bipartition, Factor, Party, QState, SchmidtVector, SystemLayout};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
