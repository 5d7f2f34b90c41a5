//! Dense density matrices on labelled multipartite layouts.
//!
//! All matrices are row/column indexed in the computational basis with
//! factor 0 as the most significant digit.

mod io;
mod layout;
pub mod linalg;
mod metrics;
mod random;
mod schmidt;
mod state;
pub mod tensor;

pub use io::{matrix_from_text, matrix_to_text, read_state, write_state, STATE_HEADER};
pub use layout::{Bipartition, Factor, Party, SystemLayout};
pub use metrics::{
    entanglement_entropy, fidelity, purify, schmidt_decompose, trace_norm_dist,
    von_neumann_entropy,
};
pub use random::{
    ginibre_matrix, haar_ket, random_isometry, random_state, random_state_rank, random_unitary,
    rng_from_seed, Ensemble,
};
pub use schmidt::SchmidtVector;
pub use state::QState;
pub(crate) use state::replaced_layout;
pub(crate) use random::ginibre_state;

/// Largest supported total dimension.
pub const MAX_TOTAL_DIM: usize = 4096;
/// Entrywise Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted without repair.
pub const PSD_TOL: f64 = 1e-10;
/// Most negative eigenvalue that is still clipped rather than rejected.
pub const PSD_CLIP: f64 = 1e-9;
/// Eigenvalues below this contribute nothing to entropies.
pub const EIG_CUTOFF: f64 = 1e-12;
/// A state is pure when its largest eigenvalue is at least `1 - PURE_TOL`.
pub const PURE_TOL: f64 = 1e-9;
