//! Two-qubit recurrence distillation on Werner states, and approximate
//! catalysts delivered through noisy teleportation.

mod recurrence;
mod tau;
mod werner;

pub use recurrence::{
    distill_to, monte_carlo_copies, recurrence_protocol, recurrence_step, recurrence_step_simulated, sweep,
    twirl_protocol, DistillRound, DistillRun, SweepRow,
};
pub use tau::synthesize_tau_eps;
pub use werner::WernerState;
