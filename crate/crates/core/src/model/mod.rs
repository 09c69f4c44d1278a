//! Linear straight-line programs in rotation/constant-gate normal form.
//!
//! The machine state after `t` gates is the matrix `M⁽ᵗ⁾` mapping the input
//! to the current registers; `M⁽⁰⁾ = Id`. There is no extra memory: the state
//! is always exactly `n` words.

mod condition;
mod gate;
mod program;
mod state;

pub use condition::{
    condition_number, condition_number_with_floor, verify_well_conditioned,
    verify_well_conditioned_with, ConditionMode, ConditionReport, ConditionTracker,
    DEFAULT_SIGMA_FLOOR,
};
pub use gate::Gate;
pub use program::GateProgram;
pub use state::{
    program_matrix, run_program, run_program_with, InverseCheck, StepObserver, TrackedState,
};
