//! Rotation/constant-gate linear programs, quasi-entropy potentials and the
//! numerical checks built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lemma;
pub mod linalg;
pub mod model;
pub mod perturbation;
pub mod potential;
pub mod transforms;

pub use error::{QelError, Result};
pub use linalg::Matrix;
pub use model::{Gate, GateProgram, TrackedState};
pub use potential::PotentialSpec;
