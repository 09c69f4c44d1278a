use super::{Gate, GateProgram};
use crate::error::{QelError, Result};
use crate::linalg::Matrix;

/// How often the incrementally maintained inverse-transpose is compared
/// against `M`, and how much deviation is tolerated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseCheck {
    /// Check after every `period` gates; `None` disables the check.
    pub period: Option<usize>,
    /// Maximum allowed `‖Mᵀ·M⁻ᵀ − Id‖_max`.
    pub tol: f64,
}

impl Default for InverseCheck {
    fn default() -> Self {
        InverseCheck {
            period: Some(1024),
            tol: 1e-8,
        }
    }
}

impl InverseCheck {
    pub fn disabled() -> Self {
        InverseCheck {
            period: None,
            ..Default::default()
        }
    }
}

/// The machine state `M⁽ᵗ⁾` together with its inverse-transpose, evolved
/// jointly gate by gate.
#[derive(Debug, Clone)]
pub struct TrackedState {
    m: Matrix,
    m_inv_t: Matrix,
    t: usize,
    check: InverseCheck,
}

impl TrackedState {
    pub fn identity(n: usize) -> Self {
        Self::with_check(n, InverseCheck::default())
    }

    pub fn with_check(n: usize, check: InverseCheck) -> Self {
        TrackedState {
            m: Matrix::identity(n),
            m_inv_t: Matrix::identity(n),
            t: 0,
            check,
        }
    }

    pub fn n(&self) -> usize {
        self.m.rows()
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn m_inv_t(&self) -> &Matrix {
        &self.m_inv_t
    }

    /// Number of gates applied since the identity.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    /// Rotations left-multiply both matrices by the same rotation; a constant
    /// gate scales row `i` of `M` by `c` and of `M⁻ᵀ` by `1/c`.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n())?;
        gate.apply_to(&mut self.m);
        gate.apply_inverse_transpose_to(&mut self.m_inv_t);
        self.t += 1;
        if let Some(period) = self.check.period {
            if period > 0 && self.t.is_multiple_of(period) {
                let deviation = self.inverse_deviation();
                if !(deviation <= self.check.tol) {
                    return Err(QelError::InverseDrift {
                        step: self.t,
                        deviation,
                        tol: self.check.tol,
                    });
                }
            }
        }
        Ok(())
    }

    /// `‖Mᵀ·M⁻ᵀ − Id‖_max`, a full O(n³) consistency check.
    pub fn inverse_deviation(&self) -> f64 {
        let prod = self.m.transpose_matmul(&self.m_inv_t);
        prod.max_abs_diff(&Matrix::identity(self.n()))
    }
}

/// Receives `(step, gate, state)` after every gate; `step` is 1-based and
/// equals `state.t()`.
pub trait StepObserver {
    fn on_step(&mut self, step: usize, gate: &Gate, state: &TrackedState) -> Result<()>;
}

impl<F> StepObserver for F
where
    F: FnMut(usize, &Gate, &TrackedState) -> Result<()>,
{
    fn on_step(&mut self, step: usize, gate: &Gate, state: &TrackedState) -> Result<()> {
        self(step, gate, state)
    }
}

pub fn run_program(program: &GateProgram) -> Result<TrackedState> {
    run_program_with(program, InverseCheck::default(), &mut [])
}

/// Runs `program` from the identity, notifying each observer after every
/// gate. Errors carry the offending 1-based step.
pub fn run_program_with(
    program: &GateProgram,
    check: InverseCheck,
    observers: &mut [&mut dyn StepObserver],
) -> Result<TrackedState> {
    let mut state = TrackedState::with_check(program.n(), check);
    for (k, gate) in program.gates().iter().enumerate() {
        let step = k + 1;
        state.apply_gate(gate).map_err(|e| e.at_step(step))?;
        for obs in observers.iter_mut() {
            obs.on_step(step, gate, &state)
                .map_err(|e| e.at_step(step))?;
        }
    }
    Ok(state)
}

/// The matrix computed by `program`.
pub fn program_matrix(program: &GateProgram) -> Result<Matrix> {
    // Gates were validated on construction; only M is needed here.
    Ok(program.realize())
}
