//! Condition numbers of program prefixes.
//!
//! Rotations preserve every singular value, and so do constant gates with
//! `|c| = 1`. While the state has the form `D·Q` (nonnegative diagonal `D`
//! times orthogonal `Q`) its singular values are exactly the entries of `D`,
//! so no factorization is needed. Once a rotation mixes two rows with
//! different scales the form is lost and each later scaling constant gate
//! triggers a full SVD.

use super::{Gate, GateProgram};
use crate::error::{QelError, Result};
use crate::linalg::Matrix;

pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-12;

/// `σ_max / σ_min` from a full singular-value computation.
pub fn condition_number(m: &Matrix) -> Result<f64> {
    condition_number_with_floor(m, DEFAULT_SIGMA_FLOOR)
}

pub fn condition_number_with_floor(m: &Matrix, floor: f64) -> Result<f64> {
    if !m.is_square() || m.rows() == 0 {
        return Err(QelError::ShapeMismatch {
            what: "condition number",
            expected: (m.rows(), m.rows()),
            found: m.shape(),
        });
    }
    let sv = m.singular_values();
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if !(min > floor) {
        return Err(QelError::Singular {
            sigma_min: min,
            floor,
        });
    }
    Ok(max / min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConditionMode {
    /// Skip factorizations whenever the singular values are known exactly.
    #[default]
    Structured,
    /// Full SVD after every constant gate.
    Exhaustive,
}

#[derive(Debug, Clone)]
enum Form {
    /// `M = diag(scale)·Q`, `Q` orthogonal.
    ScaledOrthogonal { scale: Vec<f64> },
    General,
}

/// Carries `κ(M⁽ᵗ⁾)` along a run that starts at the identity.
#[derive(Debug, Clone)]
pub struct ConditionTracker {
    form: Form,
    kappa: f64,
    floor: f64,
    mode: ConditionMode,
    svd_count: usize,
}

impl ConditionTracker {
    pub fn new(n: usize, mode: ConditionMode) -> Self {
        ConditionTracker {
            form: Form::ScaledOrthogonal {
                scale: vec![1.0; n],
            },
            kappa: 1.0,
            floor: DEFAULT_SIGMA_FLOOR,
            mode,
            svd_count: 0,
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn svd_count(&self) -> usize {
        self.svd_count
    }

    /// Updates κ after `gate`; `m_after` is the state with the gate applied.
    pub fn observe(&mut self, gate: &Gate, m_after: &Matrix) -> Result<f64> {
        match *gate {
            Gate::Rotation { i, i2, .. } => {
                if let Form::ScaledOrthogonal { scale } = &self.form {
                    if scale[i - 1] != scale[i2 - 1] {
                        self.form = Form::General;
                    }
                }
            }
            Gate::Constant { i, c } => {
                let exhaustive = self.mode == ConditionMode::Exhaustive;
                match &mut self.form {
                    Form::ScaledOrthogonal { scale } if !exhaustive => {
                        scale[i - 1] *= c.abs();
                        let (lo, hi) = scale
                            .iter()
                            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
                        if !(lo > self.floor) {
                            return Err(QelError::Singular {
                                sigma_min: lo,
                                floor: self.floor,
                            });
                        }
                        self.kappa = hi / lo;
                    }
                    Form::General if !exhaustive && c.abs() == 1.0 => {}
                    _ => {
                        if let Form::ScaledOrthogonal { scale } = &mut self.form {
                            scale[i - 1] *= c.abs();
                        }
                        self.kappa = condition_number_with_floor(m_after, self.floor)?;
                        self.svd_count += 1;
                    }
                }
            }
        }
        Ok(self.kappa)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub kappa_max: f64,
    /// Largest κ over all prefixes `t = 0..=m`.
    pub max_kappa: f64,
    pub argmax_step: usize,
    /// κ of the final matrix by direct SVD.
    pub final_kappa: f64,
    pub svd_count: usize,
    pub passed: bool,
}

pub fn verify_well_conditioned(program: &GateProgram, kappa_max: f64) -> Result<ConditionReport> {
    verify_well_conditioned_with(program, kappa_max, ConditionMode::Structured)
}

/// Checks `κ(M⁽ᵗ⁾) ≤ kappa_max` for every prefix of `program`.
pub fn verify_well_conditioned_with(
    program: &GateProgram,
    kappa_max: f64,
    mode: ConditionMode,
) -> Result<ConditionReport> {
    let n = program.n();
    let mut m = Matrix::identity(n);
    let mut tracker = ConditionTracker::new(n, mode);
    let mut max_kappa = condition_number(&m).map_err(|e| e.at_step(0))?;
    let mut svd_count = 1;
    let mut argmax_step = 0;
    for (k, gate) in program.gates().iter().enumerate() {
        gate.apply_to(&mut m);
        let kappa = tracker.observe(gate, &m).map_err(|e| e.at_step(k + 1))?;
        if kappa > max_kappa {
            max_kappa = kappa;
            argmax_step = k + 1;
        }
    }
    let m_steps = program.len();
    let final_kappa = condition_number(&m).map_err(|e| e.at_step(m_steps))?;
    svd_count += tracker.svd_count() + 1;
    if final_kappa > max_kappa {
        max_kappa = final_kappa;
        argmax_step = m_steps;
    }
    Ok(ConditionReport {
        kappa_max,
        max_kappa,
        argmax_step,
        final_kappa,
        svd_count,
        passed: max_kappa <= kappa_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_is_perfectly_conditioned() {
        assert_eq!(condition_number(&Matrix::identity(5)).unwrap(), 1.0);
    }

    #[test]
    fn diagonal_condition_number() {
        let e = 0.1;
        let m = Matrix::diagonal(&[1.0 + e, 1.0, 1.0, 1.0 - e]);
        assert_relative_eq!(
            condition_number(&m).unwrap(),
            (1.0 + e) / (1.0 - e),
            max_relative = 1e-14
        );
    }

    #[test]
    fn singular_input_reports_sigma_min() {
        let m = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        match condition_number(&m) {
            Err(QelError::Singular { sigma_min, .. }) => assert!(sigma_min < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_large_constant_fails_at_step_one() {
        let p = GateProgram::from_gates(4, vec![Gate::constant(1, 10.0)]).unwrap();
        let r = verify_well_conditioned(&p, 2.0).unwrap();
        assert!(!r.passed);
        assert_relative_eq!(r.max_kappa, 10.0, max_relative = 1e-12);
        assert_eq!(r.argmax_step, 1);
    }

    #[test]
    fn near_singular_prefix_reported_with_step() {
        let p = GateProgram::from_gates(
            2,
            vec![Gate::rotation(1, 2, 0.3), Gate::constant(2, 1e-14)],
        )
        .unwrap();
        let err = verify_well_conditioned(&p, 10.0).unwrap_err();
        assert!(matches!(err, QelError::AtStep { step: 2, .. }));
    }

    #[test]
    fn structured_and_exhaustive_agree_on_mixed_program() {
        let gates = vec![
            Gate::rotation(1, 2, 0.4),
            Gate::constant(1, 1.5),
            Gate::constant(3, -0.7),
            Gate::rotation(2, 3, 0.9),
            Gate::constant(2, -1.0),
            Gate::rotation(1, 3, -0.2),
            Gate::constant(1, 0.8),
            Gate::rotation(1, 2, 1.3),
            Gate::constant(2, 2.0),
        ];
        let p = GateProgram::from_gates(3, gates).unwrap();
        let a = verify_well_conditioned_with(&p, 100.0, ConditionMode::Structured).unwrap();
        let b = verify_well_conditioned_with(&p, 100.0, ConditionMode::Exhaustive).unwrap();
        assert_relative_eq!(a.max_kappa, b.max_kappa, max_relative = 1e-10);
        assert_eq!(a.argmax_step, b.argmax_step);
        assert!(a.svd_count < b.svd_count);
    }

    #[test]
    fn rotations_preserve_singular_values() {
        let mut m = Matrix::from_fn(6, 6, |i, j| ((i * 5 + j * 3) % 7) as f64 + if i == j { 4.0 } else { 0.0 });
        let before = m.singular_values();
        Gate::rotation(2, 5, 0.77).apply_to(&mut m);
        let after = m.singular_values();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
