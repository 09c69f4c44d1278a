//! Quasi-entropy potentials.
//!
//! Every variant is an instance of the k-slice functional
//!
//! ```text
//! Φ(M) = -Σ_{i,j} L( Σ_p (M·A_p)(i,j) · (M⁻ᵀ·B_p)(i,j) ),   L(x) = x·log₂|x|
//! ```
//!
//! with `(A, B) = (Id, Id)` for the plain potential, one arbitrary slice for
//! the preconditioned potential, and two column blocks of n×2n matrices for
//! the hat potential.

mod campaign;
mod spec;
mod trace;
mod tracker;

pub use campaign::{
    random_preconditioner, random_program, theorem2_campaign, BoundViolationRecord,
    Theorem2Campaign, Theorem2Report,
};
pub use spec::PotentialSpec;
pub use trace::{trace_potentials, BOUND_TOL, TraceOptions, TraceOutput, TraceRecord, Trajectory};
pub use tracker::{PotentialTracker, DEFAULT_RECOMPUTE_EVERY};

use crate::error::{QelError, Result};
use crate::linalg::Matrix;
use crate::model::TrackedState;

/// `x·log₂|x|`, with the limit value `0` at `x = 0`.
#[inline]
pub fn entropy_kernel(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().log2()
    }
}

/// `-Σ_{i,j} L(Σ_p X_p(i,j)·Y_p(i,j))` for precomputed slice products.
pub fn potential_of_products(left: &[&Matrix], right: &[&Matrix]) -> f64 {
    assert_eq!(left.len(), right.len());
    assert!(!left.is_empty());
    let (rows, cols) = left[0].shape();
    let mut total = 0.0;
    let mut acc = vec![0.0; cols];
    for r in 0..rows {
        acc.iter_mut().for_each(|s| *s = 0.0);
        for (x, y) in left.iter().zip(right) {
            for ((s, a), b) in acc.iter_mut().zip(x.row(r)).zip(y.row(r)) {
                *s += a * b;
            }
        }
        total += -acc.iter().map(|&s| entropy_kernel(s)).sum::<f64>();
    }
    total
}

/// Inverse-transpose of a nonsingular square matrix.
pub fn inverse_transpose(m: &Matrix) -> Result<Matrix> {
    let inv = m.inverse()?;
    if inv.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(QelError::Singular {
            sigma_min: 0.0,
            floor: 0.0,
        });
    }
    Ok(inv.transpose())
}

/// From-scratch evaluation of the k-slice potential at `m`.
pub fn k_slice_quasi_entropy(m: &Matrix, spec: &PotentialSpec) -> Result<f64> {
    let n = spec.n();
    if m.shape() != (n, n) {
        return Err(QelError::ShapeMismatch {
            what: "matrix vs potential spec",
            expected: (n, n),
            found: m.shape(),
        });
    }
    let m_inv_t = inverse_transpose(m)?;
    let (left, right): (Vec<Matrix>, Vec<Matrix>) = spec
        .slices()
        .iter()
        .map(|(a, b)| (m.matmul(a), m_inv_t.matmul(b)))
        .unzip();
    let l: Vec<&Matrix> = left.iter().collect();
    let r: Vec<&Matrix> = right.iter().collect();
    Ok(potential_of_products(&l, &r))
}

pub fn quasi_entropy(m: &Matrix) -> Result<f64> {
    k_slice_quasi_entropy(m, &PotentialSpec::plain(m.rows()))
}

pub fn preconditioned_quasi_entropy(m: &Matrix, a: &Matrix, b: &Matrix) -> Result<f64> {
    k_slice_quasi_entropy(m, &PotentialSpec::preconditioned(a.clone(), b.clone())?)
}

pub fn hat_quasi_entropy(m: &Matrix, p: &Matrix, q: &Matrix) -> Result<f64> {
    k_slice_quasi_entropy(m, &PotentialSpec::hat(p, q)?)
}

/// `‖(M·A)([i i'],:)‖_F · ‖(M⁻ᵀ·B)([i i'],:)‖_F` for a single-slice spec,
/// computed directly from `state` (rows 1-based).
pub fn theorem2_bound(state: &TrackedState, spec: &PotentialSpec, i: usize, i2: usize) -> Result<f64> {
    let n = state.n();
    if spec.k() != 1 {
        return Err(QelError::InvalidDimension {
            n: spec.k(),
            reason: "the rotation bound is defined for single-slice potentials",
        });
    }
    if spec.n() != n {
        return Err(QelError::ShapeMismatch {
            what: "potential spec vs state",
            expected: (n, n),
            found: (spec.n(), spec.n()),
        });
    }
    for row in [i, i2] {
        if row == 0 || row > n {
            return Err(QelError::RowOutOfRange { row, n });
        }
    }
    if i == i2 {
        return Err(QelError::RepeatedRow { row: i });
    }
    let (a, b) = &spec.slices()[0];
    let pair_norm = |base: &Matrix, pre: &Matrix| -> f64 {
        let mut sq = 0.0;
        for row in [i - 1, i2 - 1] {
            for j in 0..n {
                let v: f64 = (0..n).map(|r| base[(row, r)] * pre[(r, j)]).sum();
                sq += v * v;
            }
        }
        sq.sqrt()
    };
    Ok(pair_norm(state.m(), a) * pair_norm(state.m_inv_t(), b))
}
