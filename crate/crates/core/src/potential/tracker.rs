use super::{entropy_kernel, PotentialSpec};
use crate::error::{QelError, Result};
use crate::linalg::Matrix;
use crate::model::{Gate, TrackedState};

pub const DEFAULT_RECOMPUTE_EVERY: usize = 1024;

/// Running value above this distance from a full re-summation is treated as
/// cache corruption.
const DESYNC_TOL: f64 = 1e-6;

/// Maintains `M·A_p` and `M⁻ᵀ·B_p` for every slice along a run, updating
/// only the rows a gate touches.
#[derive(Debug, Clone)]
pub struct PotentialTracker {
    left: Vec<Matrix>,
    right: Vec<Matrix>,
    row_terms: Vec<f64>,
    value: f64,
    recompute_every: usize,
    applied: usize,
    scratch: Vec<f64>,
}

impl PotentialTracker {
    pub fn new(spec: &PotentialSpec, state: &TrackedState) -> Result<Self> {
        Self::with_period(spec, state, DEFAULT_RECOMPUTE_EVERY)
    }

    pub fn with_period(
        spec: &PotentialSpec,
        state: &TrackedState,
        recompute_every: usize,
    ) -> Result<Self> {
        let n = state.n();
        if spec.n() != n {
            return Err(QelError::ShapeMismatch {
                what: "potential spec vs state",
                expected: (n, n),
                found: (spec.n(), spec.n()),
            });
        }
        let at_identity = state.t() == 0;
        let (left, right) = spec
            .slices()
            .iter()
            .map(|(a, b)| {
                if at_identity {
                    (a.clone(), b.clone())
                } else {
                    (state.m().matmul(a), state.m_inv_t().matmul(b))
                }
            })
            .unzip();
        let mut tracker = PotentialTracker {
            left,
            right,
            row_terms: vec![0.0; n],
            value: 0.0,
            recompute_every: recompute_every.max(1),
            applied: 0,
            scratch: vec![0.0; n],
        };
        tracker.value = tracker.resum();
        Ok(tracker)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn n(&self) -> usize {
        self.row_terms.len()
    }

    pub fn k(&self) -> usize {
        self.left.len()
    }

    /// Cached `M·A_p` for slice `p`.
    pub fn left(&self, p: usize) -> &Matrix {
        &self.left[p]
    }

    /// Cached `M⁻ᵀ·B_p` for slice `p`.
    pub fn right(&self, p: usize) -> &Matrix {
        &self.right[p]
    }

    /// The per-rotation bound `‖(MA)([i i'],:)‖_F · ‖(M⁻ᵀB)([i i'],:)‖_F`
    /// for single-slice specs, rows 1-based. `None` when `k > 1`.
    pub fn rotation_bound(&self, i: usize, i2: usize) -> Option<f64> {
        if self.k() != 1 {
            return None;
        }
        Some(
            self.left[0].row_pair_norm(i - 1, i2 - 1)
                * self.right[0].row_pair_norm(i - 1, i2 - 1),
        )
    }

    /// Applies `gate` to the caches and returns the exact potential change.
    pub fn apply(&mut self, gate: &Gate) -> Result<f64> {
        gate.validate(self.n())?;
        let delta = match *gate {
            Gate::Rotation { i, i2, theta } => {
                let (a, b) = (i - 1, i2 - 1);
                let before = self.row_terms[a] + self.row_terms[b];
                let (sin, cos) = theta.sin_cos();
                for m in self.left.iter_mut().chain(self.right.iter_mut()) {
                    m.rotate_rows(a, b, cos, sin);
                }
                self.row_terms[a] = self.row_term(a);
                self.row_terms[b] = self.row_term(b);
                self.row_terms[a] + self.row_terms[b] - before
            }
            Gate::Constant { i, c } => {
                let a = i - 1;
                let before = self.row_terms[a];
                for m in &mut self.left {
                    m.scale_row(a, c);
                }
                for m in &mut self.right {
                    m.scale_row(a, 1.0 / c);
                }
                self.row_terms[a] = self.row_term(a);
                self.row_terms[a] - before
            }
        };
        self.value += delta;
        self.applied += 1;
        if self.applied.is_multiple_of(self.recompute_every) {
            self.recompute().map_err(|e| match e {
                QelError::TrackerDesync { discrepancy, .. } => QelError::TrackerDesync {
                    step: self.applied,
                    discrepancy,
                },
                e => e,
            })?;
        }
        Ok(delta)
    }

    /// Re-sums every row from the caches and replaces the running value.
    /// Returns the discrepancy that was corrected.
    pub fn recompute(&mut self) -> Result<f64> {
        let fresh = self.resum();
        let discrepancy = (fresh - self.value).abs();
        if !(discrepancy <= DESYNC_TOL) {
            return Err(QelError::TrackerDesync {
                step: self.applied,
                discrepancy,
            });
        }
        self.value = fresh;
        Ok(discrepancy)
    }

    /// Largest entry deviation between the cached row `row` (0-based) and
    /// the same row recomputed from `state` and the `PotentialSpec`.
    pub fn row_deviation(&self, spec: &PotentialSpec, state: &TrackedState, row: usize) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for (p, (a, b)) in spec.slices().iter().enumerate() {
            for (cache, base, pre) in [
                (&self.left[p], state.m(), a),
                (&self.right[p], state.m_inv_t(), b),
            ] {
                for j in 0..n {
                    let fresh: f64 = (0..n).map(|r| base[(row, r)] * pre[(r, j)]).sum();
                    worst = worst.max((fresh - cache[(row, j)]).abs());
                }
            }
        }
        worst
    }

    fn resum(&mut self) -> f64 {
        for r in 0..self.n() {
            self.row_terms[r] = self.row_term(r);
        }
        self.row_terms.iter().sum()
    }

    /// `-Σ_j L(Σ_p (MA_p)(r,j)·(M⁻ᵀB_p)(r,j))`.
    fn row_term(&mut self, r: usize) -> f64 {
        if self.left.len() == 1 {
            return -self.left[0]
                .row(r)
                .iter()
                .zip(self.right[0].row(r))
                .map(|(x, y)| entropy_kernel(x * y))
                .sum::<f64>();
        }
        self.scratch.iter_mut().for_each(|s| *s = 0.0);
        for (l, rt) in self.left.iter().zip(&self.right) {
            for ((s, x), y) in self.scratch.iter_mut().zip(l.row(r)).zip(rt.row(r)) {
                *s += x * y;
            }
        }
        -self.scratch.iter().map(|&s| entropy_kernel(s)).sum::<f64>()
    }
}
