use crate::error::{QelError, Result};
use crate::linalg::Matrix;

/// One step of a straight-line program. Row indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// Left-multiplication by the planar rotation acting on rows `i`, `i2`:
    /// the 2×2 block is `[[cos θ, sin θ], [-sin θ, cos θ]]`.
    Rotation { i: usize, i2: usize, theta: f64 },
    /// Scales row `i` by `c`.
    Constant { i: usize, c: f64 },
}

impl Gate {
    pub fn rotation(i: usize, i2: usize, theta: f64) -> Self {
        Gate::Rotation { i, i2, theta }
    }

    pub fn constant(i: usize, c: f64) -> Self {
        Gate::Constant { i, c }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, Gate::Rotation { .. })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let check = |row: usize| {
            if row == 0 || row > n {
                Err(QelError::RowOutOfRange { row, n })
            } else {
                Ok(())
            }
        };
        match *self {
            Gate::Rotation { i, i2, .. } => {
                check(i)?;
                check(i2)?;
                if i == i2 {
                    return Err(QelError::RepeatedRow { row: i });
                }
            }
            Gate::Constant { i, c } => {
                check(i)?;
                if c == 0.0 {
                    return Err(QelError::ZeroConstant { row: i });
                }
            }
        }
        Ok(())
    }

    /// Dense n×n matrix of this gate.
    pub fn to_matrix(&self, n: usize) -> Matrix {
        let mut g = Matrix::identity(n);
        match *self {
            Gate::Rotation { i, i2, theta } => {
                let (a, b) = (i - 1, i2 - 1);
                g[(a, a)] = theta.cos();
                g[(a, b)] = theta.sin();
                g[(b, a)] = -theta.sin();
                g[(b, b)] = theta.cos();
            }
            Gate::Constant { i, c } => g[(i - 1, i - 1)] = c,
        }
        g
    }

    /// Applies the gate to the rows of `m` (0-based storage). The caller has
    /// already validated the gate.
    pub(crate) fn apply_to(&self, m: &mut Matrix) {
        match *self {
            Gate::Rotation { i, i2, theta } => {
                let (sin, cos) = theta.sin_cos();
                m.rotate_rows(i - 1, i2 - 1, cos, sin);
            }
            Gate::Constant { i, c } => m.scale_row(i - 1, c),
        }
    }

    /// Applies the inverse-transpose of the gate: rotations are their own
    /// inverse-transpose, constant gates scale by `1/c`.
    pub(crate) fn apply_inverse_transpose_to(&self, m: &mut Matrix) {
        match *self {
            Gate::Rotation { .. } => self.apply_to(m),
            Gate::Constant { i, c } => m.scale_row(i - 1, 1.0 / c),
        }
    }
}
