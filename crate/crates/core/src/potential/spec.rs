use crate::error::{QelError, Result};
use crate::linalg::Matrix;

/// The preconditioner slices `(A_p, B_p)`, `p = 1..k`, that select which
/// quasi-entropy variant is evaluated or tracked.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    n: usize,
    slices: Vec<(Matrix, Matrix)>,
}

impl PotentialSpec {
    pub fn new(slices: Vec<(Matrix, Matrix)>) -> Result<Self> {
        let Some((a0, _)) = slices.first() else {
            return Err(QelError::InvalidDimension {
                n: 0,
                reason: "a potential needs at least one slice",
            });
        };
        let n = a0.rows();
        if n == 0 {
            return Err(QelError::InvalidDimension {
                n,
                reason: "slice matrices must be non-empty",
            });
        }
        for (a, b) in &slices {
            for (what, m) in [("slice A_p", a), ("slice B_p", b)] {
                if m.shape() != (n, n) {
                    return Err(QelError::ShapeMismatch {
                        what,
                        expected: (n, n),
                        found: m.shape(),
                    });
                }
            }
        }
        Ok(PotentialSpec { n, slices })
    }

    /// One slice `(Id, Id)`: the plain quasi-entropy.
    pub fn plain(n: usize) -> Self {
        PotentialSpec {
            n,
            slices: vec![(Matrix::identity(n), Matrix::identity(n))],
        }
    }

    pub fn preconditioned(a: Matrix, b: Matrix) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    /// Two slices from the column blocks of n×2n matrices `P`, `Q`.
    pub fn hat(p: &Matrix, q: &Matrix) -> Result<Self> {
        let n = p.rows();
        for (what, m) in [("hat P", p), ("hat Q", q)] {
            if m.shape() != (n, 2 * n) {
                return Err(QelError::ShapeMismatch {
                    what,
                    expected: (n, 2 * n),
                    found: m.shape(),
                });
            }
        }
        Self::new(vec![
            (p.column_block(0, n), q.column_block(0, n)),
            (p.column_block(n, 2 * n), q.column_block(n, 2 * n)),
        ])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[(Matrix, Matrix)] {
        &self.slices
    }
}
