//! Walsh–Hadamard matrices and their gate-level compilations.

use std::f64::consts::FRAC_PI_4;

use crate::error::{QelError, Result};
use crate::linalg::Matrix;
use crate::model::{Gate, GateProgram};

/// `log₂ n` if `n` is a power of two (including `n = 1`).
pub fn checked_log2(n: usize) -> Result<u32> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(QelError::NotPowerOfTwo { n })
    }
}

/// Sign of the Walsh–Hadamard entry at 0-based `(i, j)`: `(-1)^popcount(i & j)`.
#[inline]
pub fn wht_sign(i: usize, j: usize) -> f64 {
    if (i & j).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// The normalized Walsh–Hadamard matrix, entries exactly `±n^{-1/2}`.
pub fn wht_matrix(n: usize) -> Result<Matrix> {
    checked_log2(n)?;
    let s = 1.0 / (n as f64).sqrt();
    Ok(Matrix::from_fn(n, n, |i, j| s * wht_sign(i, j)))
}

/// In-place butterfly network for `F`: `(n/2)·log₂n` rotations by π/4, each
/// followed by a sign flip on the second row. Stages run from the low bit to
/// the high bit.
pub fn fast_wht_program(n: usize) -> Result<GateProgram> {
    let k = checked_log2(n)?;
    if n < 2 {
        return Err(QelError::InvalidDimension {
            n,
            reason: "butterfly programs need n >= 2",
        });
    }
    let mut gates = Vec::with_capacity(n * k as usize);
    for bit in 0..k {
        let stride = 1usize << bit;
        for a in (0..n).filter(|a| a & stride == 0) {
            let b = a | stride;
            gates.push(Gate::rotation(a + 1, b + 1, FRAC_PI_4));
            gates.push(Gate::constant(b + 1, -1.0));
        }
    }
    GateProgram::from_gates(n, gates)
}

/// `Id_{2^{s-1}} ⊗ R(θ) ⊗ Id_{2^{k-s}}` as `n/2` disjoint rotations, where
/// `R(θ)` is the gate block `[[cos θ, sin θ], [-sin θ, cos θ]]`. Stage 1 is
/// the most significant index bit, stage `k` the least.
pub fn kron_rotation_layer(n: usize, stage: usize, theta: f64) -> Result<GateProgram> {
    let k = checked_log2(n)? as usize;
    if stage == 0 || stage > k {
        return Err(QelError::InvalidStage { stage, max: k });
    }
    let stride = 1usize << (k - stage);
    let gates = (0..n)
        .filter(|a| a & stride == 0)
        .map(|a| Gate::rotation(a + 1, (a | stride) + 1, theta))
        .collect();
    GateProgram::from_gates(n, gates)
}

/// `F·x` by in-place butterflies.
pub fn fast_apply_wht(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 {
        return Err(QelError::NotPowerOfTwo { n });
    }
    checked_log2(n)?;
    let mut v = x.to_vec();
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, w) = (*a, *b);
                *a = u + w;
                *b = u - w;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (n as f64).sqrt();
    v.iter_mut().for_each(|e| *e *= s);
    Ok(v)
}
