//! Gate programs and reference matrices for the Fourier perturbation `Id + εF`.
//!
//! `F` is symmetric and involutive, so `Id + εF = W·(Id + εD)·Wᵀ` with the
//! explicit eigenbasis `W = R(π/8)^{⊗k}`. Both synthesis routes emit the
//! gates of `Wᵀ`, then one scaling per row, then the gates of `W`.

use std::fmt;
use std::str::FromStr;

use crate::error::{QelError, Result};
use crate::linalg::Matrix;
use crate::model::{verify_well_conditioned, Gate, GateProgram};
use crate::potential::entropy_kernel;
use crate::transforms::{checked_log2, kron_rotation_layer, wht_matrix, wht_sign};

const EIGEN_ANGLE: f64 = std::f64::consts::PI / 8.0;

/// Default orthogonality tolerance for [`givens_decompose`].
pub const DEFAULT_GIVENS_TOL: f64 = 1e-9;

fn check_eps(eps: f64) -> Result<()> {
    if (0.0..0.5).contains(&eps) {
        Ok(())
    } else {
        Err(QelError::EpsOutOfRange { eps })
    }
}

/// `Id + eps·F`.
pub fn perturbation_matrix(n: usize, eps: f64) -> Result<Matrix> {
    check_eps(eps)?;
    let f = wht_matrix(n)?;
    Ok(Matrix::identity(n).add(&f.scaled(eps)))
}

/// `(Id − eps·F) / (1 − eps²)`, the exact inverse of [`perturbation_matrix`].
pub fn exact_inverse_perturbation(n: usize, eps: f64) -> Result<Matrix> {
    check_eps(eps)?;
    let f = wht_matrix(n)?;
    Ok(Matrix::identity(n)
        .sub(&f.scaled(eps))
        .scaled(1.0 / (1.0 - eps * eps)))
}

/// Second-order remainder `Z = (Id + εF)⁻¹ − (Id − εF)`.
pub fn inverse_remainder(n: usize, eps: f64) -> Result<Matrix> {
    check_eps(eps)?;
    let f = wht_matrix(n)?;
    let first_order = Matrix::identity(n).sub(&f.scaled(eps));
    Ok(first_order.scaled(eps * eps / (1.0 - eps * eps)))
}

/// `‖Z‖₂ = ε² / (1 − ε)` in closed form.
pub fn inverse_remainder_norm(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(eps * eps / (1.0 - eps))
}

/// `(W, D)` with `W` orthogonal, `D` diagonal ±1 and `W·D·Wᵀ = F`.
pub fn wht_eigenbasis(n: usize) -> Result<(Matrix, Matrix)> {
    checked_log2(n)?;
    let (s, c) = EIGEN_ANGLE.sin_cos();
    // Entry (i, j) of the Kronecker power is a product over bits of the 2×2
    // factor [[c, -s], [s, c]] at (bit of i, bit of j).
    let w = Matrix::from_fn(n, n, |i, j| {
        let mut v = 1.0;
        let mut bits = n >> 1;
        while bits > 0 {
            v *= match (i & bits != 0, j & bits != 0) {
                (false, false) | (true, true) => c,
                (false, true) => -s,
                (true, false) => s,
            };
            bits >>= 1;
        }
        v
    });
    let d: Vec<f64> = (0..n).map(eigen_sign).collect();
    Ok((w, Matrix::diagonal(&d)))
}

/// `D(i, i)` for 0-based `i`.
#[inline]
fn eigen_sign(i: usize) -> f64 {
    if i.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Factors an orthogonal matrix into adjacent-row rotations and ±1 row signs.
///
/// Columns are cleared left to right, each from the bottom up, by rotating
/// rows `(r-1, r)`. Entries that are already exactly zero emit no gate.
pub fn givens_decompose(q: &Matrix, tol: f64) -> Result<GateProgram> {
    if !q.is_square() {
        return Err(QelError::ShapeMismatch {
            what: "givens input",
            expected: (q.rows(), q.rows()),
            found: q.shape(),
        });
    }
    let n = q.rows();
    let residual = q.transpose_matmul(q).max_abs_diff(&Matrix::identity(n));
    if !(residual <= tol) {
        return Err(QelError::NotOrthogonal { residual, tol });
    }
    let mut r = q.clone();
    let mut rotations = Vec::new();
    for j in 0..n {
        for row in (j + 1..n).rev() {
            let y = r[(row, j)];
            if y == 0.0 {
                continue;
            }
            let x = r[(row - 1, j)];
            let theta = y.atan2(x);
            let (sin, cos) = theta.sin_cos();
            // Columns left of j are already zero in both rows.
            let (ra, rb) = r.row_pair_mut(row - 1, row);
            for (a, b) in ra[j..].iter_mut().zip(&mut rb[j..]) {
                let (u, v) = (*a, *b);
                *a = cos * u + sin * v;
                *b = cos * v - sin * u;
            }
            rb[j] = 0.0;
            rotations.push(Gate::rotation(row, row + 1, theta));
        }
    }
    let mut signs = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = r[(i, j)];
            let off = if i == j { (v.abs() - 1.0).abs() } else { v.abs() };
            worst = worst.max(off);
        }
        if r[(i, i)] < 0.0 {
            signs.push(Gate::constant(i + 1, -1.0));
        }
    }
    if !(worst <= tol) {
        return Err(QelError::NotOrthogonal {
            residual: worst,
            tol,
        });
    }
    // G_N⋯G_1·Q = S, so Q = G_1ᵀ⋯G_Nᵀ·S: signs first, then the
    // rotations undone in reverse.
    let mut gates = signs;
    gates.extend(rotations.iter().rev().map(|g| match *g {
        Gate::Rotation { i, i2, theta } => Gate::rotation(i, i2, -theta),
        g => g,
    }));
    GateProgram::from_gates(n, gates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// Dense Givens factorizations of `W` and `Wᵀ`: `O(n²)` gates.
    AppendixB,
    /// Kronecker rotation layers: `n·log₂n` rotations plus `n` scalings.
    FastKronecker,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::AppendixB => "AppendixB",
            Route::FastKronecker => "FastKronecker",
        })
    }
}

impl FromStr for Route {
    type Err = QelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "AppendixB" | "appendix-b" => Ok(Route::AppendixB),
            "FastKronecker" | "fast" => Ok(Route::FastKronecker),
            _ => Err(QelError::Parse {
                line: 1,
                msg: format!("unknown route {s:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPlan {
    pub n: usize,
    pub eps: f64,
    pub route: Route,
    pub program: GateProgram,
    /// Largest condition number over all prefixes of `program`.
    pub kappa_certificate: f64,
}

impl PerturbationPlan {
    /// Metadata header followed by the program text.
    pub fn to_text(&self) -> String {
        format!(
            "# route={} n={} eps={:?} kappa={:?}\n{}",
            self.route,
            self.n,
            self.eps,
            self.kappa_certificate,
            self.program.to_text()
        )
    }

    /// Reads a plan back without re-verifying it.
    pub fn parse(text: &str) -> Result<Self> {
        let header = text.lines().next().unwrap_or("");
        let bad = |msg: String| QelError::Parse { line: 1, msg };
        let fields = header
            .strip_prefix("# ")
            .ok_or_else(|| bad("missing plan header".into()))?;
        let (mut route, mut n, mut eps, mut kappa) = (None, None, None, None);
        for field in fields.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed field {field:?}")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("{key}: {e}")));
            match key {
                "route" => route = Some(value.parse::<Route>()?),
                "n" => n = Some(value.parse::<usize>().map_err(|e| bad(format!("n: {e}")))?),
                "eps" => eps = Some(num(value)?),
                "kappa" => kappa = Some(num(value)?),
                _ => return Err(bad(format!("unknown field {key:?}"))),
            }
        }
        let missing = |k: &str| bad(format!("header lacks {k}"));
        let program = GateProgram::parse(text)?;
        let n = n.ok_or_else(|| missing("n"))?;
        if program.n() != n {
            return Err(bad(format!("header n={n} but program n={}", program.n())));
        }
        Ok(PerturbationPlan {
            n,
            eps: eps.ok_or_else(|| missing("eps"))?,
            route: route.ok_or_else(|| missing("route"))?,
            program,
            kappa_certificate: kappa.ok_or_else(|| missing("kappa"))?,
        })
    }
}

/// Builds and verifies a program computing `Id + eps·F`.
pub fn synth_perturbation(n: usize, eps: f64, route: Route) -> Result<PerturbationPlan> {
    check_eps(eps)?;
    let k = checked_log2(n)? as usize;
    if n < 2 {
        return Err(QelError::InvalidDimension {
            n,
            reason: "perturbation programs need n >= 2",
        });
    }
    let (w_prog, wt_prog) = match route {
        Route::FastKronecker => {
            let mut w = GateProgram::new(n)?;
            let mut wt = GateProgram::new(n)?;
            for stage in 1..=k {
                w.extend_from(&kron_rotation_layer(n, stage, -EIGEN_ANGLE)?)?;
                wt.extend_from(&kron_rotation_layer(n, stage, EIGEN_ANGLE)?)?;
            }
            (w, wt)
        }
        Route::AppendixB => {
            let (w, _) = wht_eigenbasis(n)?;
            let w_prog = givens_decompose(&w, DEFAULT_GIVENS_TOL)?;
            let wt_prog = givens_decompose(&w.transpose(), DEFAULT_GIVENS_TOL)?;
            (w_prog, wt_prog)
        }
    };
    let mut program = wt_prog;
    for i in 0..n {
        program.push(Gate::constant(i + 1, 1.0 + eps * eigen_sign(i)))?;
    }
    program.extend_from(&w_prog)?;

    let target = perturbation_matrix(n, eps)?;
    let err = program.realize().frobenius_distance(&target);
    let realize_tol = 1e-9 * n as f64;
    if !(err <= realize_tol) {
        return Err(QelError::Verification(format!(
            "{route} program for n={n}, eps={eps} misses Id+eps*F by {err:e} (tol {realize_tol:e})"
        )));
    }
    let kappa_max = (1.0 + eps) / (1.0 - eps) + 1e-9;
    let report = verify_well_conditioned(&program, kappa_max)?;
    if !report.passed {
        return Err(QelError::Verification(format!(
            "{route} program for n={n}, eps={eps} reaches kappa {} at step {} (limit {kappa_max})",
            report.max_kappa, report.argmax_step
        )));
    }
    Ok(PerturbationPlan {
        n,
        eps,
        route,
        program,
        kappa_certificate: report.max_kappa,
    })
}

/// `P = [Id, −F]`, `Q = [F, Id]`.
pub fn hat_preconditioners(n: usize) -> Result<(Matrix, Matrix)> {
    let f = wht_matrix(n)?;
    let id = Matrix::identity(n);
    Ok((id.hstack(&f.scaled(-1.0)), f.hstack(&id)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointPotentials {
    pub plain: f64,
    /// Preconditioned with `A = Id`, `B = F`.
    pub precond_id_f: f64,
    /// Hat potential with `P = [Id, −F]`, `Q = [F, Id]`.
    pub hat: f64,
}

/// The three potentials at `Id + eps·F` in `O(n²)`, using closed forms for
/// every product matrix.
pub fn perturbation_endpoint_potentials(n: usize, eps: f64) -> Result<EndpointPotentials> {
    check_eps(eps)?;
    checked_log2(n)?;
    let s = 1.0 / (n as f64).sqrt();
    let inv = 1.0 / (1.0 - eps * eps);
    let (mut plain, mut precond, mut hat) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { 1.0 } else { 0.0 };
            let f = s * wht_sign(i, j);
            let m = d + eps * f;
            let m_inv_t = (d - eps * f) * inv;
            let m_inv_t_f = (f - eps * d) * inv;
            let m_f = f + eps * d;
            plain -= entropy_kernel(m * m_inv_t);
            precond -= entropy_kernel(m * m_inv_t_f);
            hat -= entropy_kernel(m * m_inv_t_f - m_f * m_inv_t);
        }
    }
    Ok(EndpointPotentials {
        plain,
        precond_id_f: precond,
        hat,
    })
}
