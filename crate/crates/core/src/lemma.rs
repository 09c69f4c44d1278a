//! Randomized checks of the entropy-with-noise inequality
//!
//! ```text
//! -Σ (xᵢ+yᵢ)·log₂|xᵢ+yᵢ|  ≥  ‖x‖₁·log₂(ℓ/‖x‖₁) − 10
//! ```
//!
//! for nonnegative `x` with `‖x‖₁ ≤ 1`, `‖x‖∞ ≤ 4‖x‖₁/ℓ` and `‖y‖₁ ≤ C‖x‖₁`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QelError, Result};
use crate::potential::entropy_kernel;

pub const LEMMA_SLACK: f64 = 10.0;
pub const DEFAULT_C: f64 = 0.125;
pub const MAX_C: f64 = 0.125;
pub const ELL_FLOOR: usize = 64;
pub const HOLD_TOL: f64 = 1e-9;

/// Relative slack on the precondition inequalities, for rounding in the
/// generator.
const PRECOND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaInstance {
    pub ell: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub c: f64,
}

impl LemmaInstance {
    pub fn new(x: Vec<f64>, y: Vec<f64>, c: f64) -> Result<Self> {
        let inst = LemmaInstance { ell: x.len(), x, y, c };
        inst.validate()?;
        Ok(inst)
    }

    pub fn norm1_x(&self) -> f64 {
        self.x.iter().sum()
    }

    pub fn norm1_y(&self) -> f64 {
        self.y.iter().map(|v| v.abs()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(QelError::InvalidInstance(m));
        if self.ell == 0 || self.x.len() != self.ell || self.y.len() != self.ell {
            return bad(format!(
                "ell = {}, |x| = {}, |y| = {}",
                self.ell,
                self.x.len(),
                self.y.len()
            ));
        }
        if !(0.0..1.0).contains(&self.c) {
            return bad(format!("C = {} outside [0, 1)", self.c));
        }
        if self.x.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return bad("non-finite entry".into());
        }
        if let Some(v) = self.x.iter().find(|&&v| v < 0.0) {
            return bad(format!("negative x entry {v}"));
        }
        let nx = self.norm1_x();
        if nx > 1.0 + PRECOND_SLACK {
            return bad(format!("‖x‖₁ = {nx} > 1"));
        }
        let cap = 4.0 * nx / self.ell as f64;
        let top = self.x.iter().copied().fold(0.0, f64::max);
        if top > cap * (1.0 + PRECOND_SLACK) {
            return bad(format!("‖x‖∞ = {top} > 4‖x‖₁/ℓ = {cap}"));
        }
        let ny = self.norm1_y();
        if ny > self.c * nx * (1.0 + PRECOND_SLACK) {
            return bad(format!("‖y‖₁ = {ny} > C‖x‖₁ = {}", self.c * nx));
        }
        Ok(())
    }
}

/// `−Σ L(xᵢ + yᵢ)`.
pub fn lemma_lhs(inst: &LemmaInstance) -> f64 {
    -inst
        .x
        .iter()
        .zip(&inst.y)
        .map(|(a, b)| entropy_kernel(a + b))
        .sum::<f64>()
}

/// `‖x‖₁·log₂(ℓ/‖x‖₁) − 10`, taking the first term as 0 when `x = 0`.
pub fn lemma_rhs(inst: &LemmaInstance) -> f64 {
    let nx = inst.norm1_x();
    if nx == 0.0 {
        return -LEMMA_SLACK;
    }
    nx * (inst.ell as f64 / nx).log2() - LEMMA_SLACK
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum XShape {
    Uniform,
    RandomWeights,
    Exponential,
    QuarterSupport,
    TwoLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum YShape {
    RandomSigns,
    Concentrated,
    Cancelling,
    Amplifying,
}

/// Draws an admissible instance. Deterministic in `seed`.
pub fn sample_instance(ell: usize, c: f64, norm1: f64, seed: u64) -> Result<LemmaInstance> {
    if ell < ELL_FLOOR {
        return Err(QelError::InvalidLemmaParams(format!("ell = {ell} below floor {ELL_FLOOR}")));
    }
    if !(0.0..=MAX_C).contains(&c) {
        return Err(QelError::InvalidLemmaParams(format!("C = {c} outside [0, {MAX_C}]")));
    }
    if !(norm1 > 0.0 && norm1 <= 1.0) {
        return Err(QelError::InvalidLemmaParams(format!("norm1 = {norm1} outside (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_shape = *[
        XShape::Uniform,
        XShape::RandomWeights,
        XShape::Exponential,
        XShape::QuarterSupport,
        XShape::TwoLevel,
    ]
    .choose(&mut rng)
    .expect("nonempty");
    let mut x: Vec<f64> = match x_shape {
        XShape::Uniform => vec![1.0; ell],
        XShape::RandomWeights => (0..ell).map(|_| rng.gen::<f64>()).collect(),
        XShape::Exponential => (0..ell).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect(),
        XShape::QuarterSupport => {
            let mut v = vec![0.0; ell];
            v[..ell / 4].iter_mut().for_each(|e| *e = 1.0);
            v.shuffle(&mut rng);
            v
        }
        XShape::TwoLevel => {
            let hi = rng.gen_range(1.0..8.0);
            (0..ell).map(|_| if rng.gen_bool(0.2) { hi } else { 1.0 }).collect()
        }
    };
    cap_and_normalize(&mut x, norm1);

    let mut y = vec![0.0; ell];
    if c > 0.0 {
        let y_shape = *[
            YShape::RandomSigns,
            YShape::Concentrated,
            YShape::Cancelling,
            YShape::Amplifying,
        ]
        .choose(&mut rng)
        .expect("nonempty");
        match y_shape {
            YShape::RandomSigns => y.iter_mut().for_each(|e| {
                let mag: f64 = rng.gen();
                *e = if rng.gen_bool(0.5) { mag } else { -mag };
            }),
            YShape::Concentrated => {
                let hits = rng.gen_range(1..=4usize);
                for _ in 0..hits {
                    let i = rng.gen_range(0..ell);
                    y[i] += if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                }
            }
            YShape::Cancelling => {
                for (e, xi) in y.iter_mut().zip(&x) {
                    *e = -xi * rng.gen::<f64>();
                }
            }
            YShape::Amplifying => {
                for (e, xi) in y.iter_mut().zip(&x) {
                    *e = xi * rng.gen::<f64>();
                }
            }
        }
        let total: f64 = y.iter().map(|v| v.abs()).sum();
        let target = rng.gen::<f64>() * c * norm1;
        if total > 0.0 {
            let s = target / total;
            y.iter_mut().for_each(|e| *e *= s);
        }
    }
    let inst = LemmaInstance { ell, x, y, c };
    inst.validate().map_err(|e| {
        QelError::Verification(format!("generator produced an inadmissible instance: {e}"))
    })?;
    Ok(inst)
}

/// Rescales `x` to sum `norm1`, then clips entries at `4·norm1/ℓ` and hands
/// the excess to the unclipped entries in proportion to their size.
fn cap_and_normalize(x: &mut [f64], norm1: f64) {
    let ell = x.len();
    let cap = 4.0 * norm1 / ell as f64;
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|e| *e *= norm1 / total);
    // Each pass clips at least one more entry, so this converges quickly;
    // the bound only guards against rounding ping-pong.
    for _ in 0..64 {
        let mut excess = 0.0;
        let mut free = 0.0;
        for e in x.iter_mut() {
            if *e > cap {
                excess += *e - cap;
                *e = cap;
            } else if *e < cap {
                free += *e;
            }
        }
        if excess <= norm1 * 1e-15 {
            break;
        }
        if free > 0.0 {
            let s = 1.0 + excess / free;
            x.iter_mut().filter(|e| **e < cap).for_each(|e| *e *= s);
        } else {
            let open = x.iter().filter(|e| **e < cap).count().max(1);
            let add = excess / open as f64;
            x.iter_mut().filter(|e| **e < cap).for_each(|e| *e += add);
        }
    }
    // Clipping can leave the sum a few ulps off; only shrink so the cap
    // still holds.
    let total: f64 = x.iter().sum();
    if total > norm1 {
        x.iter_mut().for_each(|e| *e *= norm1 / total);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub margin: f64,
    /// Indices with `|yᵢ| ≥ xᵢ/2`.
    pub big_count: usize,
    pub small_count: usize,
    /// Indices in the small set with `|xᵢ + yᵢ| > 1/e`.
    pub small_hypothesis_violations: usize,
}

pub fn check_lemma(inst: &LemmaInstance) -> Result<LemmaReport> {
    inst.validate()?;
    if inst.ell < ELL_FLOOR {
        return Err(QelError::InvalidInstance(format!(
            "ell = {} below floor {ELL_FLOOR}",
            inst.ell
        )));
    }
    Ok(evaluate(inst))
}

/// The report for an instance already known to be admissible.
fn evaluate(inst: &LemmaInstance) -> LemmaReport {
    let lhs = lemma_lhs(inst);
    let rhs = lemma_rhs(inst);
    let inv_e = (-1.0f64).exp();
    let (mut big, mut small, mut binds) = (0, 0, 0);
    for (a, b) in inst.x.iter().zip(&inst.y) {
        if b.abs() >= a / 2.0 {
            big += 1;
        } else {
            small += 1;
            if (a + b).abs() > inv_e {
                binds += 1;
            }
        }
    }
    LemmaReport {
        lhs,
        rhs,
        holds: lhs >= rhs - HOLD_TOL,
        margin: lhs - rhs,
        big_count: big,
        small_count: small,
        small_hypothesis_violations: binds,
    }
}

#[derive(Debug, Clone)]
pub struct LemmaCampaign {
    pub ells: Vec<usize>,
    pub instances_per_ell: usize,
    pub c: f64,
    pub seed: u64,
}

impl Default for LemmaCampaign {
    fn default() -> Self {
        LemmaCampaign {
            ells: vec![64, 256, 1024, 4096, 65536],
            instances_per_ell: 10_000,
            c: DEFAULT_C,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaRow {
    pub seed: u64,
    pub ell: usize,
    pub c: f64,
    pub norm1: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl LemmaCampaign {
    pub fn validate(&self) -> Result<()> {
        if self.ells.is_empty() {
            return Err(QelError::InvalidLemmaParams("empty ell grid".into()));
        }
        if let Some(&e) = self.ells.iter().find(|&&e| e < ELL_FLOOR) {
            return Err(QelError::InvalidLemmaParams(format!("ell = {e} below floor {ELL_FLOOR}")));
        }
        if !(0.0..=MAX_C).contains(&self.c) {
            return Err(QelError::InvalidLemmaParams(format!("C = {} outside [0, {MAX_C}]", self.c)));
        }
        Ok(())
    }

    /// Per-instance seeds and `‖x‖₁` targets for one `ell`, in row order.
    /// `‖x‖₁` is log-uniform on `[2⁻²⁰, 1]`, with every eighth instance at 1.
    pub fn draws(&self, ell_index: usize) -> Vec<(u64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(ell_index as u64);
        (0..self.instances_per_ell)
            .map(|k| {
                let seed = rng.gen::<u64>();
                let norm1 = if k % 8 == 0 {
                    1.0
                } else {
                    (-rng.gen_range(0.0..20.0f64)).exp2()
                };
                (seed, norm1)
            })
            .collect()
    }

    /// Runs the campaign for one `ell`.
    pub fn run_ell(&self, ell_index: usize) -> Result<Vec<LemmaRow>> {
        let ell = self.ells[ell_index];
        self.draws(ell_index)
            .into_iter()
            .map(|(seed, norm1)| {
                // The sampler has already validated the instance.
                let inst = sample_instance(ell, self.c, norm1, seed)?;
                let r = evaluate(&inst);
                Ok(LemmaRow {
                    seed,
                    ell,
                    c: self.c,
                    norm1,
                    lhs: r.lhs,
                    rhs: r.rhs,
                    margin: r.margin,
                    holds: r.holds,
                })
            })
            .collect()
    }
}

pub fn run_lemma_campaign(cfg: &LemmaCampaign) -> Result<Vec<LemmaRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.ells.len() * cfg.instances_per_ell);
    for k in 0..cfg.ells.len() {
        rows.extend(cfg.run_ell(k)?);
    }
    Ok(rows)
}

/// `x = norm1/ℓ` everywhere and `y = 0`.
pub fn uniform_instance(ell: usize, norm1: f64) -> Result<LemmaInstance> {
    LemmaInstance::new(vec![norm1 / ell as f64; ell], vec![0.0; ell], DEFAULT_C)
}
