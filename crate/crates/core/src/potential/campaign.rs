//! Randomized falsification of the per-rotation potential bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::trace::BOUND_TOL;
use super::{PotentialSpec, PotentialTracker};
use crate::error::{QelError, Result};
use crate::linalg::Matrix;
use crate::model::{Gate, GateProgram, TrackedState};

#[derive(Debug, Clone)]
pub struct Theorem2Campaign {
    pub n: usize,
    /// Number of independent random programs, each with fresh preconditioners.
    pub programs: usize,
    pub gates_per_program: usize,
    /// Fraction of gates that are rotations.
    pub rotation_fraction: f64,
    /// Preconditioners are scaled to a spectral norm drawn from `(0, max]`.
    pub max_preconditioner_norm: f64,
    pub recompute_every: usize,
    pub seed: u64,
    pub histogram_bins: usize,
}

impl Default for Theorem2Campaign {
    fn default() -> Self {
        Theorem2Campaign {
            n: 128,
            programs: 2,
            gates_per_program: 10_000,
            rotation_fraction: 0.8,
            max_preconditioner_norm: 2.0,
            recompute_every: super::DEFAULT_RECOMPUTE_EVERY,
            seed: 0,
            histogram_bins: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolationRecord {
    pub program_index: usize,
    pub step: usize,
    pub delta: f64,
    pub bound: f64,
    /// Offending program, serialized up to and including the violating gate.
    pub program_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Report {
    pub rotation_steps: usize,
    pub constant_steps: usize,
    pub violations: Vec<BoundViolationRecord>,
    /// Largest `|delta| / bound` seen.
    pub max_ratio: f64,
    /// Counts of `|delta| / bound` in equal-width bins over `[0, 1]`; ratios
    /// above 1 land in the last bin.
    pub histogram: Vec<usize>,
    /// Largest `|delta|` over constant gates.
    pub max_constant_delta: f64,
}

impl Theorem2Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Gaussian matrix rescaled to spectral norm `norm`.
pub fn random_preconditioner(n: usize, norm: f64, rng: &mut impl Rng) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let s = g.spectral_norm();
    g.scaled(norm / s)
}

/// Random rotations on random row pairs, interleaved with random constant
/// gates `±e^u`, `u ∈ [-1/2, 1/2]`.
pub fn random_program(n: usize, len: usize, rotation_fraction: f64, rng: &mut impl Rng) -> Result<GateProgram> {
    let mut p = GateProgram::new(n)?;
    for _ in 0..len {
        let i = rng.gen_range(1..=n);
        if rng.gen_bool(rotation_fraction) {
            let mut i2 = rng.gen_range(1..n);
            if i2 >= i {
                i2 += 1;
            }
            let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            p.push(Gate::rotation(i, i2, theta))?;
        } else {
            let mag = rng.gen_range(-0.5f64..0.5).exp();
            let c = if rng.gen_bool(0.5) { mag } else { -mag };
            p.push(Gate::constant(i, c))?;
        }
    }
    Ok(p)
}

pub fn theorem2_campaign(cfg: &Theorem2Campaign) -> Result<Theorem2Report> {
    if cfg.n < 2 {
        return Err(QelError::InvalidDimension {
            n: cfg.n,
            reason: "rotations need n >= 2",
        });
    }
    let bins = cfg.histogram_bins.max(1);
    let mut report = Theorem2Report {
        rotation_steps: 0,
        constant_steps: 0,
        violations: Vec::new(),
        max_ratio: 0.0,
        histogram: vec![0; bins],
        max_constant_delta: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for program_index in 0..cfg.programs {
        let a_norm = rng.gen_range(0.0..cfg.max_preconditioner_norm);
        let b_norm = rng.gen_range(0.0..cfg.max_preconditioner_norm);
        let a = random_preconditioner(cfg.n, a_norm.max(1e-3), &mut rng);
        let b = random_preconditioner(cfg.n, b_norm.max(1e-3), &mut rng);
        let spec = PotentialSpec::preconditioned(a, b)?;
        let program = random_program(cfg.n, cfg.gates_per_program, cfg.rotation_fraction, &mut rng)?;
        let state = TrackedState::identity(cfg.n);
        let mut tracker = PotentialTracker::with_period(&spec, &state, cfg.recompute_every)?;
        for (k, gate) in program.gates().iter().enumerate() {
            let step = k + 1;
            match *gate {
                Gate::Rotation { i, i2, .. } => {
                    let bound = tracker.rotation_bound(i, i2).expect("single slice");
                    let delta = tracker.apply(gate).map_err(|e| e.at_step(step))?;
                    report.rotation_steps += 1;
                    let ratio = if bound > 0.0 { delta.abs() / bound } else { 0.0 };
                    report.max_ratio = report.max_ratio.max(ratio);
                    let bin = ((ratio * bins as f64) as usize).min(bins - 1);
                    report.histogram[bin] += 1;
                    if !(delta.abs() <= bound + BOUND_TOL) {
                        let prefix = GateProgram::from_gates(cfg.n, program.gates()[..step].to_vec())?;
                        report.violations.push(BoundViolationRecord {
                            program_index,
                            step,
                            delta,
                            bound,
                            program_text: prefix.to_text(),
                        });
                    }
                }
                Gate::Constant { .. } => {
                    let delta = tracker.apply(gate).map_err(|e| e.at_step(step))?;
                    report.constant_steps += 1;
                    report.max_constant_delta = report.max_constant_delta.max(delta.abs());
                }
            }
        }
    }
    Ok(report)
}
