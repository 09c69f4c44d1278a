use super::{PotentialSpec, PotentialTracker, DEFAULT_RECOMPUTE_EVERY};
use crate::error::{QelError, Result};
use crate::model::{
    run_program_with, ConditionMode, ConditionTracker, Gate, GateProgram, InverseCheck,
    StepObserver, TrackedState,
};

/// Slack allowed above the per-rotation bound.
pub const BOUND_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// 0 for the initial record, otherwise the 1-based gate index.
    pub step: usize,
    pub gate: Option<Gate>,
    pub value: f64,
    pub delta: f64,
    /// Per-rotation bound, for single-slice specs and rotation steps.
    pub bound: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TraceRecord>,
}

impl Trajectory {
    pub fn initial_value(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.value)
    }

    pub fn final_value(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.value)
    }

    pub fn max_abs_delta(&self) -> f64 {
        self.records.iter().map(|r| r.delta.abs()).fold(0.0, f64::max)
    }

    /// `|Σ delta − (final − initial)|`.
    pub fn telescoping_error(&self) -> f64 {
        let sum: f64 = self.records.iter().map(|r| r.delta).sum();
        (sum - (self.final_value() - self.initial_value())).abs()
    }

    pub fn max_kappa(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.kappa)
            .fold(None, |acc, k| Some(acc.map_or(k, |a: f64| a.max(k))))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    pub recompute_every: usize,
    pub inverse_check: InverseCheck,
    pub track_kappa: bool,
    /// Fail the trace when a rotation exceeds its bound by more than
    /// [`BOUND_TOL`].
    pub enforce_bound: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            recompute_every: DEFAULT_RECOMPUTE_EVERY,
            inverse_check: InverseCheck::default(),
            track_kappa: true,
            enforce_bound: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceOutput {
    pub trajectories: Vec<Trajectory>,
    pub state: TrackedState,
    pub trackers: Vec<PotentialTracker>,
}

struct TraceObserver {
    trackers: Vec<PotentialTracker>,
    trajectories: Vec<Trajectory>,
    condition: Option<ConditionTracker>,
    enforce_bound: bool,
}

impl StepObserver for TraceObserver {
    fn on_step(&mut self, step: usize, gate: &Gate, state: &TrackedState) -> Result<()> {
        let kappa = match &mut self.condition {
            Some(c) => Some(c.observe(gate, state.m())?),
            None => None,
        };
        for (tracker, traj) in self.trackers.iter_mut().zip(&mut self.trajectories) {
            let bound = match *gate {
                Gate::Rotation { i, i2, .. } => tracker.rotation_bound(i, i2),
                Gate::Constant { .. } => None,
            };
            let delta = tracker.apply(gate)?;
            if let Some(b) = bound {
                if self.enforce_bound && !(delta.abs() <= b + BOUND_TOL) {
                    return Err(QelError::BoundViolation {
                        step,
                        delta,
                        bound: b,
                    });
                }
            }
            traj.records.push(TraceRecord {
                step,
                gate: Some(*gate),
                value: tracker.value(),
                delta,
                bound,
                kappa,
            });
        }
        Ok(())
    }
}

/// Runs `program` from the identity and records every spec's potential after
/// each gate, with a step-0 record for the initial value.
pub fn trace_potentials(
    program: &GateProgram,
    specs: &[PotentialSpec],
    opts: TraceOptions,
) -> Result<TraceOutput> {
    let n = program.n();
    let start = TrackedState::with_check(n, opts.inverse_check);
    let trackers = specs
        .iter()
        .map(|s| PotentialTracker::with_period(s, &start, opts.recompute_every))
        .collect::<Result<Vec<_>>>()?;
    let trajectories = trackers
        .iter()
        .map(|t| Trajectory {
            records: vec![TraceRecord {
                step: 0,
                gate: None,
                value: t.value(),
                delta: 0.0,
                bound: None,
                kappa: opts.track_kappa.then_some(1.0),
            }],
        })
        .collect();
    let mut obs = TraceObserver {
        trackers,
        trajectories,
        condition: opts
            .track_kappa
            .then(|| ConditionTracker::new(n, ConditionMode::Structured)),
        enforce_bound: opts.enforce_bound,
    };
    let state = run_program_with(program, opts.inverse_check, &mut [&mut obs])?;
    Ok(TraceOutput {
        trajectories: obs.trajectories,
        state,
        trackers: obs.trackers,
    })
}
