mod sweep;
mod trace;
mod verify;

pub use sweep::{cmd_scaling_sweep, SweepRow};
pub use trace::{cmd_run_perturbation, cmd_run_wht};
pub use verify::{cmd_verify_lemma, cmd_verify_theorem2};

use crate::error::{config, CliResult};

/// Human-readable summary of a run and the assertions it failed.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outcome {
    pub summary: Vec<String>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub(crate) fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub(crate) fn check(&mut self, cond: bool, msg: impl FnOnce() -> String) {
        if !cond {
            self.failures.push(msg());
        }
    }
}

pub(crate) fn check_n(n: usize) -> CliResult<()> {
    if n < 2 || !n.is_power_of_two() {
        return config(format!("n = {n} must be a power of two >= 2"));
    }
    Ok(())
}

pub(crate) fn check_eps(eps: f64) -> CliResult<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return config(format!("eps = {eps} must lie in (0, 1/2)"));
    }
    Ok(())
}

pub(crate) fn warn_if_eps_tiny(n: usize, eps: f64) {
    if 1.0 / eps > n as f64 {
        log::warn!("1/eps = {} exceeds n = {n}; results are outside the intended regime", 1.0 / eps);
    }
}

/// Thread pool sized by `QEL_THREADS` when set, otherwise rayon's default.
pub(crate) fn pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("QEL_THREADS") {
        let t: usize = v
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| crate::error::CliError::Config(format!("QEL_THREADS = {v:?} is not a positive integer")))?;
        b = b.num_threads(t);
    }
    b.build()
        .map_err(|e| crate::error::CliError::Config(format!("thread pool: {e}")))
}
