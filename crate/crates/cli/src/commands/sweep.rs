use rayon::prelude::*;
use serde::Serialize;

use qel_core::perturbation::perturbation_endpoint_potentials;

use super::{check_eps, check_n, pool, warn_if_eps_tiny, Outcome};
use crate::args::SweepArgs;
use crate::error::{config, CliResult};
use crate::output::write_rows;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub eps: f64,
    pub plain: f64,
    /// `eps²·n·log₂n`
    pub plain_scale: f64,
    /// `-plain / plain_scale`
    pub plain_ratio: f64,
    pub precond_id_f: f64,
    /// `eps·n·log₂n`
    pub precond_scale: f64,
    pub precond_ratio: f64,
    pub hat: f64,
    pub hat_scale: f64,
    pub hat_ratio: f64,
}

fn sweep_point(n: usize, eps: f64) -> CliResult<SweepRow> {
    let e = perturbation_endpoint_potentials(n, eps)?;
    let nl = n as f64 * (n as f64).log2();
    let (s2, s1) = (eps * eps * nl, eps * nl);
    Ok(SweepRow {
        n,
        eps,
        plain: e.plain,
        plain_scale: s2,
        plain_ratio: -e.plain / s2,
        precond_id_f: e.precond_id_f,
        precond_scale: s1,
        precond_ratio: e.precond_id_f / s1,
        hat: e.hat,
        hat_scale: s1,
        hat_ratio: e.hat / s1,
    })
}

fn band(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::MAX, f64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
    hi / lo
}

pub fn cmd_scaling_sweep(args: &SweepArgs) -> CliResult<Outcome> {
    if args.n_grid.is_empty() || args.eps_grid.is_empty() {
        return config("grids must be nonempty");
    }
    for &n in &args.n_grid {
        check_n(n)?;
    }
    for &eps in &args.eps_grid {
        check_eps(eps)?;
    }
    let points: Vec<(usize, f64)> = args
        .n_grid
        .iter()
        .flat_map(|&n| args.eps_grid.iter().map(move |&e| (n, e)))
        .collect();
    for &(n, eps) in &points {
        warn_if_eps_tiny(n, eps);
    }
    let rows: Vec<SweepRow> = pool()?.install(|| {
        points
            .par_iter()
            .map(|&(n, eps)| sweep_point(n, eps))
            .collect::<CliResult<Vec<_>>>()
    })?;
    write_rows(args.output.out.as_deref(), &rows)?;

    let mut out = Outcome::default();
    out.note(format!("scaling-sweep: {} grid points", rows.len()));
    for r in &rows {
        out.check(r.plain < 0.0, || format!("plain potential {} >= 0 at n={} eps={}", r.plain, r.n, r.eps));
        if r.eps <= 0.125 {
            out.check(r.precond_id_f > 0.0, || {
                format!("precond potential {} <= 0 at n={} eps={}", r.precond_id_f, r.n, r.eps)
            });
            out.check(r.hat > 0.0, || format!("hat potential {} <= 0 at n={} eps={}", r.hat, r.n, r.eps));
        }
    }
    for &eps in &args.eps_grid {
        let at = || rows.iter().filter(move |r| r.eps == eps);
        let bands = [
            ("plain", band(at().map(|r| r.plain_ratio))),
            ("precond", band(at().map(|r| r.precond_ratio))),
            ("hat", band(at().map(|r| r.hat_ratio))),
        ];
        out.note(format!(
            "eps={eps}: ratio bands over n: plain x{:.3}, precond x{:.3}, hat x{:.3}",
            bands[0].1, bands[1].1, bands[2].1
        ));
        for (what, b) in bands {
            out.check(b <= args.band, || format!("eps={eps}: {what} ratio band x{b:.3} exceeds x{}", args.band));
        }
    }
    Ok(out)
}
