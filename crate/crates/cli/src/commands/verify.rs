use rayon::prelude::*;
use serde::Serialize;

use qel_core::lemma::{LemmaCampaign, LemmaRow, MAX_C};
use qel_core::model::{Gate, GateProgram};
use qel_core::potential::{theorem2_campaign, trace_potentials, PotentialSpec, Theorem2Campaign, TraceOptions};

use super::{pool, Outcome};
use crate::args::{LemmaArgs, Theorem2Args};
use crate::error::{config, CliResult};
use crate::output::write_rows;

#[derive(Debug, Serialize)]
struct LemmaCsvRow {
    seed: u64,
    ell: usize,
    #[serde(rename = "C")]
    c: f64,
    norm1: f64,
    lhs: f64,
    rhs: f64,
    margin: f64,
    holds: bool,
}

impl From<&LemmaRow> for LemmaCsvRow {
    fn from(r: &LemmaRow) -> Self {
        LemmaCsvRow {
            seed: r.seed,
            ell: r.ell,
            c: r.c,
            norm1: r.norm1,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            holds: r.holds,
        }
    }
}

pub fn cmd_verify_lemma(args: &LemmaArgs) -> CliResult<Outcome> {
    if !(0.0..=MAX_C).contains(&args.c) {
        return config(format!("C = {} outside [0, {MAX_C}]", args.c));
    }
    if args.instances == 0 {
        return config("--instances must be positive");
    }
    let cfg = LemmaCampaign {
        ells: args.ell_grid.clone(),
        instances_per_ell: args.instances,
        c: args.c,
        seed: args.seed,
    };
    cfg.validate()?;
    let per_ell: Vec<Vec<LemmaRow>> = pool()?.install(|| {
        (0..cfg.ells.len())
            .into_par_iter()
            .map(|k| cfg.run_ell(k))
            .collect::<Result<Vec<_>, _>>()
    })?;
    write_rows(
        args.output.out.as_deref(),
        per_ell.iter().flatten().map(LemmaCsvRow::from),
    )?;

    let mut out = Outcome::default();
    for rows in &per_ell {
        let ell = rows.first().map_or(0, |r| r.ell);
        let min = rows.iter().map(|r| r.margin).fold(f64::MAX, f64::min);
        let bad = rows.iter().filter(|r| !r.holds).count();
        out.note(format!("ell={ell}: {} instances, min margin {min:.6}, violations {bad}", rows.len()));
        out.check(bad == 0, || {
            let r = rows.iter().find(|r| !r.holds).expect("counted");
            format!("ell={ell}: {bad} violations; first seed {} norm1 {} margin {}", r.seed, r.norm1, r.margin)
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct HistogramRow {
    bin_lo: f64,
    bin_hi: f64,
    count: usize,
}

pub fn cmd_verify_theorem2(args: &Theorem2Args) -> CliResult<Outcome> {
    if args.n < 2 {
        return config("n must be at least 2");
    }
    if !(args.max_norm > 0.0 && args.max_norm <= 2.0) {
        return config(format!("--max-norm {} outside (0, 2]", args.max_norm));
    }
    let cfg = Theorem2Campaign {
        n: args.n,
        programs: args.programs,
        gates_per_program: args.gates,
        max_preconditioner_norm: args.max_norm,
        recompute_every: args.recompute_every.max(1),
        seed: args.seed,
        ..Theorem2Campaign::default()
    };
    let report = theorem2_campaign(&cfg)?;
    let bins = report.histogram.len() as f64;
    write_rows(
        args.output.out.as_deref(),
        report.histogram.iter().enumerate().map(|(k, &count)| HistogramRow {
            bin_lo: k as f64 / bins,
            bin_hi: (k + 1) as f64 / bins,
            count,
        }),
    )?;

    let mut out = Outcome::default();
    out.note(format!(
        "verify-theorem2 n={}: {} rotation steps, {} constant steps, {} violations",
        cfg.n,
        report.rotation_steps,
        report.constant_steps,
        report.violations.len()
    ));
    out.note(format!("max |delta|/bound = {:.6}", report.max_ratio));
    for v in &report.violations {
        out.failures.push(format!(
            "program {} step {}: |delta| = {} > bound {}\n{}",
            v.program_index,
            v.step,
            v.delta.abs(),
            v.bound,
            v.program_text
        ));
    }

    // Equality case: one π/4 rotation from the identity with A = B = Id.
    let witness = GateProgram::from_gates(cfg.n, vec![Gate::rotation(1, 2, std::f64::consts::FRAC_PI_4)])?;
    let tr = trace_potentials(&witness, &[PotentialSpec::plain(cfg.n)], TraceOptions::default())?;
    let r = &tr.trajectories[0].records[1];
    let ratio = r.delta.abs() / r.bound.unwrap_or(f64::NAN);
    out.note(format!("tightness witness |delta|/bound = {ratio:.12}"));
    out.check((ratio - 1.0).abs() <= 1e-9, || format!("tightness witness ratio {ratio}"));
    Ok(out)
}
