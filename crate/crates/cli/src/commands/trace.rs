use std::fs;

use qel_core::linalg::parse_matrices;
use qel_core::model::{GateProgram, InverseCheck};
use qel_core::perturbation::{hat_preconditioners, perturbation_endpoint_potentials, synth_perturbation, Route};
use qel_core::potential::{
    k_slice_quasi_entropy, trace_potentials, PotentialSpec, TraceOptions, TraceOutput, BOUND_TOL,
};
use qel_core::transforms::wht_matrix;
use qel_core::Matrix;

use super::{check_eps, check_n, warn_if_eps_tiny, Outcome};
use crate::args::{PotentialKind, TraceArgs};
use crate::error::{config, CliResult};
use crate::output::write_trace;

/// Beyond this size the O(n³) inverse cross-check is skipped.
const INVERSE_CHECK_MAX_N: usize = 512;
/// Beyond this size the endpoint is not re-evaluated densely.
const DENSE_CHECK_MAX_N: usize = 1024;

pub(crate) fn build_spec(kind: PotentialKind, n: usize, args: &TraceArgs) -> CliResult<PotentialSpec> {
    Ok(match kind {
        PotentialKind::Plain => PotentialSpec::plain(n),
        PotentialKind::PrecondIdF => PotentialSpec::preconditioned(Matrix::identity(n), wht_matrix(n)?)?,
        PotentialKind::HatPq => {
            let (p, q) = hat_preconditioners(n)?;
            PotentialSpec::hat(&p, &q)?
        }
        PotentialKind::KSlice => {
            let Some(path) = &args.slices else {
                return config("--potential k-slice needs --slices <file>");
            };
            let mats = parse_matrices(&fs::read_to_string(path)?)?;
            if mats.is_empty() || mats.len() % 2 != 0 {
                return config(format!(
                    "{} holds {} matrices; expected A_1 B_1 ... A_k B_k",
                    path.display(),
                    mats.len()
                ));
            }
            let mut it = mats.into_iter();
            let mut slices = Vec::new();
            while let (Some(a), Some(b)) = (it.next(), it.next()) {
                slices.push((a, b));
            }
            let spec = PotentialSpec::new(slices)?;
            if spec.n() != n {
                return config(format!("slices are {0}x{0} but n = {n}", spec.n()));
            }
            spec
        }
    })
}

fn trace_options(n: usize, args: &TraceArgs) -> CliResult<TraceOptions> {
    if args.recompute_every == 0 {
        return config("--recompute-every must be positive");
    }
    let inverse_check = if n <= INVERSE_CHECK_MAX_N {
        InverseCheck {
            period: Some(args.recompute_every),
            ..InverseCheck::default()
        }
    } else {
        InverseCheck::disabled()
    };
    Ok(TraceOptions {
        recompute_every: args.recompute_every,
        inverse_check,
        track_kappa: true,
        enforce_bound: false,
    })
}

/// Assertions shared by every trace: the per-rotation bound and telescoping.
fn check_trace(out: &mut Outcome, tr: &TraceOutput) {
    let t = &tr.trajectories[0];
    let violations: Vec<_> = t
        .records
        .iter()
        .filter(|r| r.bound.is_some_and(|b| !(r.delta.abs() <= b + BOUND_TOL)))
        .collect();
    out.check(violations.is_empty(), || {
        let r = violations[0];
        format!(
            "{} rotations exceed their bound; first at step {}: |delta| = {} > {}",
            violations.len(),
            r.step,
            r.delta.abs(),
            r.bound.unwrap_or(f64::NAN)
        )
    });
    let tele = t.telescoping_error();
    out.check(tele <= 1e-8, || format!("deltas do not telescope: error {tele:e}"));
    let ratio = t
        .records
        .iter()
        .filter_map(|r| r.bound.map(|b| if b > 0.0 { r.delta.abs() / b } else { 0.0 }))
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    if let Some(ratio) = ratio {
        out.note(format!("max |delta|/bound = {ratio:.6}"));
    }
    if let Some(k) = t.max_kappa() {
        out.note(format!("max kappa = {k:.12}"));
    }
}

fn check_endpoint(out: &mut Outcome, n: usize, value: f64, reference: f64, what: &str) {
    let tol = if n <= 256 { 1e-8 } else { 1e-6 };
    let d = (value - reference).abs();
    out.note(format!("{what}: tracked {value} vs from-scratch {reference} (|diff| = {d:.3e})"));
    out.check(d <= tol, || format!("{what}: tracked endpoint off by {d:e} (tol {tol:e})"));
}

fn run_trace(program: &GateProgram, spec: &PotentialSpec, args: &TraceArgs) -> CliResult<TraceOutput> {
    let tr = trace_potentials(program, std::slice::from_ref(spec), trace_options(program.n(), args)?)?;
    write_trace(args.output.out.as_deref(), &tr.trajectories[0], args.plot_data)?;
    Ok(tr)
}

pub fn cmd_run_wht(args: &TraceArgs) -> CliResult<Outcome> {
    let n = args.n.unwrap_or(8);
    check_n(n)?;
    let kind = args.potential.unwrap_or(PotentialKind::Plain);
    let spec = build_spec(kind, n, args)?;
    let program = qel_core::transforms::fast_wht_program(n)?;
    let tr = run_trace(&program, &spec, args)?;
    let t = &tr.trajectories[0];
    let mut out = Outcome::default();
    out.note(format!(
        "run-wht n={n}: {} gates ({} rotations)",
        program.len(),
        program.rotation_count()
    ));
    out.note(format!("final potential = {}", t.final_value()));
    out.note(format!("max |delta| = {}", t.max_abs_delta()));
    check_trace(&mut out, &tr);
    if n <= DENSE_CHECK_MAX_N {
        let direct = k_slice_quasi_entropy(tr.state.m(), &spec)?;
        check_endpoint(&mut out, n, t.final_value(), direct, "endpoint");
    }
    Ok(out)
}

pub fn cmd_run_perturbation(args: &TraceArgs) -> CliResult<Outcome> {
    let n = args.n.unwrap_or(64);
    check_n(n)?;
    check_eps(args.eps)?;
    warn_if_eps_tiny(n, args.eps);
    let eps = args.eps;
    let kind = args.potential.unwrap_or(PotentialKind::HatPq);
    let spec = build_spec(kind, n, args)?;
    let route: Route = args.route.into();
    let plan = synth_perturbation(n, eps, route)?;
    let tr = run_trace(&plan.program, &spec, args)?;
    let t = &tr.trajectories[0];

    let mut out = Outcome::default();
    let lg = (n as f64).log2();
    let log_inv_eps = (1.0 / eps).log2();
    let drift = t.max_abs_delta();
    let gates = plan.program.len();
    out.note(format!("run-perturbation n={n} eps={eps} route={route}"));
    out.note(format!("endpoint potential = {}", t.final_value()));
    out.note(format!("max |delta| = {drift}"));
    out.note(format!("max |delta| / (eps*log2(1/eps)) = {:.6}", drift / (eps * log_inv_eps)));
    out.note(format!(
        "gates = {gates} ({} rotations); gates / (n*log2(n)/log2(1/eps)) = {:.6}",
        plan.program.rotation_count(),
        gates as f64 / (n as f64 * lg / log_inv_eps)
    ));
    out.note(format!("kappa certificate = {:.12}", plan.kappa_certificate));
    check_trace(&mut out, &tr);
    let reference = match kind {
        PotentialKind::KSlice if n > DENSE_CHECK_MAX_N => None,
        PotentialKind::KSlice => Some(k_slice_quasi_entropy(tr.state.m(), &spec)?),
        _ => {
            let e = perturbation_endpoint_potentials(n, eps)?;
            Some(match kind {
                PotentialKind::Plain => e.plain,
                PotentialKind::PrecondIdF => e.precond_id_f,
                _ => e.hat,
            })
        }
    };
    if let Some(r) = reference {
        check_endpoint(&mut out, n, t.final_value(), r, "endpoint");
    }
    Ok(out)
}
