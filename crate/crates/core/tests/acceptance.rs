//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qel_core::lemma::{check_lemma, run_lemma_campaign, uniform_instance, LemmaCampaign};
use qel_core::model::{program_matrix, Gate, GateProgram, InverseCheck};
use qel_core::perturbation::{
    exact_inverse_perturbation, hat_preconditioners, inverse_remainder, perturbation_endpoint_potentials,
    perturbation_matrix, synth_perturbation, Route,
};
use qel_core::potential::{
    hat_quasi_entropy, k_slice_quasi_entropy, quasi_entropy, random_program, theorem2_campaign,
    trace_potentials, PotentialSpec, Theorem2Campaign, TraceOptions, Trajectory,
};
use qel_core::transforms::{fast_wht_program, wht_matrix};
use qel_core::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

const EPS_EXPONENTS: [i32; 6] = [3, 4, 5, 6, 7, 8];

fn eps_grid() -> impl Iterator<Item = f64> {
    EPS_EXPONENTS.iter().map(|&k| 2f64.powi(-k))
}

fn pow2(lo: u32, hi: u32) -> impl Iterator<Item = usize> {
    (lo..=hi).map(|k| 1usize << k)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn band(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::MIN, f64::max);
    let lo = values.iter().copied().fold(f64::MAX, f64::min);
    hi / lo
}

fn exact_potentials() -> Check {
    let mut worst = 0.0f64;
    for n in pow2(1, 10) {
        let id = quasi_entropy(&Matrix::identity(n)).map_err(e2s)?;
        ensure(id.abs() <= 1e-9, || format!("Phi(Id_{n}) = {id}"))?;
        let want = n as f64 * (n as f64).log2();
        let got = quasi_entropy(&wht_matrix(n).map_err(e2s)?).map_err(e2s)?;
        let r = rel(got, want);
        worst = worst.max(r);
        ensure(r <= 1e-9, || format!("Phi(F_{n}) = {got}, want {want}"))?;
    }
    Ok(format!("n = 2..1024, worst relative error {worst:.1e}"))
}

fn fft_program() -> Check {
    let mut worst = 0.0f64;
    for n in pow2(1, 10) {
        let p = fast_wht_program(n).map_err(e2s)?;
        let want_rot = n / 2 * n.trailing_zeros() as usize;
        ensure(p.rotation_count() == want_rot, || {
            format!("n = {n}: {} rotations, want {want_rot}", p.rotation_count())
        })?;
        let err = program_matrix(&p).map_err(e2s)?.frobenius_distance(&wht_matrix(n).map_err(e2s)?);
        worst = worst.max(err);
        ensure(err <= 1e-10, || format!("n = {n}: Frobenius error {err:e}"))?;
    }
    Ok(format!("n = 2..1024, worst Frobenius error {worst:.1e}"))
}

fn rotation_bound() -> Check {
    let cfg = Theorem2Campaign::default();
    let r = theorem2_campaign(&cfg).map_err(e2s)?;
    ensure(r.rotation_steps >= 10_000, || format!("only {} rotation steps", r.rotation_steps))?;
    ensure(r.passed(), || {
        let v = &r.violations[0];
        format!(
            "{} violations; first at program {} step {}: |delta| = {} > bound = {}",
            r.violations.len(),
            v.program_index,
            v.step,
            v.delta.abs(),
            v.bound
        )
    })?;
    let p = GateProgram::from_gates(128, vec![Gate::rotation(1, 2, std::f64::consts::FRAC_PI_4)]).map_err(e2s)?;
    let out = trace_potentials(&p, &[PotentialSpec::plain(128)], TraceOptions::default()).map_err(e2s)?;
    let rec = &out.trajectories[0].records[1];
    let ratio = rec.delta.abs() / rec.bound.unwrap_or(f64::NAN);
    ensure((ratio - 1.0).abs() <= 1e-9, || format!("tightness witness ratio {ratio}"))?;
    Ok(format!(
        "n = {}, {} rotation steps, 0 violations, max |delta|/bound = {:.4}, witness ratio = {ratio:.12}",
        cfg.n, r.rotation_steps, r.max_ratio
    ))
}

fn constant_invariance() -> Check {
    let mut programs: Vec<(String, GateProgram)> = Vec::new();
    for n in pow2(1, 8) {
        programs.push((format!("wht n={n}"), fast_wht_program(n).map_err(e2s)?));
    }
    for n in pow2(2, 8) {
        for eps in [0.125, 2f64.powi(-6)] {
            let plan = synth_perturbation(n, eps, Route::FastKronecker).map_err(e2s)?;
            programs.push((format!("fast n={n} eps={eps}"), plan.program));
        }
    }
    for n in pow2(2, 5) {
        let plan = synth_perturbation(n, 0.125, Route::AppendixB).map_err(e2s)?;
        programs.push((format!("appendix n={n}"), plan.program));
    }
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        programs.push((format!("random seed={seed}"), random_program(32, 4000, 0.8, &mut rng).map_err(e2s)?));
    }
    let opts = TraceOptions {
        track_kappa: false,
        enforce_bound: false,
        ..TraceOptions::default()
    };
    let (mut worst, mut count) = (0.0f64, 0usize);
    for (name, p) in &programs {
        let out = trace_potentials(p, &[PotentialSpec::plain(p.n())], opts).map_err(e2s)?;
        for r in &out.trajectories[0].records {
            if let Some(Gate::Constant { .. }) = r.gate {
                count += 1;
                worst = worst.max(r.delta.abs());
                ensure(r.delta.abs() <= 1e-12, || format!("{name}: step {} delta {:e}", r.step, r.delta))?;
            }
        }
    }
    Ok(format!(
        "{} programs, {count} constant gates, max |delta| = {worst:.1e}",
        programs.len()
    ))
}

fn perturbation_synthesis() -> Check {
    let mut worst_err = 0.0f64;
    let mut worst_kappa_slack = f64::MAX;
    let mut plans = 0;
    for n in pow2(1, 9) {
        let target_tol = 1e-9 * n as f64;
        for eps in eps_grid() {
            let target = perturbation_matrix(n, eps).map_err(e2s)?;
            let kappa_max = (1.0 + eps) / (1.0 - eps) + 1e-9;
            for route in [Route::FastKronecker, Route::AppendixB] {
                let plan = synth_perturbation(n, eps, route).map_err(e2s)?;
                plans += 1;
                let err = program_matrix(&plan.program).map_err(e2s)?.frobenius_distance(&target);
                worst_err = worst_err.max(err / n as f64);
                ensure(err <= target_tol, || format!("{route} n={n} eps={eps}: error {err:e}"))?;
                ensure(plan.kappa_certificate <= kappa_max, || {
                    format!("{route} n={n} eps={eps}: kappa {}", plan.kappa_certificate)
                })?;
                worst_kappa_slack = worst_kappa_slack.min(kappa_max - plan.kappa_certificate);
                if route == Route::FastKronecker {
                    let want = n * n.trailing_zeros() as usize + n;
                    ensure(plan.program.len() == want, || {
                        format!("n={n}: {} gates, want {want}", plan.program.len())
                    })?;
                }
            }
        }
    }
    Ok(format!(
        "{plans} plans, n = 2..512, worst error/n = {worst_err:.1e}, min kappa slack = {worst_kappa_slack:.1e}"
    ))
}

/// Closed-form endpoint values at n = 64 from an independent dense
/// evaluation: (exponent k of eps = 2^-k, plain, precond Id/F, hat).
const ANCHORS_64: [(i32, f64, f64, f64); 6] = [
    (3, -13.43118777034946, 55.81823938799931, 95.63647877599865),
    (4, -3.814546115494135, 33.09978450957422, 47.25567186578756),
    (5, -1.0741394913782023, 18.57640796673289, 23.558546091448356),
    (6, -0.2991156332980199, 10.278088662575346, 11.770643541661368),
    (7, -0.08245663007036769, 5.631803342395236, 5.884244070451482),
    (8, -0.022535882861124616, 3.0620547763980817, 2.9419873535120726),
];

fn endpoint_values() -> Check {
    for n in pow2(1, 10) {
        let (p, q) = hat_preconditioners(n).map_err(e2s)?;
        let v = hat_quasi_entropy(&Matrix::identity(n), &p, &q).map_err(e2s)?;
        ensure(v == 0.0, || format!("hat(Id_{n}) = {v}"))?;
    }
    for n in pow2(11, 12) {
        let v = perturbation_endpoint_potentials(n, 0.0).map_err(e2s)?.hat;
        ensure(v == 0.0, || format!("hat(Id_{n}) = {v}"))?;
    }
    for &(k, plain, pre, hat) in &ANCHORS_64 {
        let e = perturbation_endpoint_potentials(64, 2f64.powi(-k)).map_err(e2s)?;
        for (got, want, what) in [(e.plain, plain, "plain"), (e.precond_id_f, pre, "precond"), (e.hat, hat, "hat")] {
            ensure(rel(got, want) <= 1e-9, || format!("n=64 eps=2^-{k} {what}: {got} vs anchor {want}"))?;
        }
    }
    let (mut plain_r, mut pre_r, mut hat_r) = (Vec::new(), Vec::new(), Vec::new());
    for n in pow2(6, 12) {
        let lg = (n as f64).log2();
        for eps in eps_grid() {
            let e = perturbation_endpoint_potentials(n, eps).map_err(e2s)?;
            ensure(e.plain < 0.0, || format!("plain >= 0 at n={n} eps={eps}"))?;
            ensure(e.precond_id_f > 0.0, || format!("precond <= 0 at n={n} eps={eps}"))?;
            ensure(e.hat > 0.0, || format!("hat <= 0 at n={n} eps={eps}"))?;
            plain_r.push(-e.plain / (eps * eps * n as f64 * lg));
            pre_r.push(e.precond_id_f / (eps * n as f64 * lg));
            hat_r.push(e.hat / (eps * n as f64 * lg));
        }
    }
    let (bp, bq, bh) = (band(&plain_r), band(&pre_r), band(&hat_r));
    ensure(bp <= 4.0 && bq <= 4.0 && bh <= 4.0, || format!("bands {bp:.3} {bq:.3} {bh:.3}"))?;
    Ok(format!(
        "grid n = 64..4096 x eps = 2^-3..2^-8; band widths plain x{bp:.3}, precond x{bq:.3}, hat x{bh:.3}"
    ))
}

struct PerturbationTraces {
    /// eps exponent -> [(n, max |delta hat| / (eps log2(1/eps)))]
    drift: BTreeMap<i32, Vec<(usize, f64)>>,
    /// (n, eps exponent, spec, endpoint discrepancy vs from-scratch value)
    fidelity: Vec<(usize, i32, &'static str, f64)>,
    max_k1_ratio: f64,
}

fn max_ratio(t: &Trajectory) -> f64 {
    t.records
        .iter()
        .filter_map(|r| r.bound.map(|b| if b > 0.0 { r.delta.abs() / b } else { 0.0 }))
        .fold(0.0, f64::max)
}

fn perturbation_traces() -> Result<PerturbationTraces, String> {
    let mut out = PerturbationTraces {
        drift: BTreeMap::new(),
        fidelity: Vec::new(),
        max_k1_ratio: 0.0,
    };
    for n in pow2(6, 10) {
        let f = wht_matrix(n).map_err(e2s)?;
        let id = Matrix::identity(n);
        let (p, q) = hat_preconditioners(n).map_err(e2s)?;
        let specs = vec![
            PotentialSpec::plain(n),
            PotentialSpec::preconditioned(id, f).map_err(e2s)?,
            PotentialSpec::hat(&p, &q).map_err(e2s)?,
        ];
        let opts = TraceOptions {
            enforce_bound: false,
            inverse_check: if n <= 256 { InverseCheck::default() } else { InverseCheck::disabled() },
            ..TraceOptions::default()
        };
        for &k in &EPS_EXPONENTS {
            let eps = 2f64.powi(-k);
            let plan = synth_perturbation(n, eps, Route::FastKronecker).map_err(e2s)?;
            let tr = trace_potentials(&plan.program, &specs, opts).map_err(e2s)?;
            let hat = &tr.trajectories[2];
            let c_obs = hat.max_abs_delta() / (eps * (1.0 / eps).log2());
            out.drift.entry(k).or_default().push((n, c_obs));
            out.max_k1_ratio = out.max_k1_ratio.max(max_ratio(&tr.trajectories[0])).max(max_ratio(&tr.trajectories[1]));
            let closed = perturbation_endpoint_potentials(n, eps).map_err(e2s)?;
            let names = ["plain", "precond", "hat"];
            let closed_vals = [closed.plain, closed.precond_id_f, closed.hat];
            for s in 0..3 {
                let fin = tr.trajectories[s].final_value();
                out.fidelity.push((n, k, names[s], (fin - closed_vals[s]).abs()));
                if n <= 256 {
                    let direct = k_slice_quasi_entropy(tr.state.m(), &specs[s]).map_err(e2s)?;
                    out.fidelity.push((n, k, names[s], (fin - direct).abs()));
                }
            }
        }
    }
    for n in pow2(1, 8) {
        let p = fast_wht_program(n).map_err(e2s)?;
        let tr = trace_potentials(&p, &[PotentialSpec::plain(n)], TraceOptions::default()).map_err(e2s)?;
        let direct = quasi_entropy(tr.state.m()).map_err(e2s)?;
        out.fidelity.push((n, 0, "wht plain", (tr.trajectories[0].final_value() - direct).abs()));
    }
    Ok(out)
}

fn drift_stability(t: &PerturbationTraces) -> Check {
    let mut parts = Vec::new();
    for (k, row) in &t.drift {
        let vals: Vec<f64> = row.iter().map(|&(_, c)| c).collect();
        ensure(vals.iter().all(|c| c.is_finite() && *c > 0.0), || format!("eps=2^-{k}: {vals:?}"))?;
        let b = band(&vals);
        ensure(b <= 4.0, || format!("eps=2^-{k}: C_obs band x{b:.3} over n: {row:?}"))?;
        let hi = vals.iter().copied().fold(0.0, f64::max);
        parts.push(format!("2^-{k}: C_obs<={hi:.4} (x{b:.3})"));
    }
    Ok(format!("n = 64..1024; {}", parts.join(", ")))
}

fn tracking_fidelity(t: &PerturbationTraces) -> Check {
    let mut worst_small = 0.0f64;
    let mut worst = 0.0f64;
    for &(n, k, what, d) in &t.fidelity {
        let tol = if n <= 256 { 1e-8 } else { 1e-6 };
        ensure(d <= tol, || format!("n={n} eps=2^-{k} {what}: discrepancy {d:e}"))?;
        if n <= 256 {
            worst_small = worst_small.max(d);
        } else {
            worst = worst.max(d);
        }
    }
    Ok(format!(
        "{} endpoint comparisons; worst {worst_small:.1e} (n<=256), {worst:.1e} (n>256); single-slice |delta|/bound <= {:.4}",
        t.fidelity.len(),
        t.max_k1_ratio
    ))
}

fn lemma_campaign() -> Check {
    let cfg = LemmaCampaign::default();
    let rows = run_lemma_campaign(&cfg).map_err(e2s)?;
    ensure(rows.len() == cfg.ells.len() * cfg.instances_per_ell, || format!("{} rows", rows.len()))?;
    let fails = rows.iter().filter(|r| !r.holds).count();
    ensure(fails == 0, || {
        let r = rows.iter().find(|r| !r.holds).unwrap();
        format!("{fails} violations; first seed {} ell {} margin {}", r.seed, r.ell, r.margin)
    })?;
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::MAX, f64::min);
    for &ell in &cfg.ells {
        for norm1 in [1.0, 0.5, 2f64.powi(-10)] {
            let r = check_lemma(&uniform_instance(ell, norm1).map_err(e2s)?).map_err(e2s)?;
            ensure((r.margin - 10.0).abs() <= 1e-9, || format!("uniform ell={ell} norm1={norm1}: margin {}", r.margin))?;
        }
    }
    Ok(format!(
        "{} instances over ell = {:?}, C = {}, 0 violations, min margin {min_margin:.4}",
        rows.len(),
        cfg.ells,
        cfg.c
    ))
}

fn inverse_identity() -> Check {
    let (mut worst_prod, mut worst_z) = (0.0f64, 0.0f64);
    for n in pow2(1, 9) {
        for eps in eps_grid().chain([0.1]) {
            let prod = perturbation_matrix(n, eps)
                .map_err(e2s)?
                .matmul(&exact_inverse_perturbation(n, eps).map_err(e2s)?);
            let d = prod.max_abs_diff(&Matrix::identity(n));
            worst_prod = worst_prod.max(d);
            ensure(d <= 1e-12, || format!("n={n} eps={eps}: product off by {d:e}"))?;
            let z = inverse_remainder(n, eps).map_err(e2s)?.spectral_norm();
            let want = eps * eps / (1.0 - eps);
            worst_z = worst_z.max(rel(z, want));
            ensure(rel(z, want) <= 1e-9, || format!("n={n} eps={eps}: |Z| = {z}, want {want}"))?;
        }
    }
    Ok(format!(
        "n = 2..512; worst |P·P^-1 - Id|_max = {worst_prod:.1e}, worst |Z| relative error {worst_z:.1e}"
    ))
}

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    elapsed: Duration,
    budget: Option<Duration>,
    detail: String,
}

fn timed(id: u32, name: &'static str, budget: Option<Duration>, f: impl FnOnce() -> Check) -> Line {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let over = budget.is_some_and(|b| elapsed > b);
    let (pass, mut detail) = match res {
        Ok(d) => (!over, d),
        Err(d) => (false, d),
    };
    if over {
        detail.push_str(" [over time budget]");
    }
    Line {
        id,
        name,
        pass,
        elapsed,
        budget,
        detail,
    }
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let mut lines = vec![
        timed(1, "exact potentials", secs(10), exact_potentials),
        timed(2, "fft program", secs(30), fft_program),
        timed(3, "rotation bound campaign", secs(120), rotation_bound),
        timed(4, "constant-gate invariance", None, constant_invariance),
        timed(5, "perturbation synthesis", secs(120), perturbation_synthesis),
        timed(6, "endpoint values", secs(300), endpoint_values),
    ];
    let start = Instant::now();
    let traces = perturbation_traces();
    let trace_time = start.elapsed();
    for (id, name, check) in [
        (7u32, "per-step hat drift", drift_stability as fn(&PerturbationTraces) -> Check),
        (8, "incremental tracking fidelity", tracking_fidelity),
    ] {
        let mut line = timed(id, name, None, || match &traces {
            Ok(t) => check(t),
            Err(e) => Err(e.clone()),
        });
        line.elapsed += trace_time;
        lines.push(line);
    }
    lines.push(timed(9, "lemma campaign", secs(60), lemma_campaign));
    lines.push(timed(10, "inverse identity", None, inverse_identity));

    for l in &lines {
        let budget = l.budget.map_or(String::new(), |b| format!(" / {}s", b.as_secs()));
        println!(
            "[{}] criterion {:>2} {} ({:.1}s{budget}): {}",
            if l.pass { "PASS" } else { "FAIL" },
            l.id,
            l.name,
            l.elapsed.as_secs_f64(),
            l.detail
        );
    }
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("acceptance: {passed}/{} criteria passed", lines.len());
    if passed == lines.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
