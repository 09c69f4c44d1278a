use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qel"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn qel")
}

fn run_to(dir: &TempDir, name: &str, args: &[&str]) -> (Output, String) {
    let path = dir.path().join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_owned();
    full.extend(["--out", &p]);
    let out = qel(&full);
    let csv = fs::read_to_string(&path).unwrap_or_default();
    (out, csv)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn assert_matches_golden(csv: &str, golden: &Path) {
    let want = fs::read_to_string(golden).unwrap();
    assert_eq!(csv.lines().next(), want.lines().next(), "header");
    let (got, want) = (rows(csv), rows(&want));
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        for (a, b) in g.iter().zip(w) {
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => assert!((x - y).abs() <= 1e-12, "{x} vs {y} in {g:?}"),
                _ => assert_eq!(a, b),
            }
        }
    }
}

fn golden(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn run_wht_small_traces_match_golden() {
    let dir = TempDir::new().unwrap();
    for n in [2, 4] {
        let (out, csv) = run_to(&dir, "t.csv", &["run-wht", "--n", &n.to_string()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
        assert_matches_golden(&csv, &golden(&format!("run_wht_n{n}.csv")));
    }
}

#[test]
fn run_wht_n2_by_hand() {
    let dir = TempDir::new().unwrap();
    let (_, csv) = run_to(&dir, "t.csv", &["run-wht", "--n", "2"]);
    let r = rows(&csv);
    assert_eq!(r.len(), 3);
    assert_eq!(r[0][1], "init");
    assert_eq!(r[1][1], "rotation");
    assert_eq!(r[2][1], "constant");
    // Four entries of 1/2 after the butterfly: 4 * (1/2) = 2.
    assert_eq!(r[1][5].parse::<f64>().unwrap(), 2.0);
    assert_eq!(r[2][6].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn run_wht_default_reaches_n_log_n() {
    let out = qel(&["run-wht"]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    let last = rows(&csv).pop().unwrap();
    assert!((last[5].parse::<f64>().unwrap() - 24.0).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&out.stderr).contains("final potential = 24"));
}

#[test]
fn plot_data_has_two_columns() {
    let dir = TempDir::new().unwrap();
    let (out, csv) = run_to(&dir, "p.csv", &["run-wht", "--n", "4", "--plot-data"]);
    assert_eq!(code(&out), 0);
    assert_eq!(csv.lines().next(), Some("step,potential"));
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn run_perturbation_reports_and_succeeds() {
    let dir = TempDir::new().unwrap();
    let (out, csv) = run_to(&dir, "p.csv", &["run-perturbation", "--n", "64", "--eps", "0.015625"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("kappa certificate"), "{stdout}");
    assert_eq!(rows(&csv).len(), 449);
}

#[test]
fn k_slice_file_is_read() {
    let dir = TempDir::new().unwrap();
    let slices = dir.path().join("s.txt");
    fs::write(&slices, "n 2 2\n1 0\n0 1\nn 2 2\n1 0\n0 1\n").unwrap();
    let (out, csv) = run_to(
        &dir,
        "t.csv",
        &["run-wht", "--n", "2", "--potential", "k-slice", "--slices", slices.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_matches_golden(&csv, &golden("run_wht_n2.csv"));

    fs::write(&slices, "n 2 2\n1 0\n0 1\n").unwrap();
    let out = qel(&["run-wht", "--n", "2", "--potential", "k-slice", "--slices", slices.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_arguments_exit_2() {
    for args in [
        &["run-wht", "--n", "6"][..],
        &["run-perturbation", "--eps", "0.5"],
        &["run-perturbation", "--eps", "0"],
        &["verify-lemma", "--c", "0.2"],
        &["scaling-sweep", "--n-grid", "100"],
        &["no-such-command"],
    ] {
        assert_eq!(code(&qel(args)), 2, "{args:?}");
    }
}

#[test]
fn oversized_lemma_constant_is_rejected_before_sampling() {
    let dir = TempDir::new().unwrap();
    let (out, csv) = run_to(&dir, "l.csv", &["verify-lemma", "--c", "0.13"]);
    assert_eq!(code(&out), 2);
    assert!(csv.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("C = 0.13"));
}

#[test]
fn failed_assertion_exits_1() {
    // A band of x1 cannot hold over more than one n.
    let out = qel(&["scaling-sweep", "--n-grid", "64,128", "--eps-grid", "0.125", "--band", "1.0"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let lemma = ["verify-lemma", "--instances", "50", "--seed", "7", "--ell-grid", "64,256"];
    let (a, x) = run_to(&dir, "a.csv", &lemma);
    let (b, y) = run_to(&dir, "b.csv", &lemma);
    assert_eq!((code(&a), code(&b)), (0, 0));
    assert!(!x.is_empty());
    assert_eq!(x, y);

    let (_, z) = run_to(&dir, "c.csv", &["verify-lemma", "--instances", "50", "--seed", "8", "--ell-grid", "64,256"]);
    assert_ne!(x, z);

    let thm = ["verify-theorem2", "--n", "16", "--gates", "500", "--seed", "3"];
    let (a, x) = run_to(&dir, "d.csv", &thm);
    let (b, y) = run_to(&dir, "e.csv", &thm);
    assert_eq!((code(&a), code(&b)), (0, 0));
    assert_eq!(x, y);
    let stdout = String::from_utf8_lossy(&a.stdout);
    assert!(stdout.contains("tightness witness |delta|/bound = 1.000000000000"), "{stdout}");
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qel"))
            .args(["scaling-sweep", "--n-grid", "64,128,256", "--eps-grid", "0.125,0.0625"])
            .env("QEL_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&run("zero")), 2);
}
