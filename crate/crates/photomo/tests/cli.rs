use std::path::Path;
use std::process::{Command, Output};

use photomo::io::{read_density, read_table, sidecar_path};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn photomo(args: &[&str]) -> Run {
    let Output { status, stdout, stderr } = Command::new(env!("CARGO_BIN_EXE_photomo"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: status.code().unwrap_or(-1),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let r = photomo(args);
    assert_eq!(r.code, 0, "{args:?}\nstderr: {}", r.stderr);
    r.stdout
}

fn value(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse::<f64>().unwrap()))
        .unwrap_or_else(|| panic!("no `{key}` in {stdout}"))
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn gen(dir: &Path, name: &str, state: &str, dim: &str) -> String {
    let out = p(dir, name);
    ok(&["gen-state", "--state", state, "--dim", dim, "--out", &out]);
    out
}

const SMALL_GRID: [&str; 6] = ["--rmax", "4.5", "--nr", "8", "--ntheta", "8"];

#[test]
fn gen_state_examples() {
    let dir = tempfile::tempdir().unwrap();
    let f2 = gen(dir.path(), "f2.json", "fock:2", "5");
    let rho = read_density(Path::new(&f2)).unwrap();
    assert_eq!(rho.photon_distribution(), vec![0.0, 0.0, 1.0, 0.0, 0.0]);

    let out = ok(&["gen-state", "--state", "coherent:1,0", "--dim", "30", "--out", &p(dir.path(), "c.json")]);
    assert!((value(&out, "p0") - (-1.0f64).exp()).abs() < 1e-12);
    let out = ok(&["gen-state", "--state", "thermal:0.5", "--dim", "40", "--out", &p(dir.path(), "t.json")]);
    assert!((value(&out, "p0") - 2.0 / 3.0).abs() < 1e-12);
    assert!(value(&out, "leakage") < 1e-6);
}

#[test]
fn simulate_vacuum_rows() {
    let dir = tempfile::tempdir().unwrap();
    let vac = gen(dir.path(), "v.json", "vacuum", "6");
    let table = p(dir.path(), "v.csv");
    let mut args = vec!["simulate", &vac, "--dim", "6", "--nmax", "4", "--out", &table];
    args.extend(SMALL_GRID);
    ok(&args);
    let t = read_table(Path::new(&table)).unwrap();
    assert_eq!(t.len(), 64);
    for (a, row) in t.alphas().iter().zip(t.rows()) {
        assert!((row[0] - (-a.norm_sqr()).exp()).abs() < 1e-14);
    }
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("alpha_re,alpha_im,n,p\n"));
    let side = std::fs::read_to_string(sidecar_path(Path::new(&table))).unwrap();
    for key in ["\"eta\"", "\"zeta_mag\"", "\"zeta_phase\"", "\"n_max\"", "\"shots\"", "\"grid\""] {
        assert!(side.contains(key), "{key} missing from {side}");
    }
}

#[test]
fn seeded_sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let st = gen(dir.path(), "c.json", "coherent:0.8,0.2", "12");
    let mut files = Vec::new();
    for (name, seed) in [("a.csv", "5"), ("b.csv", "5"), ("c.csv", "6")] {
        let out = p(dir.path(), name);
        let mut args = vec!["simulate", &st, "--dim", "12", "--nmax", "8", "--shots", "1000", "--seed", seed, "--out", &out];
        args.extend(SMALL_GRID);
        ok(&args);
        let csv = std::fs::read(&out).unwrap();
        let side = std::fs::read(sidecar_path(Path::new(&out))).unwrap();
        files.push((csv, side));
    }
    assert_eq!(files[0], files[1]);
    assert_ne!(files[0].0, files[2].0);
    let text = String::from_utf8(files[0].0.clone()).unwrap();
    assert!(text.starts_with("alpha_re,alpha_im,n,count\n"));
}

#[test]
fn full_pipeline_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(dir.path(), "run.json");
    std::fs::write(
        &cfg,
        r#"{"state": "cat:0.9,0.3", "dim": 14, "n_max": 10, "eta": 0.8, "s": "auto", "shots": 20000, "seed": 11,
            "grid": {"r_max": 4.5, "n_r": 12, "n_theta": 16}}"#,
    )
    .unwrap();
    let mut reports = Vec::new();
    for run in 0..2 {
        let st = p(dir.path(), &format!("s{run}.json"));
        let table = p(dir.path(), &format!("t{run}.csv"));
        let report = p(dir.path(), &format!("r{run}.json"));
        ok(&["--config", &cfg, "gen-state", "--out", &st]);
        ok(&["--config", &cfg, "simulate", &st, "--out", &table]);
        ok(&["--config", &cfg, "reconstruct", &table, "--out", &report]);
        reports.push((
            std::fs::read(&st).unwrap(),
            std::fs::read(&table).unwrap(),
            std::fs::read(&report).unwrap(),
        ));
    }
    assert_eq!(reports[0], reports[1]);
    let report: serde_json::Value = serde_json::from_slice(&reports[0].2).unwrap();
    for key in ["rho_hat", "raw_trace", "hermiticity_defect", "min_eig_before_clip", "params", "grid", "n_trunc_err"] {
        assert!(report.get(key).is_some(), "{key}");
    }
    let s = report["params"]["s"].as_f64().unwrap();
    assert!((s - (-1.0 - 0.25) / 2.0).abs() < 1e-12, "auto s = {s}");
}

#[test]
fn reconstruct_round_trip_and_default_s() {
    let dir = tempfile::tempdir().unwrap();
    let st = gen(dir.path(), "f1.json", "fock:1", "20");
    let table = p(dir.path(), "f1.csv");
    ok(&["simulate", &st, "--rmax", "4.5", "--out", &table]);
    let out = ok(&["reconstruct", &table, "--truth", &st, "--out", &p(dir.path(), "r.json")]);
    assert_eq!(value(&out, "s "), -0.5);
    assert!(value(&out, "fidelity") >= 0.99, "{out}");
    let cmp = ok(&["compare", &st, &p(dir.path(), "r.json")]);
    assert!(value(&cmp, "fidelity") >= 0.99);
}

#[test]
fn inadmissible_efficiency_quotes_requirement() {
    let dir = tempfile::tempdir().unwrap();
    let st = gen(dir.path(), "v.json", "vacuum", "8");
    let table = p(dir.path(), "v.csv");
    let mut args = vec!["simulate", &st, "--dim", "8", "--nmax", "5", "--eta", "0.4", "--out", &table];
    args.extend(SMALL_GRID);
    ok(&args);
    let r = photomo(&["reconstruct", &table, "--dim", "8", "--out", &p(dir.path(), "r.json")]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("Delta^2 > (1 - eta)/eta = 1.5"), "{}", r.stderr);
    let r = photomo(&["reconstruct", &table, "--dim", "8", "--s", "-0.6", "--out", &p(dir.path(), "r.json")]);
    assert_eq!(r.code, 2);
    assert!(!Path::new(&p(dir.path(), "r.json")).exists());
}

#[test]
fn compare_examples() {
    let dir = tempfile::tempdir().unwrap();
    let f0 = gen(dir.path(), "f0.json", "fock:0", "30");
    let f1 = gen(dir.path(), "f1.json", "fock:1", "30");
    let c1 = gen(dir.path(), "c1.json", "coherent:1,0", "30");
    let same = ok(&["compare", &f1, &f1]);
    assert!((value(&same, "fidelity") - 1.0).abs() < 1e-12);
    assert!(value(&same, "trace_distance").abs() < 1e-12);
    assert!(value(&ok(&["compare", &f0, &f1]), "fidelity").abs() < 1e-12);
    let fc = value(&ok(&["compare", &f0, &c1]), "fidelity");
    assert!((fc - (-1.0f64).exp()).abs() < 1e-10, "{fc}");
}

#[test]
fn qscan_examples() {
    let dir = tempfile::tempdir().unwrap();
    let vac = gen(dir.path(), "v.json", "vacuum", "6");
    let q = p(dir.path(), "q.csv");
    let out = ok(&["qscan", &vac, "--out", &q]);
    assert!((value(&out, "integral") - 1.0).abs() < 1e-6);
    let mut rdr = csv::Reader::from_path(&q).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["alpha_re", "alpha_im", "value"]);
    for rec in rdr.deserialize::<(f64, f64, f64)>() {
        let (re, im, v) = rec.unwrap();
        assert!((v - (-(re * re + im * im)).exp()).abs() < 1e-12);
    }
    let w = p(dir.path(), "w.csv");
    let out = ok(&["qscan", &vac, "--kind", "wigner", "--out", &w]);
    assert!((value(&out, "integral") - 1.0).abs() < 1e-6);
    for rec in csv::Reader::from_path(&w).unwrap().deserialize::<(f64, f64, f64)>() {
        let (re, im, v) = rec.unwrap();
        assert!((v - 2.0 * (-2.0 * (re * re + im * im)).exp()).abs() < 1e-12);
    }
    let chi = p(dir.path(), "chi.csv");
    ok(&["qscan", &vac, "--kind", "chi", "--nr", "4", "--ntheta", "4", "--out", &chi]);
    let mut rdr = csv::Reader::from_path(&chi).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["xi_re", "xi_im", "chi_re", "chi_im"]);
    assert_eq!(rdr.records().count(), 16);

    let table = p(dir.path(), "t.csv");
    ok(&["simulate", &vac, "--dim", "6", "--nmax", "3", "--out", &table]);
    let out = ok(&["qscan", &table, "--out", &p(dir.path(), "tq.csv")]);
    assert_eq!(value(&out, "s "), -1.0);
    assert!((value(&out, "integral") - 1.0).abs() < 1e-6);
}

#[test]
fn validation_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "x.json");
    for bad in [
        vec!["gen-state", "--eta", "1.5", "--out", &out],
        vec!["gen-state", "--eta", "0", "--out", &out],
        vec!["gen-state", "--dim", "20", "--nmax", "20", "--out", &out],
        vec!["gen-state", "--s", "0.5", "--out", &out],
        vec!["gen-state", "--s", "-0.5", "--eta", "0.4", "--out", &out],
        vec!["gen-state", "--state", "fock:x", "--out", &out],
        vec!["gen-state", "--state", "fock:40", "--dim", "10", "--nmax", "5", "--out", &out],
        vec!["gen-state", "--shots", "many", "--out", &out],
        vec!["gen-state"],
        vec!["frobnicate"],
    ] {
        let r = photomo(&bad);
        assert_eq!(r.code, 2, "{bad:?}: {}", r.stderr);
    }
    let cfg = p(dir.path(), "bad.json");
    std::fs::write(&cfg, r#"{"dim": 10, "unknown_field": 1}"#).unwrap();
    assert_eq!(photomo(&["--config", &cfg, "gen-state", "--out", &out]).code, 2);
    assert_eq!(photomo(&["compare", &p(dir.path(), "missing.json"), &out]).code, 1);
}

#[test]
fn forward_cutoff_exhaustion_is_a_convergence_failure() {
    let dir = tempfile::tempdir().unwrap();
    let vac = gen(dir.path(), "v.json", "vacuum", "6");
    let r = photomo(&[
        "simulate", &vac, "--dim", "6", "--nmax", "4", "--eta", "0.9", "--rmax", "45", "--nr", "4", "--ntheta", "4",
        "--out", &p(dir.path(), "t.csv"),
    ]);
    assert_eq!(r.code, 3, "{}", r.stderr);
}
