use std::process::Command;

use seqdec_cli::{run_with, COLUMNS};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("seqdec").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(csv_text: &str, row: usize, column: &str) -> String {
    let idx = COLUMNS.iter().position(|c| *c == column).unwrap();
    csv_text
        .lines()
        .nth(row + 1)
        .unwrap()
        .split(',')
        .nth(idx)
        .unwrap()
        .to_string()
}

fn bpsk_closed_form(ns: f64) -> f64 {
    let c2 = (-4.0 * ns).exp();
    0.5 * (1.0 - (1.0 - c2).powi(2))
}

#[test]
fn holevo_capacity_at_one_photon() {
    let (code, out, _) = run(&["capacity", "--type", "holevo", "--eta", "1", "--ns", "1"]);
    assert_eq!((code, out.as_str()), (0, "2.000000\n"));
}

#[test]
fn capacity_table_lists_each_energy() {
    let (code, out, _) = run(&["capacity", "--type", "private", "--eta", "0.5", "--ns", "0.3,2"]);
    assert_eq!(code, 0);
    assert_eq!(out, "ns,capacity\n0.3,0.000000\n2,0.000000\n");
}

#[test]
fn bpsk_exact_error_takes_one_of_two_closed_forms() {
    // A random n=1, M=2 codebook is either antipodal or two copies of the
    // same symbol.
    let antipodal = bpsk_closed_form(0.25);
    let mut seen = [false; 2];
    for seed in 0..12 {
        let seed = seed.to_string();
        let (code, out, _) = run(&[
            "simulate", "comm", "--prior", "bpsk", "--n", "1", "--M", "2", "--ns", "0.25", "--engine", "gram",
            "--exact", "--trials", "10", "--seed", &seed,
        ]);
        assert_eq!(code, 0);
        let exact: f64 = field(&out, 0, "exact_err").parse().unwrap();
        if (exact - antipodal).abs() < 1e-12 {
            seen[0] = true;
        } else {
            assert!((exact - 0.5).abs() < 1e-9, "seed {seed}: {exact}");
            seen[1] = true;
        }
    }
    assert_eq!(seen, [true, true]);
    let (_, out, _) = run(&[
        "simulate", "comm", "--prior", "bpsk", "--n", "1", "--M", "2", "--ns", "0.25", "--engine", "gram", "--exact",
        "--seed", "4",
    ]);
    let exact: f64 = field(&out, 0, "exact_err").parse().unwrap();
    assert!((exact - 0.300_212).abs() < 1e-6);
}

#[test]
fn sen_suite_reports_no_violations() {
    let (code, out, _) = run(&[
        "verify",
        "--suite",
        "sen",
        "--samples",
        "1000",
        "--dim",
        "6",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "violations: 0"), "{out}");
}

#[test]
fn typicality_suite_reports_the_three_properties() {
    let (code, out, _) = run(&[
        "verify",
        "--suite",
        "typicality",
        "--p",
        "0.89,0.11",
        "--n",
        "20",
        "--delta",
        "0.1",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("size: 190 "), "{out}");
    assert!(out.contains("violations: 0"));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let args = [
        "simulate",
        "comm",
        "--prior",
        "gaussian",
        "--n",
        "2",
        "--M",
        "5",
        "--ns",
        "0.7",
        "--trials",
        "3000",
        "--seed",
        "11",
        "--codebooks",
        "3",
    ];
    let (code, first, _) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(first, run(&args).1);
    assert_eq!(first.lines().next().unwrap(), COLUMNS.join(","));
}

#[test]
fn single_point_sweep_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("point.json");
    let output = dir.path().join("point.csv");
    std::fs::write(
        &config,
        r#"{"family": "reading_III", "prior": "uniform_phase", "n": [1], "M": [3], "ns": [0.4],
            "trials": 2000, "seed": 5}"#,
    )
    .unwrap();
    let (code, _, err) = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let swept = std::fs::read_to_string(&output).unwrap();
    assert!(!dir.path().join("point.csv.partial").exists());
    let (_, simulated, _) = run(&[
        "simulate", "reading", "--prior", "uniform", "--n", "1", "--M", "3", "--ns", "0.4", "--trials", "2000",
        "--seed", "5",
    ]);
    assert_eq!(swept, simulated);
}

#[test]
fn sweep_rows_recompute_rate_and_bracket_the_mean() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.json");
    std::fs::write(
        &config,
        r#"{"family": "coherent", "prior": "bpsk_amp", "engine": "gram", "n": [3, 1], "rate": [0.5, 1.0],
            "ns": [0.2, 0.6], "eta": [1.0, 0.7], "trials": 400, "seed": 2}"#,
    )
    .unwrap();
    let (code, out, _) = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(code, 0);
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 16);
    let mut keys = Vec::new();
    for r in &rows {
        let get = |c: &str| -> f64 { r[COLUMNS.iter().position(|x| *x == c).unwrap()].parse().unwrap() };
        assert!((get("rate_bits") - get("M").log2() / get("n")).abs() < 1e-15);
        assert!(get("err_ci_lo") <= get("err_mean") && get("err_mean") <= get("err_ci_hi"));
        assert_eq!(get("wall_ms"), 0.0);
        keys.push((r[3].to_string(), r[4].to_string(), r[6].to_string(), r[7].to_string()));
    }
    // n = [3, 1] and eta = [1.0, 0.7] keep their listed order.
    assert_eq!(keys[0], ("3".into(), "3".into(), "0.2".into(), "1.0".into()));
    assert_eq!(keys[1].3, "0.7");
    assert_eq!(keys[4].1, "8");
    assert_eq!(keys[8].0, "1");
}

#[test]
fn argument_errors_exit_with_two() {
    for args in [
        &["bogus"][..],
        &["capacity", "--type", "holevo"],
        &["simulate", "comm", "--prior", "bpsk", "--n", "1", "--ns", "0.2"],
        &[
            "simulate", "comm", "--prior", "nope", "--n", "1", "--M", "2", "--ns", "0.2",
        ],
        &[
            "simulate", "comm", "--prior", "ppm", "--n", "2", "--M", "2", "--ns", "0.2", "--engine", "cpn", "--exact",
        ],
        &[
            "simulate", "reading", "--prior", "bpsk", "--n", "1", "--M", "2", "--ns", "0.2", "--eta", "0.5",
        ],
        &["sweep", "--config", "/nonexistent/config.json"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(!err.trim().is_empty());
    }
}

#[test]
fn numerical_errors_exit_with_one() {
    // A three-level truncation cannot hold a coherent state of 4 photons.
    let (code, _, err) = run(&[
        "simulate", "comm", "--prior", "bpsk", "--n", "1", "--M", "2", "--ns", "4", "--engine", "fock", "--cutoff",
        "3", "--trials", "10",
    ]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("cutoff"), "{err}");
}

#[test]
fn binary_honours_output_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_seqdec"))
        .args([
            "simulate", "comm", "--prior", "ppm", "--n", "3", "--ns", "0.5", "--engine", "cpn",
        ])
        .args(["--trials", "500", "--output", "ppm.csv"])
        .env("SEQDEC_OUTPUT_DIR", dir.path())
        .env("SEQDEC_WORKERS", "1")
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("ppm.csv")).unwrap();
    assert_eq!(field(&text, 0, "exact_err"), "");
    assert_eq!(field(&text, 0, "engine"), "cpn");

    let bad = Command::new(env!("CARGO_BIN_EXE_seqdec"))
        .args(["capacity", "--type", "holevo", "--ns", "1"])
        .env("SEQDEC_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
