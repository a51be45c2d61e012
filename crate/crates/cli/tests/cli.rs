//! End-to-end runs of every subcommand against temp files, plus the file
//! contracts: header shapes, metadata fields, bit-exact round-trips, and
//! byte-identical reruns.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::Parser;
use tikhonov_bands::{
    build_band, npiv_fit, npiv_residuals, simulate_npiv_dgp, BandMethod, BandRequest, Grid,
    KernelSpec, ProcessIndex,
};
use tikhonov_bands_cli::{execute, io, Cli, CliError};

fn run(args: &[&str]) -> Result<String, CliError> {
    let mut argv = vec!["tikhonov-bands"];
    argv.extend_from_slice(args);
    execute(Cli::try_parse_from(argv).expect("argv parses"))
}

fn write_npiv_csv(path: &Path, n: usize, seed: u64) {
    let data = simulate_npiv_dgp(n, 1.0, seed).unwrap();
    let mut out = String::from("y,z,w\n");
    for i in 0..n {
        let _ = writeln!(out, "{},{},{}", data.y()[i], data.z()[i], data.w()[i]);
    }
    fs::write(path, out).unwrap();
}

#[test]
fn npiv_writes_band_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_npiv_csv(&input, 150, 5);
    let out = dir.path().join("band.csv");
    let summary = run(&[
        "npiv",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--alpha",
        "0.2",
        "--h",
        "0.8",
    ])
    .unwrap();
    assert!(summary.contains("band.csv"));

    let band_csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = band_csv.lines().collect();
    assert_eq!(lines.len(), 101); // header + 100 grid points
    assert_eq!(lines[0], "z,estimate,lower,upper");
    assert!(band_csv.ends_with('\n'));

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(io::meta_path(&out)).unwrap()).unwrap();
    assert_eq!(meta["method"], "gauss");
    assert_eq!(meta["process"], 1);
    assert_eq!(meta["gamma"], 0.05);
    assert_eq!(meta["alpha"], 0.2);
    assert_eq!(meta["h"], 0.8);
    assert_eq!(meta["n"], 150);
    assert!(meta["half_width"].as_f64().unwrap() > 0.0);
    assert!(meta["norm_2inf"].as_f64().unwrap() > 0.0);

    // The half-width in the metadata matches the band geometry in the CSV.
    let row: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    let half = meta["half_width"].as_f64().unwrap();
    assert_eq!(row[3] - row[1], half);
}

#[test]
fn band_csv_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_npiv_dgp(120, 1.0, 9).unwrap();
    let grid = Grid::uniform(-1.0, 1.0, 50).unwrap();
    let fit = npiv_fit(&data, 0.2, 0.8, &grid, &grid, KernelSpec::Epanechnikov).unwrap();
    let res = npiv_residuals(&fit, ProcessIndex::Two, KernelSpec::Epanechnikov).unwrap();
    let req = BandRequest::new(BandMethod::Concentration, ProcessIndex::Two);
    let band = build_band(&fit, &res, &req).unwrap();
    let out = dir.path().join("band.csv");
    io::write_band_csv(&band, &out).unwrap();

    let content = fs::read_to_string(&out).unwrap();
    for (k, line) in content.lines().skip(1).enumerate() {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields[0].to_bits(), grid.point(k).to_bits());
        assert_eq!(fields[1].to_bits(), band.estimate.value(k).to_bits());
        assert_eq!(fields[2].to_bits(), band.lower.value(k).to_bits());
        assert_eq!(fields[3].to_bits(), band.upper.value(k).to_bits());
    }

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(io::meta_path(&out)).unwrap()).unwrap();
    assert_eq!(meta["half_width"].as_f64().unwrap(), band.half_width);
    assert_eq!(meta["method"], "concentration");
    assert_eq!(meta["h"], 0.8);
}

#[test]
fn identical_invocations_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_npiv_csv(&input, 100, 11);
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        run(&[
            "npiv",
            "--input",
            input.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--alpha",
            "0.15",
            "--h",
            "1",
            "--method",
            "concentration",
            "--process",
            "2",
            "--seed",
            "13",
        ])
        .unwrap();
    }
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());
    assert_eq!(
        fs::read(io::meta_path(&out1)).unwrap(),
        fs::read(io::meta_path(&out2)).unwrap()
    );
}

#[test]
fn funreg_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("curves.csv");
    let m = 12;
    let n = 25;
    let mut csv = String::from("y");
    for j in 1..=m {
        let _ = write!(csv, ",z_{j}");
    }
    for j in 1..=m {
        let _ = write!(csv, ",w_{j}");
    }
    csv.push('\n');
    let grid = Grid::uniform(0.0, 1.0, m).unwrap();
    for i in 0..n {
        let c = 0.5 + 0.05 * i as f64;
        let curve: Vec<f64> = grid.points().iter().map(|&t| c * (1.0 + t) + (i as f64 * 2.3).sin() * t * t).collect();
        let y: f64 = grid.delta() * curve.iter().map(|z| 0.8 * z).sum::<f64>();
        let _ = write!(csv, "{y}");
        for v in &curve {
            let _ = write!(csv, ",{v}");
        }
        for v in &curve {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    fs::write(&input, csv).unwrap();

    let out = dir.path().join("band.csv");
    let summary = run(&[
        "funreg",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--alpha",
        "0.05",
        "--method",
        "concentration",
    ])
    .unwrap();
    assert!(summary.contains("n = 25"));
    let lines = fs::read_to_string(&out).unwrap().lines().count();
    assert_eq!(lines, 1 + m);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(io::meta_path(&out)).unwrap()).unwrap();
    assert_eq!(meta["h"], serde_json::Value::Null);
    assert_eq!(meta["process"], 1);
}

#[test]
fn deconv_runs_with_builtin_and_tabulated_noise() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.csv");
    let mut csv = String::from("y\n");
    for i in 0..80 {
        let _ = writeln!(csv, "{}", (i as f64 * 0.61).sin());
    }
    fs::write(&input, csv).unwrap();

    let out = dir.path().join("phi.csv");
    run(&[
        "deconv",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--alpha",
        "0.1",
        "--noise",
        "epanechnikov:0.5",
        "--grid",
        "60",
    ])
    .unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 61);

    // Triangle density on [-1, 1] as a table.
    let table = dir.path().join("noise.csv");
    fs::write(&table, "u,f\n-1,0\n0,1\n1,0\n").unwrap();
    let out2 = dir.path().join("phi2.csv");
    run(&[
        "deconv",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
        "--alpha",
        "0.1",
        "--noise",
        &format!("table:{}", table.display()),
        "--z-bounds",
        "-2,2",
    ])
    .unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(io::meta_path(&out2)).unwrap()).unwrap();
    assert_eq!(meta["process"], 2);
}

#[test]
fn dkw_writes_ecdf_band() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let mut csv = String::from("x\n");
    for i in 0..200 {
        let _ = writeln!(csv, "{}", (i as f64 + 0.5) / 200.0);
    }
    fs::write(&input, csv).unwrap();
    let out = dir.path().join("ecdf.csv");
    run(&[
        "dkw",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--gamma",
        "0.1",
    ])
    .unwrap();
    let content = fs::read_to_string(&out).unwrap();
    assert!(content.starts_with("x,ecdf,lower,upper\n"));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(io::meta_path(&out)).unwrap()).unwrap();
    assert_eq!(meta["method"], "dkw");
    let want = ((2.0f64 / 0.1).ln() / 400.0).sqrt();
    assert_eq!(meta["half_width"].as_f64().unwrap(), want);
}

#[test]
fn mc_writes_report_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let summary = run(&[
        "mc",
        "--n",
        "120",
        "--reps",
        "3",
        "--alpha",
        "0.2",
        "--h",
        "0.8",
        "--grid",
        "25",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert!(summary.contains("3 replications"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["replications_used"], 3);
    assert_eq!(report["config"]["n"], 120);
    assert_eq!(report["config"]["method"], "gauss");
    assert_eq!(report["config"]["process_index"], 1);
    assert!(report["coverage"].as_f64().unwrap() >= 0.0);
}

#[test]
fn loader_errors_are_specific() {
    let dir = tempfile::tempdir().unwrap();

    let missing_col = dir.path().join("m.csv");
    fs::write(&missing_col, "y,z\n1,2\n3,4\n").unwrap();
    match io::load_npiv_csv(&missing_col) {
        Err(CliError::MissingColumn(c)) => assert_eq!(c, "w"),
        other => panic!("unexpected {other:?}"),
    }

    let bad_row = dir.path().join("b.csv");
    fs::write(&bad_row, "y,z,w\n1.0,0.1,0.5\n1.0,abc,0.5\n").unwrap();
    match io::load_npiv_csv(&bad_row) {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }

    let short = dir.path().join("s.csv");
    fs::write(&short, "y,z,w\n1,2,3\n").unwrap();
    assert!(matches!(io::load_npiv_csv(&short), Err(CliError::TooFewRows(1))));

    let ok = dir.path().join("ok.csv");
    fs::write(&ok, "y,z,w\n1,0.1,0.2\n2,0.3,0.1\n0.5,-0.2,0.0\n").unwrap();
    let data = io::load_npiv_csv(&ok).unwrap();
    assert_eq!(data.len(), 3);
}

#[test]
fn binary_reports_errors_on_stderr_with_nonzero_exit() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_tikhonov-bands"))
        .args(["npiv", "--input", "/nonexistent.csv", "--out", "/tmp/x.csv", "--alpha", "0.1", "--h", "1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error:"), "stderr: {stderr}");
    assert_eq!(stderr.lines().count(), 1);
}
