use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fgsim::output::SeriesTable;

fn fgsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fgsim"))
        .args(args)
        .env_remove("FGSIM_WORKERS")
        .output()
        .expect("spawn fgsim")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

const SMALL_RUN: [&str; 14] = [
    "trajectories",
    "--model",
    "hatano_nelson_dissipative",
    "--L",
    "4",
    "--samples",
    "37",
    "--seed",
    "9",
    "--t-max-gamma",
    "1",
    "--record-every",
    "20",
    "--per-trajectory",
];

#[test]
fn invalid_config_exits_with_the_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "experiment = \"trajectories\"\n\n[model]\nname = \"hatano_nelson_dissipative\"\nL = 0\n").unwrap();
    let o = fgsim(&["run", "--config", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("bad.toml:5"), "{msg}");
    assert!(msg.contains("model.L"), "{msg}");

    fs::write(&path, "[model]\nname = \"kitaev\"\nL = 4\n[time\n").unwrap();
    let o = fgsim(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:4"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_values_are_usage_errors() {
    let o = fgsim(&["trajectories", "--model", "ising"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_steps_exit_with_instability() {
    let dir = tempfile::tempdir().unwrap();
    let o = fgsim(&[
        "trajectories",
        "--model",
        "hatano_nelson_dissipative",
        "--L",
        "4",
        "--dt-gamma",
        "3",
        "--t-max-gamma",
        "6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn tables_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for workers in ["1", "2", "5"] {
        let out = dir.path().join(format!("w{workers}"));
        let mut args = SMALL_RUN.to_vec();
        args.extend(["--workers", workers, "--out", out.to_str().unwrap()]);
        let o = fgsim(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        outs.push(csv_files(&out));
    }
    assert!(outs[0].iter().any(|(n, _)| n == "trajectories.csv"));
    assert!(outs[0].len() >= 7);
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
}

#[test]
fn circuit_tables_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}"));
        let o = fgsim(&[
            "circuit", "--L", "8", "--samples", "20", "--layers", "15", "--p", "0.2", "--seed", "4", "--workers", workers,
            "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outs.push(csv_files(&out));
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let mut args = SMALL_RUN.to_vec();
    args.extend(["--out", first.to_str().unwrap()]);
    assert!(fgsim(&args).status.success());

    let second = dir.path().join("second");
    let manifest = first.join("manifest.toml");
    let o = fgsim(&["run", "--config", manifest.to_str().unwrap(), "--out", second.to_str().unwrap(), "--workers", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_files(&first), csv_files(&second));

    let a = fs::read_to_string(&manifest).unwrap();
    let b = fs::read_to_string(second.join("manifest.toml")).unwrap();
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("wall_time_seconds") && !l.starts_with("workers") && !l.starts_with("dir ="))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn stderr_shrinks_as_inverse_square_root_of_samples() {
    let dir = tempfile::tempdir().unwrap();
    let mut mean_err = Vec::new();
    for n in ["100", "400"] {
        let out = dir.path().join(n);
        let o = fgsim(&[
            "trajectories", "--model", "hatano_nelson_dissipative", "--L", "4", "--samples", n, "--seed", "21",
            "--t-max-gamma", "2", "--record-every", "20", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let t = SeriesTable::read(&out.join("n_total.csv")).unwrap();
        assert_eq!(t.n, n.parse::<usize>().unwrap());
        // Skip t = 0, where every sample agrees.
        let errs = &t.stderr[1..];
        mean_err.push(errs.iter().sum::<f64>() / errs.len() as f64);
    }
    let ratio = mean_err[0] / mean_err[1];
    assert!(ratio > 1.6 && ratio < 2.5, "ratio {ratio}");
}

#[test]
fn oracle_check_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("oracle");
    let o = fgsim(&["run", "--experiment", "oracle_check", "--max-modes", "4", "--cases", "100", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(out.join("oracle_report.csv")).unwrap();
    let rows: Vec<&str> = report.lines().skip(1).collect();
    assert!(rows.len() >= 8);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{report}");

    let r = fgsim(&["report", out.to_str().unwrap()]);
    assert!(r.status.success());
    let text = String::from_utf8_lossy(&r.stdout);
    assert!(text.contains("oracle_check") && text.contains("negativity_calibration"));
}

#[test]
fn lindblad_run_writes_snapshot_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l");
    let o = fgsim(&["lindblad", "--model", "kitaev", "--L", "6", "--t-max", "3", "--dt", "0.01", "--record-every", "50", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let snap = fgsim::output::StateSnapshot::load(&out.join("final_state.json")).unwrap();
    assert_eq!(snap.n_modes, 6);
    assert!(snap.to_state().is_ok());
    let t = SeriesTable::read(&out.join("mixed_ln.csv")).unwrap();
    assert_eq!(t.x.len(), 7);
    assert!((t.x[6] - 3.0).abs() < 1e-12);
}

#[test]
fn workers_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env");
    let mut args = SMALL_RUN.to_vec();
    args.extend(["--out", out.to_str().unwrap()]);
    let o = Command::new(env!("CARGO_BIN_EXE_fgsim")).args(&args).env("FGSIM_WORKERS", "3").output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(text.lines().any(|l| l == "workers = 3"), "{text}");
}
