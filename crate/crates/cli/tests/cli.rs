use std::path::Path;
use std::process::{Command, Output};

use trikoorn_core::{Builder, SparseOp, TriParams};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trikoorn")).current_dir(dir).args(args).output().unwrap()
}

fn coefficient_rows(text: &str) -> Vec<(i64, i64, f64)> {
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn build_op_counts_entries() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["build-op", "--name", "diff_y", "--N", "4", "--out", "dy.mtx"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let op = SparseOp::import(&dir.path().join("dy.mtx")).unwrap();
    assert_eq!(op.nnz(), 10);
    assert_eq!(op, Builder::DiffY.build(4, TriParams::abc(0.0, 0.0, 0.0).unwrap()).unwrap());
    assert!(dir.path().join("dy.toml").exists());

    let o = run(&["build-op", "--name", "diff_y", "--N", "0", "--out", "empty.mtx"], dir.path());
    assert!(o.status.success());
    assert_eq!(SparseOp::import(&dir.path().join("empty.mtx")).unwrap().nnz(), 0);
}

#[test]
fn build_op_default_path_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["build-op", "--name", "conv_a", "--N", "3", "--a", "0.5", "--b", "-0.5", "--c", "1"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("conv_a.mtx")).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    let op = SparseOp::import(&dir.path().join("conv_a.mtx")).unwrap();
    assert_eq!(op.domain.params, TriParams::abc(0.5, -0.5, 1.0).unwrap());
}

#[test]
fn expand_matches_multiplication_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["expand", "--input", "one", "--N", "2", "--a", "1"], dir.path());
    assert!(o.status.success());
    let rows = coefficient_rows(&String::from_utf8_lossy(&o.stdout));
    assert_eq!(rows.len(), 6);
    assert!((rows[0].2 - 1.0).abs() < 1e-13);
    assert!(rows[1..].iter().all(|r| r.2.abs() < 1e-13));

    // x·P_{0,0} from the a = 1 basis lands in the a = 0 basis.
    let o = run(&["expand", "--input", "x", "--N", "1"], dir.path());
    let rows = coefficient_rows(&String::from_utf8_lossy(&o.stdout));
    let mx = Builder::MultX.build(0, TriParams::abc(1.0, 0.0, 0.0).unwrap()).unwrap();
    let col = mx.to_dense().column(0).into_owned();
    for (i, r) in rows.iter().enumerate() {
        assert!((r.2 - col[i]).abs() < 1e-13, "{r:?} vs {}", col[i]);
    }
    assert!((rows[0].2 - 1.0 / 3.0).abs() < 1e-13 && (rows[1].2 - 1.0 / 3.0).abs() < 1e-13);
}

#[test]
fn expand_from_samples_and_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let mut samples = String::from("x,y,value\n");
    for i in 0..6 {
        for j in 0..(6 - i) {
            let (x, y) = (i as f64 / 6.0, j as f64 / 6.0);
            samples.push_str(&format!("{x},{y},{}\n", 1.0 + 2.0 * x - y));
        }
    }
    std::fs::write(dir.path().join("s.csv"), samples).unwrap();
    let o = run(&["expand", "--input", "s.csv", "--N", "1", "--out", "fit.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit = coefficient_rows(&std::fs::read_to_string(dir.path().join("fit.csv")).unwrap());

    let o = run(&["expand", "--input", "fit.csv", "--N", "1"], dir.path());
    assert!(o.status.success());
    let again = coefficient_rows(&String::from_utf8_lossy(&o.stdout));
    assert_eq!(fit.len(), again.len());
    for (a, b) in fit.iter().zip(&again) {
        assert!((a.2 - b.2).abs() < 1e-15);
    }
}

#[test]
fn solve_writes_coefficients_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        run(&["solve", "--lambda", "-1.5", "--rhs", "runge", "--N", "6", "--grid", "4", "--out", "u.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual="));
    let grid = std::fs::read_to_string(dir.path().join("u.grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 15);
    assert_eq!(coefficient_rows(&std::fs::read_to_string(dir.path().join("u.csv")).unwrap()).len(), 28);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run(args, dir.path()).status.code();

    // Resonance: λ equals the eigenvalue 0 of the constant block.
    assert_eq!(code(&["solve", "--lambda", "0", "--rhs", "one", "--N", "3"]), Some(3));
    assert_eq!(code(&["build-op", "--name", "diff_x", "--a", "-1.5"]), Some(3));
    assert_eq!(code(&["build-op", "--name", "no_such_op"]), Some(2));
    assert_eq!(code(&["verify", "--suite", "nope"]), Some(2));
    assert_eq!(code(&["expand", "--input", "missing.csv"]), Some(2));

    std::fs::write(dir.path().join("bad.csv"), "n,k,value\n1,x,2\n").unwrap();
    assert_eq!(code(&["expand", "--input", "bad.csv"]), Some(2));
    std::fs::write(dir.path().join("hdr.csv"), "a,b\n1,2\n").unwrap();
    assert_eq!(code(&["expand", "--input", "hdr.csv"]), Some(2));
    std::fs::write(dir.path().join("out.csv"), "x,y,value\n0.9,0.9,1\n").unwrap();
    assert_eq!(code(&["expand", "--input", "out.csv"]), Some(2));

    assert_eq!(code(&["info"]), Some(0));
}

#[test]
fn verify_single_suite_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--suite", "jacobi", "--seed", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().next().unwrap().contains("suite=jacobi"));
    let json_start = text.find('[').unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    assert_eq!(parsed[0]["pass"], serde_json::Value::Bool(true));
}
