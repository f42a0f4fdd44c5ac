//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use trikoorn_core::koornwinder::{basis_dim, linear_to_index};
use trikoorn_core::operators::build_diff_y;
use trikoorn_core::transform::gram_matrix;
use trikoorn_core::verify::{
    appendix_suite, eigen_suite, jacobi_suite, ladders_suite, operators_suite, partition_of_unity_error, JacobiForms,
    LadderParts, OPERATOR_PARAMS,
};
use trikoorn_core::{Builder, TriParams, VerificationReport};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn report_outcome(r: &VerificationReport, elapsed: Duration, limit: Option<Duration>) -> Outcome {
    let detail = format!(
        "cases={} max_residual={:e} tolerance={:e} time={:.1}s",
        r.cases,
        r.max_residual,
        r.tolerance,
        elapsed.as_secs_f64()
    );
    let detail = match &r.worst_case {
        Some(w) => format!("{detail} worst={} {} {}", w.id, w.idx, w.params),
        None => detail,
    };
    if !r.pass {
        return Err(detail);
    }
    if let Some(l) = limit {
        if elapsed > l {
            return Err(format!("{detail} exceeds {:.0}s", l.as_secs_f64()));
        }
    }
    Ok(detail)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn jacobi(forms: JacobiForms) -> Outcome {
    let (r, dt) = timed(|| jacobi_suite(11, 1e-10, 20, 50, forms));
    report_outcome(&r, dt, Some(Duration::from_secs(10)))
}

fn triangle_ladders() -> Outcome {
    let (r, dt) = timed(|| ladders_suite(11, 1e-9, 10, 20, LadderParts::Relations));
    report_outcome(&r.map_err(|e| e.to_string())?, dt, Some(Duration::from_secs(60)))
}

fn compositions() -> Outcome {
    let (r, dt) = timed(|| ladders_suite(11, 1e-9, 10, 20, LadderParts::Compositions));
    report_outcome(&r.map_err(|e| e.to_string())?, dt, None)
}

fn appendix() -> Outcome {
    let (r, dt) = timed(|| appendix_suite(11, 1e-10, 10, 20));
    report_outcome(&r.map_err(|e| e.to_string())?, dt, None)
}

fn operators() -> Outcome {
    let tol = trikoorn_core::Tolerances::scaled(1.0);
    let (r, dt) = timed(|| operators_suite(11, &tol, 8));
    let detail = report_outcome(&r.map_err(|e| e.to_string())?, dt, None)?;
    // Exact structural counts at N = 8.
    let n = 8;
    for (a, b, c) in OPERATOR_PARAMS {
        let p = TriParams::abc(a, b, c).unwrap();
        let dy = build_diff_y(n, p).unwrap();
        if dy.nnz() != n * (n + 1) / 2 {
            return Err(format!("diff_y nnz {} != {}", dy.nnz(), n * (n + 1) / 2));
        }
        for builder in Builder::ALL {
            let op = builder.build(n, p).unwrap();
            if op.max_col_nnz() > builder.stencil_bound() {
                return Err(format!(
                    "{builder}: column with {} > {} entries",
                    op.max_col_nnz(),
                    builder.stencil_bound()
                ));
            }
        }
        let wdy = Builder::WeightedDiffY.build(n, p).unwrap();
        if (0..basis_dim(n)).any(|c| wdy.column(c).len() != 1) {
            return Err("weighted_diff_y must have exactly one entry per column".into());
        }
        let mx = Builder::MultX.build(n, p).unwrap();
        if (0..basis_dim(n)).any(|c| mx.column(c).len() != 2) {
            return Err("mult_x must have exactly two entries per column".into());
        }
    }
    Ok(format!("{detail}; stencil counts exact"))
}

fn orthogonality() -> Outcome {
    let sets = [
        TriParams::new(0.0, 0.0, 0.0, 0.0).unwrap(),
        TriParams::new(0.5, 0.5, 0.5, 0.0).unwrap(),
        TriParams::new(1.0, 0.0, 0.5, 0.5).unwrap(),
        TriParams::new(-0.5, 1.5, 0.0, 1.0).unwrap(),
    ];
    let mut worst = 0.0f64;
    for p in sets {
        let g = gram_matrix(10, p, 12).map_err(|e| e.to_string())?;
        for i in 0..g.nrows() {
            if g[(i, i)].is_nan() || g[(i, i)] <= 0.0 {
                return Err(format!("non-positive norm at {}", linear_to_index(i)));
            }
            for j in 0..g.ncols() {
                if i != j {
                    worst = worst.max(g[(i, j)].abs() / (g[(i, i)] * g[(j, j)]).sqrt());
                }
            }
        }
    }
    let g0 = gram_matrix(10, sets[0], 12).map_err(|e| e.to_string())?;
    let e00 = (g0[(0, 0)] - 0.5).abs();
    let detail = format!("max normalized off-diagonal={worst:e} |G00-0.5|={e00:e}");
    if worst <= 1e-10 && e00 <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trikoorn"))
}

fn eigen(dir: &Path) -> Outcome {
    let tol = trikoorn_core::Tolerances::scaled(1.0);
    let r = eigen_suite(11, &tol, 6, 20).map_err(|e| e.to_string())?;
    let mut detail = report_outcome(&r, Duration::ZERO, None)?;
    let pairs: [(&str, &str, [&str; 3], usize); 3] = [
        ("1", "one", ["0.5", "0", "1"], 6),
        ("0", "poly:2,1", ["0", "0", "0"], 4),
        ("2.5", "runge", ["0.5", "0.5", "0.5"], 8),
    ];
    for (i, (lambda, rhs, [a, b, c], n)) in pairs.into_iter().enumerate() {
        let out = dir.join(format!("solve{i}.csv"));
        let o = bin()
            .args(["solve", "--lambda", lambda, "--rhs", rhs, "--N", &n.to_string()])
            .args(["--a", a, "--b", b, "--c", c, "--grid", "8", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&o.stderr).trim().to_string();
        if !o.status.success() {
            return Err(format!("solve λ={lambda} f={rhs}: {:?} {stderr}", o.status.code()));
        }
        detail.push_str(&format!("; solve λ={lambda} f={rhs} {stderr}"));
    }
    // λ = 0, f = P_{2,1}: u = P_{2,1} / 8.
    let text = std::fs::read_to_string(dir.join("solve1.csv")).map_err(|e| e.to_string())?;
    let coeff: f64 = text
        .lines()
        .find(|l| l.starts_with("2,1,"))
        .and_then(|l| l.rsplit(',').next())
        .and_then(|v| v.parse().ok())
        .ok_or("missing (2,1) coefficient")?;
    if (coeff - 0.125).abs() > 1e-12 {
        return Err(format!("u_(2,1) = {coeff}, expected 1/8"));
    }
    Ok(detail)
}

fn partition() -> Outcome {
    let mut worst = 0.0f64;
    for (a, b, c) in OPERATOR_PARAMS {
        worst = worst.max(partition_of_unity_error(8, TriParams::abc(a, b, c).unwrap()).map_err(|e| e.to_string())?);
    }
    let detail = format!("max |J_x+J_y+J_z-I| = {worst:e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn end_to_end(dir: &Path) -> Outcome {
    let mut texts = Vec::new();
    let mut elapsed = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("report{run}.txt"));
        let t = Instant::now();
        let o = bin()
            .args(["verify", "--suite", "all", "--seed", "7", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        elapsed.push(t.elapsed());
        if o.status.code() != Some(0) {
            return Err(format!("exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
        }
        let json = dir.join(format!("report{run}.txt.json"));
        texts.push((std::fs::read(&out).map_err(|e| e.to_string())?, std::fs::read(json).map_err(|e| e.to_string())?));
    }
    let slowest = elapsed.iter().max().unwrap().as_secs_f64();
    if texts[0] != texts[1] {
        return Err("reports differ between runs".into());
    }
    if slowest > 180.0 {
        return Err(format!("took {slowest:.1}s"));
    }
    let bad = bin().args(["verify", "--suite", "nope"]).output().map_err(|e| e.to_string())?;
    if bad.status.code() != Some(2) {
        return Err(format!("unknown suite gave exit {:?}", bad.status.code()));
    }
    let lines = String::from_utf8_lossy(&texts[0].0).lines().count();
    Ok(format!("exit 0, {lines} reports, byte-identical, slowest run {slowest:.1}s"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("1 jacobi ladder relations", Box::new(|| jacobi(JacobiForms::Standard))),
        ("2 shifted jacobi ladder relations", Box::new(|| jacobi(JacobiForms::Shifted))),
        ("3 triangle ladder relations", Box::new(triangle_ladders)),
        ("4 composition identities", Box::new(compositions)),
        ("5 appendix derivative identities", Box::new(appendix)),
        ("6 sparse operators", Box::new(operators)),
        ("7 orthogonality", Box::new(orthogonality)),
        ("8 eigen-operators and diagonal solve", Box::new(|| eigen(dir.path()))),
        ("9 partition of unity", Box::new(partition)),
        ("10 end-to-end cli", Box::new(|| end_to_end(dir.path()))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
