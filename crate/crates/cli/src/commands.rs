use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use trikoorn_core::koornwinder::{tri_eval, TriParams};
use trikoorn_core::operators::helmholtz_solve;
use trikoorn_core::transform::{analyze, fit_samples, synthesize};
use trikoorn_core::verify::{reports_to_json, reports_to_text, run_all, solve_residual, Suite, Tolerances};
use trikoorn_core::{BasisTag, Builder, CoeffVec, Error, TriIndex, TriPoint};

use crate::io::{self, CsvInput};
use crate::BasisArgs;

/// 1 = verification failure, 2 = usage or input, 3 = mathematical degeneracy.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::ParameterDomain(_) | Error::Degenerate(_) | Error::Resonance { .. } | Error::EvaluationDomain(_),
        ) => 3,
        _ => 2,
    }
}

fn params(b: BasisArgs) -> Result<TriParams> {
    Ok(TriParams::abc(b.a, b.b, b.c)?)
}

pub fn verify(suite: &str, seed: u64, out: Option<&Path>) -> Result<ExitCode> {
    let suites = Suite::parse_selection(suite)?;
    let tol = Tolerances::from_env()?;
    let reports = run_all(&suites, seed, &tol)?;
    let text = reports_to_text(&reports);
    let json = reports_to_json(&reports);
    match out {
        Some(p) => {
            std::fs::write(p, &text).with_context(|| format!("cannot write {}", p.display()))?;
            let mut jp = p.as_os_str().to_owned();
            jp.push(".json");
            std::fs::write(PathBuf::from(jp), &json)?;
        }
        None => print!("{text}{json}"),
    }
    let ok = reports.iter().all(|r| r.pass);
    for r in &reports {
        eprintln!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.suite);
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn build_op(name: &str, basis: BasisArgs, out: Option<&Path>) -> Result<ExitCode> {
    let builder: Builder = name.parse()?;
    let op = builder.build(basis.n, params(basis)?)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(format!("{name}.mtx")));
    op.export(&path)?;
    eprintln!("{}: {}x{} with {} entries -> {}", op.name, op.shape().0, op.shape().1, op.nnz(), path.display());
    Ok(ExitCode::SUCCESS)
}

/// Built-in functions, evaluated pointwise.
fn builtin(id: &str, p: TriParams) -> Result<Box<dyn Fn(TriPoint) -> f64>> {
    Ok(match id {
        "one" => Box::new(|_| 1.0),
        "x" => Box::new(|q: TriPoint| q.x),
        "y" => Box::new(|q: TriPoint| q.y),
        "z" => Box::new(|q: TriPoint| q.z()),
        "runge" => Box::new(|q: TriPoint| {
            let (dx, dy) = (q.x - 1.0 / 3.0, q.y - 1.0 / 3.0);
            1.0 / (1.0 + 25.0 * (dx * dx + dy * dy))
        }),
        s if s.starts_with("poly:") => {
            let body = &s[5..];
            let (n, k) =
                body.split_once(',').ok_or_else(|| anyhow!(Error::Usage(format!("expected poly:<n,k>, got '{s}'"))))?;
            let parse =
                |t: &str| t.trim().parse::<i64>().map_err(|_| anyhow!(Error::Usage(format!("bad index in '{s}'"))));
            let idx = TriIndex::new(parse(n)?, parse(k)?)?;
            Box::new(move |q| tri_eval(idx, p, q).unwrap_or(f64::NAN))
        }
        _ => bail!(Error::Usage(format!("unknown function '{id}'"))),
    })
}

fn is_builtin(id: &str) -> bool {
    matches!(id, "one" | "x" | "y" | "z" | "runge") || id.starts_with("poly:")
}

/// Coefficients of `input` in the basis, from a built-in or a CSV file.
fn coefficients_of(input: &str, basis: BasisArgs) -> Result<CoeffVec> {
    let p = params(basis)?;
    if is_builtin(input) {
        let f = builtin(input, p)?;
        return Ok(analyze(f, basis.n, p, basis.n + 2)?);
    }
    let parsed = io::read_csv(Path::new(input)).map_err(|e| anyhow!(Error::Usage(format!("{e:#}"))))?;
    match parsed {
        CsvInput::Coefficients(rows) => {
            let mut v = CoeffVec::zeros(BasisTag::new(p, false, basis.n));
            io::coefficients_into(&rows, &mut v).map_err(|e| anyhow!(Error::Usage(format!("{e:#}"))))?;
            Ok(v)
        }
        CsvInput::Samples(rows) => {
            let (pts, vals): (Vec<TriPoint>, Vec<f64>) = rows.into_iter().unzip();
            Ok(fit_samples(&pts, &vals, basis.n, p)?)
        }
    }
}

pub fn expand(input: &str, basis: BasisArgs, out: Option<&Path>) -> Result<ExitCode> {
    let v = coefficients_of(input, basis)?;
    io::write_or_print(out, &io::coefficients_csv(&v)?)?;
    Ok(ExitCode::SUCCESS)
}

const SOLVE_TOL: f64 = 1e-5;

pub fn solve(lambda: f64, rhs: &str, basis: BasisArgs, out: Option<&Path>, grid: usize) -> Result<ExitCode> {
    let f = coefficients_of(rhs, basis)?;
    let u = helmholtz_solve(lambda, &f)?;
    let pts = io::barycentric_grid(grid);
    let values = synthesize(&u, &pts)?;
    let coeffs = io::coefficients_csv(&u)?;
    let grid_text = io::grid_csv(&pts, &values)?;
    match out {
        Some(p) => {
            io::write_or_print(Some(p), &coeffs)?;
            io::write_or_print(Some(&p.with_extension("grid.csv")), &grid_text)?;
        }
        None => print!("{coeffs}\n{grid_text}"),
    }
    // Residual of L u = λ u - f at grid points away from the edges.
    let interior: Vec<TriPoint> = pts.into_iter().filter(|q| q.x > 1e-3 && q.y > 1e-3 && q.z() > 1e-3).collect();
    let probe = if interior.is_empty() { vec![TriPoint::new(1.0 / 3.0, 1.0 / 3.0)] } else { interior };
    let (_, residual) = solve_residual(lambda, &f, &probe)?;
    let tol = SOLVE_TOL * Tolerances::from_env()?.second_fd / 1e-5;
    eprintln!("residual={residual:e} tolerance={tol:e}");
    Ok(if residual <= tol { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn info() -> Result<ExitCode> {
    let tol = Tolerances::from_env()?;
    println!("trikoorn {}", env!("CARGO_PKG_VERSION"));
    println!("operators: {}", Builder::ALL.iter().map(|b| b.name()).collect::<Vec<_>>().join(" "));
    println!("suites: {} all", Suite::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(" "));
    println!("functions: one x y z poly:<n,k> runge");
    println!(
        "tolerances: exact={:e} first_fd={:e} second_fd={:e} ladders={:e}",
        tol.exact, tol.first_fd, tol.second_fd, tol.ladders
    );
    Ok(ExitCode::SUCCESS)
}
