//! Seeded verification sweeps with residual reports.
//!
//! Every case group draws its sample points from its own ChaCha8 stream
//! keyed by `(seed, group)`, so results do not depend on scheduling. The
//! worst case is chosen by residual/tolerance ratio with ties broken by
//! group order, which keeps reports byte-identical across runs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{self, JacobiLadder, JacobiParams};
use crate::koornwinder::{
    index_to_linear, jet_formal, jjp_residual, jpj_residual, Jet2, Residual, TriIndex, TriParams, TriPoint,
};
use crate::ladders::{composition_residual, dagger_closure_residual, ladder_residual, CompositionId, LadderId};
use crate::operators::{eigenvalue_n, BasisTag, Builder, CoeffVec, CoordAxis, SparseOp};
use crate::transform::{synthesize, synthesize_jet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Jacobi,
    Ladders,
    Operators,
    Appendix,
    Eigen,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Jacobi, Suite::Ladders, Suite::Operators, Suite::Appendix, Suite::Eigen];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Jacobi => "jacobi",
            Suite::Ladders => "ladders",
            Suite::Operators => "operators",
            Suite::Appendix => "appendix",
            Suite::Eigen => "eigen",
        }
    }

    /// Suites selected by a command-line name; `all` expands to every suite.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Ok(vec![s.parse()?])
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| Error::Usage(format!("unknown suite '{s}'")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Residual tolerances by oracle type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Identities checked with exact jets.
    pub exact: f64,
    /// Checks against first-derivative finite differences.
    pub first_fd: f64,
    /// Checks against second-derivative finite differences.
    pub second_fd: f64,
    /// The triangle ladder and composition sweep.
    pub ladders: f64,
}

impl Tolerances {
    pub fn scaled(scale: f64) -> Self {
        Tolerances { exact: 1e-10 * scale, first_fd: 1e-7 * scale, second_fd: 1e-5 * scale, ladders: 1e-9 * scale }
    }

    /// Reads `TRIKOORN_TOL_SCALE` (default 1).
    pub fn from_env() -> Result<Self> {
        match std::env::var("TRIKOORN_TOL_SCALE") {
            Err(_) => Ok(Self::scaled(1.0)),
            Ok(s) => {
                let v: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::Usage(format!("TRIKOORN_TOL_SCALE must be a number, got '{s}'")))?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Usage(format!("TRIKOORN_TOL_SCALE must be positive, got {v}")));
                }
                Ok(Self::scaled(v))
            }
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::scaled(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub id: String,
    pub idx: String,
    pub params: String,
    pub point: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: u64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_case: Option<WorstCase>,
}

impl VerificationReport {
    /// One `key=value` line.
    pub fn to_line(&self) -> String {
        let mut s = format!(
            "suite={} seed={} cases={} max_residual={:e} tolerance={:e} pass={}",
            self.suite, self.seed, self.cases, self.max_residual, self.tolerance, self.pass
        );
        if let Some(w) = &self.worst_case {
            s.push_str(&format!(
                " worst_id={} worst_idx={} worst_params={} worst_point={}",
                w.id,
                w.idx,
                w.params.replace(' ', ""),
                w.point.replace(' ', "")
            ));
        }
        s
    }
}

pub fn reports_to_text(reports: &[VerificationReport]) -> String {
    reports.iter().map(|r| r.to_line() + "\n").collect()
}

pub fn reports_to_json(reports: &[VerificationReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

/// Residual of one sample against its own tolerance.
#[derive(Debug, Clone)]
struct Sample {
    residual: f64,
    tolerance: f64,
    key: u64,
    worst: WorstCase,
}

impl Sample {
    fn ratio(&self) -> f64 {
        if self.residual.is_nan() {
            f64::INFINITY
        } else {
            self.residual / self.tolerance
        }
    }

    fn worse_than(&self, other: &Sample) -> bool {
        let (a, b) = (self.ratio(), other.ratio());
        a > b || (a == b && self.key < other.key)
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    cases: u64,
    worst: Option<Sample>,
}

impl Tally {
    fn record(&mut self, s: Sample) {
        self.cases += 1;
        match &self.worst {
            Some(w) if !s.worse_than(w) => {}
            _ => self.worst = Some(s),
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.cases += other.cases;
        if let Some(s) = other.worst {
            match &self.worst {
                Some(w) if !s.worse_than(w) => {}
                _ => self.worst = Some(s),
            }
        }
        self
    }

    fn into_report(self, suite: Suite, seed: u64, nominal_tol: f64) -> VerificationReport {
        let (max_residual, tolerance, worst_case) = match self.worst {
            Some(s) => (s.residual, s.tolerance, Some(s.worst)),
            None => (0.0, nominal_tol, None),
        };
        VerificationReport {
            suite,
            seed,
            cases: self.cases,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            worst_case,
        }
    }
}

fn group_rng(seed: u64, suite: Suite, group: u64) -> ChaCha8Rng {
    let tag = suite as u64 + 1;
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (tag << 56) ^ group)
}

/// Uniform point in `x, y ∈ [0.05, 0.9]` with `z >= 0.05`.
pub fn sample_interior(rng: &mut impl Rng) -> TriPoint {
    loop {
        let x = rng.gen_range(0.05..=0.9);
        let y = rng.gen_range(0.05..=0.9);
        if 1.0 - x - y >= 0.05 {
            return TriPoint::new(x, y);
        }
    }
}

fn fan_out<G, F>(groups: Vec<G>, f: F) -> Tally
where
    G: Send + Sync,
    F: Fn(u64, &G, &mut Tally) + Sync + Send,
{
    groups
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut t = Tally::default();
            f(i as u64, g, &mut t);
            t
        })
        .reduce(Tally::default, Tally::merge)
}

fn sample(key: u64, r: Residual, tolerance: f64, id: String, idx: String, params: String, point: String) -> Sample {
    Sample { residual: r.relative(), tolerance, key, worst: WorstCase { id, idx, params, point } }
}

fn point_str(pt: TriPoint) -> String {
    format!("({:e},{:e})", pt.x, pt.y)
}

const JACOBI_GRID: [f64; 5] = [-0.5, 0.0, 0.5, 1.0, 2.5];
const TRI_GRID: [f64; 4] = [-0.5, 0.0, 0.5, 1.5];

/// All `(a, b, c, d)` from the four-value grid.
pub fn tri_param_grid() -> Vec<TriParams> {
    let mut out = Vec::new();
    for a in TRI_GRID {
        for b in TRI_GRID {
            for c in TRI_GRID {
                for d in TRI_GRID {
                    out.push(TriParams::formal(a, b, c, d));
                }
            }
        }
    }
    out
}

pub fn run_suite(suite: Suite, seed: u64, tol: &Tolerances) -> Result<VerificationReport> {
    match suite {
        Suite::Jacobi => Ok(jacobi_suite(seed, tol.exact, 20, 50, JacobiForms::Both)),
        Suite::Ladders => ladders_suite(seed, tol.ladders, 10, 20, LadderParts::Both),
        Suite::Operators => operators_suite(seed, tol, 8),
        Suite::Appendix => appendix_suite(seed, tol.exact, 10, 20),
        Suite::Eigen => eigen_suite(seed, tol, 6, 20),
    }
}

pub fn run_all(suites: &[Suite], seed: u64, tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    suites.iter().map(|s| run_suite(*s, seed, tol)).collect()
}

fn jacobi_case(l: JacobiLadder, n: i64, p: JacobiParams, x: f64, shifted: bool) -> (Residual, Residual) {
    let (u, du, coef, step) = if shifted {
        (
            jacobi::shifted_eval_formal(n, p, x),
            jacobi::shifted_deriv_formal(n, p, x),
            jacobi::shifted_ladder_coefficients(l, n, p, x),
            jacobi::shifted_ladder_step(l, n, p),
        )
    } else {
        (
            jacobi::eval_formal(n, p, x),
            jacobi::deriv_formal(n, p, x),
            jacobi::ladder_coefficients(l, n, p, x),
            jacobi::jacobi_ladder_step(l, n, p),
        )
    };
    let (target, target_d) = if step.factor == 0.0 {
        (0.0, 0.0)
    } else if shifted {
        (jacobi::shifted_eval_formal(step.n, step.params, x), jacobi::shifted_deriv_formal(step.n, step.params, x))
    } else {
        (jacobi::eval_formal(step.n, step.params, x), jacobi::deriv_formal(step.n, step.params, x))
    };
    let lhs = coef.0 * u + coef.1 * du;
    let rhs = step.factor * target;
    let ladder = Residual { value: lhs - rhs, scale: (step.factor * target).abs().max(1.0) };

    // Partner applied to factor * P_{n'}: returns the product of factors times P_n.
    let partner = l.toggled();
    let (back, pc) = if shifted {
        (
            jacobi::shifted_ladder_step(partner, step.n, step.params),
            jacobi::shifted_ladder_coefficients(partner, step.n, step.params, x),
        )
    } else {
        (
            jacobi::jacobi_ladder_step(partner, step.n, step.params),
            jacobi::ladder_coefficients(partner, step.n, step.params, x),
        )
    };
    let mut closure = Residual { value: 0.0, scale: 1.0 };
    if back.n != n || back.params != p {
        closure.value = f64::INFINITY;
    } else {
        let lhs = step.factor * (pc.0 * target + pc.1 * target_d);
        let rhs = step.factor * back.factor * u;
        let mag = (step.factor * pc.0 * target).abs() + (step.factor * pc.1 * target_d).abs();
        closure = Residual { value: lhs - rhs, scale: rhs.abs().max(1.0).max(mag) };
    }
    (ladder, closure)
}

/// Which Jacobi ladder family a sweep covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobiForms {
    /// Operators on `[-1, 1]`.
    Standard,
    /// Operators on `[0, 1]` with unit factors.
    Shifted,
    Both,
}

/// The twelve ladder relations on `[-1, 1]` and/or their shifted forms on
/// `[0, 1]`, plus partner closure, for `n <= nmax`.
pub fn jacobi_suite(seed: u64, tol: f64, nmax: i64, npts: usize, forms: JacobiForms) -> VerificationReport {
    let shifted_forms: &[bool] = match forms {
        JacobiForms::Standard => &[false],
        JacobiForms::Shifted => &[true],
        JacobiForms::Both => &[false, true],
    };
    let mut groups = Vec::new();
    for l in JacobiLadder::all() {
        for a in JACOBI_GRID {
            for b in JACOBI_GRID {
                for n in 0..=nmax {
                    groups.push((l, JacobiParams::formal(a, b), n));
                }
            }
        }
    }
    let t = fan_out(groups, |key, &(l, p, n), tally| {
        let mut rng = group_rng(seed, Suite::Jacobi, key);
        for _ in 0..npts {
            let x: f64 = rng.gen_range(-1.0..1.0);
            for &shifted in shifted_forms {
                let xx = if shifted { 0.5 * (x + 1.0) } else { x };
                let (lad, clo) = jacobi_case(l, n, p, xx, shifted);
                let id = if shifted { format!("shifted {l}") } else { l.to_string() };
                let ps = format!("({},{})", p.a, p.b);
                tally.record(sample(key, lad, tol, id.clone(), n.to_string(), ps.clone(), format!("{xx:e}")));
                tally.record(sample(key, clo, tol, format!("{id} closure"), n.to_string(), ps, format!("{xx:e}")));
            }
        }
    });
    t.into_report(Suite::Jacobi, seed, tol)
}

/// Which part of the triangle ladder sweep to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderParts {
    /// The 24 ladder recurrences with partner closure.
    Relations,
    /// The 13 composition identities.
    Compositions,
    Both,
}

/// The 24 triangle ladders with partner closure and/or the 13 composition
/// identities, over the four-value parameter grid.
pub fn ladders_suite(seed: u64, tol: f64, nmax: usize, npts: usize, parts: LadderParts) -> Result<VerificationReport> {
    #[derive(Clone, Copy)]
    enum Item {
        Ladder(LadderId),
        Comp(CompositionId),
    }
    let params = tri_param_grid();
    let mut groups = Vec::new();
    let relations = parts != LadderParts::Compositions;
    let compositions = parts != LadderParts::Relations;
    for l in LadderId::all().filter(|_| relations) {
        for p in &params {
            groups.push((Item::Ladder(l), *p));
        }
    }
    for c in CompositionId::ALL.into_iter().filter(|_| compositions) {
        for p in &params {
            if !c.requires_d_zero() || p.d == 0.0 {
                groups.push((Item::Comp(c), *p));
            }
        }
    }
    let failure = std::sync::Mutex::new(None);
    let t = fan_out(groups, |key, &(item, p), tally| {
        let mut rng = group_rng(seed, Suite::Ladders, key);
        let pts: Vec<TriPoint> = (0..npts).map(|_| sample_interior(&mut rng)).collect();
        for idx in TriIndex::up_to(nmax) {
            for pt in &pts {
                let res = match item {
                    Item::Ladder(l) => ladder_residual(l, idx, p, *pt)
                        .and_then(|r| Ok((r, dagger_closure_residual(l, idx, p, *pt)?)))
                        .map(|(a, b)| vec![(l.to_string(), a), (format!("{l} closure"), b)]),
                    Item::Comp(c) => composition_residual(c, idx, p, *pt).map(|r| vec![(format!("{c:?}"), r)]),
                };
                match res {
                    Ok(rs) => {
                        for (id, r) in rs {
                            tally.record(sample(key, r, tol, id, idx.to_string(), p.to_string(), point_str(*pt)));
                        }
                    }
                    Err(e) => {
                        failure.lock().expect("lock").get_or_insert(e);
                    }
                }
            }
        }
    });
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    Ok(t.into_report(Suite::Ladders, seed, tol))
}

/// `(JJp)` and `(JpJ)` for `n <= nmax` over the parameter grid.
pub fn appendix_suite(seed: u64, tol: f64, nmax: usize, npts: usize) -> Result<VerificationReport> {
    let groups = tri_param_grid();
    let failure = std::sync::Mutex::new(None);
    let t = fan_out(groups, |key, p, tally| {
        let mut rng = group_rng(seed, Suite::Appendix, key);
        let pts: Vec<TriPoint> = (0..npts).map(|_| sample_interior(&mut rng)).collect();
        for idx in TriIndex::up_to(nmax) {
            for pt in &pts {
                for (id, r) in [("JJp", jjp_residual(idx, *p, *pt)), ("JpJ", jpj_residual(idx, *p, *pt))] {
                    match r {
                        Ok(r) => {
                            tally.record(sample(key, r, tol, id.into(), idx.to_string(), p.to_string(), point_str(*pt)))
                        }
                        Err(e) => {
                            failure.lock().expect("lock").get_or_insert(e);
                        }
                    }
                }
            }
        }
    });
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    Ok(t.into_report(Suite::Appendix, seed, tol))
}

/// Second derivatives by central differences of an exact jet.
pub fn fd_hessian(jet: impl Fn(TriPoint) -> Jet2, pt: TriPoint, h: f64) -> (f64, f64, f64) {
    let xp = jet(TriPoint::new(pt.x + h, pt.y));
    let xm = jet(TriPoint::new(pt.x - h, pt.y));
    let yp = jet(TriPoint::new(pt.x, pt.y + h));
    let ym = jet(TriPoint::new(pt.x, pt.y - h));
    let uxx = (xp.ux - xm.ux) / (2.0 * h);
    let uyy = (yp.uy - ym.uy) / (2.0 * h);
    let uxy = 0.5 * ((yp.ux - ym.ux) + (xp.uy - xm.uy)) / (2.0 * h);
    (uxx, uxy, uyy)
}

/// `D_k u = zy u_yy + ((1+b)(1-x) - (2+b+c) y) u_y` and
/// `D_n u = x(1-x) u_xx - 2xy u_xy + y(1-y) u_yy + (a+1-(a+b+c+3)x) u_x + (b+1-(a+b+c+3)y) u_y`,
/// each with its term magnitude.
pub fn eigen_expressions(
    p: TriParams,
    pt: TriPoint,
    j: Jet2,
    (uxx, uxy, uyy): (f64, f64, f64),
) -> ((f64, f64), (f64, f64)) {
    let (x, y, z) = (pt.x, pt.y, pt.z());
    let (a, b, c) = (p.a, p.b, p.c);
    let s3 = a + b + c + 3.0;
    let dk = [z * y * uyy, ((1.0 + b) * (1.0 - x) - (2.0 + b + c) * y) * j.uy];
    let dn = [
        x * (1.0 - x) * uxx,
        -2.0 * x * y * uxy,
        y * (1.0 - y) * uyy,
        (a + 1.0 - s3 * x) * j.ux,
        (b + 1.0 - s3 * y) * j.uy,
    ];
    let tot = |t: &[f64]| (t.iter().sum::<f64>(), t.iter().map(|v| v.abs()).sum::<f64>());
    (tot(&dk), tot(&dn))
}

const FD_H2: f64 = 1e-5;

/// Diagonal eigen-operators against the pointwise second-order expressions
/// (finite-difference Hessians), for `n <= nmax`, plus the exact diagonal
/// action on unit vectors.
pub fn eigen_suite(seed: u64, tol: &Tolerances, nmax: usize, npts: usize) -> Result<VerificationReport> {
    let groups: Vec<TriParams> = tri_param_grid().into_iter().filter(|p| p.d == 0.0).collect();
    let failure = std::sync::Mutex::new(None);
    let t = fan_out(groups, |key, p, tally| {
        let mut rng = group_rng(seed, Suite::Eigen, key);
        let pts: Vec<TriPoint> = (0..npts).map(|_| sample_interior(&mut rng)).collect();
        let ops = crate::operators::build_eigen_diag_k(nmax, *p)
            .and_then(|k| Ok((k, crate::operators::build_eigen_diag_n(nmax, *p)?)));
        let (opk, opn) = match ops {
            Ok(v) => v,
            Err(e) => {
                failure.lock().expect("lock").get_or_insert(e);
                return;
            }
        };
        for idx in TriIndex::up_to(nmax) {
            let k = idx.k as f64;
            let lk = -k * (k + p.b + p.c + 1.0);
            let ln = eigenvalue_n(idx.n as usize, *p);
            let col = index_to_linear(idx).expect("valid index");
            for (op, lam, id) in [(&opk, lk, "eigen_diag_k"), (&opn, ln, "eigen_diag_n")] {
                let e = CoeffVec::unit(op.domain, idx).expect("in range");
                let w = op.apply(&e).expect("same basis");
                let err = w
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| if i == col { (v - lam).abs() } else { v.abs() })
                    .fold(0.0, f64::max);
                let r = Residual { value: err, scale: lam.abs().max(1.0) };
                tally.record(sample(
                    key,
                    r,
                    tol.exact,
                    format!("{id} diagonal"),
                    idx.to_string(),
                    p.to_string(),
                    "-".into(),
                ));
            }
            for pt in &pts {
                let jet = jet_formal(idx, *p, *pt);
                let h = fd_hessian(|q| jet_formal(idx, *p, q), *pt, FD_H2);
                let ((dk, mk), (dn, mn)) = eigen_expressions(*p, *pt, jet, h);
                let rk = Residual { value: dk - lk * jet.u, scale: mk.max((lk * jet.u).abs()).max(1.0) };
                let rn = Residual { value: dn - ln * jet.u, scale: mn.max((ln * jet.u).abs()).max(1.0) };
                tally.record(sample(
                    key,
                    rk,
                    tol.second_fd,
                    "EIG_K pointwise".into(),
                    idx.to_string(),
                    p.to_string(),
                    point_str(*pt),
                ));
                tally.record(sample(
                    key,
                    rn,
                    tol.second_fd,
                    "EIG_N pointwise".into(),
                    idx.to_string(),
                    p.to_string(),
                    point_str(*pt),
                ));
            }
        }
    });
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    Ok(t.into_report(Suite::Eigen, seed, tol.exact))
}

/// Directional derivative by Richardson-extrapolated central differences.
pub fn richardson(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

const FD_H1: f64 = 2.5e-4;

/// What the builder's coefficient map must reproduce pointwise.
enum Oracle {
    Derivative(f64, f64),
    Identity,
    Multiply(CoordAxis),
    EigenK,
    EigenN,
}

fn oracle_for(b: Builder) -> Oracle {
    use Builder::*;
    match b {
        DiffX | WeightedDiffX => Oracle::Derivative(1.0, 0.0),
        DiffY | WeightedDiffY => Oracle::Derivative(0.0, 1.0),
        DiffZ | WeightedDiffZ => Oracle::Derivative(-1.0, 1.0),
        ConvA | ConvB | ConvC => Oracle::Identity,
        MultX | MultSameX => Oracle::Multiply(CoordAxis::X),
        MultY | MultSameY => Oracle::Multiply(CoordAxis::Y),
        MultZ | MultSameZ => Oracle::Multiply(CoordAxis::Z),
        EigenDiagK => Oracle::EigenK,
        EigenDiagN => Oracle::EigenN,
    }
}

/// Parameter sets for the operator sweep.
pub const OPERATOR_PARAMS: [(f64, f64, f64); 3] = [(0.5, 0.5, 0.5), (1.0, 2.0, 0.5), (2.0, 1.0, 1.0)];

fn stencil_failure(op: &SparseOp, b: Builder, n: usize) -> Option<String> {
    if op.max_col_nnz() > b.stencil_bound() {
        return Some(format!("{} entries in a column, bound {}", op.max_col_nnz(), b.stencil_bound()));
    }
    let exact = match b {
        Builder::DiffY => Some(n * (n + 1) / 2),
        Builder::WeightedDiffY => Some(op.domain.dim()),
        Builder::MultX => Some(2 * op.domain.dim()),
        _ => None,
    };
    match exact {
        Some(e) if e != op.nnz() => Some(format!("nnz {} but expected {e}", op.nnz())),
        _ => None,
    }
}

/// Oracle equivalence for every builder, stencil counts, and the partition
/// of unity `J_x + J_y + J_z = I`.
pub fn operators_suite(seed: u64, tol: &Tolerances, n: usize) -> Result<VerificationReport> {
    let mut groups = Vec::new();
    for b in Builder::ALL {
        for (a, bb, c) in OPERATOR_PARAMS {
            groups.push((Some(b), TriParams::formal(a, bb, c, 0.0)));
        }
    }
    for (a, bb, c) in OPERATOR_PARAMS {
        groups.push((None, TriParams::formal(a, bb, c, 0.0)));
    }
    let failure = std::sync::Mutex::new(None);
    let fail = |e: Error| {
        failure.lock().expect("lock").get_or_insert(e);
    };
    let t = fan_out(groups, |key, &(b, p), tally| {
        let Some(b) = b else {
            match partition_of_unity_error(n, p) {
                Ok(err) => tally.record(sample(
                    key,
                    Residual { value: err, scale: 1.0 },
                    tol.exact,
                    "partition_of_unity".into(),
                    format!("N={n}"),
                    p.to_string(),
                    "-".into(),
                )),
                Err(e) => fail(e),
            }
            return;
        };
        let op = match b.build(n, p) {
            Ok(op) => op,
            Err(e) => return fail(e),
        };
        if let Some(msg) = stencil_failure(&op, b, n) {
            tally.record(sample(
                key,
                Residual { value: f64::INFINITY, scale: 1.0 },
                tol.exact,
                format!("{b} stencil: {msg}"),
                format!("N={n}"),
                p.to_string(),
                "-".into(),
            ));
        }
        let oracle = oracle_for(b);
        let tolerance = match oracle {
            Oracle::Derivative(..) => tol.first_fd,
            Oracle::EigenK | Oracle::EigenN => tol.second_fd,
            _ => tol.exact,
        };
        let mut rng = group_rng(seed, Suite::Operators, key);
        for trial in 0..5 {
            let v =
                CoeffVec { basis: op.domain, values: (0..op.domain.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect() };
            let pts: Vec<TriPoint> = (0..40).map(|_| sample_interior(&mut rng)).collect();
            let image = match op.apply(&v).and_then(|w| synthesize(&w, &pts)) {
                Ok(x) => x,
                Err(e) => return fail(e),
            };
            for (pt, lhs) in pts.iter().zip(image) {
                let rhs = match operator_oracle(&oracle, &v, *pt) {
                    Ok(r) => r,
                    Err(e) => return fail(e),
                };
                let r = Residual::new(lhs, rhs.0);
                let r = Residual { scale: r.scale.max(rhs.1), ..r };
                tally.record(sample(
                    key,
                    r,
                    tolerance,
                    format!("{b} trial {trial}"),
                    format!("N={n}"),
                    p.to_string(),
                    point_str(*pt),
                ));
            }
        }
    });
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    Ok(t.into_report(Suite::Operators, seed, tol.exact))
}

fn value_at(v: &CoeffVec, pt: TriPoint) -> Result<f64> {
    Ok(synthesize(v, &[pt])?[0])
}

/// Pointwise image of the expansion `v` and a magnitude for scaling.
fn operator_oracle(o: &Oracle, v: &CoeffVec, pt: TriPoint) -> Result<(f64, f64)> {
    match o {
        Oracle::Derivative(dx, dy) => {
            let along = |t: f64| value_at(v, TriPoint::new(pt.x + dx * t, pt.y + dy * t)).unwrap_or(f64::NAN);
            let d = richardson(along, FD_H1);
            Ok((d, d.abs()))
        }
        Oracle::Identity => {
            let u = value_at(v, pt)?;
            Ok((u, u.abs()))
        }
        Oracle::Multiply(axis) => {
            let c = match axis {
                CoordAxis::X => pt.x,
                CoordAxis::Y => pt.y,
                CoordAxis::Z => pt.z(),
            };
            let u = value_at(v, pt)?;
            Ok((c * u, (c * u).abs()))
        }
        Oracle::EigenK | Oracle::EigenN => {
            let jet = synthesize_jet(v, pt)?;
            let h = fd_hessian(|q| synthesize_jet(v, q).unwrap_or_default(), pt, FD_H2);
            let (k, n) = eigen_expressions(v.basis.params, pt, jet, h);
            Ok(if matches!(o, Oracle::EigenK) { k } else { n })
        }
    }
}

/// Largest entry of `J_x + J_y + J_z - I` at degree `n`.
pub fn partition_of_unity_error(n: usize, p: TriParams) -> Result<f64> {
    let jx = Builder::MultSameX.build(n, p)?;
    let jy = Builder::MultSameY.build(n, p)?;
    let jz = Builder::MultSameZ.build(n, p)?;
    let id = SparseOp::padded_identity(BasisTag::new(p, false, n), n + 1)?;
    let sum = jx.add_scaled(&jy, 1.0)?.add_scaled(&jz, 1.0)?.add_scaled(&id, -1.0)?;
    Ok(sum.entries().iter().map(|t| t.value.abs()).fold(0.0, f64::max))
}

/// Solves `(λ I - L) u = f` and checks `L u = λ u - f` pointwise with
/// finite-difference Hessians of the synthesized solution.
pub fn solve_residual(lambda: f64, f: &CoeffVec, pts: &[TriPoint]) -> Result<(CoeffVec, f64)> {
    let u = crate::operators::helmholtz_solve(lambda, f)?;
    let mut worst = 0.0f64;
    for pt in pts {
        let jet = synthesize_jet(&u, *pt)?;
        let h = fd_hessian(|q| synthesize_jet(&u, q).unwrap_or_default(), *pt, FD_H2);
        let (_, (ln, mag)) = eigen_expressions(u.basis.params, *pt, jet, h);
        let fv = value_at(f, *pt)?;
        let rhs = lambda * jet.u - fv;
        let scale = mag.max(rhs.abs()).max((lambda * jet.u).abs()).max(fv.abs()).max(1.0);
        worst = worst.max((ln - rhs).abs() / scale);
    }
    Ok((u, worst))
}
