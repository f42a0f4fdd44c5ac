//! The four-parameter Koornwinder polynomials on the triangle
//! `{x > 0, y > 0, x + y < 1}`:
//!
//! `P_{n,k}^{(a,b,c,d)}(x, y) = P~_{n-k}^{(2k+b+c+d+1, a)}(x) (1-x)^k P~_k^{(c,b)}(y / (1-x))`
//!
//! orthogonal against `w(x, y) = x^a y^b z^c (1-x)^d` with `z = 1 - x - y`.
//! The second factor is evaluated homogeneously in `(y, 1 - x)`, so nothing
//! here divides by `1 - x` except the two appendix residuals, which need the
//! explicit quotient form on purpose.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dual::{Grad, Hess, Scalar};
use crate::error::{Error, Result};
use crate::jacobi::{self, hom_jacobi, hom_jacobi_seq, JacobiParams};

/// Exponents `(a, b, c, d)` of the triangle weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TriParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let p = TriParams { a, b, c, d };
        p.validate()?;
        Ok(p)
    }

    /// Three-parameter family (`d = 0`).
    pub fn abc(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(a, b, c, 0.0)
    }

    /// Unchecked parameters, used for recurrence targets.
    pub const fn formal(a: f64, b: f64, c: f64, d: f64) -> Self {
        TriParams { a, b, c, d }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.a, self.b, self.c, self.d].iter().all(|v| v.is_finite() && *v > -1.0);
        if !ok {
            return Err(Error::ParameterDomain(format!("triangle parameters must all exceed -1, got {self}")));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// `t = a + b + c + d`.
    pub fn t(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }

    pub fn shifted(&self, da: f64, db: f64, dc: f64, dd: f64) -> Self {
        TriParams::formal(self.a + da, self.b + db, self.c + dc, self.d + dd)
    }
}

impl std::fmt::Display for TriParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// Degree pair `(n, k)`. Valid indices satisfy `0 <= k <= n`; evaluation
/// also accepts out-of-range indices and returns the zero polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TriIndex {
    pub n: i64,
    pub k: i64,
}

impl TriIndex {
    pub fn new(n: i64, k: i64) -> Result<Self> {
        let idx = TriIndex { n, k };
        if !idx.is_valid() {
            return Err(Error::Usage(format!("index ({n}, {k}) needs 0 <= k <= n")));
        }
        Ok(idx)
    }

    pub const fn extended(n: i64, k: i64) -> Self {
        TriIndex { n, k }
    }

    pub fn is_valid(&self) -> bool {
        self.k >= 0 && self.k <= self.n
    }

    /// All valid indices of total degree `<= maxdeg`, in graded order.
    pub fn up_to(maxdeg: usize) -> impl Iterator<Item = TriIndex> {
        (0..=maxdeg as i64).flat_map(|n| (0..=n).map(move |k| TriIndex { n, k }))
    }
}

impl std::fmt::Display for TriIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.n, self.k)
    }
}

/// Number of basis polynomials of total degree `<= maxdeg`.
pub fn basis_dim(maxdeg: usize) -> usize {
    (maxdeg + 1) * (maxdeg + 2) / 2
}

/// Graded position `n(n+1)/2 + k`.
pub fn index_to_linear(idx: TriIndex) -> Result<usize> {
    if !idx.is_valid() {
        return Err(Error::Usage(format!("index {idx} is not a basis index")));
    }
    let n = idx.n as usize;
    Ok(n * (n + 1) / 2 + idx.k as usize)
}

pub fn linear_to_index(p: usize) -> TriIndex {
    // largest n with n(n+1)/2 <= p
    let mut n = (((8 * p + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    while (n + 1) * (n + 2) / 2 <= p {
        n += 1;
    }
    while n * (n + 1) / 2 > p {
        n -= 1;
    }
    TriIndex { n: n as i64, k: (p - n * (n + 1) / 2) as i64 }
}

/// A point in the plane; `z = 1 - x - y` is the third barycentric coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriPoint {
    pub x: f64,
    pub y: f64,
}

impl TriPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        TriPoint { x, y }
    }

    pub fn z(&self) -> f64 {
        1.0 - self.x - self.y
    }

    pub fn is_interior(&self) -> bool {
        self.x > 0.0 && self.y > 0.0 && self.z() > 0.0
    }
}

/// Value and gradient of a bivariate function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub u: f64,
    pub ux: f64,
    pub uy: f64,
}

impl Jet2 {
    /// `∂/∂z = ∂/∂y - ∂/∂x`.
    pub fn uz(&self) -> f64 {
        self.uy - self.ux
    }

    pub fn scaled(&self, f: f64) -> Jet2 {
        Jet2 { u: self.u * f, ux: self.ux * f, uy: self.uy * f }
    }
}

impl From<Grad> for Jet2 {
    fn from(g: Grad) -> Self {
        Jet2 { u: g.v, ux: g.dx, uy: g.dy }
    }
}

/// `x^a y^b z^c (1 - x)^d`.
pub fn weight_eval(params: TriParams, pt: TriPoint) -> Result<f64> {
    let w = pt.x.powf(params.a) * pt.y.powf(params.b) * pt.z().powf(params.c) * (1.0 - pt.x).powf(params.d);
    if !w.is_finite() {
        return Err(Error::EvaluationDomain(format!("weight {params} is not finite at ({}, {})", pt.x, pt.y)));
    }
    Ok(w)
}

/// Generic evaluation in any [`Scalar`]; no parameter checks.
pub(crate) fn tri_generic<T: Scalar>(idx: TriIndex, p: TriParams, x: T, y: T) -> T {
    let TriIndex { n, k } = idx;
    if n < 0 || k < 0 || k > n {
        return T::constant(0.0);
    }
    let alpha = 2.0 * k as f64 + p.b + p.c + p.d + 1.0;
    let one = T::constant(1.0);
    let first = hom_jacobi(n - k, alpha, p.a, x * 2.0 - one, one);
    let s = one - x;
    let second = hom_jacobi(k, p.c, p.b, y * 2.0 - s, s);
    first * second
}

pub(crate) fn eval_formal(idx: TriIndex, p: TriParams, pt: TriPoint) -> f64 {
    tri_generic(idx, p, pt.x, pt.y)
}

pub(crate) fn jet_formal(idx: TriIndex, p: TriParams, pt: TriPoint) -> Jet2 {
    tri_generic(idx, p, Grad::var_x(pt.x), Grad::var_y(pt.y)).into()
}

pub(crate) fn hessian_formal(idx: TriIndex, p: TriParams, pt: TriPoint) -> Hess {
    tri_generic(idx, p, Hess::var_x(pt.x), Hess::var_y(pt.y))
}

/// `P_{n,k}^{(a,b,c,d)}(x, y)`; exactly zero for indices outside `0 <= k <= n`.
pub fn tri_eval(idx: TriIndex, params: TriParams, pt: TriPoint) -> Result<f64> {
    params.validate()?;
    Ok(eval_formal(idx, params, pt))
}

/// `(u, ∂u/∂x, ∂u/∂y)` of `P_{n,k}` at `pt`.
pub fn tri_eval_jet(idx: TriIndex, params: TriParams, pt: TriPoint) -> Result<Jet2> {
    params.validate()?;
    Ok(jet_formal(idx, params, pt))
}

/// Value, gradient and Hessian of `P_{n,k}` at `pt`.
pub fn tri_eval_hessian(idx: TriIndex, params: TriParams, pt: TriPoint) -> Result<Hess> {
    params.validate()?;
    Ok(hessian_formal(idx, params, pt))
}

/// Signed residual of an identity, together with the magnitude it is
/// measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Residual { value: lhs - rhs, scale: lhs.abs().max(rhs.abs()).max(1.0) }
    }

    pub fn relative(&self) -> f64 {
        self.value.abs() / self.scale
    }
}

fn first_factor_params(idx: TriIndex, p: TriParams) -> JacobiParams {
    JacobiParams::formal(2.0 * idx.k as f64 + p.b + p.c + p.d + 1.0, p.a)
}

fn check_off_corner(pt: TriPoint) -> Result<()> {
    if pt.x == 1.0 {
        return Err(Error::EvaluationDomain("identity involves y / (1 - x) at x = 1".into()));
    }
    Ok(())
}

/// `P~_{n-k}(x) (1-x)^k [P~_k]'(y/(1-x))` minus `(1-x) ∂P_{n,k}/∂y`.
pub fn jjp_residual(idx: TriIndex, params: TriParams, pt: TriPoint) -> Result<Residual> {
    params.validate()?;
    check_off_corner(pt)?;
    if !idx.is_valid() {
        return Ok(Residual::new(0.0, 0.0));
    }
    let s = 1.0 - pt.x;
    let t = pt.y / s;
    let f = jacobi::shifted_eval_formal(idx.n - idx.k, first_factor_params(idx, params), pt.x);
    let gp = jacobi::shifted_deriv_formal(idx.k, JacobiParams::formal(params.c, params.b), t);
    let lhs = f * s.powi(idx.k as i32) * gp;
    let rhs = s * jet_formal(idx, params, pt).uy;
    Ok(Residual::new(lhs, rhs))
}

/// `[P~_{n-k}]'(x) (1-x)^{k+1} P~_k(y/(1-x))` minus
/// `(k + (1-x) ∂/∂x - y ∂/∂y) P_{n,k}`.
pub fn jpj_residual(idx: TriIndex, params: TriParams, pt: TriPoint) -> Result<Residual> {
    params.validate()?;
    check_off_corner(pt)?;
    if !idx.is_valid() {
        return Ok(Residual::new(0.0, 0.0));
    }
    let s = 1.0 - pt.x;
    let t = pt.y / s;
    let fp = jacobi::shifted_deriv_formal(idx.n - idx.k, first_factor_params(idx, params), pt.x);
    let g = jacobi::shifted_eval_formal(idx.k, JacobiParams::formal(params.c, params.b), t);
    let lhs = fp * s.powi(idx.k as i32 + 1) * g;
    let jet = jet_formal(idx, params, pt);
    let terms = [idx.k as f64 * jet.u, s * jet.ux, -pt.y * jet.uy];
    let rhs: f64 = terms.iter().sum();
    let mut r = Residual::new(lhs, rhs);
    r.scale = r.scale.max(terms.iter().map(|v| v.abs()).sum());
    Ok(r)
}

/// All basis values at one point, in graded order, without parameter checks.
pub(crate) fn basis_row_formal(maxdeg: usize, p: TriParams, pt: TriPoint) -> Vec<f64> {
    let nmax = maxdeg as i64;
    let s = 1.0 - pt.x;
    let second = hom_jacobi_seq(nmax, p.c, p.b, 2.0 * pt.y - s, s);
    let mut row = vec![0.0; basis_dim(maxdeg)];
    for k in 0..=nmax {
        let alpha = 2.0 * k as f64 + p.b + p.c + p.d + 1.0;
        let first = hom_jacobi_seq(nmax - k, alpha, p.a, 2.0 * pt.x - 1.0, 1.0);
        for (m, f) in first.iter().enumerate() {
            let n = k as usize + m;
            row[n * (n + 1) / 2 + k as usize] = f * second[k as usize];
        }
    }
    row
}

/// Matrix with row `i` holding every `P_{n,k}(pts[i])`, columns in graded order.
pub fn basis_eval_all(maxdeg: usize, params: TriParams, pts: &[TriPoint]) -> Result<DMatrix<f64>> {
    params.validate()?;
    let m = basis_dim(maxdeg);
    let mut out = DMatrix::zeros(pts.len(), m);
    for (i, pt) in pts.iter().enumerate() {
        for (j, v) in basis_row_formal(maxdeg, params, *pt).into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}
