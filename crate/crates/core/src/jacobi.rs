//! Univariate Jacobi polynomials, their twelve ladder operators and the
//! matching sparse recurrences, on `[-1, 1]` and shifted to `[0, 1]`.
//!
//! Normalization is the standard one, `P_n^{(a,b)}(1) = binom(n + a, n)`.

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};

pub use crate::gauss::{gauss_jacobi_rule, GaussJacobiRule};

/// Exponent pair `(a, b)` of the weight `(1 - x)^a (1 + x)^b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    pub a: f64,
    pub b: f64,
}

impl JacobiParams {
    /// Checked constructor: both exponents must exceed -1.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = JacobiParams { a, b };
        p.validate()?;
        Ok(p)
    }

    /// Parameters used only formally, as recurrence targets. The polynomial
    /// is still defined for any real pair; only orthogonality is lost.
    pub const fn formal(a: f64, b: f64) -> Self {
        JacobiParams { a, b }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > -1.0 && self.b > -1.0) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "Jacobi parameters must satisfy a, b > -1, got ({}, {})",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// Value and first derivative of a univariate function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet1 {
    pub u: f64,
    pub du: f64,
}

/// Right-hand side of a sparse recurrence: `factor * P_n^{params}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderStep {
    pub factor: f64,
    pub n: i64,
    pub params: JacobiParams,
}

/// One of the twelve ladder operators `L_s` / `L_s^†`, `s = 1..=6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JacobiLadder {
    s: u8,
    dagger: bool,
}

impl JacobiLadder {
    pub fn new(s: u8, dagger: bool) -> Result<Self> {
        if !(1..=6).contains(&s) {
            return Err(Error::Usage(format!("ladder number must be in 1..=6, got {s}")));
        }
        Ok(JacobiLadder { s, dagger })
    }

    pub fn s(&self) -> u8 {
        self.s
    }

    pub fn dagger(&self) -> bool {
        self.dagger
    }

    pub fn toggled(&self) -> Self {
        JacobiLadder { s: self.s, dagger: !self.dagger }
    }

    /// All twelve operators, undaggered first.
    pub fn all() -> impl Iterator<Item = JacobiLadder> {
        [false, true].into_iter().flat_map(|dagger| (1..=6).map(move |s| JacobiLadder { s, dagger }))
    }
}

impl std::fmt::Display for JacobiLadder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "L{}{}", self.s, if self.dagger { "^dag" } else { "" })
    }
}

/// `v^n P_n^{(alpha, beta)}(u / v)` evaluated without dividing by `v`.
///
/// Uses the forward three-term recurrence; when one of its leading
/// coefficients vanishes (possible only for formal parameters) the explicit
/// binomial sum is used instead.
pub(crate) fn hom_jacobi<T: Scalar>(n: i64, alpha: f64, beta: f64, u: T, v: T) -> T {
    if n < 0 {
        return T::constant(0.0);
    }
    if n == 0 {
        return T::constant(1.0);
    }
    let ab = alpha + beta;
    let p1 = v * (alpha + 1.0) + (u - v) * (0.5 * (ab + 2.0));
    if n == 1 {
        return p1;
    }
    for j in 2..=n {
        let j = j as f64;
        let lead = 2.0 * j * (j + ab) * (2.0 * j + ab - 2.0);
        if lead.abs() < 1e-12 * (1.0 + j * j * j) {
            return hom_jacobi_raised(n, alpha, beta, u, v);
        }
    }
    let v2 = v * v;
    let mut prev = T::constant(1.0);
    let mut cur = p1;
    for j in 2..=n {
        let j = j as f64;
        let sigma = 2.0 * j + ab;
        let lead = 2.0 * j * (j + ab) * (sigma - 2.0);
        let cx = (sigma - 1.0) * sigma * (sigma - 2.0) / lead;
        let c0 = (sigma - 1.0) * (alpha * alpha - beta * beta) / lead;
        let cm = 2.0 * (j + alpha - 1.0) * (j + beta - 1.0) * sigma / lead;
        let next = (u * cx + v * c0) * cur - v2 * prev * cm;
        prev = cur;
        cur = next;
    }
    cur
}

/// `[v^j P_j(u / v) for j in 0..=n]` from one recurrence sweep.
pub(crate) fn hom_jacobi_seq<T: Scalar>(n: i64, alpha: f64, beta: f64, u: T, v: T) -> Vec<T> {
    let mut out = Vec::with_capacity((n + 1).max(0) as usize);
    if n < 0 {
        return out;
    }
    out.push(T::constant(1.0));
    if n == 0 {
        return out;
    }
    let ab = alpha + beta;
    out.push(v * (alpha + 1.0) + (u - v) * (0.5 * (ab + 2.0)));
    let v2 = v * v;
    for j in 2..=n {
        let jf = j as f64;
        let sigma = 2.0 * jf + ab;
        let lead = 2.0 * jf * (jf + ab) * (sigma - 2.0);
        if lead.abs() < 1e-12 * (1.0 + jf * jf * jf) {
            for jj in j..=n {
                out.push(hom_jacobi_raised(jj, alpha, beta, u, v));
            }
            return out;
        }
        let cx = (sigma - 1.0) * sigma * (sigma - 2.0) / lead;
        let c0 = (sigma - 1.0) * (alpha * alpha - beta * beta) / lead;
        let cm = 2.0 * (jf + alpha - 1.0) * (jf + beta - 1.0) * sigma / lead;
        let j = j as usize;
        let next = (u * cx + v * c0) * out[j - 1] - v2 * out[j - 2] * cm;
        out.push(next);
    }
    out
}

/// Degenerate-recurrence path: raise `beta` with
/// `(2n+a+b+1) P_n^{(a,b)} = (n+a+b+1) P_n^{(a,b+1)} + (n+a) P_{n-1}^{(a,b+1)}`
/// until the forward recurrence is regular again.
fn hom_jacobi_raised<T: Scalar>(n: i64, alpha: f64, beta: f64, u: T, v: T) -> T {
    let nf = n as f64;
    let denom = 2.0 * nf + alpha + beta + 1.0;
    if denom.abs() < 1e-12 {
        return hom_jacobi_sum(n, alpha, beta, u, v);
    }
    let hi = hom_jacobi(n, alpha, beta + 1.0, u, v) * (nf + alpha + beta + 1.0);
    let lo = v * hom_jacobi(n - 1, alpha, beta + 1.0, u, v) * (nf + alpha);
    (hi + lo) * (1.0 / denom)
}

/// Generalized binomial coefficient `binom(r, j)` for real `r`.
fn binom(r: f64, j: i64) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (r - i as f64) / (i as f64 + 1.0))
}

/// Symmetric explicit form
/// `sum_s binom(n+a, n-s) binom(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s)`.
fn hom_jacobi_sum<T: Scalar>(n: i64, alpha: f64, beta: f64, u: T, v: T) -> T {
    let minus = (u - v) * 0.5;
    let plus = (u + v) * 0.5;
    let mut pow_minus = vec![T::constant(1.0); n as usize + 1];
    let mut pow_plus = vec![T::constant(1.0); n as usize + 1];
    for i in 1..=n as usize {
        pow_minus[i] = pow_minus[i - 1] * minus;
        pow_plus[i] = pow_plus[i - 1] * plus;
    }
    let mut acc = T::constant(0.0);
    for s in 0..=n {
        let c = binom(n as f64 + alpha, n - s) * binom(n as f64 + beta, s);
        acc = acc + pow_minus[s as usize] * pow_plus[(n - s) as usize] * c;
    }
    acc
}

fn check_degree(n: i64) -> Result<()> {
    if n < -1 {
        return Err(Error::Usage(format!("degree must be >= -1, got {n}")));
    }
    Ok(())
}

/// `P_n^{(a,b)}(x)`; zero for `n = -1`.
pub fn jacobi_eval(n: i64, p: JacobiParams, x: f64) -> Result<f64> {
    p.validate()?;
    check_degree(n)?;
    Ok(hom_jacobi(n, p.a, p.b, x, 1.0))
}

/// Shifted Jacobi polynomial on `[0, 1]`: `P_n^{(a,b)}(2x - 1)`.
pub fn shifted_jacobi_eval(n: i64, p: JacobiParams, x: f64) -> Result<f64> {
    p.validate()?;
    check_degree(n)?;
    Ok(hom_jacobi(n, p.a, p.b, 2.0 * x - 1.0, 1.0))
}

/// `d/dx P_n^{(a,b)}(x) = (n + a + b + 1)/2 P_{n-1}^{(a+1,b+1)}(x)`.
pub fn jacobi_deriv(n: i64, p: JacobiParams, x: f64) -> Result<f64> {
    p.validate()?;
    check_degree(n)?;
    Ok(deriv_formal(n, p, x))
}

pub(crate) fn eval_formal(n: i64, p: JacobiParams, x: f64) -> f64 {
    hom_jacobi(n, p.a, p.b, x, 1.0)
}

pub(crate) fn deriv_formal(n: i64, p: JacobiParams, x: f64) -> f64 {
    if n <= 0 {
        return 0.0;
    }
    0.5 * (n as f64 + p.a + p.b + 1.0) * hom_jacobi(n - 1, p.a + 1.0, p.b + 1.0, x, 1.0)
}

pub(crate) fn shifted_eval_formal(n: i64, p: JacobiParams, x: f64) -> f64 {
    hom_jacobi(n, p.a, p.b, 2.0 * x - 1.0, 1.0)
}

pub(crate) fn shifted_deriv_formal(n: i64, p: JacobiParams, x: f64) -> f64 {
    if n <= 0 {
        return 0.0;
    }
    (n as f64 + p.a + p.b + 1.0) * hom_jacobi(n - 1, p.a + 1.0, p.b + 1.0, 2.0 * x - 1.0, 1.0)
}

/// `s^k P~_k^{(a,b)}(y / s)`, a polynomial in `(y, s)`; well defined at `s = 0`.
pub fn homog_shifted_eval(k: i64, p: JacobiParams, y: f64, s: f64) -> f64 {
    hom_jacobi(k, p.a, p.b, 2.0 * y - s, s)
}

/// Coefficients `(cu, cd)` with `L u = cu * u + cd * u'` at `x`.
pub fn ladder_coefficients(l: JacobiLadder, n: i64, p: JacobiParams, x: f64) -> (f64, f64) {
    let (a, b, n) = (p.a, p.b, n as f64);
    let (xp, xm) = (1.0 + x, 1.0 - x);
    let sq = 1.0 - x * x;
    match (l.s, l.dagger) {
        (1, false) => (0.0, 1.0),
        (1, true) => (xp * a - xm * b, -sq),
        (2, false) => (a + b + n + 1.0, xp),
        (2, true) => (2.0 * a + xm * n, -sq),
        (3, false) => (a + b + n + 1.0, -xm),
        (3, true) => (2.0 * b + xp * n, sq),
        (4, false) => (xp * a - xm * (b + n + 1.0), -sq),
        (4, true) => (-n, xp),
        (5, false) => (xp * (a + n + 1.0) - xm * b, -sq),
        (5, true) => (n, xm),
        (6, false) => (b, xp),
        (6, true) => (a, -xm),
        _ => unreachable!("ladder number validated at construction"),
    }
}

/// Shifted counterpart of [`ladder_coefficients`] on `[0, 1]`.
///
/// `L~2`, `L~3^†` and `L~4^†` use `x` where the `[-1, 1]` operators use
/// `1 + x`; this is what the change of variables `x -> 2x - 1` produces.
pub fn shifted_ladder_coefficients(l: JacobiLadder, n: i64, p: JacobiParams, x: f64) -> (f64, f64) {
    let (a, b, n) = (p.a, p.b, n as f64);
    let xm = 1.0 - x;
    let q = x * xm;
    match (l.s, l.dagger) {
        (1, false) => (0.0, 1.0),
        (1, true) => (x * a - xm * b, -q),
        (2, false) => (a + b + n + 1.0, x),
        (2, true) => (a + xm * n, -q),
        (3, false) => (a + b + n + 1.0, -xm),
        (3, true) => (b + x * n, q),
        (4, false) => (x * a - xm * (b + n + 1.0), -q),
        (4, true) => (-n, x),
        (5, false) => (x * (a + n + 1.0) - xm * b, -q),
        (5, true) => (n, xm),
        (6, false) => (b, x),
        (6, true) => (a, -xm),
        _ => unreachable!("ladder number validated at construction"),
    }
}

/// `(L u)(x)` for the operator on `[-1, 1]`; `n` is the degree entering the
/// operator's coefficients.
pub fn jacobi_ladder_pointwise(l: JacobiLadder, jet: Jet1, n: i64, p: JacobiParams, x: f64) -> f64 {
    let (cu, cd) = ladder_coefficients(l, n, p, x);
    cu * jet.u + cd * jet.du
}

/// `(L~ u)(x)` for the operator on `[0, 1]`.
pub fn shifted_ladder_pointwise(l: JacobiLadder, jet: Jet1, n: i64, p: JacobiParams, x: f64) -> f64 {
    let (cu, cd) = shifted_ladder_coefficients(l, n, p, x);
    cu * jet.u + cd * jet.du
}

fn step_table(l: JacobiLadder, n: i64, p: JacobiParams, half: f64, two: f64) -> LadderStep {
    let (a, b) = (p.a, p.b);
    let nf = n as f64;
    let (factor, dn, da, db) = match (l.s, l.dagger) {
        (1, false) => (half * (nf + a + b + 1.0), -1, 1.0, 1.0),
        (1, true) => (two * (nf + 1.0), 1, -1.0, -1.0),
        (2, false) => (nf + a + b + 1.0, 0, 1.0, 0.0),
        (2, true) => (two * (nf + a), 0, -1.0, 0.0),
        (3, false) => (nf + a + b + 1.0, 0, 0.0, 1.0),
        (3, true) => (two * (nf + b), 0, 0.0, -1.0),
        (4, false) => (two * (nf + 1.0), 1, -1.0, 0.0),
        (4, true) => (nf + b, -1, 1.0, 0.0),
        (5, false) => (two * (nf + 1.0), 1, 0.0, -1.0),
        (5, true) => (nf + a, -1, 0.0, 1.0),
        (6, false) => (nf + b, 0, 1.0, -1.0),
        (6, true) => (nf + a, 0, -1.0, 1.0),
        _ => unreachable!("ladder number validated at construction"),
    };
    LadderStep { factor, n: n + dn, params: JacobiParams::formal(a + da, b + db) }
}

/// Recurrence image of `P_n^{(a,b)}` under `l`.
pub fn jacobi_ladder_step(l: JacobiLadder, n: i64, p: JacobiParams) -> LadderStep {
    step_table(l, n, p, 0.5, 2.0)
}

/// Recurrence image of the shifted `P~_n^{(a,b)}` under the shifted `l`.
pub fn shifted_ladder_step(l: JacobiLadder, n: i64, p: JacobiParams) -> LadderStep {
    step_table(l, n, p, 1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn l(s: u8, d: bool) -> JacobiLadder {
        JacobiLadder::new(s, d).unwrap()
    }

    #[test]
    fn low_degrees() {
        let p = JacobiParams::new(0.3, 1.7).unwrap();
        for &x in &[-0.9, 0.0, 0.4] {
            assert_eq!(jacobi_eval(0, p, x).unwrap(), 1.0);
            assert_eq!(jacobi_eval(-1, p, x).unwrap(), 0.0);
            let want = (p.a + 1.0) + (p.a + p.b + 2.0) * (x - 1.0) / 2.0;
            assert_relative_eq!(jacobi_eval(1, p, x).unwrap(), want, epsilon = 1e-15);
        }
    }

    #[test]
    fn degree_one_matches_finite_difference_of_recurrence() {
        let p = JacobiParams::new(0.5, -0.5).unwrap();
        let h = 1e-5;
        let fd = (jacobi_eval(1, p, 0.2 + h).unwrap() - jacobi_eval(1, p, 0.2 - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(fd, (p.a + p.b + 2.0) / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn shifted_low_degrees() {
        let p = JacobiParams::new(0.25, 2.0).unwrap();
        let x = 0.3;
        assert_eq!(shifted_jacobi_eval(0, p, x).unwrap(), 1.0);
        let want = (p.a + 1.0) + (p.a + p.b + 2.0) * (x - 1.0);
        assert_relative_eq!(shifted_jacobi_eval(1, p, x).unwrap(), want, epsilon = 1e-15);
        let p0 = JacobiParams::new(0.0, 0.0).unwrap();
        assert_relative_eq!(shifted_jacobi_eval(2, p0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn derivative_values() {
        let p = JacobiParams::new(0.7, 0.1).unwrap();
        assert_eq!(jacobi_deriv(0, p, 0.3).unwrap(), 0.0);
        assert_relative_eq!(jacobi_deriv(1, p, -0.6).unwrap(), (p.a + p.b + 2.0) / 2.0, epsilon = 1e-15);
        let q = JacobiParams::new(1.0, 0.0).unwrap();
        let want = 2.5 * jacobi_eval(2, JacobiParams::new(2.0, 1.0).unwrap(), 0.3).unwrap();
        assert_relative_eq!(jacobi_deriv(3, q, 0.3).unwrap(), want, epsilon = 1e-14);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let bad = JacobiParams::formal(-1.0, 0.0);
        assert!(matches!(jacobi_eval(2, bad, 0.0), Err(Error::ParameterDomain(_))));
        assert!(JacobiParams::new(0.0, -1.5).is_err());
        assert!(matches!(JacobiLadder::new(7, false), Err(Error::Usage(_))));
        assert!(JacobiLadder::new(0, true).is_err());
    }

    #[test]
    fn pointwise_examples() {
        let p = JacobiParams::new(0.4, 1.3).unwrap();
        let jet = Jet1 { u: 2.0, du: -3.0 };
        assert_eq!(jacobi_ladder_pointwise(l(1, false), jet, 4, p, 0.1), -3.0);
        let one = Jet1 { u: 1.0, du: 0.0 };
        assert_eq!(jacobi_ladder_pointwise(l(6, false), one, 5, p, 0.1), p.b);
        assert_eq!(jacobi_ladder_pointwise(l(4, true), one, 0, p, 0.1), 0.0);
        assert_eq!(shifted_ladder_pointwise(l(1, false), jet, 4, p, 0.1), -3.0);
        assert_eq!(shifted_ladder_pointwise(l(6, false), one, 5, p, 0.1), p.b);
        assert_eq!(shifted_ladder_pointwise(l(2, true), one, 0, p, 0.1), p.a);
    }

    #[test]
    fn step_examples() {
        let p = JacobiParams::new(1.0, 0.0).unwrap();
        let s = jacobi_ladder_step(l(1, false), 3, p);
        assert_eq!((s.factor, s.n, s.params), (2.5, 2, JacobiParams::formal(2.0, 1.0)));
        let q = JacobiParams::new(0.6, 0.2).unwrap();
        let s = jacobi_ladder_step(l(2, true), 0, q);
        assert_eq!((s.factor, s.n), (2.0 * q.a, 0));
        assert_relative_eq!(s.params.a, q.a - 1.0);
        let s = jacobi_ladder_step(l(5, false), 0, q);
        assert_eq!((s.factor, s.n, s.params.b), (2.0, 1, q.b - 1.0));

        let s = shifted_ladder_step(l(1, false), 3, p);
        assert_eq!((s.factor, s.n, s.params), (5.0, 2, JacobiParams::formal(2.0, 1.0)));
        let s = shifted_ladder_step(l(4, false), 2, q);
        assert_eq!((s.factor, s.n, s.params.a), (3.0, 3, q.a - 1.0));
        let s = shifted_ladder_step(l(3, true), 1, q);
        assert_eq!((s.factor, s.n, s.params.b), (1.0 + q.b, 1, q.b - 1.0));
    }

    #[test]
    fn zero_factor_at_parameter_boundary() {
        let p = JacobiParams::new(0.0, 0.5).unwrap();
        let s = jacobi_ladder_step(l(2, true), 0, p);
        assert_eq!(s.factor, 0.0);
        let jet = Jet1 { u: 1.0, du: 0.0 };
        assert_eq!(jacobi_ladder_pointwise(l(2, true), jet, 0, p, 0.37), 0.0);
    }

    #[test]
    fn homogeneous_examples() {
        let p = JacobiParams::new(0.5, 1.5).unwrap();
        assert_eq!(homog_shifted_eval(0, p, 0.3, 0.0), 1.0);
        let (y, s) = (0.2, 0.7);
        let want = (p.a + 1.0) * s + (p.a + p.b + 2.0) * (y - s);
        assert_relative_eq!(homog_shifted_eval(1, p, y, s), want, epsilon = 1e-15);
        let p0 = JacobiParams::new(0.0, 0.0).unwrap();
        let want = 0.25 * shifted_jacobi_eval(2, p0, 0.4).unwrap();
        assert_relative_eq!(homog_shifted_eval(2, p0, 0.2, 0.5), want, epsilon = 1e-15);
    }

    #[test]
    fn explicit_sum_agrees_with_recurrence() {
        // The binomial sum cancels badly at high degree; it is only a last resort.
        for &(a, b) in &[(0.5, -0.5), (2.5, 1.0), (-0.5, -0.5)] {
            for n in 0..=12 {
                for &x in &[-0.95, -0.3, 0.1, 0.8] {
                    let r = hom_jacobi(n, a, b, x, 1.0);
                    let s = hom_jacobi_sum(n, a, b, x, 1.0);
                    assert!((r - s).abs() <= 1e-11 * r.abs().max(1.0), "n={n} a={a} b={b} x={x}");
                }
            }
        }
    }

    #[test]
    fn raised_path_matches_binomial_sum() {
        for &(a, b) in &[(-1.5, -1.5), (-1.0, -1.0), (-1.5, -0.5), (-0.5, -1.5), (-2.0, 0.0)] {
            for n in 0..=8 {
                for &x in &[-0.9, 0.2, 0.7] {
                    let r = hom_jacobi(n, a, b, x, 1.0);
                    let s = hom_jacobi_sum(n, a, b, x, 1.0);
                    assert!((r - s).abs() <= 1e-12 * s.abs().max(1.0), "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn formal_parameters_with_vanishing_recurrence_lead() {
        // alpha + beta = -3 makes the degree-3 recurrence step singular; the
        // polynomial itself is continuous in the parameters.
        let x = 0.35;
        let exact = hom_jacobi(5, -1.5, -1.5, x, 1.0);
        let near = hom_jacobi(5, -1.5 + 1e-7, -1.5, x, 1.0);
        assert!((exact - near).abs() < 1e-5 * exact.abs().max(1.0));
    }
}
