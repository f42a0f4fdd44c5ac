//! The 24 ladder operators of `P_{n,k}^{(a,b,c,d)}`: pointwise first-order
//! differential form, the matching sparse recurrences, and the composite
//! identities that produce the coefficient-space operators.
//!
//! `Y`-axis operators act through the second Jacobi factor (they move `k`,
//! `b`, `c`, `d`); `X`-axis operators act through the first factor.

use serde::{Deserialize, Serialize};

use crate::dual::Hess;
use crate::error::{Error, Result};
use crate::koornwinder::{eval_formal, hessian_formal, jet_formal, Jet2, Residual, TriIndex, TriParams, TriPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// `M_{s,0}` (axis `X`) or `M_{0,s}` (axis `Y`), optionally daggered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LadderId {
    pub axis: Axis,
    s: u8,
    pub dagger: bool,
}

impl LadderId {
    pub fn new(axis: Axis, s: u8, dagger: bool) -> Result<Self> {
        if !(1..=6).contains(&s) {
            return Err(Error::Usage(format!("ladder number must be in 1..=6, got {s}")));
        }
        Ok(LadderId { axis, s, dagger })
    }

    const fn of(axis: Axis, s: u8, dagger: bool) -> Self {
        LadderId { axis, s, dagger }
    }

    pub fn s(&self) -> u8 {
        self.s
    }

    pub fn toggled(&self) -> Self {
        LadderId { dagger: !self.dagger, ..*self }
    }

    pub fn all() -> impl Iterator<Item = LadderId> {
        [Axis::Y, Axis::X].into_iter().flat_map(|axis| {
            [false, true].into_iter().flat_map(move |dagger| (1..=6).map(move |s| LadderId { axis, s, dagger }))
        })
    }

    /// Operators with an explicit `1 / (1 - x)` coefficient.
    pub fn is_singular_at_corner(&self) -> bool {
        match self.axis {
            Axis::Y => self.dagger && (2..=5).contains(&self.s),
            Axis::X => matches!((self.s, self.dagger), (1, false) | (2, false) | (4, true) | (6, false)),
        }
    }
}

impl std::fmt::Display for LadderId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (i, j) = match self.axis {
            Axis::X => (self.s, 0),
            Axis::Y => (0, self.s),
        };
        write!(f, "M{i}{j}{}", if self.dagger { "^dag" } else { "" })
    }
}

/// Coefficients of a first-order operator at a point:
/// `M u = cu u + cx ∂u/∂x + cy ∂u/∂y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrder {
    pub cu: f64,
    pub cx: f64,
    pub cy: f64,
}

impl FirstOrder {
    pub fn apply(&self, jet: Jet2) -> f64 {
        self.cu * jet.u + self.cx * jet.ux + self.cy * jet.uy
    }

    /// Sum of the magnitudes of the three terms.
    pub fn magnitude(&self, jet: Jet2) -> f64 {
        (self.cu * jet.u).abs() + (self.cx * jet.ux).abs() + (self.cy * jet.uy).abs()
    }
}

/// Coefficients of `id` at `pt`, with `(n, k)` and parameters of the operand.
pub fn ladder_coefficients(id: LadderId, pt: TriPoint, idx: TriIndex, p: TriParams) -> Result<FirstOrder> {
    let (x, y) = (pt.x, pt.y);
    let z = pt.z();
    let om = 1.0 - x;
    if id.is_singular_at_corner() && om == 0.0 {
        return Err(Error::EvaluationDomain(format!("{id} has a 1/(1-x) coefficient at x = 1")));
    }
    let (n, k) = (idx.n as f64, idx.k as f64);
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let t = p.t();
    let q = x * om;
    let op = |cu, cx, cy| FirstOrder { cu, cx, cy };
    Ok(match (id.axis, id.s, id.dagger) {
        (Axis::Y, 1, false) => op(0.0, 0.0, 1.0),
        (Axis::Y, 1, true) => op(y * c - z * b, 0.0, -y * z),
        (Axis::Y, 2, false) => op(k + b + c + 1.0, 0.0, y),
        (Axis::Y, 2, true) => op(c + k - y * k / om, 0.0, -y * z / om),
        (Axis::Y, 3, false) => op(k + b + c + 1.0, 0.0, -z),
        (Axis::Y, 3, true) => op(b + k * y / om, 0.0, y * z / om),
        (Axis::Y, 4, false) => op(y * c - z * (b + k + 1.0), 0.0, -y * z),
        (Axis::Y, 4, true) => op(-k / om, 0.0, y / om),
        (Axis::Y, 5, false) => op(y * (c + k + 1.0) - z * b, 0.0, -y * z),
        (Axis::Y, 5, true) => op(k / om, 0.0, 1.0 - y / om),
        (Axis::Y, 6, false) => op(c, 0.0, -z),
        (Axis::Y, 6, true) => op(b, 0.0, y),
        (Axis::X, 1, false) => op(k / om, 1.0, -y / om),
        (Axis::X, 1, true) => op(x * (k + t + 1.0) - a, -q, x * y),
        (Axis::X, 2, false) => op(n + k + t + 2.0 + x * k / om, x, -x * y / om),
        (Axis::X, 2, true) => op(n + k + b + c + d + 1.0 - x * n, -q, x * y),
        (Axis::X, 3, false) => op(n + t + 2.0, -om, y),
        (Axis::X, 3, true) => op(a + x * n, q, -x * y),
        (Axis::X, 4, false) => op(x * (n + t + 2.0) - a - n + k - 1.0, -q, x * y),
        (Axis::X, 4, true) => op(k / om - n, x, -x * y / om),
        (Axis::X, 5, false) => op(n, om, -y),
        (Axis::X, 5, true) => op(x * (n + t + 2.0) - a, -q, x * y),
        (Axis::X, 6, false) => op(a + x * k / om, x, -x * y / om),
        (Axis::X, 6, true) => op(k + b + c + d + 1.0, -om, y),
        _ => unreachable!("ladder number validated at construction"),
    })
}

/// Value of the operator `id` applied to a function with jet `jet` at `pt`.
/// `idx` supplies the `(n, k)` in the operator's coefficients.
pub fn ladder_pointwise(id: LadderId, jet: Jet2, pt: TriPoint, idx: TriIndex, params: TriParams) -> Result<f64> {
    Ok(ladder_coefficients(id, pt, idx, params)?.apply(jet))
}

/// `factor * P_{idx}^{params}`, the image of a basis polynomial under a ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriLadderStep {
    pub factor: f64,
    pub idx: TriIndex,
    pub params: TriParams,
}

/// Recurrence row for `id` applied to `P_{n,k}^{(a,b,c,d)}`.
pub fn ladder_step(id: LadderId, idx: TriIndex, p: TriParams) -> TriLadderStep {
    let (n, k) = (idx.n, idx.k);
    let (nf, kf) = (n as f64, k as f64);
    let (a, b, c) = (p.a, p.b, p.c);
    let t = p.t();
    // (factor, dn, dk, da, db, dc, dd)
    let (factor, dn, dk, da, db, dc, dd) = match (id.axis, id.s, id.dagger) {
        (Axis::Y, 1, false) => (kf + b + c + 1.0, -1, -1, 0.0, 1.0, 1.0, 0.0),
        (Axis::Y, 1, true) => (kf + 1.0, 1, 1, 0.0, -1.0, -1.0, 0.0),
        (Axis::Y, 2, false) => (kf + b + c + 1.0, 0, 0, 0.0, 0.0, 1.0, -1.0),
        (Axis::Y, 2, true) => (kf + c, 0, 0, 0.0, 0.0, -1.0, 1.0),
        (Axis::Y, 3, false) => (kf + b + c + 1.0, 0, 0, 0.0, 1.0, 0.0, -1.0),
        (Axis::Y, 3, true) => (kf + b, 0, 0, 0.0, -1.0, 0.0, 1.0),
        (Axis::Y, 4, false) => (kf + 1.0, 1, 1, 0.0, 0.0, -1.0, -1.0),
        (Axis::Y, 4, true) => (kf + b, -1, -1, 0.0, 0.0, 1.0, 1.0),
        (Axis::Y, 5, false) => (kf + 1.0, 1, 1, 0.0, -1.0, 0.0, -1.0),
        (Axis::Y, 5, true) => (kf + c, -1, -1, 0.0, 1.0, 0.0, 1.0),
        (Axis::Y, 6, false) => (kf + c, 0, 0, 0.0, 1.0, -1.0, 0.0),
        (Axis::Y, 6, true) => (kf + b, 0, 0, 0.0, -1.0, 1.0, 0.0),
        (Axis::X, 1, false) => (nf + kf + t + 2.0, -1, 0, 1.0, 0.0, 0.0, 1.0),
        (Axis::X, 1, true) => (nf - kf + 1.0, 1, 0, -1.0, 0.0, 0.0, -1.0),
        (Axis::X, 2, false) => (nf + kf + t + 2.0, 0, 0, 0.0, 0.0, 0.0, 1.0),
        (Axis::X, 2, true) => (nf + kf + t - a + 1.0, 0, 0, 0.0, 0.0, 0.0, -1.0),
        (Axis::X, 3, false) => (nf + kf + t + 2.0, 0, 0, 1.0, 0.0, 0.0, 0.0),
        (Axis::X, 3, true) => (nf - kf + a, 0, 0, -1.0, 0.0, 0.0, 0.0),
        (Axis::X, 4, false) => (nf - kf + 1.0, 1, 0, 0.0, 0.0, 0.0, -1.0),
        (Axis::X, 4, true) => (nf - kf + a, -1, 0, 0.0, 0.0, 0.0, 1.0),
        (Axis::X, 5, false) => (nf + kf + t - a + 1.0, -1, 0, 1.0, 0.0, 0.0, 0.0),
        (Axis::X, 5, true) => (nf - kf + 1.0, 1, 0, -1.0, 0.0, 0.0, 0.0),
        (Axis::X, 6, false) => (nf - kf + a, 0, 0, -1.0, 0.0, 0.0, 1.0),
        (Axis::X, 6, true) => (nf + kf + t - a + 1.0, 0, 0, 1.0, 0.0, 0.0, -1.0),
        _ => unreachable!("ladder number validated at construction"),
    };
    TriLadderStep { factor, idx: TriIndex::extended(n + dn, k + dk), params: p.shifted(da, db, dc, dd) }
}

impl TriLadderStep {
    fn value(&self, pt: TriPoint) -> f64 {
        if self.factor == 0.0 {
            return 0.0;
        }
        self.factor * eval_formal(self.idx, self.params, pt)
    }

    fn jet(&self, pt: TriPoint) -> Jet2 {
        if self.factor == 0.0 {
            return Jet2::default();
        }
        jet_formal(self.idx, self.params, pt).scaled(self.factor)
    }
}

/// Pointwise operator applied to the exact jet of `P_{n,k}`, against the
/// recurrence right-hand side.
pub fn ladder_residual(id: LadderId, idx: TriIndex, params: TriParams, pt: TriPoint) -> Result<Residual> {
    let coef = ladder_coefficients(id, pt, idx, params)?;
    let jet = jet_formal(idx, params, pt);
    let step = ladder_step(id, idx, params);
    let rhs = step.value(pt);
    let mut r = Residual::new(coef.apply(jet), rhs);
    r.scale = r.scale.max(coef.magnitude(jet));
    Ok(r)
}

/// Applies `id` then its partner to `P_{n,k}`; the composite must be the
/// product of the two recurrence factors times `P_{n,k}`.
pub fn dagger_closure_residual(id: LadderId, idx: TriIndex, params: TriParams, pt: TriPoint) -> Result<Residual> {
    let first = ladder_step(id, idx, params);
    let partner = id.toggled();
    let second = ladder_step(partner, first.idx, first.params);
    let drift = [
        second.params.a - params.a,
        second.params.b - params.b,
        second.params.c - params.c,
        second.params.d - params.d,
    ];
    if second.idx != idx || drift.iter().any(|e| e.abs() > 1e-12) {
        return Err(Error::Usage(format!("{id} followed by {partner} does not return to {idx}")));
    }
    let coef = ladder_coefficients(partner, pt, first.idx, first.params)?;
    let jet = first.jet(pt);
    let rhs = first.factor * second.factor * eval_formal(idx, params, pt);
    let mut r = Residual::new(coef.apply(jet), rhs);
    r.scale = r.scale.max(coef.magnitude(jet));
    Ok(r)
}

/// Operator identities behind the coefficient-space recurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum CompositionId {
    DX_IDENTITY,
    DZ_IDENTITY,
    WDX_IDENTITY,
    WDY_IDENTITY,
    WDZ_IDENTITY,
    CONV_A,
    CONV_B,
    CONV_C,
    MULT_X,
    MULT_Y,
    MULT_Z,
    EIG_K,
    EIG_N,
}

impl CompositionId {
    pub const ALL: [CompositionId; 13] = [
        CompositionId::DX_IDENTITY,
        CompositionId::DZ_IDENTITY,
        CompositionId::WDX_IDENTITY,
        CompositionId::WDY_IDENTITY,
        CompositionId::WDZ_IDENTITY,
        CompositionId::CONV_A,
        CompositionId::CONV_B,
        CompositionId::CONV_C,
        CompositionId::MULT_X,
        CompositionId::MULT_Y,
        CompositionId::MULT_Z,
        CompositionId::EIG_K,
        CompositionId::EIG_N,
    ];

    /// Identities that only hold in the three-parameter family.
    pub fn requires_d_zero(&self) -> bool {
        use CompositionId::*;
        matches!(self, DX_IDENTITY | DZ_IDENTITY | WDX_IDENTITY | WDZ_IDENTITY | EIG_N)
    }

    fn needs_hessian(&self) -> bool {
        matches!(self, CompositionId::EIG_K | CompositionId::EIG_N)
    }

    /// Signed ladder chains; each chain is `[outer, inner]` or `[inner]`.
    fn terms(&self) -> Vec<(f64, Vec<LadderId>)> {
        use CompositionId::*;
        let y = |s, d| LadderId::of(Axis::Y, s, d);
        let x = |s, d| LadderId::of(Axis::X, s, d);
        match self {
            DX_IDENTITY => vec![(1.0, vec![x(1, false), y(2, false)]), (1.0, vec![y(4, true), x(6, true)])],
            DZ_IDENTITY => vec![(1.0, vec![x(1, false), y(3, false)]), (-1.0, vec![y(5, true), x(6, true)])],
            WDX_IDENTITY => vec![(1.0, vec![y(2, true), x(1, true)]), (1.0, vec![y(4, false), x(6, false)])],
            WDY_IDENTITY => vec![(1.0, vec![y(1, true)])],
            WDZ_IDENTITY => vec![(1.0, vec![y(3, true), x(1, true)]), (-1.0, vec![y(5, false), x(6, false)])],
            CONV_A => vec![(1.0, vec![x(3, false)]), (1.0, vec![x(5, false)])],
            CONV_B => vec![
                (1.0, vec![y(3, false), x(2, false)]),
                (-1.0, vec![y(3, false), x(4, true)]),
                (1.0, vec![y(5, true), x(2, true)]),
                (-1.0, vec![y(5, true), x(4, false)]),
            ],
            CONV_C => vec![
                (1.0, vec![y(2, false), x(2, false)]),
                (-1.0, vec![y(2, false), x(4, true)]),
                (-1.0, vec![y(4, true), x(2, true)]),
                (1.0, vec![y(4, true), x(4, false)]),
            ],
            MULT_X => vec![(1.0, vec![x(3, true)]), (1.0, vec![x(5, true)])],
            MULT_Y => vec![
                (1.0, vec![y(3, true), x(2, true)]),
                (-1.0, vec![y(3, true), x(4, false)]),
                (1.0, vec![y(5, false), x(2, false)]),
                (-1.0, vec![y(5, false), x(4, true)]),
            ],
            MULT_Z => vec![
                (1.0, vec![y(2, true), x(2, true)]),
                (-1.0, vec![y(2, true), x(4, false)]),
                (1.0, vec![y(4, false), x(4, true)]),
                (-1.0, vec![y(4, false), x(2, false)]),
            ],
            EIG_K => vec![(1.0, vec![y(1, false), y(1, true)])],
            EIG_N => vec![(1.0, vec![x(1, true), x(1, false)])],
        }
    }

    /// Closed-form right-hand side applied to `u = P_{n,k}`; returns the
    /// value and the sum of its term magnitudes.
    fn rhs(&self, u: &Hess, idx: TriIndex, p: TriParams, pt: TriPoint) -> (f64, f64) {
        use CompositionId::*;
        let (x, y, z) = (pt.x, pt.y, pt.z());
        let (a, b, c) = (p.a, p.b, p.c);
        let k = idx.k as f64;
        let n = idx.n as f64;
        let kk = 2.0 * k + b + c + 1.0;
        let nn = 2.0 * n + p.t() + 2.0;
        let uz = u.dy - u.dx;
        let sum = |terms: &[f64]| (terms.iter().sum::<f64>(), terms.iter().map(|v| v.abs()).sum::<f64>());
        // zy u_yy + ((1+b)(1-x) - (2+b+c) y) u_y
        let dk = [z * y * u.dyy, ((1.0 + b) * (1.0 - x) - (2.0 + b + c) * y) * u.dy];
        match self {
            DX_IDENTITY => sum(&[kk * u.dx]),
            DZ_IDENTITY => sum(&[-kk * uz]),
            WDX_IDENTITY => sum(&[kk * c * x * u.v, -kk * a * z * u.v, -kk * x * z * u.dx]),
            WDY_IDENTITY => {
                // -y^{1-b} z^{1-c} ∂/∂y (y^b z^c u)
                sum(&[-z * b * u.v, y * c * u.v, -y * z * u.dy])
            }
            WDZ_IDENTITY => sum(&[kk * b * x * u.v, -kk * a * y * u.v, kk * x * y * uz]),
            CONV_A => sum(&[nn * u.v]),
            CONV_B | CONV_C => sum(&[kk * nn * u.v]),
            MULT_X => sum(&[nn * x * u.v]),
            MULT_Y => sum(&[kk * nn * y * u.v]),
            MULT_Z => sum(&[kk * nn * z * u.v]),
            EIG_K => sum(&[(b + c) * u.v, -dk[0], -dk[1]]),
            EIG_N => {
                // D_k u - D_n u - k (a + 1) u, where D_n is the total-degree operator.
                let s3 = a + b + c + 3.0;
                let dn = [
                    x * (1.0 - x) * u.dxx,
                    -2.0 * x * y * u.dxy,
                    y * (1.0 - y) * u.dyy,
                    (a + 1.0 - s3 * x) * u.dx,
                    (b + 1.0 - s3 * y) * u.dy,
                ];
                let mut terms = vec![dk[0], dk[1], -k * (a + 1.0) * u.v];
                terms.extend(dn.iter().map(|v| -v));
                sum(&terms)
            }
        }
    }
}

/// Left side (ladder composites, inner ladder mapped exactly by its
/// recurrence, outer ladder applied pointwise to the intermediate jet) minus
/// the closed-form right side, for `u = P_{n,k}^{params}`.
pub fn composition_residual(cid: CompositionId, idx: TriIndex, params: TriParams, pt: TriPoint) -> Result<Residual> {
    if cid.requires_d_zero() && params.d != 0.0 {
        return Err(Error::Usage(format!("{cid:?} holds only for d = 0, got {params}")));
    }
    let mut lhs = 0.0;
    let mut lhs_mag = 0.0;
    for (sign, chain) in cid.terms() {
        let (inner, outer) = match chain.as_slice() {
            [inner] => (*inner, None),
            [outer, inner] => (*inner, Some(*outer)),
            _ => unreachable!("identities use at most two ladders per term"),
        };
        let step = ladder_step(inner, idx, params);
        let v = match outer {
            None => {
                let v = step.value(pt);
                lhs_mag += v.abs();
                v
            }
            Some(o) => {
                let coef = ladder_coefficients(o, pt, step.idx, step.params)?;
                let jet = step.jet(pt);
                lhs_mag += coef.magnitude(jet);
                coef.apply(jet)
            }
        };
        lhs += sign * v;
    }
    let u = if cid.needs_hessian() {
        hessian_formal(idx, params, pt)
    } else {
        let j = jet_formal(idx, params, pt);
        Hess { v: j.u, dx: j.ux, dy: j.uy, ..Default::default() }
    };
    let (rhs, rhs_mag) = cid.rhs(&u, idx, params, pt);
    let mut r = Residual::new(lhs, rhs);
    r.scale = r.scale.max(lhs_mag).max(rhs_mag);
    Ok(r)
}
