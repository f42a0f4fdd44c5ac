//! Quadrature on the triangle through the collapsed map `x = s`,
//! `y = (1 - s) t`, and the analysis/synthesis pair built on it.
//!
//! Under the map, `w_{a,b,c,d} dA = s^a (1-s)^{b+c+d+1} t^b (1-t)^c ds dt`,
//! so the rule is a tensor product of two Gauss-Jacobi rules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gauss::{beta_fn, gauss_jacobi_rule};
use crate::koornwinder::{
    basis_dim, basis_row_formal, jet_formal, linear_to_index, weight_eval, Jet2, TriIndex, TriParams, TriPoint,
};
use crate::operators::{BasisTag, CoeffVec};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<TriPoint>,
    pub weights: Vec<f64>,
    pub params: TriParams,
    /// Highest total degree `D` for which `∫ p w` is exact when `deg p <= D`.
    pub strength: usize,
}

impl QuadRule {
    pub fn integrate(&self, f: impl Fn(TriPoint) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `∫∫ w_{a,b,c,d} dA = B(a+1, b+c+d+2) B(b+1, c+1)`.
pub fn weight_integral(p: TriParams) -> f64 {
    beta_fn(p.a + 1.0, p.b + p.c + p.d + 2.0) * beta_fn(p.b + 1.0, p.c + 1.0)
}

/// `m * m` point rule for `∫∫ f w_{a,b,c,d} dA`, exact for polynomial `f`
/// of total degree up to `2m - 1`.
pub fn duffy_rule(m: usize, params: TriParams) -> Result<QuadRule> {
    params.validate()?;
    let sr = gauss_jacobi_rule(m, params.b + params.c + params.d + 1.0, params.a)?;
    let tr = gauss_jacobi_rule(m, params.c, params.b)?;
    let mut points = Vec::with_capacity(m * m);
    let mut weights = Vec::with_capacity(m * m);
    for (s, ws) in sr.nodes.iter().zip(&sr.weights) {
        for (t, wt) in tr.nodes.iter().zip(&tr.weights) {
            points.push(TriPoint::new(*s, (1.0 - s) * t));
            weights.push(ws * wt);
        }
    }
    Ok(QuadRule { points, weights, params, strength: 2 * m - 1 })
}

/// `<P_{n,k}, P_{n,k}>` under `w_{a,b,c,d}`.
pub fn norm_sq(idx: TriIndex, params: TriParams) -> Result<f64> {
    if !idx.is_valid() {
        return Err(Error::Usage(format!("invalid index {idx}")));
    }
    let rule = duffy_rule(idx.n as usize + 1, params)?;
    Ok(rule.integrate(|pt| crate::koornwinder::eval_formal(idx, params, pt).powi(2)))
}

fn basis_rows(maxdeg: usize, params: TriParams, pts: &[TriPoint]) -> Vec<Vec<f64>> {
    pts.iter().map(|pt| basis_row_formal(maxdeg, params, *pt)).collect()
}

/// Projection of values sampled at `rule.points` onto
/// `{P_{n,k}^{rule.params} : n <= maxdeg}`; norms come from the same rule.
pub fn analyze_samples(values: &[f64], rule: &QuadRule, maxdeg: usize) -> Result<CoeffVec> {
    if values.len() != rule.len() {
        return Err(Error::Usage(format!("{} samples for a {}-point rule", values.len(), rule.len())));
    }
    let rows = basis_rows(maxdeg, rule.params, &rule.points);
    let dim = basis_dim(maxdeg);
    let mut num = vec![0.0; dim];
    let mut den = vec![0.0; dim];
    for ((row, w), f) in rows.iter().zip(&rule.weights).zip(values) {
        for j in 0..dim {
            num[j] += w * f * row[j];
            den[j] += w * row[j] * row[j];
        }
    }
    let coeffs = num.iter().zip(&den).map(|(n, d)| n / d).collect();
    CoeffVec::new(BasisTag::new(rule.params, false, maxdeg), coeffs)
}

/// Projection of `f` using a rule with `m` points per direction.
pub fn analyze(f: impl Fn(TriPoint) -> f64, maxdeg: usize, params: TriParams, m: usize) -> Result<CoeffVec> {
    if m < maxdeg + 1 {
        return Err(Error::Usage(format!("rule size {m} cannot resolve degree {maxdeg} norms")));
    }
    let rule = duffy_rule(m, params)?;
    let values: Vec<f64> = rule.points.iter().map(|p| f(*p)).collect();
    analyze_samples(&values, &rule, maxdeg)
}

/// Values of the expansion `v` at `pts`; weighted bases include the
/// `x^a y^b z^c` factor (always with `d = 0`).
pub fn synthesize(v: &CoeffVec, pts: &[TriPoint]) -> Result<Vec<f64>> {
    let p = v.basis.params;
    let weight = TriParams::formal(p.a, p.b, p.c, 0.0);
    pts.iter()
        .map(|pt| {
            let row = basis_row_formal(v.basis.maxdeg, p, *pt);
            let s: f64 = row.iter().zip(&v.values).map(|(b, c)| b * c).sum();
            if v.basis.weighted {
                Ok(s * weight_eval(weight, *pt)?)
            } else {
                Ok(s)
            }
        })
        .collect()
}

/// Value and gradient of an unweighted expansion at `pt`.
pub fn synthesize_jet(v: &CoeffVec, pt: TriPoint) -> Result<Jet2> {
    if v.basis.weighted {
        return Err(Error::Usage("jets of weighted expansions are not provided".into()));
    }
    let mut acc = Jet2::default();
    for (i, c) in v.values.iter().enumerate() {
        if *c != 0.0 {
            let j = jet_formal(linear_to_index(i), v.basis.params, pt);
            acc.u += c * j.u;
            acc.ux += c * j.ux;
            acc.uy += c * j.uy;
        }
    }
    Ok(acc)
}

/// Quadrature Gram matrix of the degree-`maxdeg` basis.
pub fn gram_matrix(maxdeg: usize, params: TriParams, m: usize) -> Result<DMatrix<f64>> {
    if m < maxdeg + 1 {
        return Err(Error::Usage(format!("rule size {m} is below maxdeg + 1 = {}", maxdeg + 1)));
    }
    let rule = duffy_rule(m, params)?;
    let rows = basis_rows(maxdeg, params, &rule.points);
    let dim = basis_dim(maxdeg);
    let mut g = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let s: f64 = rows.iter().zip(&rule.weights).map(|(r, w)| w * r[i] * r[j]).sum();
            g[(i, j)] = s;
            g[(j, i)] = s;
        }
    }
    Ok(g)
}

/// Least-squares fit of scattered samples in the basis, for data not on a
/// quadrature grid.
pub fn fit_samples(pts: &[TriPoint], values: &[f64], maxdeg: usize, params: TriParams) -> Result<CoeffVec> {
    params.validate()?;
    let dim = basis_dim(maxdeg);
    if pts.len() != values.len() {
        return Err(Error::Usage("sample points and values differ in length".into()));
    }
    if pts.len() < dim {
        return Err(Error::Usage(format!("{} samples cannot determine {dim} coefficients", pts.len())));
    }
    let rows = basis_rows(maxdeg, params, pts);
    let a = DMatrix::from_fn(pts.len(), dim, |i, j| rows[i][j]);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-12 * smax).count();
    if rank < dim {
        return Err(Error::Degenerate(format!("sample set has rank {rank} < {dim}")));
    }
    let x =
        svd.solve(&DVector::from_column_slice(values), 1e-12 * smax).map_err(|e| Error::Degenerate(e.to_string()))?;
    CoeffVec::new(BasisTag::new(params, false, maxdeg), x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::koornwinder::{index_to_linear, tri_eval};
    use approx::assert_relative_eq;

    fn q(a: f64, b: f64, c: f64, d: f64) -> TriParams {
        TriParams::new(a, b, c, d).unwrap()
    }

    #[test]
    fn rule_examples() {
        let r = duffy_rule(1, q(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(r.len(), 1);
        assert_relative_eq!(r.weights[0], 0.5, max_relative = 1e-13);
        let r = duffy_rule(4, q(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(r.weights.iter().sum::<f64>(), 1.0 / 6.0, max_relative = 1e-13);
        for p in [q(0.5, -0.5, 1.5, 0.25), q(2.0, 1.0, 0.0, 0.0)] {
            let r = duffy_rule(5, p).unwrap();
            assert_relative_eq!(r.weights.iter().sum::<f64>(), weight_integral(p), max_relative = 1e-12);
            assert!(r.points.iter().all(|p| p.is_interior()));
        }
        assert!(duffy_rule(0, q(0.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn monomial_moments() {
        // ∫∫ x^i y^j dA = i! j! / (i + j + 2)!
        let r = duffy_rule(4, q(0.0, 0.0, 0.0, 0.0)).unwrap();
        let fact = |n: u32| (1..=n).product::<u32>() as f64;
        for i in 0..4u32 {
            for j in 0..(8 - i).min(4) {
                let got = r.integrate(|p| p.x.powi(i as i32) * p.y.powi(j as i32));
                assert_relative_eq!(got, fact(i) * fact(j) / fact(i + j + 2), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn norm_examples() {
        let z = q(0.0, 0.0, 0.0, 0.0);
        assert_relative_eq!(norm_sq(TriIndex::new(0, 0).unwrap(), z).unwrap(), 0.5, max_relative = 1e-14);
        // ∫∫ (2y - (1 - x))^2 dA = ∫ (1 - x)^3 / 3 dx = 1/12
        assert_relative_eq!(norm_sq(TriIndex::new(1, 1).unwrap(), z).unwrap(), 1.0 / 12.0, max_relative = 1e-13);
        let h = q(0.5, 0.5, 0.5, 0.0);
        let i = TriIndex::new(2, 1).unwrap();
        let r = duffy_rule(6, h).unwrap();
        let direct = r.integrate(|p| tri_eval(i, h, p).unwrap().powi(2));
        assert_relative_eq!(direct, norm_sq(i, h).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn analysis_examples() {
        let p = q(0.5, 1.0, 0.25, 0.0);
        let c = analyze(|_| 1.0, 4, p, 6).unwrap();
        assert_relative_eq!(c.values[0], 1.0, max_relative = 1e-13);
        assert!(c.values[1..].iter().all(|v| v.abs() < 1e-13));
        let i = TriIndex::new(3, 1).unwrap();
        let c = analyze(|pt| tri_eval(i, p, pt).unwrap(), 5, p, 7).unwrap();
        for (j, v) in c.values.iter().enumerate() {
            let want = if j == index_to_linear(i).unwrap() { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-11, "{j}: {v}");
        }
        let c = analyze(|pt| pt.x, 2, q(0.0, 0.0, 0.0, 0.0), 4).unwrap();
        assert_relative_eq!(c.values[0], 1.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(c.values[1], 1.0 / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn synthesis_round_trip_and_weights() {
        let p = q(1.0, 0.5, 0.5, 0.0);
        let basis = BasisTag::new(p, false, 6);
        let v = CoeffVec::new(basis, (0..basis.dim()).map(|i| ((i * 7 % 5) as f64) - 2.0).collect()).unwrap();
        let rule = duffy_rule(8, p).unwrap();
        let vals = synthesize(&v, &rule.points).unwrap();
        let back = analyze_samples(&vals, &rule, 6).unwrap();
        for (a, b) in back.values.iter().zip(&v.values) {
            assert!((a - b).abs() < 1e-11);
        }
        let w = CoeffVec { basis: BasisTag::new(p, true, 6), values: v.values.clone() };
        let pt = TriPoint::new(0.3, 0.2);
        let plain = synthesize(&v, &[pt]).unwrap()[0];
        let weighted = synthesize(&w, &[pt]).unwrap()[0];
        assert_relative_eq!(weighted, plain * 0.3 * 0.2f64.sqrt() * 0.5f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn gram_is_diagonal_and_symmetric() {
        let g = gram_matrix(5, q(0.5, 0.0, 1.0, 0.0), 6).unwrap();
        assert_eq!(g, g.transpose());
        let dmax = g.diagonal().max();
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                if i != j {
                    assert!(g[(i, j)].abs() <= 1e-12 * dmax);
                }
            }
        }
    }

    #[test]
    fn least_squares_recovers_polynomial() {
        let p = q(0.0, 0.0, 0.0, 0.0);
        let pts: Vec<TriPoint> = (0..40)
            .map(|i| {
                let s = (i as f64 + 0.5) / 40.0;
                TriPoint::new(s * 0.9, (1.0 - s * 0.9) * ((i * 13 % 40) as f64 + 0.5) / 40.0)
            })
            .collect();
        let vals: Vec<f64> = pts.iter().map(|p| 1.0 + p.x * p.y - 2.0 * p.y).collect();
        let c = fit_samples(&pts, &vals, 2, p).unwrap();
        let back = synthesize(&c, &pts).unwrap();
        for (a, b) in back.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(fit_samples(&pts[..3], &vals[..3], 2, p).is_err());
    }
}
