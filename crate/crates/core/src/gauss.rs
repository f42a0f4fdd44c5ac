//! Gauss-Jacobi rules on `(0, 1)` by the Golub-Welsch method.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Nodes and weights for `∫_0^1 f(x) x^beta (1 - x)^alpha dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussJacobiRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl GaussJacobiRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Euler Beta function `B(p, q)`.
pub fn beta_fn(p: f64, q: f64) -> f64 {
    (ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)).exp()
}

/// `m`-point rule exact for polynomials of degree `<= 2m - 1` against
/// `x^beta (1 - x)^alpha` on `(0, 1)`. Nodes are returned ascending.
pub fn gauss_jacobi_rule(m: usize, alpha: f64, beta: f64) -> Result<GaussJacobiRule> {
    if m == 0 {
        return Err(Error::Usage("quadrature needs at least one node".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::ParameterDomain(format!(
            "Gauss-Jacobi exponents must exceed -1, got alpha={alpha}, beta={beta}"
        )));
    }
    // Jacobi matrix of the monic recurrence on [-1, 1] for (1-X)^alpha (1+X)^beta.
    let ab = alpha + beta;
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m];
    for (j, d) in diag.iter_mut().enumerate() {
        let jf = j as f64;
        *d = if j == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * jf + ab) * (2.0 * jf + ab + 2.0))
        };
    }
    for j in 1..m {
        let jf = j as f64;
        let s = 2.0 * jf + ab;
        let b2 = if j == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * jf * (jf + alpha) * (jf + beta) * (jf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off[j - 1] = b2.sqrt();
    }
    let mut first = vec![0.0; m];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first)?;

    let mu0 = beta_fn(beta + 1.0, alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = diag.iter().zip(&first).map(|(&x, &z)| (0.5 * (x + 1.0), mu0 * z * z)).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(GaussJacobiRule { nodes, weights, alpha, beta })
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
///
/// On return `d` holds the eigenvalues and `z` the first components of the
/// corresponding normalized eigenvectors (it must start as `e_0`). `e[i]`
/// couples rows `i` and `i + 1`; `e[n - 1]` is ignored.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Degenerate("tridiagonal QL failed to converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn midpoint_rule() {
        let r = gauss_jacobi_rule(1, 0.0, 0.0).unwrap();
        assert_relative_eq!(r.nodes[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_legendre_weights() {
        let r = gauss_jacobi_rule(2, 0.0, 0.0).unwrap();
        assert_relative_eq!(r.weights[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(r.weights[1], 0.5, epsilon = 1e-14);
        let third = 0.5 / 3f64.sqrt();
        assert_relative_eq!(r.nodes[0], 0.5 - third, epsilon = 1e-14);
    }

    #[test]
    fn weights_sum_to_beta_moment() {
        let r = gauss_jacobi_rule(4, 1.0, 2.0).unwrap();
        let total: f64 = r.weights.iter().sum();
        assert_relative_eq!(total, 1.0 / 12.0, max_relative = 1e-13);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(gauss_jacobi_rule(0, 0.0, 0.0), Err(Error::Usage(_))));
        assert!(matches!(gauss_jacobi_rule(3, -1.0, 0.0), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn monomial_exactness() {
        for &(alpha, beta) in &[(0.0, 0.0), (1.5, -0.5), (-0.7, 3.0), (4.0, 0.25)] {
            for m in [1usize, 3, 8, 20] {
                let r = gauss_jacobi_rule(m, alpha, beta).unwrap();
                for j in 0..2 * m {
                    let exact = beta_fn(beta + j as f64 + 1.0, alpha + 1.0);
                    let got = r.integrate(|x| x.powi(j as i32));
                    assert!(
                        ((got - exact) / exact).abs() < 1e-12,
                        "alpha={alpha} beta={beta} m={m} j={j}: {got} vs {exact}"
                    );
                }
            }
        }
    }
}
