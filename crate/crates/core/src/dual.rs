//! Forward-mode dual numbers in two variables.
//!
//! The polynomial recurrences are written once over [`Scalar`] and evaluated
//! with `f64` for values, [`Grad`] for gradients and [`Hess`] for exact
//! second derivatives.

use std::ops::{Add, Mul, Neg, Sub};

pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn constant(c: f64) -> Self {
        c
    }
}

/// Value and gradient with respect to `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Grad {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Grad {
    pub fn var_x(x: f64) -> Self {
        Grad { v: x, dx: 1.0, dy: 0.0 }
    }
    pub fn var_y(y: f64) -> Self {
        Grad { v: y, dx: 0.0, dy: 1.0 }
    }
}

impl Add for Grad {
    type Output = Grad;
    #[inline]
    fn add(self, o: Grad) -> Grad {
        Grad { v: self.v + o.v, dx: self.dx + o.dx, dy: self.dy + o.dy }
    }
}

impl Sub for Grad {
    type Output = Grad;
    #[inline]
    fn sub(self, o: Grad) -> Grad {
        Grad { v: self.v - o.v, dx: self.dx - o.dx, dy: self.dy - o.dy }
    }
}

impl Mul for Grad {
    type Output = Grad;
    #[inline]
    fn mul(self, o: Grad) -> Grad {
        Grad { v: self.v * o.v, dx: self.dx * o.v + self.v * o.dx, dy: self.dy * o.v + self.v * o.dy }
    }
}

impl Mul<f64> for Grad {
    type Output = Grad;
    #[inline]
    fn mul(self, c: f64) -> Grad {
        Grad { v: self.v * c, dx: self.dx * c, dy: self.dy * c }
    }
}

impl Neg for Grad {
    type Output = Grad;
    #[inline]
    fn neg(self) -> Grad {
        Grad { v: -self.v, dx: -self.dx, dy: -self.dy }
    }
}

impl Scalar for Grad {
    #[inline]
    fn constant(c: f64) -> Self {
        Grad { v: c, dx: 0.0, dy: 0.0 }
    }
}

/// Value, gradient and Hessian with respect to `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hess {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Hess {
    pub fn var_x(x: f64) -> Self {
        Hess { v: x, dx: 1.0, ..Default::default() }
    }
    pub fn var_y(y: f64) -> Self {
        Hess { v: y, dy: 1.0, ..Default::default() }
    }
}

impl Add for Hess {
    type Output = Hess;
    #[inline]
    fn add(self, o: Hess) -> Hess {
        Hess {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl Sub for Hess {
    type Output = Hess;
    #[inline]
    fn sub(self, o: Hess) -> Hess {
        self + (-o)
    }
}

impl Mul for Hess {
    type Output = Hess;
    #[inline]
    fn mul(self, o: Hess) -> Hess {
        Hess {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

impl Mul<f64> for Hess {
    type Output = Hess;
    #[inline]
    fn mul(self, c: f64) -> Hess {
        Hess {
            v: self.v * c,
            dx: self.dx * c,
            dy: self.dy * c,
            dxx: self.dxx * c,
            dxy: self.dxy * c,
            dyy: self.dyy * c,
        }
    }
}

impl Neg for Hess {
    type Output = Hess;
    #[inline]
    fn neg(self) -> Hess {
        self * -1.0
    }
}

impl Scalar for Hess {
    #[inline]
    fn constant(c: f64) -> Self {
        Hess { v: c, ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_matches_hand_derivatives() {
        // f = x^2 y at (2, 3): f_x = 12, f_y = 4, f_xx = 6, f_xy = 4, f_yy = 0
        let x = Hess::var_x(2.0);
        let y = Hess::var_y(3.0);
        let f = x * x * y;
        assert_eq!((f.v, f.dx, f.dy), (12.0, 12.0, 4.0));
        assert_eq!((f.dxx, f.dxy, f.dyy), (6.0, 4.0, 0.0));
        let g = Grad::var_x(2.0) * Grad::var_x(2.0) * Grad::var_y(3.0);
        assert_eq!((g.v, g.dx, g.dy), (12.0, 12.0, 4.0));
    }
}
