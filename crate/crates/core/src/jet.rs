//! Second-order forward-mode jets.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to up to [`MAX_VARS`] chart coordinates. Chart maps are written once
//! against `Jet<T>` and evaluating them yields exact first and second
//! derivatives of the immersion.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{lit, Real};

/// Maximum number of independent chart variables tracked by a jet.
pub const MAX_VARS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub grad: [T; MAX_VARS],
    pub hess: [[T; MAX_VARS]; MAX_VARS],
}

impl<T: Real> Jet<T> {
    pub fn constant(value: T) -> Self {
        Jet {
            value,
            grad: [T::zero(); MAX_VARS],
            hess: [[T::zero(); MAX_VARS]; MAX_VARS],
        }
    }

    /// The `index`-th independent variable evaluated at `value`.
    pub fn variable(value: T, index: usize) -> Self {
        assert!(index < MAX_VARS, "jet variable index {index} out of range");
        let mut j = Self::constant(value);
        j.grad[index] = T::one();
        j
    }

    pub fn lit(x: f64) -> Self {
        Self::constant(lit(x))
    }

    /// Applies a scalar function given its value and first two derivatives at `self.value`.
    fn chain(&self, f: T, df: T, ddf: T) -> Self {
        let mut out = Self::constant(f);
        for i in 0..MAX_VARS {
            out.grad[i] = df * self.grad[i];
            for j in 0..MAX_VARS {
                out.hess[i][j] = df * self.hess[i][j] + ddf * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn sqrt(&self) -> Self {
        let r = self.value.sqrt();
        let two: T = lit(2.0);
        let d = T::one() / (two * r);
        self.chain(r, d, -d / (two * self.value))
    }

    pub fn recip(&self) -> Self {
        let r = T::one() / self.value;
        self.chain(r, -r * r, lit::<T>(2.0) * r * r * r)
    }

    pub fn powi(&self, k: i32) -> Self {
        match k {
            0 => Self::constant(T::one()),
            1 => *self,
            _ => {
                let kf: T = lit(k as f64);
                let v = self.value;
                let f = v.powi(k);
                let df = kf * v.powi(k - 1);
                let ddf = kf * lit::<T>((k - 1) as f64) * v.powi(k - 2);
                self.chain(f, df, ddf)
            }
        }
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        out.value *= s;
        for i in 0..MAX_VARS {
            out.grad[i] *= s;
            for j in 0..MAX_VARS {
                out.hess[i][j] *= s;
            }
        }
        out
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        out.value += rhs.value;
        for i in 0..MAX_VARS {
            out.grad[i] += rhs.grad[i];
            for j in 0..MAX_VARS {
                out.hess[i][j] += rhs.hess[i][j];
            }
        }
        out
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.value * rhs.value);
        for i in 0..MAX_VARS {
            out.grad[i] = self.value * rhs.grad[i] + rhs.value * self.grad[i];
            for j in 0..MAX_VARS {
                out.hess[i][j] = self.value * rhs.hess[i][j]
                    + rhs.value * self.hess[i][j]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
            }
        }
        out
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Jet<T>;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Real> Add<T> for Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: T) -> Self {
        let mut out = self;
        out.value += rhs;
        out
    }
}

impl<T: Real> Sub<T> for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: T) -> Self {
        let mut out = self;
        out.value -= rhs;
        out
    }
}

impl<T: Real> Mul<T> for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Real> Div<T> for Jet<T> {
    type Output = Jet<T>;
    fn div(self, rhs: T) -> Self {
        self.scale(T::one() / rhs)
    }
}

/// Sum of squares of a slice of jets.
pub fn norm_squared<T: Real>(v: &[Jet<T>]) -> Jet<T> {
    v.iter().fold(Jet::constant(T::zero()), |acc, &x| acc + x * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(Jet<f64>, Jet<f64>) -> Jet<f64>, x: f64, y: f64) {
        let j = f(Jet::variable(x, 0), Jet::variable(y, 1));
        let e = 1e-5;
        let val = |a: f64, b: f64| f(Jet::constant(a), Jet::constant(b)).value;
        let gx = (val(x + e, y) - val(x - e, y)) / (2.0 * e);
        let gy = (val(x, y + e) - val(x, y - e)) / (2.0 * e);
        assert!((j.grad[0] - gx).abs() < 1e-8, "{} vs {}", j.grad[0], gx);
        assert!((j.grad[1] - gy).abs() < 1e-8);
        let e = 1e-4;
        let hxy = (val(x + e, y + e) - val(x + e, y - e) - val(x - e, y + e) + val(x - e, y - e))
            / (4.0 * e * e);
        let hxx = (val(x + e, y) - 2.0 * val(x, y) + val(x - e, y)) / (e * e);
        assert!((j.hess[0][1] - hxy).abs() < 1e-5, "{} vs {}", j.hess[0][1], hxy);
        assert!((j.hess[1][0] - hxy).abs() < 1e-5);
        assert!((j.hess[0][0] - hxx).abs() < 1e-5, "{} vs {}", j.hess[0][0], hxx);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        fd_check(|a, b| a.sin() * b.cos() + a * a * b, 0.3, -0.7);
        fd_check(|a, b| (a * a + b * b + 1.0).sqrt().recip(), 0.4, 1.1);
        fd_check(|a, b| (a * b).exp() / (b + 3.0), -0.2, 0.5);
        fd_check(|a, b| a.powi(3) - b.powi(4) * a, 1.3, 0.8);
    }
}
