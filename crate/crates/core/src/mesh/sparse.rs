//! Minimal symmetric sparse matrix and preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yr = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows())
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&k| self.cols[k] == r)
                    .map_or(T::zero(), |k| self.vals[k])
            })
            .collect()
    }
}

/// Jacobi-preconditioned CG for a symmetric positive-definite system.
pub fn conjugate_gradient<T: Real>(a: &CsrMatrix<T>, b: &[T], x0: &[T], rel_tol: T, max_iter: usize) -> Result<Vec<T>> {
    let n = b.len();
    let diag = a.diagonal();
    if diag.iter().any(|&d| !(d > T::zero())) {
        return Err(Error::SolverFailure("non-positive diagonal".into()));
    }
    let mut x = x0.to_vec();
    let mut r = vec![T::zero(); n];
    a.mul_vec(&x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let bnorm = b.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
    let target = rel_tol * if bnorm > T::zero() { bnorm } else { T::one() };
    let mut z: Vec<T> = r.iter().zip(&diag).map(|(&ri, &d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= target {
            return Ok(x);
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::SolverFailure("matrix is not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if dot(&r, &r).sqrt() <= target * lit(10.0) {
        return Ok(x);
    }
    Err(Error::SolverFailure(format!("no convergence in {max_iter} iterations")))
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}
