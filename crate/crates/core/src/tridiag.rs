//! Thomas algorithm for tridiagonal systems over real or complex scalars.

use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::Neg;

use num_traits::Num;

use crate::error::{Error, Result};

/// Scalars the linear solvers work over (`f64` and `C64`).
pub trait Scalar: Num + Copy + Neg<Output = Self> + Debug {}

impl<T: Num + Copy + Neg<Output = T> + Debug> Scalar for T {}

/// Rows `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`; `lower[0]` and
/// `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    /// Constant-coefficient matrix of size `n`.
    pub fn constant(n: usize, lower: T, diag: T, upper: T) -> Self {
        Self {
            lower: alloc::vec![lower; n],
            diag: alloc::vec![diag; n],
            upper: alloc::vec![upper; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s = s + self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s = s + self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// LU factorization without pivoting.
    pub fn factor(&self) -> Result<Factored<T>> {
        let n = self.len();
        if n == 0 || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidGrid("malformed tridiagonal system"));
        }
        let mut upper_mod = Vec::with_capacity(n);
        let mut inv_pivot = Vec::with_capacity(n);
        for i in 0..n {
            let pivot = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.lower[i] * upper_mod[i - 1]
            };
            if pivot.is_zero() {
                return Err(Error::InvalidState("zero pivot in tridiagonal solve"));
            }
            let inv = T::one() / pivot;
            inv_pivot.push(inv);
            upper_mod.push(self.upper[i] * inv);
        }
        Ok(Factored {
            lower: self.lower.clone(),
            upper_mod,
            inv_pivot,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factored<T> {
    lower: Vec<T>,
    upper_mod: Vec<T>,
    inv_pivot: Vec<T>,
}

impl<T: Scalar> Factored<T> {
    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        rhs[0] = rhs[0] * self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - self.upper_mod[i] * rhs[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    #[test]
    fn solves_real_system() {
        let m = Tridiagonal {
            lower: vec![0.0, -1.0, -1.0, -1.0],
            diag: vec![4.0, 4.0, 4.0, 4.0],
            upper: vec![-1.0, -1.0, -2.0, 0.0],
        };
        let x: Vec<f64> = vec![1.0, -2.0, 0.5, 3.0];
        let mut b = m.apply(&x);
        m.factor().unwrap().solve_in_place(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn solves_complex_system() {
        let n = 50;
        let m = Tridiagonal::constant(n, C64::new(-1.0, 0.1), C64::new(3.0, 2.0), C64::new(-1.0, -0.1));
        let x: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0 / (1.0 + i as f64))).collect();
        let mut b = m.apply(&x);
        m.factor().unwrap().solve_in_place(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let m = Tridiagonal::constant(3, 1.0, 0.0, 1.0);
        assert!(m.factor().is_err());
    }
}
