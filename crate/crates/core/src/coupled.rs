//! Two tridiagonal half-line systems coupled through one interface unknown.
//!
//! The low system covers the interior nodes `1..n_low` (its last row touches
//! the interface), the high system the interior nodes `1..n_high` (its first
//! row touches the interface). The interface value is fixed by one extra row
//! that may reach two nodes into each side, which is what one-sided
//! three-point stencils need. The bordered system is solved by superposition:
//! each side is the particular solution plus the interface value times a
//! precomputed unit response.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tridiag::{Factored, Scalar, Tridiagonal};

/// `center w_I + low[0] w_{I-1} + low[1] w_{I-2} + high[0] w_{I+1} + high[1] w_{I+2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceRow<T> {
    pub center: T,
    pub low: [T; 2],
    pub high: [T; 2],
}

#[derive(Debug, Clone)]
pub struct CoupledSystem<T> {
    low: Factored<T>,
    high: Factored<T>,
    low_response: Vec<T>,
    high_response: Vec<T>,
    row: InterfaceRow<T>,
    schur: T,
}

impl<T: Scalar> CoupledSystem<T> {
    /// `low_link` multiplies `w_I` in the last low row, `high_link` in the
    /// first high row.
    pub fn new(
        low: &Tridiagonal<T>,
        low_link: T,
        high: &Tridiagonal<T>,
        high_link: T,
        row: InterfaceRow<T>,
    ) -> Result<Self> {
        if low.len() < 2 || high.len() < 2 {
            return Err(Error::GridTooCoarse("coupled solve needs two interior nodes per side"));
        }
        let low = low.factor()?;
        let high = high.factor()?;
        let mut low_response = alloc::vec![T::zero(); low.len()];
        let last = low_response.len() - 1;
        low_response[last] = -low_link;
        low.solve_in_place(&mut low_response);
        let mut high_response = alloc::vec![T::zero(); high.len()];
        high_response[0] = -high_link;
        high.solve_in_place(&mut high_response);
        let schur = row.center
            + row.low[0] * low_response[last]
            + row.low[1] * low_response[last - 1]
            + row.high[0] * high_response[0]
            + row.high[1] * high_response[1];
        if schur.is_zero() {
            return Err(Error::InvalidState("singular interface row"));
        }
        Ok(Self {
            low,
            high,
            low_response,
            high_response,
            row,
            schur,
        })
    }

    /// Solves in place and returns the interface value.
    pub fn solve(&self, low_rhs: &mut [T], high_rhs: &mut [T], interface_rhs: T) -> T {
        self.low.solve_in_place(low_rhs);
        self.high.solve_in_place(high_rhs);
        let last = low_rhs.len() - 1;
        let r = &self.row;
        let wi = (interface_rhs
            - r.low[0] * low_rhs[last]
            - r.low[1] * low_rhs[last - 1]
            - r.high[0] * high_rhs[0]
            - r.high[1] * high_rhs[1])
            / self.schur;
        for (x, g) in low_rhs.iter_mut().zip(&self.low_response) {
            *x = *x + wi * *g;
        }
        for (x, g) in high_rhs.iter_mut().zip(&self.high_response) {
            *x = *x + wi * *g;
        }
        wi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_solution() {
        // 3 low interior, 3 high interior, 1 interface unknown: 7 x 7 system
        let lo = Tridiagonal::constant(3, -1.0, 3.0, -1.2);
        let hi = Tridiagonal::constant(3, -0.8, 3.5, -1.0);
        let row = InterfaceRow {
            center: -5.0,
            low: [2.0, -0.5],
            high: [2.5, -0.4],
        };
        let sys = CoupledSystem::new(&lo, -1.2, &hi, -0.8, row).unwrap();
        let x = [0.3, -0.7, 1.1, 0.9, -0.2, 0.4, 1.3]; // low1..3, w_I, high1..3
        let apply = |x: &[f64; 7]| {
            let mut b = [0.0; 7];
            b[0] = 3.0 * x[0] - 1.2 * x[1];
            b[1] = -x[0] + 3.0 * x[1] - 1.2 * x[2];
            b[2] = -x[1] + 3.0 * x[2] - 1.2 * x[3];
            b[3] = -5.0 * x[3] + 2.0 * x[2] - 0.5 * x[1] + 2.5 * x[4] - 0.4 * x[5];
            b[4] = -0.8 * x[3] + 3.5 * x[4] - x[5];
            b[5] = -0.8 * x[4] + 3.5 * x[5] - x[6];
            b[6] = -0.8 * x[5] + 3.5 * x[6];
            b
        };
        let b = apply(&x);
        let mut low = b[0..3].to_vec();
        let mut high = b[4..7].to_vec();
        let wi = sys.solve(&mut low, &mut high, b[3]);
        assert!((wi - x[3]).abs() < 1e-14);
        for i in 0..3 {
            assert!((low[i] - x[i]).abs() < 1e-14);
            assert!((high[i] - x[4 + i]).abs() < 1e-14);
        }
    }
}
