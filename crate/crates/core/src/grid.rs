//! Uniform grids on the two half-lines and functions sampled on them.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::round;
use crate::params::Side;

/// Uniform grid on `[eta* - n_low h, eta* + n_high h]` with `eta*` a shared node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    h: f64,
    n_low: usize,
    n_high: usize,
    eta_star: f64,
}

impl Grid {
    /// Minimum number of cells per side.
    pub const MIN_CELLS: usize = 4;

    pub fn new(h: f64, n_low: usize, n_high: usize, eta_star: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid("spacing must be finite and positive"));
        }
        if !eta_star.is_finite() {
            return Err(Error::InvalidGrid("interface position must be finite"));
        }
        if n_low < Self::MIN_CELLS || n_high < Self::MIN_CELLS {
            return Err(Error::InvalidGrid("need at least 4 cells per side"));
        }
        Ok(Self {
            h,
            n_low,
            n_high,
            eta_star,
        })
    }

    /// Grid with extents rounded to whole cells.
    pub fn with_extent(h: f64, l_low: f64, l_high: f64, eta_star: f64) -> Result<Self> {
        if !(l_low > 0.0 && l_high > 0.0) || !l_low.is_finite() || !l_high.is_finite() {
            return Err(Error::InvalidGrid("extents must be finite and positive"));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidGrid("spacing must be finite and positive"));
        }
        let n_low = round(l_low / h) as usize;
        let n_high = round(l_high / h) as usize;
        Self::new(h, n_low, n_high, eta_star)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn eta_star(&self) -> f64 {
        self.eta_star
    }

    pub fn cells(&self, side: Side) -> usize {
        match side {
            Side::Low => self.n_low,
            Side::High => self.n_high,
        }
    }

    pub fn len(&self, side: Side) -> usize {
        self.cells(side) + 1
    }

    /// Position of node `i` on `side`. Low nodes run from the far end
    /// (`i = 0`) to the interface (`i = n_low`); high nodes from the
    /// interface (`j = 0`) outwards.
    pub fn node(&self, side: Side, i: usize) -> f64 {
        match side {
            Side::Low => self.eta_star - (self.n_low - i) as f64 * self.h,
            Side::High => self.eta_star + i as f64 * self.h,
        }
    }

    pub fn nodes(&self, side: Side) -> impl Iterator<Item = f64> + '_ {
        (0..self.len(side)).map(move |i| self.node(side, i))
    }

    /// Index of the interface node within the arrays of `side`.
    pub fn interface_index(&self, side: Side) -> usize {
        match side {
            Side::Low => self.n_low,
            Side::High => 0,
        }
    }

    /// Same extents, spacing divided by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(
            self.h / factor as f64,
            self.n_low * factor,
            self.n_high * factor,
            self.eta_star,
        )
    }
}

/// A function sampled separately on both half-lines; the two samples at the
/// interface may differ (derivative fields).
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLinePair<T> {
    pub grid: Grid,
    pub low: Vec<T>,
    pub high: Vec<T>,
}

impl<T: Copy> HalfLinePair<T> {
    pub fn new(grid: Grid, low: Vec<T>, high: Vec<T>) -> Result<Self> {
        if low.len() != grid.len(Side::Low) || high.len() != grid.len(Side::High) {
            return Err(Error::InvalidGrid("sample count does not match the grid"));
        }
        Ok(Self { grid, low, high })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(Side, f64) -> T) -> Self {
        let low = grid.nodes(Side::Low).map(|y| f(Side::Low, y)).collect();
        let high = grid.nodes(Side::High).map(|y| f(Side::High, y)).collect();
        Self { grid, low, high }
    }

    pub fn side(&self, side: Side) -> &[T] {
        match side {
            Side::Low => &self.low,
            Side::High => &self.high,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut [T] {
        match side {
            Side::Low => &mut self.low,
            Side::High => &mut self.high,
        }
    }

    /// The two samples at the interface, `(low, high)`.
    pub fn at_interface(&self) -> (T, T) {
        (self.low[self.grid.n_low], self.high[0])
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(Side, f64, T) -> U) -> HalfLinePair<U> {
        let low = self
            .low
            .iter()
            .enumerate()
            .map(|(i, &v)| f(Side::Low, self.grid.node(Side::Low, i), v))
            .collect();
        let high = self
            .high
            .iter()
            .enumerate()
            .map(|(i, &v)| f(Side::High, self.grid.node(Side::High, i), v))
            .collect();
        HalfLinePair {
            grid: self.grid,
            low,
            high,
        }
    }

    /// Pointwise combination of two pairs on the same grid.
    pub fn zip_with<U: Copy, V: Copy>(
        &self,
        other: &HalfLinePair<U>,
        mut f: impl FnMut(T, U) -> V,
    ) -> Result<HalfLinePair<V>> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("pairs live on different grids"));
        }
        Ok(HalfLinePair {
            grid: self.grid,
            low: self.low.iter().zip(&other.low).map(|(&a, &b)| f(a, b)).collect(),
            high: self.high.iter().zip(&other.high).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

impl HalfLinePair<f64> {
    pub fn zeros(grid: Grid) -> Self {
        Self::from_fn(grid, |_, _| 0.0)
    }

    /// Restriction to a coarser grid that shares every `factor`-th node.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let g = &self.grid;
        if factor == 0 || g.n_low % factor != 0 || g.n_high % factor != 0 {
            return Err(Error::InvalidGrid("coarsening factor must divide the cell counts"));
        }
        let coarse = Grid::new(g.h * factor as f64, g.n_low / factor, g.n_high / factor, g.eta_star)?;
        Ok(Self {
            grid: coarse,
            low: self.low.iter().step_by(factor).copied().collect(),
            high: self.high.iter().step_by(factor).copied().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interface_is_shared_node() {
        let g = Grid::with_extent(0.1, 2.0, 3.0, 0.37).unwrap();
        assert_eq!(g.node(Side::Low, g.interface_index(Side::Low)), 0.37);
        assert_eq!(g.node(Side::High, 0), 0.37);
        assert_eq!(g.len(Side::Low), 21);
        assert_eq!(g.len(Side::High), 31);
        assert!((g.node(Side::Low, 0) - (0.37 - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0.0, 10, 10, 0.0).is_err());
        assert!(Grid::new(0.1, 2, 10, 0.0).is_err());
        assert!(Grid::with_extent(0.1, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn coarsen_keeps_shared_nodes() {
        let g = Grid::new(0.05, 40, 20, 0.0).unwrap();
        let p = HalfLinePair::from_fn(g, |_, y| y);
        let c = p.coarsen(2).unwrap();
        for side in Side::BOTH {
            for (i, &v) in c.side(side).iter().enumerate() {
                assert!((v - c.grid.node(side, i)).abs() < 1e-14);
            }
        }
    }
}
