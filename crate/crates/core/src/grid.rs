//! Uniform 1D grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid with `n` nodes from `x_min` to `x_max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Grid(format!("bad bounds [{x_min}, {x_max}]")));
        }
        if n < 8 {
            return Err(Error::Grid(format!("need at least 8 nodes, got {n}")));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    /// Grid with spacing `dx` whose nodes include `anchor` and which covers `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64, dx: f64, anchor: f64) -> Result<Self> {
        if !(dx > 0.0) || !(hi > lo) {
            return Err(Error::Grid(format!("bad covering request [{lo}, {hi}] dx={dx}")));
        }
        let left = ((anchor - lo) / dx).ceil();
        let right = ((hi - anchor) / dx).ceil();
        let x_min = anchor - left * dx;
        let n = (left + right) as usize + 1;
        Grid1D::new(x_min, x_min + (n - 1) as f64 * dx, n)
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n).map(|i| self.x_min + i as f64 * dx).collect()
    }

    pub fn contains(&self, lo: f64, hi: f64) -> bool {
        self.x_min <= lo && hi <= self.x_max
    }
}
