use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1-D transverse sampling grid centred on the optical axis.
///
/// Sample `i` sits at `x = (i - n/2) * dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    dx: f64,
}

impl Grid1D {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(n: usize, dx: f64) -> Result<Self> {
        if n < Self::MIN_SAMPLES || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n must be a power of two >= 16, got {n}")));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be finite and > 0, got {dx}")));
        }
        Ok(Self { n, dx })
    }

    /// Smallest spacing for which free-space hops up to `z_max` pass the
    /// sampling guard at wavelength `lambda`, widened if needed so the window
    /// is at least `min_extent` across.
    pub fn for_propagation(n: usize, lambda: f64, z_max: f64, min_extent: f64) -> Result<Self> {
        let dx_guard = (lambda * z_max / n as f64).sqrt() * (1.0 + 1e-9);
        let dx = dx_guard.max(min_extent / n as f64);
        Self::new(n, dx)
    }

    /// Like [`Grid1D::for_propagation`], but shrinks `dx` up to the next value
    /// that divides `feature` into a whole number of samples. The guard still
    /// holds because `dx` only grows from the guard minimum.
    pub fn aligned(n: usize, lambda: f64, z_max: f64, min_extent: f64, feature: f64) -> Result<Self> {
        let base = Self::for_propagation(n, lambda, z_max, min_extent)?;
        let cells = (feature / base.dx).floor().max(1.0);
        Self::new(n, feature / cells)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Window width `L = n * dx`.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.dx
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Nearest sample to `x`, if `x` lies within half a step of the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let k = (x / self.dx).round() + (self.n / 2) as f64;
        if !k.is_finite() || k < 0.0 || k >= self.n as f64 {
            return None;
        }
        Some(k as usize)
    }

    /// Spatial frequency of DFT bin `k` (cycles per metre).
    pub fn frequency(&self, k: usize) -> f64 {
        let k = k as isize;
        let n = self.n as isize;
        let signed = if k < n / 2 { k } else { k - n };
        signed as f64 / self.extent()
    }

    /// Largest free-space hop the transfer-function propagator accepts.
    pub fn max_distance(&self, lambda: f64) -> f64 {
        self.dx * self.extent() / lambda
    }

    /// Same extent, twice the samples.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.n * 2, self.dx / 2.0)
    }
}
