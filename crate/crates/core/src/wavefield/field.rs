use num_complex::Complex64;

use super::Grid1D;
use crate::error::{check_positive, Error, Result};

/// Sampled scalar amplitude on a [`Grid1D`] at a single wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField1D {
    grid: Grid1D,
    wavelength: f64,
    amplitude: Vec<Complex64>,
}

impl ComplexField1D {
    pub fn new(grid: Grid1D, wavelength: f64, amplitude: Vec<Complex64>) -> Result<Self> {
        check_positive("wavelength", wavelength)?;
        if amplitude.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "amplitude has {} samples, grid has {}",
                amplitude.len(),
                grid.n()
            )));
        }
        if amplitude.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidParameter { name: "amplitude", reason: "non-finite sample".into() });
        }
        Ok(Self { grid, wavelength, amplitude })
    }

    pub(crate) fn from_parts(grid: Grid1D, wavelength: f64, amplitude: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitude.len(), grid.n());
        Self { grid, wavelength, amplitude }
    }

    pub fn plane_wave(grid: Grid1D, wavelength: f64) -> Result<Self> {
        Self::new(grid, wavelength, vec![Complex64::new(1.0, 0.0); grid.n()])
    }

    /// `exp(-x^2 / w0^2)`, a beam waist at this plane.
    pub fn gaussian(grid: Grid1D, wavelength: f64, waist: f64) -> Result<Self> {
        check_positive("waist", waist)?;
        let amp = (0..grid.n())
            .map(|i| {
                let x = grid.x(i);
                Complex64::new((-(x * x) / (waist * waist)).exp(), 0.0)
            })
            .collect();
        Self::new(grid, wavelength, amp)
    }

    /// Discrete point source: a Kronecker delta divided by `dx`.
    pub fn point_source(grid: Grid1D, wavelength: f64, index: usize) -> Result<Self> {
        if index >= grid.n() {
            return Err(Error::InvalidParameter { name: "index", reason: format!("{index} is off the grid") });
        }
        let mut amp = vec![Complex64::new(0.0, 0.0); grid.n()];
        amp[index] = Complex64::new(1.0 / grid.dx(), 0.0);
        Self::new(grid, wavelength, amp)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn amplitude_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitude
    }

    pub fn into_amplitude(self) -> Vec<Complex64> {
        self.amplitude
    }

    /// `sum |u|^2 dx`.
    pub fn power(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::from_parts(self.grid, self.wavelength, self.amplitude.iter().map(|a| a * s).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.wavelength != other.wavelength {
            return Err(Error::GridMismatch("fields live on different grids or wavelengths".into()));
        }
        let amp = self.amplitude.iter().zip(&other.amplitude).map(|(a, b)| a + b).collect();
        Ok(Self::from_parts(self.grid, self.wavelength, amp))
    }
}
