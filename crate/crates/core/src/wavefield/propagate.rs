//! Paraxial free-space propagation and element application.
//!
//! Conventions (the constant phase `exp(ikz)` is dropped everywhere):
//!
//! * Fresnel impulse response `h_z(x) = exp(i pi x^2 / (lambda z)) / sqrt(i lambda z)`.
//! * Transfer function `H_z(f) = exp(-i pi lambda z f^2)`, applied with a
//!   unitary DFT so free-space hops conserve `sum |u|^2 dx` exactly.
//! * Thin lens `exp(-i pi x^2 / (lambda f))`; positive `f` converges.
//!
//! Sampling guard: neighbouring DFT bins are `1/L` apart, so the sampled
//! transfer-function phase steps by at most `pi lambda z / (dx L)` at the
//! Nyquist edge. Hops with `lambda z / (dx L) > 1` alias and are rejected.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{ComplexField1D, Element, Grid1D, OpticalSystem};
use crate::error::{check_nonnegative, check_positive, Error, Result};

thread_local! {
    static PLANS: RefCell<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>> = RefCell::new(HashMap::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANS.with(|p| {
        p.borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    })
}

/// `lambda z / (dx L)`, the quantity bounded by the sampling guard.
pub fn fresnel_ratio(grid: &Grid1D, wavelength: f64, z: f64) -> f64 {
    wavelength * z / (grid.dx() * grid.extent())
}

pub fn check_sampling(grid: &Grid1D, wavelength: f64, z: f64) -> Result<()> {
    let ratio = fresnel_ratio(grid, wavelength, z);
    if ratio > 1.0 + 1e-9 {
        return Err(Error::SamplingGuard { z, ratio, z_max: grid.max_distance(wavelength) });
    }
    Ok(())
}

#[derive(Debug, Clone)]
enum Stage {
    /// Pointwise multiply in the spatial domain.
    Multiply(Vec<Complex64>),
    /// Transfer function in DFT bin order, pre-divided by `n`.
    Transfer(Vec<Complex64>),
}

/// An [`OpticalSystem`] resolved against a grid and wavelength, with every
/// transfer function and transmission precomputed.
#[derive(Debug, Clone)]
pub struct CompiledSystem {
    grid: Grid1D,
    wavelength: f64,
    stages: Vec<Stage>,
}

impl CompiledSystem {
    pub fn new(system: &OpticalSystem, grid: Grid1D, wavelength: f64) -> Result<Self> {
        check_positive("wavelength", wavelength)?;
        system.validate()?;
        let stages = system
            .elements
            .iter()
            .filter_map(|e| compile_element(e, &grid, wavelength).transpose())
            .collect::<Result<_>>()?;
        Ok(Self { grid, wavelength, stages })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn apply_in_place(&self, amp: &mut [Complex64]) {
        debug_assert_eq!(amp.len(), self.grid.n());
        if self.stages.is_empty() {
            return;
        }
        let (fwd, inv) = plans(self.grid.n());
        let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        for stage in &self.stages {
            match stage {
                Stage::Multiply(t) => amp.iter_mut().zip(t).for_each(|(a, t)| *a *= t),
                Stage::Transfer(h) => {
                    fwd.process_with_scratch(amp, &mut scratch);
                    amp.iter_mut().zip(h).for_each(|(a, h)| *a *= h);
                    inv.process_with_scratch(amp, &mut scratch);
                }
            }
        }
    }

    pub fn apply(&self, field: &ComplexField1D) -> Result<ComplexField1D> {
        if *field.grid() != self.grid || field.wavelength() != self.wavelength {
            return Err(Error::GridMismatch("field does not match the compiled system's grid or wavelength".into()));
        }
        let mut amp = field.amplitude().to_vec();
        self.apply_in_place(&mut amp);
        Ok(ComplexField1D::from_parts(self.grid, self.wavelength, amp))
    }
}

fn compile_element(element: &Element, grid: &Grid1D, wavelength: f64) -> Result<Option<Stage>> {
    element.validate()?;
    Ok(match element {
        Element::FreeSpace { z } => {
            if *z == 0.0 {
                None
            } else {
                check_sampling(grid, wavelength, *z)?;
                Some(Stage::Transfer(transfer_function(grid, wavelength, *z)))
            }
        }
        Element::ThinLens { f } => Some(Stage::Multiply(lens_phase(grid, wavelength, *f))),
        Element::Mask(m) => Some(Stage::Multiply(m.transmission(grid)?)),
    })
}

fn transfer_function(grid: &Grid1D, wavelength: f64, z: f64) -> Vec<Complex64> {
    let norm = 1.0 / grid.n() as f64;
    (0..grid.n())
        .map(|k| {
            let f = grid.frequency(k);
            Complex64::from_polar(norm, -PI * wavelength * z * f * f)
        })
        .collect()
}

fn lens_phase(grid: &Grid1D, wavelength: f64, focal: f64) -> Vec<Complex64> {
    (0..grid.n())
        .map(|i| {
            let x = grid.x(i);
            Complex64::from_polar(1.0, -PI * x * x / (wavelength * focal))
        })
        .collect()
}

/// Advances `field` by `z` with the Fresnel transfer function.
pub fn propagate_fresnel(field: &ComplexField1D, z: f64) -> Result<ComplexField1D> {
    check_nonnegative("z", z)?;
    apply_element(field, &Element::FreeSpace { z })
}

/// Direct O(n^2) quadrature of the Fresnel diffraction integral onto the same
/// grid. Independent of the transfer-function path; used as its oracle.
pub fn propagate_direct(field: &ComplexField1D, z: f64) -> Result<ComplexField1D> {
    if z == 0.0 {
        return Err(Error::InvalidParameter { name: "z", reason: "direct quadrature needs z > 0 (z = 0 is the identity)".into() });
    }
    check_positive("z", z)?;
    let grid = *field.grid();
    let lambda = field.wavelength();
    let dx = grid.dx();
    let pref = Complex64::from_polar(1.0 / (lambda * z).sqrt(), -PI / 4.0) * dx;
    let src = field.amplitude();
    let out = crate::par::map_range(grid.n(), |i| {
        let xi = grid.x(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, u) in src.iter().enumerate() {
            if u.re == 0.0 && u.im == 0.0 {
                continue;
            }
            let s = xi - grid.x(j);
            acc += u * Complex64::from_polar(1.0, PI * s * s / (lambda * z));
        }
        acc * pref
    });
    Ok(ComplexField1D::from_parts(grid, lambda, out))
}

pub fn apply_element(field: &ComplexField1D, element: &Element) -> Result<ComplexField1D> {
    let system = OpticalSystem { elements: vec![element.clone()] };
    apply_system(field, &system)
}

pub fn apply_system(field: &ComplexField1D, system: &OpticalSystem) -> Result<ComplexField1D> {
    CompiledSystem::new(system, *field.grid(), field.wavelength())?.apply(field)
}
