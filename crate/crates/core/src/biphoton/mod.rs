//! Two-photon coincidence amplitudes in the unfolded picture.
//!
//! With a plane-wave pump the pair is born at a single crystal point `xc`,
//! so `A(x1, x2) = sum_xc Ms(x1, xc) Mi(x2, xc) dx`. Row `x1` of `A` is
//! obtained without forming either matrix: a point source at `x1` is sent
//! backwards through the signal arm to the crystal and then forwards through
//! the idler arm (the advanced-wave picture). The dense matrix form is kept
//! for small grids and cross-checks.

mod presets;

pub use presets::{
    copropagating_intensity, double_slit_grid, far_field_guard, ghost_image, ghost_interference, lithography_pattern, two_path_pattern,
    GhostImage, GhostInterference,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::par;
use crate::pattern::{CoincidencePattern, PatternMetadata};
use crate::wavefield::{transfer_matrix, CompiledSystem, ComplexMatrix, Element, Grid1D, OpticalSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Correlation {
    /// Pair born at one point of the crystal.
    PlaneWavePump,
    /// Gaussian transverse correlation of width `sigma_c`.
    GaussianPump { sigma_c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub pump_wavelength: f64,
    pub correlation: Correlation,
}

impl SourceModel {
    /// Degenerate source emitting photons of `wavelength`.
    pub fn degenerate(wavelength: f64) -> Self {
        Self { pump_wavelength: 0.5 * wavelength, correlation: Correlation::PlaneWavePump }
    }

    pub fn with_gaussian_pump(mut self, sigma_c: f64) -> Self {
        self.correlation = Correlation::GaussianPump { sigma_c };
        self
    }

    /// Signal and idler wavelength, `2 * pump_wavelength`.
    pub fn wavelength(&self) -> f64 {
        2.0 * self.pump_wavelength
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("pump_wavelength", self.pump_wavelength)?;
        if let Correlation::GaussianPump { sigma_c } = self.correlation {
            check_positive("sigma_c", sigma_c)?;
        }
        Ok(())
    }
}

/// Source plus the two arms, each running from the crystal plane to its
/// detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiphotonSetup {
    pub source: SourceModel,
    pub signal_arm: OpticalSystem,
    pub idler_arm: OpticalSystem,
    pub grid: Grid1D,
}

impl BiphotonSetup {
    pub fn new(source: SourceModel, signal_arm: OpticalSystem, idler_arm: OpticalSystem, grid: Grid1D) -> Result<Self> {
        let s = Self { source, signal_arm, idler_arm, grid };
        s.validate()?;
        Ok(s)
    }

    /// Checks the source, both arms and the sampling guard of every hop.
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        CompiledSystem::new(&self.signal_arm, self.grid, self.wavelength())?;
        CompiledSystem::new(&self.idler_arm, self.grid, self.wavelength())?;
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.source.wavelength()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DetectionMode {
    /// Point detector D1 at `x1`, D2 scanned.
    FixedD1ScanD2 { x1: f64 },
    /// D1 integrates over `[lo, hi]` (whole grid when `None`), D2 scanned.
    BucketD1ScanD2 { window: Option<(f64, f64)> },
    /// Both detectors at the same `x`.
    CoincidentScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arm {
    Signal,
    Idler,
}

/// `C(xs, xi) = exp(-(xs - xi)^2 / (4 sigma_c^2))` sampled as offsets
/// `0..=reach` cells; beyond 13 sigma_c the weight is below `e^-42`.
fn correlation_taps(grid: &Grid1D, sigma_c: f64) -> Vec<f64> {
    let reach = ((13.0 * sigma_c / grid.dx()).ceil() as usize).min(grid.n() - 1);
    (0..=reach)
        .map(|k| {
            let u = k as f64 * grid.dx();
            (-u * u / (4.0 * sigma_c * sigma_c)).exp()
        })
        .collect()
}

/// `out(xi) = sum_xs C(xs, xi) v(xs) dx`, without wraparound.
fn correlate(v: &[Complex64], taps: &[f64], dx: f64) -> Vec<Complex64> {
    let n = v.len() as isize;
    let reach = taps.len() as isize - 1;
    (0..n)
        .map(|i| {
            let lo = (i - reach).max(0);
            let hi = (i + reach).min(n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in lo..=hi {
                acc += v[j as usize] * taps[(i - j).unsigned_abs()];
            }
            acc * dx
        })
        .collect()
}

/// Precompiled advanced-wave evaluator for one setup: row `x` of the joint
/// amplitude between a `first` detector and a `second` detector.
pub(crate) struct RowEngine {
    grid: Grid1D,
    back: CompiledSystem,
    forward: CompiledSystem,
    taps: Option<Vec<f64>>,
    /// Transmission of a mask sitting directly in front of the first
    /// detector; rows where it vanishes are identically zero.
    gate: Option<Vec<Complex64>>,
}

impl RowEngine {
    pub(crate) fn new(setup: &BiphotonSetup, first: &OpticalSystem, second: &OpticalSystem) -> Result<Self> {
        setup.source.validate()?;
        let lambda = setup.wavelength();
        let grid = setup.grid;
        let reversed = first.reversed();
        let gate = match reversed.elements.first() {
            Some(Element::Mask(m)) => Some(m.transmission(&grid)?),
            _ => None,
        };
        let taps = match setup.source.correlation {
            Correlation::PlaneWavePump => None,
            Correlation::GaussianPump { sigma_c } => Some(correlation_taps(&grid, sigma_c)),
        };
        Ok(Self {
            grid,
            back: CompiledSystem::new(&reversed, grid, lambda)?,
            forward: CompiledSystem::new(second, grid, lambda)?,
            taps,
            gate,
        })
    }

    pub(crate) fn is_dark(&self, i: usize) -> bool {
        self.gate.as_ref().is_some_and(|t| t[i].norm_sqr() == 0.0)
    }

    /// `A(x_i, .)` over the second detector's coordinate.
    pub(crate) fn row(&self, i: usize) -> Vec<Complex64> {
        let n = self.grid.n();
        let dx = self.grid.dx();
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[i] = Complex64::new(1.0 / dx, 0.0);
        self.back.apply_in_place(&mut v);
        if let Some(taps) = &self.taps {
            v = correlate(&v, taps, dx);
        }
        self.forward.apply_in_place(&mut v);
        v
    }
}

/// Dense `A[x1, x2]`: `Ms Mi^T dx` for a plane-wave pump, `Ms C Mi^T dx^2`
/// for a Gaussian pump.
pub fn coincidence_amplitude_matrix(setup: &BiphotonSetup) -> Result<ComplexMatrix> {
    setup.validate()?;
    let lambda = setup.wavelength();
    let dx = setup.grid.dx();
    let ms = transfer_matrix(&setup.signal_arm, setup.grid, lambda)?;
    let mi_t = transfer_matrix(&setup.idler_arm, setup.grid, lambda)?.transpose();
    Ok(match setup.source.correlation {
        Correlation::PlaneWavePump => ms.matmul(&mi_t).scale(dx),
        Correlation::GaussianPump { sigma_c } => {
            let g = setup.grid;
            let c = ComplexMatrix::from_fn(g.n(), |a, b| {
                let u = g.x(a) - g.x(b);
                Complex64::new((-u * u / (4.0 * sigma_c * sigma_c)).exp(), 0.0)
            });
            ms.matmul(&c).matmul(&mi_t).scale(dx * dx)
        }
    })
}

fn check_window(grid: &Grid1D, lo: f64, hi: f64) -> Result<(usize, usize)> {
    let half = 0.5 * grid.dx();
    if !(lo < hi) || lo < grid.x(0) - half || hi > grid.x(grid.n() - 1) + half {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("bucket window [{lo:e}, {hi:e}] must be nonempty and inside the grid"),
        });
    }
    let first = (0..grid.n()).find(|&i| grid.x(i) >= lo - 1e-12 * grid.dx()).unwrap_or(grid.n());
    let last = (0..grid.n()).rev().find(|&i| grid.x(i) <= hi + 1e-12 * grid.dx()).unwrap_or(0);
    if first > last {
        return Err(Error::InvalidParameter { name: "window", reason: "bucket window holds no grid sample".into() });
    }
    Ok((first, last))
}

/// Raw (unnormalised) coincidence rate for `mode`.
pub fn coincidence_rate(setup: &BiphotonSetup, mode: DetectionMode) -> Result<Vec<f64>> {
    setup.validate()?;
    let grid = setup.grid;
    let n = grid.n();
    let engine = RowEngine::new(setup, &setup.signal_arm, &setup.idler_arm)?;
    match mode {
        DetectionMode::FixedD1ScanD2 { x1 } => {
            let i = grid.index_of(x1).ok_or_else(|| Error::InvalidParameter {
                name: "x1",
                reason: format!("D1 position {x1:e} m is outside the grid"),
            })?;
            Ok(engine.row(i).iter().map(|a| a.norm_sqr()).collect())
        }
        DetectionMode::BucketD1ScanD2 { window } => {
            let (first, last) = match window {
                Some((lo, hi)) => check_window(&grid, lo, hi)?,
                None => (0, n - 1),
            };
            let dx = grid.dx();
            Ok(par::sum_vectors(last - first + 1, n, |k, acc| {
                let i = first + k;
                if engine.is_dark(i) {
                    return;
                }
                for (a, r) in acc.iter_mut().zip(engine.row(i)) {
                    *a += r.norm_sqr() * dx;
                }
            }))
        }
        DetectionMode::CoincidentScan => Ok(par::map_range(n, |i| engine.row(i)[i].norm_sqr())),
    }
}

/// Peak-normalised coincidence pattern over D2 (or over `x` for
/// [`DetectionMode::CoincidentScan`]).
pub fn coincidence_pattern(
    setup: &BiphotonSetup,
    mode: DetectionMode,
    metadata: PatternMetadata,
) -> Result<CoincidencePattern> {
    CoincidencePattern::on_grid(setup.grid, coincidence_rate(setup, mode)?, metadata)
}

/// Unconditioned count profile at one detector.
///
/// Masks in the opposite arm are replaced by the identity: the partner being
/// absorbed does not remove counts from this detector. Masks in the measured
/// arm are kept.
pub fn singles_pattern(setup: &BiphotonSetup, arm: Arm) -> Result<CoincidencePattern> {
    setup.validate()?;
    let (own, other) = match arm {
        Arm::Signal => (&setup.signal_arm, &setup.idler_arm),
        Arm::Idler => (&setup.idler_arm, &setup.signal_arm),
    };
    let partner = other.without_masks();
    let engine = RowEngine::new(setup, own, &partner)?;
    let dx = setup.grid.dx();
    let raw = par::map_range(setup.grid.n(), |i| {
        if engine.is_dark(i) {
            0.0
        } else {
            engine.row(i).iter().map(|a| a.norm_sqr()).sum::<f64>() * dx
        }
    });
    let name = match arm {
        Arm::Signal => "singles-signal",
        Arm::Idler => "singles-idler",
    };
    CoincidencePattern::on_grid(setup.grid, raw, PatternMetadata::new(name, setup.grid))
}
