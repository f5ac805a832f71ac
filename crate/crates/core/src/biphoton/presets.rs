use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{coincidence_pattern, BiphotonSetup, DetectionMode, SourceModel};
use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::pattern::{CoincidencePattern, PatternMetadata};
use crate::wavefield::{propagate_fresnel, ComplexField1D, Grid1D, OpticalSystem, TransmissionMask};

/// Rejects `z < 10 d^2 / lambda`.
pub fn far_field_guard(z: f64, d: f64, wavelength: f64) -> Result<()> {
    let required = 10.0 * d * d / wavelength;
    if z < required {
        return Err(Error::FarField { z, required });
    }
    Ok(())
}

/// Grid for a double slit of width `a` observed at `z`: the hop passes the
/// sampling guard, the slit width is a whole number of cells, and the window
/// spans at least three single-slit envelope half-widths `lambda z / a`.
pub fn double_slit_grid(n: usize, wavelength: f64, a: f64, z: f64) -> Result<Grid1D> {
    check_positive("lambda", wavelength)?;
    check_positive("a", a)?;
    check_positive("z", z)?;
    Grid1D::aligned(n, wavelength, z, 3.0 * wavelength * z / a, a)
}

/// Double slit in the signal arm, D1 fixed, D2 scanned.
///
/// Signal arm: crystal, `z1` of free space, the double slit, then a
/// collection lens with D1 in its back focal plane. Seen from D1 the slit is
/// lit by a plane wave, and the unfolded distance from the slit back through
/// the crystal to D2 is `z2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhostInterference {
    pub wavelength: f64,
    pub a: f64,
    pub d: f64,
    pub z1: f64,
    pub z2: f64,
    pub x1: f64,
    pub collection_focal: f64,
    pub grid: Grid1D,
}

impl GhostInterference {
    pub const DEFAULT_COLLECTION_FOCAL: f64 = 0.5;

    pub fn default_grid(n: usize, wavelength: f64, a: f64, z2: f64) -> Result<Grid1D> {
        double_slit_grid(n, wavelength, a, z2.max(Self::DEFAULT_COLLECTION_FOCAL))
    }

    pub fn new(wavelength: f64, a: f64, d: f64, z1: f64, z2: f64, n: usize) -> Result<Self> {
        check_positive("lambda", wavelength)?;
        Ok(Self {
            wavelength,
            a,
            d,
            z1,
            z2,
            x1: 0.0,
            collection_focal: Self::DEFAULT_COLLECTION_FOCAL,
            grid: Self::default_grid(n, wavelength, a, z2)?,
        })
    }

    pub fn setup(&self) -> Result<BiphotonSetup> {
        check_positive("lambda", self.wavelength)?;
        check_positive("z2", self.z2)?;
        check_nonnegative("z1", self.z1)?;
        check_positive("collection_focal", self.collection_focal)?;
        if self.z1 > self.z2 {
            return Err(Error::InvalidParameter {
                name: "z1",
                reason: format!("crystal-to-slit distance z1 = {} exceeds the unfolded distance z2 = {}", self.z1, self.z2),
            });
        }
        let slits = TransmissionMask::double_slit(self.a, self.d)?;
        far_field_guard(self.z2, self.d, self.wavelength)?;
        let signal = OpticalSystem::new()
            .free(self.z1)
            .mask(slits)
            .lens(self.collection_focal)
            .free(self.collection_focal);
        let idler = OpticalSystem::new().free(self.z2 - self.z1);
        BiphotonSetup::new(SourceModel::degenerate(self.wavelength), signal, idler, self.grid)
    }
}

/// Coincidence rate over D2 with D1 held at `x1`.
pub fn ghost_interference(p: &GhostInterference) -> Result<CoincidencePattern> {
    let setup = p.setup()?;
    let meta = PatternMetadata::new("ghost-interference", p.grid)
        .with("lambda", p.wavelength)
        .with("a", p.a)
        .with("d", p.d)
        .with("z1", p.z1)
        .with("z2", p.z2)
        .with("x1", p.x1);
    coincidence_pattern(&setup, DetectionMode::FixedD1ScanD2 { x1: p.x1 }, meta)
}

/// Two pencil paths through `+-d/2`, summed as two point-source amplitudes
/// at distance `z2`.
pub fn two_path_pattern(wavelength: f64, d: f64, z2: f64, grid: Grid1D) -> Result<CoincidencePattern> {
    check_positive("lambda", wavelength)?;
    check_positive("d", d)?;
    check_positive("z2", z2)?;
    let norm = Complex64::new(0.0, wavelength * z2).sqrt().inv();
    let h = |u: f64| Complex64::from_polar(1.0, std::f64::consts::PI * u * u / (wavelength * z2)) * norm;
    let raw = grid.coordinates().into_iter().map(|x| (h(x - 0.5 * d) + h(x + 0.5 * d)).norm_sqr()).collect();
    let meta = PatternMetadata::new("two-path", grid).with("lambda", wavelength).with("d", d).with("z2", z2);
    CoincidencePattern::on_grid(grid, raw, meta)
}

/// Lens in the signal arm, object in front of a bucket D1, D2 scanned.
///
/// Unfolded path: object, `s_o`, lens `f`, `s_i`, D2. The crystal sits
/// `crystal_offset` after the lens on the `s_i` segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhostImage {
    pub wavelength: f64,
    pub f: f64,
    pub s_o: f64,
    pub s_i: f64,
    pub object: TransmissionMask,
    pub crystal_offset: f64,
    pub bucket: Option<(f64, f64)>,
    pub grid: Grid1D,
}

impl GhostImage {
    /// `1/s_i = 1/f - 1/s_o`.
    pub fn image_distance(f: f64, s_o: f64) -> Result<f64> {
        check_positive("f", f)?;
        check_positive("S_o", s_o)?;
        if s_o <= f {
            return Err(Error::InvalidParameter {
                name: "S_o",
                reason: format!("object at or inside the focal length (S_o = {s_o}, f = {f}) has no real image"),
            });
        }
        Ok(1.0 / (1.0 / f - 1.0 / s_o))
    }

    /// Grid whose sampling guard admits hops up to `longest`.
    pub fn default_grid(n: usize, wavelength: f64, longest: f64) -> Result<Grid1D> {
        Grid1D::for_propagation(n, wavelength, longest, 0.0)
    }

    pub fn new(wavelength: f64, f: f64, s_o: f64, s_i: f64, object: TransmissionMask, grid: Grid1D) -> Self {
        Self { wavelength, f, s_o, s_i, object, crystal_offset: 0.0, bucket: None, grid }
    }

    pub fn setup(&self) -> Result<BiphotonSetup> {
        check_positive("lambda", self.wavelength)?;
        check_positive("f", self.f)?;
        check_positive("S_o", self.s_o)?;
        check_positive("S_i", self.s_i)?;
        check_nonnegative("crystal_offset", self.crystal_offset)?;
        if self.crystal_offset > self.s_i {
            return Err(Error::InvalidParameter {
                name: "crystal_offset",
                reason: format!("crystal must lie between the lens and D2 (offset {} > S_i {})", self.crystal_offset, self.s_i),
            });
        }
        let signal = OpticalSystem::new()
            .free(self.crystal_offset)
            .lens(self.f)
            .free(self.s_o)
            .mask(self.object.clone());
        let idler = OpticalSystem::new().free(self.s_i - self.crystal_offset);
        BiphotonSetup::new(SourceModel::degenerate(self.wavelength), signal, idler, self.grid)
    }
}

/// Bucket-D1 coincidence image over D2.
pub fn ghost_image(p: &GhostImage) -> Result<CoincidencePattern> {
    let setup = p.setup()?;
    let meta = PatternMetadata::new("ghost-image", p.grid)
        .with("lambda", p.wavelength)
        .with("f", p.f)
        .with("S_o", p.s_o)
        .with("S_i", p.s_i);
    coincidence_pattern(&setup, DetectionMode::BucketD1ScanD2 { window: p.bucket }, meta)
}

/// Intensity `z` behind `mask` for a pair that crosses it together, carried
/// as one field at half the photon wavelength. The pair amplitude picks up
/// the mask twice, hence `t^2`.
pub fn copropagating_intensity(mask: &TransmissionMask, z: f64, wavelength: f64, grid: Grid1D) -> Result<Vec<f64>> {
    check_positive("lambda", wavelength)?;
    let t = mask.transmission(&grid)?;
    let field = ComplexField1D::new(grid, 0.5 * wavelength, t.iter().map(|t| t * t).collect())?;
    Ok(propagate_fresnel(&field, z)?.intensity())
}

/// Two-photon double-slit pattern at `x1 = x2 = x`.
pub fn lithography_pattern(a: f64, d: f64, z: f64, wavelength: f64, grid: Grid1D) -> Result<CoincidencePattern> {
    check_positive("lambda", wavelength)?;
    check_positive("z", z)?;
    let slits = TransmissionMask::double_slit(a, d)?;
    far_field_guard(z, d, wavelength)?;
    let raw = copropagating_intensity(&slits, z, wavelength, grid)?;
    let meta = PatternMetadata::new("lithography", grid)
        .with("lambda", wavelength)
        .with("a", a)
        .with("d", d)
        .with("z", z);
    CoincidencePattern::on_grid(grid, raw, meta)
}
