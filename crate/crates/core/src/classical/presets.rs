use serde::{Deserialize, Serialize};

use super::{run_projection, AngleLaw, ClassicalSetup, ProjectionResult, Trigger};
use crate::analysis;
use crate::biphoton::far_field_guard;
use crate::error::{check_positive, Error, Result};
use crate::pattern::{CoincidencePattern, PatternMetadata};
use crate::wavefield::{propagate_fresnel, ComplexField1D, Grid1D, OpticalSystem, TransmissionMask};

/// Object in arm A at `object_distance`, bucket behind it; arm B ends on a
/// detection plane at `plane`. Each arm's pulse is focused to `w0` on its
/// own output plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalProjection {
    pub wavelength: f64,
    pub object: TransmissionMask,
    pub object_distance: f64,
    pub plane: f64,
    pub w0: f64,
    pub theta_max: f64,
    pub shots: u64,
    pub seed: u64,
    pub law: AngleLaw,
    pub grid: Grid1D,
}

impl ClassicalProjection {
    /// Grid that admits hops up to `longest` with `feature` a whole number
    /// of cells.
    pub fn default_grid(n: usize, wavelength: f64, feature: f64, longest: f64) -> Result<Grid1D> {
        check_positive("lambda", wavelength)?;
        Grid1D::aligned(n, wavelength, longest, 0.0, feature)
    }

    /// Angular range whose geometric footprint at `object_distance` covers
    /// `half_width` plus two waists.
    pub fn covering_angle(half_width: f64, w0: f64, object_distance: f64) -> f64 {
        (half_width + 2.0 * w0) / object_distance
    }

    /// Double-slit object with the angular range sized to cover both slits.
    /// The grid admits detection planes up to `longest`.
    #[allow(clippy::too_many_arguments)]
    pub fn double_slit(
        wavelength: f64,
        a: f64,
        d: f64,
        object_distance: f64,
        plane: f64,
        w0: f64,
        shots: u64,
        n: usize,
        longest: f64,
    ) -> Result<Self> {
        check_positive("object_distance", object_distance)?;
        check_positive("w0", w0)?;
        Ok(Self {
            wavelength,
            object: TransmissionMask::double_slit(a, d)?,
            object_distance,
            plane,
            w0,
            theta_max: Self::covering_angle(0.5 * (d + a), w0, object_distance),
            shots,
            seed: 0,
            law: AngleLaw::Random,
            grid: Self::default_grid(n, wavelength, a, longest.max(plane).max(object_distance))?,
        })
    }

    pub fn setup(&self) -> Result<ClassicalSetup> {
        check_positive("object_distance", self.object_distance)?;
        check_positive("plane", self.plane)?;
        let arm_a = OpticalSystem::new().free(self.object_distance).mask(self.object.clone());
        let arm_b = OpticalSystem::new().free(self.plane);
        let mut s = ClassicalSetup::new(arm_a, arm_b, self.wavelength, self.theta_max, self.w0, self.grid, self.shots);
        s.focus_a = self.object_distance;
        s.focus_b = self.plane;
        s.seed = self.seed;
        s.law = self.law;
        s.validate()?;
        Ok(s)
    }

    /// Geometric image of object point `x` on the detection plane.
    pub fn geometric_image(&self, x: f64) -> f64 {
        x * self.plane / self.object_distance
    }
}

/// Runs the same projector with the arm-B detection plane (and its focus)
/// moved to each of `planes`.
pub fn plane_independence(base: &ClassicalProjection, planes: &[f64]) -> Result<Vec<ProjectionResult>> {
    if planes.is_empty() {
        return Err(Error::InvalidParameter { name: "planes", reason: "need at least one detection plane".into() });
    }
    planes
        .iter()
        .map(|&z| {
            let p = ClassicalProjection { plane: z, ..base.clone() };
            run_projection(&p.setup()?)
        })
        .collect()
}

/// 10-90 % width of the first rising edge, scanning from negative `x`.
///
/// Levels are taken relative to the plateau, the median of all samples
/// above half the peak.
pub fn projection_resolution(result: &ProjectionResult) -> Result<f64> {
    let s = &result.signal;
    let x = &result.coordinate;
    let mut upper: Vec<f64> = s.iter().cloned().filter(|&v| v >= 0.5).collect();
    if upper.is_empty() {
        return Err(Error::NoEdge);
    }
    upper.sort_by(f64::total_cmp);
    let plateau = upper[upper.len() / 2];
    let (lo, hi) = (0.1 * plateau, 0.9 * plateau);
    let top = s.iter().position(|&v| v >= hi).ok_or(Error::NoEdge)?;
    let bottom = s[..top].iter().rposition(|&v| v <= lo).ok_or(Error::NoEdge)?;
    let cross = |level: f64, from: usize, to: usize| -> f64 {
        // first upward crossing of `level` in (from, to]
        for i in from..to {
            if s[i] < level && s[i + 1] >= level {
                return x[i] + (level - s[i]) / (s[i + 1] - s[i]) * (x[i + 1] - x[i]);
            }
        }
        x[to]
    };
    let x10 = {
        // last upward crossing of the low level before the edge top
        let mut at = x[bottom];
        for i in bottom..top {
            if s[i] <= lo && s[i + 1] > lo {
                at = x[i] + (lo - s[i]) / (s[i + 1] - s[i]) * (x[i + 1] - x[i]);
            }
        }
        at
    };
    let x90 = cross(hi, bottom, top);
    Ok(x90 - x10)
}

/// Double slit in arm A, pulses narrower than one slit.
///
/// Arm A: `slit_distance` to the slits (pulse waist there), then `z` to a
/// point trigger at `x1`. Arm B: free space over the same total distance to
/// the scanned plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalDoubleSlit {
    pub wavelength: f64,
    pub a: f64,
    pub d: f64,
    pub z: f64,
    pub slit_distance: f64,
    pub x1: f64,
    pub w0: f64,
    pub theta_max: f64,
    pub shots: u64,
    pub seed: u64,
    pub law: AngleLaw,
    /// Transmit only the slit at `+d/2` (`Some(true)`) or `-d/2`
    /// (`Some(false)`).
    pub only_slit: Option<bool>,
    pub grid: Grid1D,
}

impl ClassicalDoubleSlit {
    pub const DEFAULT_SLIT_DISTANCE: f64 = 0.1;

    pub fn default_grid(n: usize, wavelength: f64, a: f64, z: f64, slit_distance: f64) -> Result<Grid1D> {
        check_positive("lambda", wavelength)?;
        check_positive("a", a)?;
        check_positive("z", z)?;
        Grid1D::aligned(n, wavelength, z + slit_distance, 3.0 * wavelength * z / a, a)
    }

    pub fn new(wavelength: f64, a: f64, d: f64, z: f64, w0: f64, shots: u64, n: usize) -> Result<Self> {
        let slit_distance = Self::DEFAULT_SLIT_DISTANCE;
        Ok(Self {
            wavelength,
            a,
            d,
            z,
            slit_distance,
            x1: 0.0,
            w0,
            theta_max: ClassicalProjection::covering_angle(0.5 * (d + a), w0, slit_distance),
            shots,
            seed: 0,
            law: AngleLaw::Random,
            only_slit: None,
            grid: Self::default_grid(n, wavelength, a, z, slit_distance)?,
        })
    }

    pub fn setup(&self) -> Result<ClassicalSetup> {
        check_positive("w0", self.w0)?;
        check_positive("slit_distance", self.slit_distance)?;
        check_positive("z", self.z)?;
        if self.w0 >= self.a {
            return Err(Error::InvalidParameter {
                name: "w0",
                reason: format!("pulse waist {:e} m must be smaller than the slit width {:e} m", self.w0, self.a),
            });
        }
        let slits = match self.only_slit {
            None => TransmissionMask::double_slit(self.a, self.d)?,
            Some(true) => TransmissionMask::offset_slit(self.a, 0.5 * self.d)?,
            Some(false) => TransmissionMask::offset_slit(self.a, -0.5 * self.d)?,
        };
        far_field_guard(self.z, self.d, self.wavelength)?;
        let arm_a = OpticalSystem::new().free(self.slit_distance).mask(slits).free(self.z);
        let arm_b = OpticalSystem::new().free(self.slit_distance + self.z);
        let mut s = ClassicalSetup::new(arm_a, arm_b, self.wavelength, self.theta_max, self.w0, self.grid, self.shots);
        s.focus_a = self.slit_distance;
        s.focus_b = self.slit_distance;
        s.seed = self.seed;
        s.law = self.law;
        s.trigger = Trigger::Point { x: self.x1 };
        s.record_singles = true;
        s.validate()?;
        Ok(s)
    }

    fn metadata(&self, preset: &str) -> PatternMetadata {
        PatternMetadata::new(preset, self.grid)
            .with("lambda", self.wavelength)
            .with("a", self.a)
            .with("d", self.d)
            .with("z", self.z)
            .with("w0", self.w0)
            .with("thetaMax", self.theta_max)
            .with("shotCount", self.shots as f64)
            .with("seed", self.seed as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleSlitOutcome {
    pub coincidence: CoincidencePattern,
    pub singles: CoincidencePattern,
    /// Coincidence visibility at the two-slit period `lambda z / d`.
    pub visibility: f64,
}

pub fn classical_double_slit(p: &ClassicalDoubleSlit) -> Result<DoubleSlitOutcome> {
    let setup = p.setup()?;
    let result = run_projection(&setup)?;
    let coincidence = CoincidencePattern::new(result.coordinate.clone(), result.signal, p.metadata("classical-double-slit"))?;
    let singles = CoincidencePattern::new(
        result.coordinate,
        result.singles.expect("singles recorded"),
        p.metadata("classical-double-slit-singles"),
    )?;
    let visibility = analysis::visibility(&coincidence, p.wavelength * p.z / p.d)?;
    Ok(DoubleSlitOutcome { coincidence, singles, visibility })
}

/// Plane-wave double-slit intensity `z` behind the slits.
pub fn young_pattern(a: f64, d: f64, z: f64, wavelength: f64, grid: Grid1D) -> Result<CoincidencePattern> {
    check_positive("z", z)?;
    let raw = young_intensity(a, d, z, wavelength, grid)?;
    let meta = PatternMetadata::new("young", grid).with("lambda", wavelength).with("a", a).with("d", d).with("z", z);
    CoincidencePattern::on_grid(grid, raw, meta)
}

fn young_intensity(a: f64, d: f64, z: f64, wavelength: f64, grid: Grid1D) -> Result<Vec<f64>> {
    let slits = TransmissionMask::double_slit(a, d)?;
    far_field_guard(z, d, wavelength)?;
    let field = ComplexField1D::new(grid, wavelength, slits.transmission(&grid)?)?;
    Ok(propagate_fresnel(&field, z)?.intensity())
}

/// Joint detection of two independent beams that each cover both slits:
/// the product of two identical Young patterns.
pub fn classical_litho_product(a: f64, d: f64, z: f64, wavelength: f64, grid: Grid1D) -> Result<CoincidencePattern> {
    check_positive("lambda", wavelength)?;
    check_positive("z", z)?;
    let young = young_intensity(a, d, z, wavelength, grid)?;
    let raw = young.iter().map(|i| i * i).collect();
    let meta = PatternMetadata::new("classical-litho", grid)
        .with("lambda", wavelength)
        .with("a", a)
        .with("d", d)
        .with("z", z);
    CoincidencePattern::on_grid(grid, raw, meta)
}
