//! Shot-by-shot model of a classical correlated-beam projector.
//!
//! Each shot emits two Gaussian pulses from a common source point, tilted by
//! correlated angles. Arm A carries the object and ends on a trigger
//! detector; arm B ends on the scanned detection plane. Per shot the trigger
//! value multiplies the arm-B intensity profile, and profiles add
//! incoherently across shots.

mod presets;

pub use presets::{
    classical_double_slit, classical_litho_product, plane_independence, projection_resolution, young_pattern,
    ClassicalDoubleSlit, ClassicalProjection, DoubleSlitOutcome,
};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::par;
use crate::pattern::{CoincidencePattern, PatternMetadata};
use crate::wavefield::{CompiledSystem, Grid1D, OpticalSystem};

/// How emission angles are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleLaw {
    /// Independent uniform draws from `[-theta_max, theta_max]`.
    #[default]
    Random,
    /// Evenly spaced angles, shot `k` at the centre of the `k`-th of
    /// `shots` equal sub-intervals.
    Sweep,
}

/// What arm A's detector reports per shot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Trigger {
    /// Total power reaching the end of arm A.
    #[default]
    Bucket,
    /// Intensity at one point of arm A's output plane.
    Point { x: f64 },
}

/// The pulse pair of one shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotPair {
    pub theta: f64,
    pub w0: f64,
    pub shot: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSetup {
    pub arm_a: OpticalSystem,
    pub arm_b: OpticalSystem,
    pub wavelength: f64,
    pub theta_max: f64,
    /// Pulse waist radius (1/e^2 intensity).
    pub w0: f64,
    /// Distance from the source at which the arm-A pulse has its waist.
    pub focus_a: f64,
    pub focus_b: f64,
    pub grid: Grid1D,
    pub shots: u64,
    pub seed: u64,
    pub law: AngleLaw,
    /// Emit arm B at `-theta` instead of `theta`.
    pub anti_correlated: bool,
    /// Binarise the trigger value at this level.
    pub threshold: Option<f64>,
    pub trigger: Trigger,
    pub record_log: bool,
    /// Also accumulate arm A's output intensity profile.
    pub record_singles: bool,
}

impl ClassicalSetup {
    pub fn new(
        arm_a: OpticalSystem,
        arm_b: OpticalSystem,
        wavelength: f64,
        theta_max: f64,
        w0: f64,
        grid: Grid1D,
        shots: u64,
    ) -> Self {
        Self {
            arm_a,
            arm_b,
            wavelength,
            theta_max,
            w0,
            focus_a: 0.0,
            focus_b: 0.0,
            grid,
            shots,
            seed: 0,
            law: AngleLaw::Random,
            anti_correlated: false,
            threshold: None,
            trigger: Trigger::Bucket,
            record_log: false,
            record_singles: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("lambda", self.wavelength)?;
        check_positive("w0", self.w0)?;
        check_nonnegative("theta_max", self.theta_max)?;
        check_nonnegative("focus_a", self.focus_a)?;
        check_nonnegative("focus_b", self.focus_b)?;
        if self.shots == 0 {
            return Err(Error::InvalidParameter { name: "shotCount", reason: "need at least one shot".into() });
        }
        // tilt carrier plus twice the pulse's 1/e^2 spectral radius must stay below Nyquist
        let spread = 2.0 / (std::f64::consts::PI * self.w0);
        let tilt_limit = self.wavelength * (0.5 / self.grid.dx() - spread);
        if self.theta_max >= tilt_limit {
            return Err(Error::InvalidParameter {
                name: "theta_max",
                reason: format!(
                    "tilt {} rad with waist {:e} m aliases on this grid; keep theta_max below {tilt_limit:e} or refine dx",
                    self.theta_max, self.w0
                ),
            });
        }
        if let Some(t) = self.threshold {
            check_nonnegative("threshold", t)?;
        }
        if let Trigger::Point { x } = self.trigger {
            if self.grid.index_of(x).is_none() {
                return Err(Error::InvalidParameter { name: "x1", reason: format!("trigger point {x:e} m is off the grid") });
            }
        }
        CompiledSystem::new(&self.arm_a, self.grid, self.wavelength)?;
        CompiledSystem::new(&self.arm_b, self.grid, self.wavelength)?;
        Ok(())
    }

    /// The pulse pair of shot `k`. Random angles come from a ChaCha8 stream
    /// keyed by `(seed, k)`, so any shot can be regenerated on its own.
    pub fn shot(&self, k: u64) -> ShotPair {
        let theta = match self.law {
            AngleLaw::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(k);
                if self.theta_max == 0.0 {
                    0.0
                } else {
                    rng.random_range(-self.theta_max..=self.theta_max)
                }
            }
            AngleLaw::Sweep => self.theta_max * (2.0 * (k as f64 + 0.5) / self.shots as f64 - 1.0),
        };
        ShotPair { theta, w0: self.w0, shot: k }
    }

    /// Unit-power Gaussian pulse at the source, tilted by `theta`, with its
    /// waist `w0` reached `focus` downstream.
    pub fn source_pulse(&self, theta: f64, focus: f64) -> Vec<Complex64> {
        self.tilt(&self.pulse_envelope(focus), theta)
    }

    fn pulse_envelope(&self, focus: f64) -> Vec<Complex64> {
        let z_r = std::f64::consts::PI * self.w0 * self.w0 / self.wavelength;
        // complex beam parameter q(z) = z - focus - i z_R, evaluated at z = 0
        let q = Complex64::new(-focus, -z_r);
        let mut u: Vec<Complex64> = self
            .grid
            .coordinates()
            .into_iter()
            .map(|x| (Complex64::i() * std::f64::consts::PI * x * x / (self.wavelength * q)).exp())
            .collect();
        let power: f64 = u.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx();
        let s = power.sqrt().recip();
        u.iter_mut().for_each(|v| *v *= s);
        u
    }

    fn tilt(&self, envelope: &[Complex64], theta: f64) -> Vec<Complex64> {
        const ANCHOR: usize = 64;
        let phase = |i: usize| 2.0 * std::f64::consts::PI / self.wavelength * theta * self.grid.x(i);
        let step = Complex64::from_polar(1.0, phase(1) - phase(0));
        let mut out = Vec::with_capacity(envelope.len());
        let mut p = Complex64::new(1.0, 0.0);
        for (i, e) in envelope.iter().enumerate() {
            // phasor recurrence, re-anchored exactly every ANCHOR samples
            p = if i % ANCHOR == 0 { Complex64::from_polar(1.0, phase(i)) } else { p * step };
            out.push(e * p);
        }
        out
    }

    fn trigger_value(&self, out_a: &[Complex64]) -> f64 {
        let raw = match self.trigger {
            Trigger::Bucket => out_a.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx(),
            Trigger::Point { x } => out_a[self.grid.index_of(x).expect("validated")].norm_sqr(),
        };
        match self.threshold {
            Some(t) => {
                if raw >= t {
                    1.0
                } else {
                    0.0
                }
            }
            None => raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShotRecord {
    pub shot: u64,
    pub theta: f64,
    /// Trigger value (arm A power, or point intensity).
    pub transmitted: f64,
    /// Intensity centroid of the arm-B spot.
    pub spot_center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub coordinate: Vec<f64>,
    /// Accumulated coincidence signal, peak-normalised.
    pub signal: Vec<f64>,
    /// Peak of the raw accumulated signal; `signal * scale` restores it.
    pub scale: f64,
    /// Accumulated arm-A output intensity, when requested.
    pub singles: Option<Vec<f64>>,
    pub log: Option<Vec<ShotRecord>>,
    /// 10-90 % edge width, when an edge is present.
    pub resolution: Option<f64>,
}

impl ProjectionResult {
    pub fn pattern(&self, preset: &str, grid: Grid1D) -> Result<CoincidencePattern> {
        CoincidencePattern::new(self.coordinate.clone(), self.signal.clone(), PatternMetadata::new(preset, grid))
    }
}

struct Partial {
    signal: Vec<f64>,
    singles: Vec<f64>,
    log: Vec<ShotRecord>,
}

/// Arm-B intensity profile of one shot, as accumulated by [`run_projection`].
pub fn shot_profile_b(setup: &ClassicalSetup, theta: f64) -> Result<Vec<f64>> {
    let arm_b = CompiledSystem::new(&setup.arm_b, setup.grid, setup.wavelength)?;
    let theta_b = if setup.anti_correlated { -theta } else { theta };
    let mut u = setup.source_pulse(theta_b, setup.focus_b);
    arm_b.apply_in_place(&mut u);
    Ok(u.iter().map(|v| v.norm_sqr()).collect())
}

/// Runs every shot and accumulates `trigger * I_B(x)`.
///
/// Shots are processed in fixed chunks of [`par::CHUNK`]; partial sums are
/// added in chunk order, so the result does not depend on scheduling.
pub fn run_projection(setup: &ClassicalSetup) -> Result<ProjectionResult> {
    setup.validate()?;
    let grid = setup.grid;
    let n = grid.n();
    let arm_a = CompiledSystem::new(&setup.arm_a, grid, setup.wavelength)?;
    let arm_b = CompiledSystem::new(&setup.arm_b, grid, setup.wavelength)?;
    let coords = grid.coordinates();
    let env_a = setup.pulse_envelope(setup.focus_a);
    let env_b = setup.pulse_envelope(setup.focus_b);
    let chunk = par::CHUNK as u64;
    let chunks = setup.shots.div_ceil(chunk) as usize;

    let partials = par::map_range(chunks, |c| {
        let mut p = Partial {
            signal: vec![0.0; n],
            singles: if setup.record_singles { vec![0.0; n] } else { Vec::new() },
            log: Vec::new(),
        };
        let first = c as u64 * chunk;
        for k in first..(first + chunk).min(setup.shots) {
            let pair = setup.shot(k);
            let mut ua = setup.tilt(&env_a, pair.theta);
            arm_a.apply_in_place(&mut ua);
            if setup.record_singles {
                for (s, v) in p.singles.iter_mut().zip(&ua) {
                    *s += v.norm_sqr();
                }
            }
            let weight = setup.trigger_value(&ua);
            if weight == 0.0 && !setup.record_log {
                continue;
            }
            let theta_b = if setup.anti_correlated { -pair.theta } else { pair.theta };
            let mut ub = setup.tilt(&env_b, theta_b);
            arm_b.apply_in_place(&mut ub);
            let (mut total, mut moment) = (0.0, 0.0);
            for ((s, v), x) in p.signal.iter_mut().zip(&ub).zip(&coords) {
                let ib = v.norm_sqr();
                *s += weight * ib;
                total += ib;
                moment += ib * x;
            }
            if setup.record_log {
                p.log.push(ShotRecord { shot: k, theta: pair.theta, transmitted: weight, spot_center: moment / total });
            }
        }
        p
    });

    let mut signal = vec![0.0; n];
    let mut singles = if setup.record_singles { Some(vec![0.0; n]) } else { None };
    let mut log = if setup.record_log { Some(Vec::with_capacity(setup.shots as usize)) } else { None };
    for p in partials {
        signal.iter_mut().zip(&p.signal).for_each(|(a, b)| *a += b);
        if let Some(s) = singles.as_mut() {
            s.iter_mut().zip(&p.singles).for_each(|(a, b)| *a += b);
        }
        if let Some(l) = log.as_mut() {
            l.extend(p.log);
        }
    }
    let scale = signal.iter().cloned().fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::ZeroSignal);
    }
    signal.iter_mut().for_each(|s| *s /= scale);
    let mut result = ProjectionResult { coordinate: coords, signal, scale, singles, log, resolution: None };
    result.resolution = projection_resolution(&result).ok();
    Ok(result)
}
