//! JSON experiment configuration and its resolution against preset defaults.

use std::fmt;
use std::path::Path;

use klyshko_core::classical::{AngleLaw, ClassicalDoubleSlit, ClassicalProjection};
use klyshko_core::wavefield::Grid1D;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    GhostImage,
    GhostInterference,
    TwoPath,
    Lithography,
    ClassicalProjection,
    ClassicalDoubleSlit,
    ClassicalLitho,
    CompareLitho,
    CompareImaging,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::GhostImage,
        Preset::GhostInterference,
        Preset::TwoPath,
        Preset::Lithography,
        Preset::ClassicalProjection,
        Preset::ClassicalDoubleSlit,
        Preset::ClassicalLitho,
        Preset::CompareLitho,
        Preset::CompareImaging,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::GhostImage => "ghost-image",
            Preset::GhostInterference => "ghost-interference",
            Preset::TwoPath => "two-path",
            Preset::Lithography => "lithography",
            Preset::ClassicalProjection => "classical-projection",
            Preset::ClassicalDoubleSlit => "classical-double-slit",
            Preset::ClassicalLitho => "classical-litho",
            Preset::CompareLitho => "compare-litho",
            Preset::CompareImaging => "compare-imaging",
        }
    }

    /// Fields a config file must set for this preset.
    pub fn required(self) -> &'static [&'static str] {
        match self {
            Preset::GhostInterference => &["lambda", "a", "d", "z2"],
            Preset::TwoPath => &["lambda", "d", "z2"],
            Preset::Lithography | Preset::ClassicalLitho | Preset::CompareLitho => &["lambda", "a", "d", "z"],
            Preset::GhostImage => &["lambda", "f", "S_o"],
            Preset::ClassicalProjection => &["lambda", "w0"],
            Preset::ClassicalDoubleSlit => &["lambda", "a", "d", "z", "w0"],
            Preset::CompareImaging => &["lambda", "f", "S_o", "w0"],
        }
    }

    fn is_classical(self) -> bool {
        matches!(self, Preset::ClassicalProjection | Preset::ClassicalDoubleSlit | Preset::CompareImaging)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: Option<usize>,
    pub dx: Option<f64>,
}

/// Configuration as written in a file. Every field is optional here;
/// [`ExperimentConfig::resolve`] enforces the preset's required set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<Preset>,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub d: Option<f64>,
    pub f: Option<f64>,
    #[serde(rename = "S_o")]
    pub s_o: Option<f64>,
    #[serde(rename = "S_i")]
    pub s_i: Option<f64>,
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    pub z: Option<f64>,
    #[serde(rename = "thetaMax")]
    pub theta_max: Option<f64>,
    pub w0: Option<f64>,
    #[serde(rename = "shotCount")]
    pub shot_count: Option<u64>,
    pub seed: Option<u64>,
    pub grid: Option<GridConfig>,
    pub x1: Option<f64>,
    #[serde(rename = "objectDistance")]
    pub object_distance: Option<f64>,
    pub plane: Option<f64>,
    #[serde(rename = "angleLaw")]
    pub angle_law: Option<AngleLaw>,
}

/// Fully resolved parameters; serialises with the same keys as the config
/// file, so a report's echo can be fed back in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub preset: Preset,
    pub lambda: f64,
    pub a: f64,
    pub d: f64,
    pub f: f64,
    #[serde(rename = "S_o")]
    pub s_o: f64,
    #[serde(rename = "S_i")]
    pub s_i: f64,
    pub z1: f64,
    pub z2: f64,
    pub z: f64,
    #[serde(rename = "thetaMax")]
    pub theta_max: f64,
    pub w0: f64,
    #[serde(rename = "shotCount")]
    pub shot_count: u64,
    pub seed: u64,
    pub grid: GridConfig,
    pub x1: f64,
    #[serde(rename = "objectDistance")]
    pub object_distance: f64,
    pub plane: f64,
    #[serde(rename = "angleLaw")]
    pub angle_law: AngleLaw,
}

/// Parameters that `sweep` can vary.
pub const SWEEPABLE: [&str; 4] = ["S_i", "plane", "d", "shotCount"];

impl ExperimentConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Validation(format!("{}:{}:{}: {}", origin.display(), e.line(), e.column(), strip_position(&e)))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text, path)
    }

    /// Fails naming the first required field this config leaves unset.
    pub fn check_required(&self) -> Result<(), CliError> {
        let preset = self.preset.ok_or_else(|| CliError::Validation("missing field `preset` (or pass --preset)".into()))?;
        let set = |key: &str| match key {
            "lambda" => self.lambda.is_some(),
            "a" => self.a.is_some(),
            "d" => self.d.is_some(),
            "f" => self.f.is_some(),
            "S_o" => self.s_o.is_some(),
            "z2" => self.z2.is_some(),
            "z" => self.z.is_some(),
            "w0" => self.w0.is_some(),
            _ => true,
        };
        match preset.required().iter().find(|k| !set(k)) {
            Some(k) => Err(CliError::Validation(format!("missing field `{k}` required by preset {preset}"))),
            None => Ok(()),
        }
    }

    /// Sets a sweepable parameter.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        match name {
            "S_i" => self.s_i = Some(value),
            "plane" => self.plane = Some(value),
            "d" => self.d = Some(value),
            "shotCount" => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u64::MAX as f64) {
                    return Err(CliError::Validation(format!("shotCount must be a positive integer, got {value}")));
                }
                self.shot_count = Some(value as u64)
            }
            other => {
                return Err(CliError::Validation(format!(
                    "parameter `{other}` is not sweepable; choose one of {}",
                    SWEEPABLE.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Fills unset fields with the preset's documented defaults and checks
    /// every value.
    pub fn resolve(&self) -> Result<Params, CliError> {
        let preset = self.preset.ok_or_else(|| CliError::Validation("missing field `preset` (or pass --preset)".into()))?;
        let projection = matches!(preset, Preset::ClassicalProjection | Preset::CompareImaging);
        let lambda = self.lambda.unwrap_or(702e-9);
        let (a0, d0) = if projection { (1e-4, 1e-3) } else { (5e-5, 2e-4) };
        let a = self.a.unwrap_or(a0);
        let d = self.d.unwrap_or(d0);
        let f = self.f.unwrap_or(0.4);
        let s_o = self.s_o.unwrap_or(0.6);
        let s_i = match self.s_i {
            Some(v) => v,
            None => {
                if s_o > f {
                    1.0 / (1.0 / f - 1.0 / s_o)
                } else {
                    s_o
                }
            }
        };
        let z2 = self.z2.unwrap_or(1.0);
        let z1 = self.z1.unwrap_or(0.5 * z2);
        let z = self.z.unwrap_or(1.0);
        let w0 = self.w0.unwrap_or(if projection { 3e-5 } else { 2.5e-5 });
        let object_distance = self.object_distance.unwrap_or(match preset {
            Preset::ClassicalDoubleSlit => ClassicalDoubleSlit::DEFAULT_SLIT_DISTANCE,
            _ => 0.25,
        });
        let plane = self.plane.unwrap_or(0.5);
        let theta_max = self.theta_max.unwrap_or_else(|| ClassicalProjection::covering_angle(0.5 * (d + a), w0, object_distance));
        let grid = self.grid.clone().unwrap_or_default();
        let n = grid.n.unwrap_or(if preset.is_classical() { 8192 } else { 4096 });
        let p = Params {
            preset,
            lambda,
            a,
            d,
            f,
            s_o,
            s_i,
            z1,
            z2,
            z,
            theta_max,
            w0,
            shot_count: self.shot_count.unwrap_or(10_000),
            seed: self.seed.unwrap_or(0),
            grid: GridConfig { n: Some(n), dx: grid.dx },
            x1: self.x1.unwrap_or(0.0),
            object_distance,
            plane,
            angle_law: self.angle_law.unwrap_or_default(),
        };
        p.validate()?;
        Ok(p)
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

impl Params {
    fn validate(&self) -> Result<(), CliError> {
        let lengths = [
            ("lambda", self.lambda),
            ("a", self.a),
            ("d", self.d),
            ("f", self.f),
            ("S_o", self.s_o),
            ("S_i", self.s_i),
            ("z1", self.z1),
            ("z2", self.z2),
            ("z", self.z),
            ("w0", self.w0),
            ("objectDistance", self.object_distance),
            ("plane", self.plane),
        ];
        for (name, v) in lengths {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Validation(format!("field `{name}` must be a finite length > 0, got {v}")));
            }
        }
        if !(self.theta_max.is_finite() && self.theta_max > 0.0) {
            return Err(CliError::Validation(format!("field `thetaMax` must be finite and > 0, got {}", self.theta_max)));
        }
        if !self.x1.is_finite() {
            return Err(CliError::Validation("field `x1` must be finite".into()));
        }
        if self.shot_count == 0 {
            return Err(CliError::Validation("field `shotCount` must be at least 1".into()));
        }
        if let Some(dx) = self.grid.dx {
            if !(dx.is_finite() && dx > 0.0) {
                return Err(CliError::Validation(format!("field `grid.dx` must be finite and > 0, got {dx}")));
            }
        }
        let n = self.grid.n.expect("resolved");
        if n < Grid1D::MIN_SAMPLES || !n.is_power_of_two() {
            return Err(CliError::Validation(format!("field `grid.n` must be a power of two >= 16, got {n}")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.grid.n.expect("resolved")
    }

    /// Explicit grid when `grid.dx` is set.
    pub fn explicit_grid(&self) -> Result<Option<Grid1D>, CliError> {
        match self.grid.dx {
            Some(dx) => Ok(Some(Grid1D::new(self.n(), dx)?)),
            None => Ok(None),
        }
    }
}
