use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavefield::Grid1D;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMetadata {
    pub preset: String,
    pub parameters: BTreeMap<String, f64>,
    pub grid: Grid1D,
}

impl PatternMetadata {
    pub fn new(preset: impl Into<String>, grid: Grid1D) -> Self {
        Self { preset: preset.into(), parameters: BTreeMap::new(), grid }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }
}

/// Detector coordinate against peak-normalised rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidencePattern {
    coordinate: Vec<f64>,
    rate: Vec<f64>,
    pub metadata: PatternMetadata,
}

impl CoincidencePattern {
    /// Normalises `raw` to unit peak. Rejects an all-zero or negative rate.
    pub fn new(coordinate: Vec<f64>, raw: Vec<f64>, metadata: PatternMetadata) -> Result<Self> {
        if coordinate.len() != raw.len() || coordinate.len() < 2 {
            return Err(Error::GridMismatch(format!(
                "{} coordinates for {} rates",
                coordinate.len(),
                raw.len()
            )));
        }
        if coordinate.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter { name: "coordinate", reason: "must be strictly increasing".into() });
        }
        if raw.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidParameter { name: "rate", reason: "must be finite and >= 0".into() });
        }
        let peak = raw.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::ZeroPattern);
        }
        let rate = raw.into_iter().map(|r| r / peak).collect();
        Ok(Self { coordinate, rate, metadata })
    }

    /// Pattern sampled on every point of `grid`.
    pub fn on_grid(grid: Grid1D, raw: Vec<f64>, metadata: PatternMetadata) -> Result<Self> {
        Self::new(grid.coordinates(), raw, metadata)
    }

    pub fn coordinate(&self) -> &[f64] {
        &self.coordinate
    }

    pub fn rate(&self) -> &[f64] {
        &self.rate
    }

    pub fn len(&self) -> usize {
        self.rate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rate.is_empty()
    }

    /// Mean sample spacing.
    pub fn spacing(&self) -> f64 {
        (self.coordinate[self.len() - 1] - self.coordinate[0]) / (self.len() - 1) as f64
    }

    /// Coordinate span plus one step, i.e. the window width.
    pub fn extent(&self) -> f64 {
        self.spacing() * self.len() as f64
    }

    /// Index of the sample closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = self.coordinate.partition_point(|&c| c < x);
        if i == 0 {
            0
        } else if i == self.len() {
            self.len() - 1
        } else if (self.coordinate[i] - x).abs() < (x - self.coordinate[i - 1]).abs() {
            i
        } else {
            i - 1
        }
    }

    /// Rate at `x` by linear interpolation.
    pub fn rate_at(&self, x: f64) -> f64 {
        let i = self.coordinate.partition_point(|&c| c < x);
        if i == 0 {
            return self.rate[0];
        }
        if i == self.len() {
            return self.rate[self.len() - 1];
        }
        let (x0, x1) = (self.coordinate[i - 1], self.coordinate[i]);
        let t = (x - x0) / (x1 - x0);
        self.rate[i - 1] * (1.0 - t) + self.rate[i] * t
    }
}
