use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Grid1D;
use crate::error::{check_positive, Error, Result};

/// Amplitude transmission of a thin object.
///
/// Slit edges are rasterised by area: each sample transmits the fraction of
/// its cell `[x - dx/2, x + dx/2]` that lies inside an opening, so the
/// integrated transmission equals the physical slit width on any grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransmissionMask {
    /// Fully transparent.
    Open,
    /// Transmits `x > edge`.
    HalfPlane { edge: f64 },
    SingleSlit { width: f64, center: f64 },
    /// Two slits of width `width` centred at `+-separation/2`.
    DoubleSlit { width: f64, separation: f64 },
    Tabulated { values: Vec<Complex64> },
}

impl TransmissionMask {
    pub fn single_slit(width: f64) -> Result<Self> {
        Self::offset_slit(width, 0.0)
    }

    pub fn offset_slit(width: f64, center: f64) -> Result<Self> {
        let m = TransmissionMask::SingleSlit { width, center };
        m.validate()?;
        Ok(m)
    }

    pub fn double_slit(width: f64, separation: f64) -> Result<Self> {
        let m = TransmissionMask::DoubleSlit { width, separation };
        m.validate()?;
        Ok(m)
    }

    pub fn tabulated(values: Vec<Complex64>) -> Result<Self> {
        let m = TransmissionMask::Tabulated { values };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TransmissionMask::Open => Ok(()),
            TransmissionMask::HalfPlane { edge } => {
                if edge.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter { name: "edge", reason: "must be finite".into() })
                }
            }
            TransmissionMask::SingleSlit { width, center } => {
                check_positive("a", *width)?;
                if !center.is_finite() {
                    return Err(Error::InvalidParameter { name: "center", reason: "must be finite".into() });
                }
                Ok(())
            }
            TransmissionMask::DoubleSlit { width, separation } => {
                check_positive("a", *width)?;
                check_positive("d", *separation)?;
                if separation <= width {
                    return Err(Error::InvalidParameter {
                        name: "d",
                        reason: format!("slits overlap: need d > a, got d = {separation}, a = {width}"),
                    });
                }
                Ok(())
            }
            TransmissionMask::Tabulated { values } => {
                if values.iter().any(|t| !(t.norm() <= 1.0 + 1e-12)) {
                    return Err(Error::InvalidParameter { name: "t", reason: "|t(x)| must be <= 1".into() });
                }
                Ok(())
            }
        }
    }

    /// Samples the mask on `grid`.
    pub fn transmission(&self, grid: &Grid1D) -> Result<Vec<Complex64>> {
        self.validate()?;
        let dx = grid.dx();
        let cover = |lo: f64, hi: f64| -> Vec<f64> {
            (0..grid.n())
                .map(|i| {
                    let x = grid.x(i);
                    let (cl, ch) = (x - 0.5 * dx, x + 0.5 * dx);
                    if cl >= lo && ch <= hi {
                        return 1.0;
                    }
                    ((ch.min(hi) - cl.max(lo)) / dx).clamp(0.0, 1.0)
                })
                .collect()
        };
        let real = |v: Vec<f64>| v.into_iter().map(|t| Complex64::new(t, 0.0)).collect();
        Ok(match self {
            TransmissionMask::Open => vec![Complex64::new(1.0, 0.0); grid.n()],
            TransmissionMask::HalfPlane { edge } => real(cover(*edge, f64::INFINITY)),
            TransmissionMask::SingleSlit { width, center } => {
                real(cover(center - 0.5 * width, center + 0.5 * width))
            }
            TransmissionMask::DoubleSlit { width, separation } => {
                let c = 0.5 * separation;
                let upper = cover(c - 0.5 * width, c + 0.5 * width);
                let lower = cover(-c - 0.5 * width, -c + 0.5 * width);
                real(upper.into_iter().zip(lower).map(|(u, l)| u + l).collect())
            }
            TransmissionMask::Tabulated { values } => {
                if values.len() != grid.n() {
                    return Err(Error::GridMismatch(format!(
                        "tabulated mask has {} samples, grid has {}",
                        values.len(),
                        grid.n()
                    )));
                }
                values.clone()
            }
        })
    }
}
