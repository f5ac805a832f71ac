use serde::{Deserialize, Serialize};

use super::TransmissionMask;
use crate::error::{check_nonnegative, Error, Result};

/// One thin optical element or free-space hop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Element {
    FreeSpace { z: f64 },
    ThinLens { f: f64 },
    Mask(TransmissionMask),
}

impl Element {
    pub fn validate(&self) -> Result<()> {
        match self {
            Element::FreeSpace { z } => check_nonnegative("z", *z),
            Element::ThinLens { f } => {
                if f.is_finite() && *f != 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter { name: "f", reason: format!("focal length must be finite and nonzero, got {f}") })
                }
            }
            Element::Mask(m) => m.validate(),
        }
    }
}

/// Ordered list of elements traversed left to right. Empty is the identity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OpticalSystem {
    pub elements: Vec<Element>,
}

impl OpticalSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_elements(elements: Vec<Element>) -> Result<Self> {
        let s = Self { elements };
        s.validate()?;
        Ok(s)
    }

    pub fn free(mut self, z: f64) -> Self {
        self.elements.push(Element::FreeSpace { z });
        self
    }

    pub fn lens(mut self, f: f64) -> Self {
        self.elements.push(Element::ThinLens { f });
        self
    }

    pub fn mask(mut self, mask: TransmissionMask) -> Self {
        self.elements.push(Element::Mask(mask));
        self
    }

    pub fn then(mut self, other: &OpticalSystem) -> Self {
        self.elements.extend(other.elements.iter().cloned());
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.elements.iter().try_for_each(Element::validate)
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The same elements traversed backwards. Every element kernel is
    /// symmetric, so the reversed system's transfer matrix is the transpose.
    pub fn reversed(&self) -> Self {
        Self { elements: self.elements.iter().rev().cloned().collect() }
    }

    /// Copy with every mask removed.
    pub fn without_masks(&self) -> Self {
        Self { elements: self.elements.iter().filter(|e| !matches!(e, Element::Mask(_))).cloned().collect() }
    }

    /// Sum of free-space hops.
    pub fn path_length(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| if let Element::FreeSpace { z } = e { *z } else { 0.0 })
            .sum()
    }

    pub fn longest_hop(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| if let Element::FreeSpace { z } = e { *z } else { 0.0 })
            .fold(0.0, f64::max)
    }
}
