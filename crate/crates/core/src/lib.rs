//! Two-photon coincidence imaging in the unfolded (crystal-as-mirror)
//! picture, alongside a Monte Carlo model of the classical correlated-beam
//! projector, and the pattern metrics that compare them.
//!
//! * [`wavefield`]: 1-D Fresnel optics core.
//! * [`biphoton`]: biphoton amplitude engine and the quantum presets.
//! * [`classical`]: shot-by-shot correlated pulse simulator.
//! * [`analysis`]: fringe period, envelope zero, visibility, sharpness, magnification.

pub mod analysis;
pub mod biphoton;
pub mod classical;
pub mod error;
pub mod par;
pub mod pattern;
pub mod wavefield;

pub use error::{Error, Result};
pub use pattern::{CoincidencePattern, PatternMetadata};
