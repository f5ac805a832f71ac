use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The transfer-function kernel would alias: the sampled phase step between
    /// neighbouring spatial frequencies exceeds pi.
    #[error(
        "sampling guard: Fresnel-number condition lambda*z/(dx*L) = {ratio:.4} exceeds 1 \
         (z = {z} m); use z <= {z_max:.6e} m or a coarser/larger grid"
    )]
    SamplingGuard { z: f64, ratio: f64, z_max: f64 },

    #[error("far-field guard: z = {z} m is below the required minimum {required:.6e} m (10*d^2/lambda)")]
    FarField { z: f64, required: f64 },

    #[error("pattern is identically zero")]
    ZeroPattern,

    #[error("no fringes detected")]
    NoFringes,

    #[error("no envelope zero within +/-{searched:.4e} m; the grid extent must exceed {required_extent:.4e} m")]
    EnvelopeOutOfGrid { searched: f64, required_extent: f64 },

    #[error("analysis window too small: {0}")]
    WindowTooSmall(String),

    #[error("image peaks unresolved")]
    Unresolved,

    #[error("no edge detectable in projection")]
    NoEdge,

    #[error("classical projection accumulated zero signal (object opaque over the sampled angles)")]
    ZeroSignal,
}

impl Error {
    /// True for rejections that come from a physical or numerical validity
    /// guard rather than from malformed input.
    pub fn is_physics_guard(&self) -> bool {
        matches!(
            self,
            Error::SamplingGuard { .. } | Error::FarField { .. } | Error::ZeroSignal | Error::ZeroPattern
        )
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite and > 0, got {value}") })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite and >= 0, got {value}") })
    }
}
