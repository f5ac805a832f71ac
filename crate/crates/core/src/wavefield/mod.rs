//! Scalar 1-D paraxial wave optics: grids, fields, thin elements, and two
//! independent Fresnel propagators.

mod field;
mod grid;
mod mask;
mod matrix;
mod propagate;
mod system;

pub use field::ComplexField1D;
pub use grid::Grid1D;
pub use mask::TransmissionMask;
pub use matrix::{apply_matrix, transfer_matrix, transfer_matrix_compiled, ComplexMatrix};
pub use propagate::{
    apply_element, apply_system, check_sampling, fresnel_ratio, propagate_direct, propagate_fresnel, CompiledSystem,
};
pub use system::{Element, OpticalSystem};
