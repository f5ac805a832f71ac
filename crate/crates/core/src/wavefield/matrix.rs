use num_complex::Complex64;

use super::{CompiledSystem, ComplexField1D, Grid1D, OpticalSystem};
use crate::error::{Error, Result};
use crate::par;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(columns: Vec<Vec<Complex64>>) -> Self {
        let n = columns.len();
        let mut m = Self::zeros(n);
        for (j, col) in columns.into_iter().enumerate() {
            assert_eq!(col.len(), n, "column length");
            for (i, v) in col.into_iter().enumerate() {
                m.data[i * n + j] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.data.iter_mut().for_each(|v| *v *= s);
        self
    }

    /// `self * rhs`; rows are computed independently, each in a fixed order.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matrix size");
        let n = self.n;
        let rows = par::map_range(n, |i| {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (k, a) in self.row(i).iter().enumerate() {
                for (o, b) in out.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
            out
        });
        Self { n, data: rows.concat() }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        (0..self.n).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other| / max |self|`.
    pub fn relative_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        let d = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        d / self.max_abs()
    }
}

/// Kernel matrix of `system` on `grid`: column `j` is the response to the
/// discrete point source `delta_j / dx`, so that
/// `apply_system(u) = M * u * dx`. Columns are evaluated independently.
pub fn transfer_matrix(system: &OpticalSystem, grid: Grid1D, wavelength: f64) -> Result<ComplexMatrix> {
    let compiled = CompiledSystem::new(system, grid, wavelength)?;
    Ok(transfer_matrix_compiled(&compiled))
}

pub fn transfer_matrix_compiled(compiled: &CompiledSystem) -> ComplexMatrix {
    let grid = *compiled.grid();
    let columns = par::map_range(grid.n(), |j| {
        let mut amp = vec![Complex64::new(0.0, 0.0); grid.n()];
        amp[j] = Complex64::new(1.0 / grid.dx(), 0.0);
        compiled.apply_in_place(&mut amp);
        amp
    });
    ComplexMatrix::from_columns(columns)
}

/// `M * u * dx`, the matrix form of applying a system to a field.
pub fn apply_matrix(matrix: &ComplexMatrix, field: &ComplexField1D) -> Result<ComplexField1D> {
    if matrix.n() != field.grid().n() {
        return Err(Error::GridMismatch("matrix and field sizes differ".into()));
    }
    let dx = field.grid().dx();
    let out = matrix.mul_vec(field.amplitude()).into_iter().map(|v| v * dx).collect();
    Ok(ComplexField1D::from_parts(*field.grid(), field.wavelength(), out))
}
