//! Second-order central-difference Laplacian.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::{Boundary, Grid1D};
use crate::linalg::SymOperator;

/// `(f[i-1] - 2 f[i] + f[i+1]) / dx^2` with the grid's boundary rule.
///
/// On Dirichlet grids the end points are treated as zero regardless of what
/// the field stores there, and the output vanishes at the end points. This
/// keeps the operator symmetric and negative semi-definite on the interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianStencil {
    grid: Grid1D,
    inv_dx2: f64,
}

impl LaplacianStencil {
    pub fn new(grid: Grid1D) -> Self {
        let dx = grid.dx();
        Self {
            grid,
            inv_dx2: 1.0 / (dx * dx),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn apply(&self, f: &ComplexField) -> Result<ComplexField> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(ComplexField::from_raw(self.grid, self.apply_slice(f.values())))
    }

    pub fn apply_slice<T>(&self, f: &[T]) -> Vec<T>
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let mut out = vec![T::default(); f.len()];
        self.apply_into(f, &mut out);
        out
    }

    pub fn apply_into<T>(&self, f: &[T], out: &mut [T])
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let n = f.len();
        debug_assert_eq!(n, self.grid.len());
        let s = self.inv_dx2;
        for i in 1..n - 1 {
            out[i] = (f[i - 1] + f[i + 1] - f[i] * 2.0) * s;
        }
        match self.grid.boundary() {
            Boundary::Periodic => {
                out[0] = (f[n - 1] + f[1] - f[0] * 2.0) * s;
                out[n - 1] = (f[n - 2] + f[0] - f[n - 1] * 2.0) * s;
            }
            Boundary::DirichletZero => {
                out[0] = T::default();
                out[n - 1] = T::default();
                // neighbours outside the active range are the zero wall
                out[1] = (f[2] - f[1] * 2.0) * s;
                out[n - 2] = (f[n - 3] - f[n - 2] * 2.0) * s;
                if n == 3 {
                    out[1] = (f[1] * -2.0) * s;
                }
            }
        }
    }

    /// `scale * L + diag(shift)` restricted to the active unknowns.
    pub fn operator(&self, scale: f64, shift: &[f64]) -> SymOperator {
        let range = self.grid.active_range();
        let m = range.len();
        let diag = range.clone().map(|i| -2.0 * scale * self.inv_dx2 + shift[i]).collect();
        let ring = self.grid.is_periodic();
        let off_len = if ring { m } else { m - 1 };
        SymOperator {
            diag,
            off: vec![scale * self.inv_dx2; off_len],
            ring,
        }
    }

    /// Magnitude of the discrete Laplacian eigenvalue for the Fourier mode `k`:
    /// `(4/dx^2) sin^2(k dx / 2)`.
    pub fn symbol(&self, k: f64) -> f64 {
        let h = self.grid.dx();
        let s = (0.5 * k * h).sin();
        4.0 * self.inv_dx2 * s * s
    }
}
