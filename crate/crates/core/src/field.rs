use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};

/// Quadrature rule for inner products and norms.
///
/// The trapezoid rule is the one used everywhere; the midpoint rule exists
/// only to measure how sensitive reported numbers are to that choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    #[default]
    Trapezoid,
    Midpoint,
}

/// Complex samples on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    /// Like [`from_fn`](Self::from_fn) but forces the Dirichlet end points to zero.
    pub fn from_fn_bc(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let mut field = Self::from_fn(grid, f)?;
        field.apply_boundary();
        Ok(field)
    }

    pub fn from_real(grid: Grid1D, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub(crate) fn from_raw(grid: Grid1D, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub(crate) fn apply_boundary(&mut self) {
        if self.grid.boundary() == Boundary::DirichletZero {
            let n = self.values.len();
            self.values[0] = Complex64::new(0.0, 0.0);
            self.values[n - 1] = Complex64::new(0.0, 0.0);
        }
    }

    pub fn ensure_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `<self, other>` with `self` conjugated, trapezoid rule.
    pub fn inner(&self, other: &ComplexField) -> Result<Complex64> {
        self.inner_with(other, Quadrature::Trapezoid)
    }

    pub fn inner_with(&self, other: &ComplexField, rule: Quadrature) -> Result<Complex64> {
        self.ensure_same_grid(other)?;
        Ok(inner_slices(&self.grid, &self.values, &other.values, rule))
    }

    pub fn norm_sqr(&self) -> f64 {
        inner_slices(&self.grid, &self.values, &self.values, Quadrature::Trapezoid).re
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, s: Complex64) -> ComplexField {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * s).collect())
    }

    /// Returns `self / ||self||`; a zero field is returned unchanged.
    pub fn normalized(&self) -> ComplexField {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(Complex64::new(1.0 / n, 0.0))
        }
    }

    pub fn add_scaled(&mut self, s: Complex64, other: &ComplexField) -> Result<()> {
        self.ensure_same_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn distance(&self, other: &ComplexField) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let diff: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(inner_slices(&self.grid, &diff, &diff, Quadrature::Trapezoid).re.sqrt())
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

pub(crate) fn inner_slices(
    grid: &Grid1D,
    a: &[Complex64],
    b: &[Complex64],
    rule: Quadrature,
) -> Complex64 {
    match rule {
        Quadrature::Trapezoid => grid
            .trapezoid_weights()
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| x.conj() * y * *w)
            .sum(),
        Quadrature::Midpoint => {
            let n = a.len();
            let cells = if grid.is_periodic() { n } else { n - 1 };
            let dx = grid.dx();
            (0..cells)
                .map(|i| {
                    let j = (i + 1) % n;
                    let am = 0.5 * (a[i] + a[j]);
                    let bm = 0.5 * (b[i] + b[j]);
                    am.conj() * bm * dx
                })
                .sum()
        }
    }
}

/// Real inner product with trapezoid weights.
pub(crate) fn real_inner(grid: &Grid1D, a: &[f64], b: &[f64]) -> f64 {
    grid.trapezoid_weights()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| w * x * y)
        .sum()
}
