use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Field vanishes at both end points; the end points are stored but never evolve.
    DirichletZero,
    /// `x_max` is identified with `x_min`; the last stored point is `x_max - dx`.
    Periodic,
}

/// Uniform one-dimensional grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    boundary: Boundary,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, boundary: Boundary) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::DegenerateDomain("domain bounds must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::DegenerateDomain(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n_points < 3 {
            return Err(Error::DegenerateDomain(format!(
                "need at least 3 grid points, got {n_points}"
            )));
        }
        let grid = Self {
            x_min,
            x_max,
            n_points,
            boundary,
        };
        if !(grid.dx() > 0.0) {
            return Err(Error::DegenerateDomain("grid spacing underflows".into()));
        }
        Ok(grid)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    /// Length of the domain `x_max - x_min`.
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        match self.boundary {
            Boundary::DirichletZero => self.length() / (self.n_points - 1) as f64,
            Boundary::Periodic => self.length() / self.n_points as f64,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Indices of the grid points that carry unknowns: every point for periodic
    /// grids, the interior for Dirichlet grids.
    pub fn active_range(&self) -> std::ops::Range<usize> {
        match self.boundary {
            Boundary::DirichletZero => 1..self.n_points - 1,
            Boundary::Periodic => 0..self.n_points,
        }
    }

    pub fn n_active(&self) -> usize {
        self.active_range().len()
    }

    /// Trapezoid quadrature weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut w = vec![dx; self.n_points];
        if self.boundary == Boundary::DirichletZero {
            w[0] = 0.5 * dx;
            w[self.n_points - 1] = 0.5 * dx;
        }
        w
    }

    /// Midpoint of the domain.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.x_min + self.x_max)
    }
}
