use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};

/// Scalar potential energy catalog for the non-relativistic families.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Free,
    /// Walls at the domain ends. Requires a Dirichlet grid; `V = 0` inside.
    InfiniteWell,
    /// `V = k x^2 / 2`.
    Harmonic { k_spring: f64 },
    /// `V = v0` for `x >= x_step`, zero otherwise.
    Step { v0: f64, x_step: f64 },
    /// `V = v0` on `[x_left, x_right]`, zero otherwise.
    Barrier { v0: f64, x_left: f64, x_right: f64 },
    Tabulated(Vec<f64>),
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite"))
            }
        };
        match self {
            Potential::Free | Potential::InfiniteWell => Ok(()),
            Potential::Harmonic { k_spring } => finite("k_spring", *k_spring),
            Potential::Step { v0, x_step } => {
                finite("v0", *v0)?;
                finite("x_step", *x_step)
            }
            Potential::Barrier {
                v0,
                x_left,
                x_right,
            } => {
                finite("v0", *v0)?;
                finite("x_left", *x_left)?;
                finite("x_right", *x_right)?;
                if x_right < x_left {
                    return Err(Error::invalid("x_right", "must not be less than x_left"));
                }
                Ok(())
            }
            Potential::Tabulated(values) => match values.iter().position(|v| !v.is_finite()) {
                Some(i) => Err(Error::invalid("values", format!("entry {i} is not finite"))),
                None => Ok(()),
            },
        }
    }

    pub fn value_at(&self, x: f64) -> Option<f64> {
        match self {
            Potential::Free | Potential::InfiniteWell => Some(0.0),
            Potential::Harmonic { k_spring } => Some(0.5 * k_spring * x * x),
            Potential::Step { v0, x_step } => Some(if x >= *x_step { *v0 } else { 0.0 }),
            Potential::Barrier {
                v0,
                x_left,
                x_right,
            } => Some(if x >= *x_left && x <= *x_right {
                *v0
            } else {
                0.0
            }),
            Potential::Tabulated(_) => None,
        }
    }

    /// Samples the potential on every grid point.
    pub fn sample(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        self.validate()?;
        match self {
            Potential::Tabulated(values) => {
                if values.len() != grid.len() {
                    return Err(Error::LengthMismatch {
                        expected: grid.len(),
                        actual: values.len(),
                    });
                }
                Ok(values.clone())
            }
            Potential::InfiniteWell => {
                if grid.boundary() != Boundary::DirichletZero {
                    return Err(Error::invalid(
                        "potential",
                        "infinite well requires a Dirichlet-zero grid",
                    ));
                }
                Ok(vec![0.0; grid.len()])
            }
            _ => Ok(grid
                .points()
                .into_iter()
                .map(|x| self.value_at(x).unwrap_or(0.0))
                .collect()),
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Potential::Free | Potential::InfiniteWell)
    }
}

/// A scalar that is either uniform or sampled per grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarProfile {
    Uniform(f64),
    Sampled(Vec<f64>),
}

/// A 3-vector that is either uniform or sampled per grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorProfile {
    Uniform([f64; 3]),
    Sampled(Vec<[f64; 3]>),
}

impl ScalarProfile {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            ScalarProfile::Uniform(v) => *v,
            ScalarProfile::Sampled(v) => v[i],
        }
    }
}

impl VectorProfile {
    pub fn at(&self, i: usize) -> [f64; 3] {
        match self {
            VectorProfile::Uniform(v) => *v,
            VectorProfile::Sampled(v) => v[i],
        }
    }
}

/// Electromagnetic potentials `(Phi, A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmPotentials {
    pub vector: VectorProfile,
    pub scalar: ScalarProfile,
}

impl EmPotentials {
    pub fn uniform(a: [f64; 3], phi: f64) -> Self {
        Self {
            vector: VectorProfile::Uniform(a),
            scalar: ScalarProfile::Uniform(phi),
        }
    }

    pub fn zero() -> Self {
        Self::uniform([0.0; 3], 0.0)
    }

    pub fn is_uniform(&self) -> bool {
        matches!(
            (&self.vector, &self.scalar),
            (VectorProfile::Uniform(_), ScalarProfile::Uniform(_))
        )
    }

    /// Uniform `(A, Phi)` if both profiles are uniform.
    pub fn as_uniform(&self) -> Option<([f64; 3], f64)> {
        match (&self.vector, &self.scalar) {
            (VectorProfile::Uniform(a), ScalarProfile::Uniform(phi)) => Some((*a, *phi)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match &self.vector {
            VectorProfile::Uniform(a) => a.iter().all(|v| v.is_finite()),
            VectorProfile::Sampled(v) => v.iter().flatten().all(|x| x.is_finite()),
        } && match &self.scalar {
            ScalarProfile::Uniform(p) => p.is_finite(),
            ScalarProfile::Sampled(v) => v.iter().all(|x| x.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("em", "potentials must be finite"))
        }
    }

    /// Checks sampled profiles against a grid.
    pub fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        if let VectorProfile::Sampled(v) = &self.vector {
            if v.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    actual: v.len(),
                });
            }
        }
        if let ScalarProfile::Sampled(v) = &self.scalar {
            if v.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    actual: v.len(),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn scalar_values(&self) -> Vec<f64> {
        match &self.scalar {
            ScalarProfile::Uniform(v) => vec![*v],
            ScalarProfile::Sampled(v) => v.clone(),
        }
    }
}
