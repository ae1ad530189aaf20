//! Finite-difference laboratory for a family of non-relativistic and
//! relativistic scalar wave equations, their standard Schrödinger and
//! Klein–Gordon counterparts, and the closed-form solutions used to audit them.
//!
//! Everything is one-dimensional: the Laplacian is `d^2/dx^2` on a uniform
//! [`Grid1D`]. Natural units (`hbar = c = m0 = e = 1`) are the default
//! [`PhysicalConstants`].

pub mod analytic;
pub mod constants;
pub mod em_kinematics;
pub mod equation;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod laplacian;
pub mod linalg;
pub mod observables;
pub mod potential;
pub mod stationary;

pub use constants::PhysicalConstants;
pub use equation::{EquationParams, EquationSpec, Family};
pub use error::{Error, ErrorClass, Result};
pub use field::{ComplexField, Quadrature};
pub use grid::{Boundary, Grid1D};
pub use laplacian::LaplacianStencil;
pub use potential::{EmPotentials, Potential, ScalarProfile, VectorProfile};

pub use num_complex::Complex64;
