//! Relativistic charged-particle kinematics: Lagrangian, canonical momentum,
//! velocity and Lorentz factor from the canonical momentum, total energy, and
//! the `gamma * L` combination that plays the role of a refractive index in
//! the charged-particle wave equations.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm_sqr(a: Vec3) -> f64 {
    dot(a, a)
}

/// Field values at the particle's location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldContext {
    pub vector_potential: Vec3,
    pub scalar_potential: f64,
}

impl FieldContext {
    pub fn new(vector_potential: Vec3, scalar_potential: f64) -> Self {
        Self {
            vector_potential,
            scalar_potential,
        }
    }

    pub fn free() -> Self {
        Self::new([0.0; 3], 0.0)
    }
}

/// A particle specified either by its velocity or by its canonical momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub constants: PhysicalConstants,
    pub field: FieldContext,
    pub kinematic: Kinematic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kinematic {
    Velocity(Vec3),
    CanonicalMomentum(Vec3),
}

impl ParticleState {
    pub fn with_velocity(constants: PhysicalConstants, field: FieldContext, u: Vec3) -> Result<Self> {
        let speed = norm_sqr(u).sqrt();
        if !(speed < constants.c()) {
            return Err(Error::Superluminal {
                speed,
                c: constants.c(),
            });
        }
        Ok(Self {
            constants,
            field,
            kinematic: Kinematic::Velocity(u),
        })
    }

    pub fn with_momentum(constants: PhysicalConstants, field: FieldContext, p_canonical: Vec3) -> Self {
        Self {
            constants,
            field,
            kinematic: Kinematic::CanonicalMomentum(p_canonical),
        }
    }

    /// Velocity, derived from the canonical momentum when necessary.
    pub fn velocity(&self) -> Vec3 {
        match self.kinematic {
            Kinematic::Velocity(u) => u,
            Kinematic::CanonicalMomentum(_) => velocity_from_momentum(self),
        }
    }

    /// Canonical momentum, derived from the velocity when necessary.
    pub fn canonical(&self) -> Vec3 {
        match self.kinematic {
            Kinematic::CanonicalMomentum(p) => p,
            Kinematic::Velocity(u) => canonical_from_velocity(&self.constants, &self.field, u),
        }
    }

    /// Kinetic momentum `P - (e/c) A`.
    pub fn kinetic_momentum(&self) -> Vec3 {
        let p = self.canonical();
        let a = self.field.vector_potential;
        let s = self.constants.e() / self.constants.c();
        [p[0] - s * a[0], p[1] - s * a[1], p[2] - s * a[2]]
    }
}

fn lorentz_factor(c: f64, u: Vec3) -> f64 {
    1.0 / (1.0 - norm_sqr(u) / (c * c)).sqrt()
}

fn canonical_from_velocity(k: &PhysicalConstants, field: &FieldContext, u: Vec3) -> Vec3 {
    let g = lorentz_factor(k.c(), u);
    let s = k.e() / k.c();
    let a = field.vector_potential;
    [
        g * k.m0() * u[0] + s * a[0],
        g * k.m0() * u[1] + s * a[1],
        g * k.m0() * u[2] + s * a[2],
    ]
}

fn require_velocity(state: &ParticleState) -> Result<Vec3> {
    let u = state.velocity();
    let speed = norm_sqr(u).sqrt();
    if speed < state.constants.c() {
        Ok(u)
    } else {
        Err(Error::Superluminal {
            speed,
            c: state.constants.c(),
        })
    }
}

/// `L = -m0 c^2 / gamma + (e/c) u.A - e Phi`.
pub fn lagrangian(state: &ParticleState) -> Result<f64> {
    let u = require_velocity(state)?;
    let k = &state.constants;
    let g = lorentz_factor(k.c(), u);
    Ok(-k.rest_energy() / g + k.e() / k.c() * dot(u, state.field.vector_potential)
        - k.e() * state.field.scalar_potential)
}

/// `P = gamma m0 u + (e/c) A`.
pub fn canonical_momentum(state: &ParticleState) -> Result<Vec3> {
    let u = require_velocity(state)?;
    Ok(canonical_from_velocity(&state.constants, &state.field, u))
}

/// `u = (c P - e A) / sqrt((P - e A / c)^2 + m0^2 c^2)`; always subluminal.
pub fn velocity_from_momentum(state: &ParticleState) -> Vec3 {
    let k = &state.constants;
    let p = state.kinetic_momentum();
    let denom = (norm_sqr(p) + k.m0() * k.m0() * k.c() * k.c()).sqrt();
    let c = k.c();
    [c * p[0] / denom, c * p[1] / denom, c * p[2] / denom]
}

/// `gamma = sqrt((P - e A / c)^2 + m0^2 c^2) / (m0 c)`.
pub fn gamma_from_momentum(state: &ParticleState) -> f64 {
    let k = &state.constants;
    let p = state.kinetic_momentum();
    let mc = k.m0() * k.c();
    (norm_sqr(p) + mc * mc).sqrt() / mc
}

/// `E = sqrt((c P - e A)^2 + m0^2 c^4) + e Phi`.
pub fn total_energy(state: &ParticleState) -> f64 {
    let k = &state.constants;
    let p = state.kinetic_momentum();
    let c = k.c();
    let e0 = k.rest_energy();
    (c * c * norm_sqr(p) + e0 * e0).sqrt() + k.e() * state.field.scalar_potential
}

/// `gamma L = -E0 + (e c / E0) p.A - ((E - e Phi) / E0) e Phi` with kinetic
/// momentum `p` and an independently supplied total energy `E`.
pub fn gamma_l_value(k: &PhysicalConstants, p: Vec3, a: Vec3, phi: f64, energy: f64) -> f64 {
    let e0 = k.rest_energy();
    let q = k.e();
    -e0 + q * k.c() / e0 * dot(p, a) - (energy - q * phi) / e0 * q * phi
}

/// [`gamma_l_value`] for a particle state; the kinetic momentum is derived from the state.
pub fn gamma_l(state: &ParticleState, energy: f64) -> f64 {
    gamma_l_value(
        &state.constants,
        state.kinetic_momentum(),
        state.field.vector_potential,
        state.field.scalar_potential,
        energy,
    )
}

/// Legendre transform `u.P - L`, which equals the total energy.
pub fn legendre_energy(state: &ParticleState) -> Result<f64> {
    let u = require_velocity(state)?;
    Ok(dot(u, canonical_momentum(state)?) - lagrangian(state)?)
}
