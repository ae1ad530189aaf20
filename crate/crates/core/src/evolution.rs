//! Time integration.
//!
//! The Schrödinger equation is advanced with Crank–Nicolson. The families
//! that are second order in time all take the form
//! `kappa(x) psi_tt = L psi - mu^2 psi` and are advanced with the explicit
//! central-difference (leapfrog) scheme, written in its velocity form so the
//! state carries `psi_t`:
//!
//! ```text
//! v'    = v + dt/2 a(psi)
//! psi'  = psi + dt v'
//! v''   = v' + dt/2 a(psi')
//! ```
//!
//! The position sequence is identical to `psi[n+1] = 2 psi[n] - psi[n-1] + dt^2 a[n]`
//! started with `psi[1] = psi[0] + dt v[0] + dt^2/2 a[0]`.

use num_complex::Complex64;

use crate::analytic::em_time_coefficient;
use crate::equation::{EquationSpec, Family};
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid1D;
use crate::laplacian::LaplacianStencil;
use crate::linalg::{FactoredSystem, SymOperator};
use crate::stationary::schrodinger_operator;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Floor applied to the time coefficient under [`EllipticPolicy::Clamp`].
pub const KAPPA_MIN: f64 = 1e-12;

/// What to do where the fixed-energy non-relativistic equation loses its wave
/// character (`V(x) >= E`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EllipticPolicy {
    #[default]
    Reject,
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub snapshot_stride: usize,
    pub elliptic_policy: EllipticPolicy,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            cfl_safety: 0.9,
            snapshot_stride: 1,
            elliptic_policy: EllipticPolicy::Reject,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive and finite"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid("t_end", "must be non-negative and finite"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::invalid("cfl_safety", "must lie in (0, 1]"));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::invalid("snapshot_stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps and the step actually used; the step is shrunk, never
    /// grown, so that an integer number of steps lands on `t_end`.
    pub fn schedule(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// Initial time derivative.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityInit {
    Explicit(ComplexField),
    /// `psi_t = -i omega psi`.
    Stationary(f64),
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub psi0: ComplexField,
    pub psi_dot0: VelocityInit,
}

impl InitialData {
    pub fn new(psi0: ComplexField, psi_dot0: VelocityInit) -> Self {
        Self { psi0, psi_dot0 }
    }

    fn velocity(&self) -> Result<ComplexField> {
        let mut v = match &self.psi_dot0 {
            VelocityInit::Explicit(v) => {
                v.ensure_same_grid(&self.psi0)?;
                v.clone()
            }
            VelocityInit::Stationary(omega) => {
                if !omega.is_finite() {
                    return Err(Error::invalid("psi_dot0", "stationary frequency must be finite"));
                }
                self.psi0.scaled(-I * *omega)
            }
            VelocityInit::Zero => ComplexField::zeros(*self.psi0.grid()),
        };
        v.apply_boundary();
        Ok(v)
    }

    /// State at `t = 0` for the given family.
    pub fn state(&self, family: Family) -> Result<EvolutionState> {
        let mut psi = self.psi0.clone();
        psi.apply_boundary();
        let psi_dot = if family.is_second_order() {
            Some(self.velocity()?)
        } else {
            None
        };
        Ok(EvolutionState {
            psi,
            psi_dot,
            t: 0.0,
            step_index: 0,
        })
    }
}

/// Full state of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub psi: ComplexField,
    /// Present only for families that are second order in time.
    pub psi_dot: Option<ComplexField>,
    pub t: f64,
    pub step_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub norm: f64,
    /// `<psi, H psi>` for Crank–Nicolson runs; the conserved discrete wave
    /// energy for leapfrog runs.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step_index: usize,
    pub t: f64,
    pub psi: ComplexField,
    pub psi_dot: Option<ComplexField>,
    pub diagnostics: Diagnostics,
}

fn active(grid: &Grid1D, v: &[Complex64]) -> Vec<Complex64> {
    grid.active_range().map(|i| v[i]).collect()
}

/// Crank–Nicolson stepper with the left-hand matrix factored once.
pub struct CrankNicolson {
    grid: Grid1D,
    dt: f64,
    hamiltonian: SymOperator,
    alpha: f64,
    lhs: FactoredSystem<Complex64>,
}

impl CrankNicolson {
    pub fn new(spec: &EquationSpec, grid: &Grid1D, dt: f64) -> Result<Self> {
        spec.expect_family(&[Family::SchrodingerTD])?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive and finite"));
        }
        let hamiltonian = schrodinger_operator(spec, grid)?;
        let alpha = dt / (2.0 * spec.constants().hbar());
        let lhs = hamiltonian
            .affine_band(Complex64::new(1.0, 0.0), I * alpha)
            .factor(false)?;
        Ok(Self {
            grid: *grid,
            dt,
            hamiltonian,
            alpha,
            lhs,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, state: &mut EvolutionState) -> Result<()> {
        if state.psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let x = active(&self.grid, state.psi.values());
        let hx = self.hamiltonian.apply(&x);
        let rhs: Vec<Complex64> = x
            .iter()
            .zip(&hx)
            .map(|(a, h)| a - I * self.alpha * h)
            .collect();
        let y = self.lhs.solve(&rhs);
        let values = state.psi.values_mut();
        for (q, i) in self.grid.active_range().enumerate() {
            values[i] = y[q];
        }
        if !state.psi.is_finite() {
            return Err(Error::SingularSystem { pivot: 0 });
        }
        state.t += self.dt;
        state.step_index += 1;
        Ok(())
    }

    /// `<psi, H psi>`.
    pub fn energy(&self, psi: &ComplexField) -> f64 {
        let x = active(&self.grid, psi.values());
        let hx = self.hamiltonian.apply(&x);
        let dx = self.grid.dx();
        x.iter().zip(&hx).map(|(a, h)| (a.conj() * h).re).sum::<f64>() * dx
    }
}

/// One Crank–Nicolson step of the time-dependent Schrödinger equation.
pub fn step_schrodinger_cn(spec: &EquationSpec, state: &EvolutionState, dt: f64) -> Result<EvolutionState> {
    let stepper = CrankNicolson::new(spec, state.psi.grid(), dt)?;
    let mut next = state.clone();
    stepper.step(&mut next)?;
    Ok(next)
}

/// Merges sorted flagged indices into `[x_a, x_b]` interval descriptions.
fn describe_intervals(grid: &Grid1D, flagged: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut start = flagged[0];
    let mut prev = flagged[0];
    for &i in &flagged[1..] {
        if i != prev + 1 {
            parts.push(format!("[{}, {}]", grid.x(start), grid.x(prev)));
            start = i;
        }
        prev = i;
    }
    parts.push(format!("[{}, {}]", grid.x(start), grid.x(prev)));
    parts.join(", ")
}

/// Time coefficient `kappa(x)` on the full grid and the mass term `mu^2`.
pub fn wave_coefficients(
    spec: &EquationSpec,
    grid: &Grid1D,
    policy: EllipticPolicy,
) -> Result<(Vec<f64>, f64)> {
    let k = spec.constants();
    let (hbar, m, c) = (k.hbar(), k.m0(), k.c());
    let e0 = k.rest_energy();
    let n = grid.len();
    match spec.family() {
        Family::NewTD => {
            let e = spec.require_energy()?;
            let v = spec.potential().sample(grid)?;
            let mut kappa: Vec<f64> = v.iter().map(|vi| 2.0 * m * (e - vi) / (e * e)).collect();
            let flagged: Vec<usize> = grid.active_range().filter(|&i| kappa[i] <= 0.0).collect();
            if !flagged.is_empty() {
                match policy {
                    EllipticPolicy::Reject => {
                        return Err(Error::EllipticRegime(format!(
                            "V(x) >= E = {e} on {}",
                            describe_intervals(grid, &flagged)
                        )));
                    }
                    EllipticPolicy::Clamp => {
                        for &i in &flagged {
                            kappa[i] = KAPPA_MIN;
                        }
                    }
                }
            }
            Ok((kappa, 0.0))
        }
        Family::RelNewTD => {
            let e = spec.require_energy()?;
            Ok((vec![(e * e - e0 * e0) / (e * e * c * c); n], 0.0))
        }
        Family::KleinGordon => Ok((vec![1.0 / (c * c); n], (m * c / hbar).powi(2))),
        Family::EmTimeDepP => {
            let e = spec.require_energy()?;
            let (a, phi) = spec.em().as_uniform().ok_or(Error::NonUniformPotential)?;
            let kappa = em_time_coefficient(k, spec.momentum(), a, phi, e);
            if !(kappa > 0.0 && kappa.is_finite()) {
                return Err(Error::EllipticRegime(format!(
                    "time coefficient {kappa} is not positive"
                )));
            }
            Ok((vec![kappa; n], 0.0))
        }
        other => Err(Error::invalid(
            "family",
            format!("{other} is not second order in time"),
        )),
    }
}

/// Explicit central-difference stepper for `kappa psi_tt = L psi - mu^2 psi`.
pub struct Leapfrog {
    grid: Grid1D,
    dt: f64,
    stencil: LaplacianStencil,
    inv_kappa: Vec<f64>,
    kappa: Vec<f64>,
    mu2: f64,
}

impl Leapfrog {
    pub fn new(spec: &EquationSpec, grid: &Grid1D, dt: f64, cfl_safety: f64, policy: EllipticPolicy) -> Result<Self> {
        if !spec.family().is_second_order() {
            return Err(Error::invalid(
                "family",
                format!("{} is not second order in time", spec.family()),
            ));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive and finite"));
        }
        let (kappa, mu2) = wave_coefficients(spec, grid, policy)?;
        let limit = Self::stable_dt(spec, grid, &kappa, mu2, cfl_safety);
        if dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
        Ok(Self {
            grid: *grid,
            dt,
            stencil: LaplacianStencil::new(*grid),
            inv_kappa: kappa.iter().map(|k| 1.0 / k).collect(),
            kappa,
            mu2,
        })
    }

    /// Largest admissible step: `cfl_safety * dx / v_max`, further capped by the
    /// exact leapfrog bound `dt^2 max((4/dx^2 + mu^2)/kappa) < 4`.
    pub fn stable_dt(spec: &EquationSpec, grid: &Grid1D, kappa: &[f64], mu2: f64, cfl_safety: f64) -> f64 {
        let dx = grid.dx();
        let active = grid.active_range();
        // wave speed only over points where the equation is hyperbolic
        let hyperbolic = |i: &usize| spec.family() != Family::NewTD || kappa[*i] > KAPPA_MIN;
        let v_max = active
            .clone()
            .filter(hyperbolic)
            .map(|i| 1.0 / kappa[i].sqrt())
            .fold(0.0, f64::max);
        let cfl = if v_max > 0.0 { cfl_safety * dx / v_max } else { f64::INFINITY };
        let lam = active
            .map(|i| (4.0 / (dx * dx) + mu2) / kappa[i])
            .fold(0.0, f64::max);
        let exact = 2.0 / lam.sqrt() * (1.0 - 1e-12);
        cfl.min(exact)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn acceleration(&self, psi: &[Complex64], out: &mut [Complex64]) {
        self.stencil.apply_into(psi, out);
        for i in self.grid.active_range() {
            out[i] = (out[i] - psi[i] * self.mu2) * self.inv_kappa[i];
        }
    }

    /// Advances by `sign * dt`; the scheme is exactly time-symmetric.
    fn advance(&self, psi: &mut [Complex64], v: &mut [Complex64], dt: f64) {
        let n = psi.len();
        let mut a = vec![Complex64::new(0.0, 0.0); n];
        self.acceleration(psi, &mut a);
        for i in self.grid.active_range() {
            v[i] += 0.5 * dt * a[i];
            psi[i] += dt * v[i];
        }
        self.acceleration(psi, &mut a);
        for i in self.grid.active_range() {
            v[i] += 0.5 * dt * a[i];
        }
    }

    pub fn step(&self, state: &mut EvolutionState) -> Result<()> {
        if state.psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let v = state
            .psi_dot
            .as_mut()
            .ok_or_else(|| Error::invalid("psi_dot", "second-order stepping needs a time derivative"))?;
        if v.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        self.advance(state.psi.values_mut(), v.values_mut(), self.dt);
        if !state.psi.is_finite() {
            let index = state.psi.values().iter().position(|z| !z.is_finite()).unwrap_or(0);
            return Err(Error::NonFinite { index });
        }
        state.t += self.dt;
        state.step_index += 1;
        Ok(())
    }

    /// Discrete energy conserved exactly by the scheme:
    /// `sum kappa |v_half|^2 + Re <psi_next, (-L + mu^2) psi>`, where `v_half` and
    /// `psi_next` are the half-step velocity and next position.
    pub fn energy(&self, psi: &ComplexField, psi_dot: &ComplexField) -> f64 {
        let p = psi.values();
        let n = p.len();
        let mut a = vec![Complex64::new(0.0, 0.0); n];
        self.acceleration(p, &mut a);
        let mut lap = vec![Complex64::new(0.0, 0.0); n];
        self.stencil.apply_into(p, &mut lap);
        let dx = self.grid.dx();
        let mut total = 0.0;
        for i in self.grid.active_range() {
            let vh = psi_dot.values()[i] + 0.5 * self.dt * a[i];
            let next = p[i] + self.dt * vh;
            let ap = -lap[i] + self.mu2 * p[i];
            total += self.kappa[i] * vh.norm_sqr() + (next.conj() * ap).re;
        }
        total * dx
    }
}

/// One central-difference step of a second-order family, rejecting elliptic
/// regions and using the default CFL safety factor.
pub fn step_second_order(spec: &EquationSpec, state: &EvolutionState, dt: f64) -> Result<EvolutionState> {
    let stepper = Leapfrog::new(spec, state.psi.grid(), dt, 1.0, EllipticPolicy::Reject)?;
    let mut next = state.clone();
    stepper.step(&mut next)?;
    Ok(next)
}

enum Engine {
    Cn(CrankNicolson),
    Leapfrog(Leapfrog),
}

impl Engine {
    fn step(&self, state: &mut EvolutionState) -> Result<()> {
        match self {
            Engine::Cn(s) => s.step(state),
            Engine::Leapfrog(s) => s.step(state),
        }
    }

    fn diagnostics(&self, state: &EvolutionState) -> Diagnostics {
        let norm = state.psi.norm();
        let energy = match (self, &state.psi_dot) {
            (Engine::Cn(s), _) => s.energy(&state.psi),
            (Engine::Leapfrog(s), Some(v)) => s.energy(&state.psi, v),
            (Engine::Leapfrog(_), None) => f64::NAN,
        };
        Diagnostics { norm, energy }
    }

    fn snapshot(&self, state: &EvolutionState) -> Snapshot {
        Snapshot {
            step_index: state.step_index,
            t: state.t,
            psi: state.psi.clone(),
            psi_dot: state.psi_dot.clone(),
            diagnostics: self.diagnostics(state),
        }
    }
}

/// Builds the stepper and checks every precondition without stepping.
fn engine(spec: &EquationSpec, grid: &Grid1D, config: &StepperConfig) -> Result<Engine> {
    config.validate()?;
    let (_, dt) = config.schedule();
    if !spec.family().is_time_dependent() {
        return Err(Error::invalid(
            "family",
            format!("{} is stationary", spec.family()),
        ));
    }
    Ok(if spec.family() == Family::SchrodingerTD {
        Engine::Cn(CrankNicolson::new(spec, grid, dt)?)
    } else {
        Engine::Leapfrog(Leapfrog::new(
            spec,
            grid,
            dt,
            config.cfl_safety,
            config.elliptic_policy,
        )?)
    })
}

/// Validates a run without performing it.
pub fn check_run(spec: &EquationSpec, initial: &InitialData, config: &StepperConfig) -> Result<()> {
    engine(spec, initial.psi0.grid(), config).map(|_| ())
}

/// Runs an integration, handing each snapshot to `sink` as it is produced.
/// Snapshots are taken every `snapshot_stride` steps, plus the final step.
pub fn evolve_with<F>(
    spec: &EquationSpec,
    initial: &InitialData,
    config: &StepperConfig,
    mut sink: F,
) -> Result<EvolutionState>
where
    F: FnMut(Snapshot) -> Result<()>,
{
    let grid = *initial.psi0.grid();
    let engine = engine(spec, &grid, config)?;
    let (steps, _) = config.schedule();
    let mut state = initial.state(spec.family())?;
    sink(engine.snapshot(&state))?;
    for n in 1..=steps {
        engine.step(&mut state)?;
        if n % config.snapshot_stride == 0 || n == steps {
            sink(engine.snapshot(&state))?;
        }
    }
    Ok(state)
}

/// Runs an integration and collects the snapshots.
pub fn evolve(spec: &EquationSpec, initial: &InitialData, config: &StepperConfig) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    evolve_with(spec, initial, config, |s| {
        out.push(s);
        Ok(())
    })?;
    Ok(out)
}

/// Steps a second-order family forward `steps` times, reverses the velocity,
/// and steps back; returns the final state.
pub fn round_trip(spec: &EquationSpec, initial: &InitialData, dt: f64, steps: usize) -> Result<EvolutionState> {
    let grid = *initial.psi0.grid();
    let stepper = Leapfrog::new(spec, &grid, dt, 1.0, EllipticPolicy::Reject)?;
    let mut state = initial.state(spec.family())?;
    for _ in 0..steps {
        stepper.step(&mut state)?;
    }
    if let Some(v) = state.psi_dot.as_mut() {
        v.values_mut().iter_mut().for_each(|z| *z = -*z);
    }
    for _ in 0..steps {
        stepper.step(&mut state)?;
    }
    if let Some(v) = state.psi_dot.as_mut() {
        v.values_mut().iter_mut().for_each(|z| *z = -*z);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;
    use crate::grid::Boundary;
    use crate::potential::Potential;
    use crate::stationary::solve_schrodinger_stationary;
    use std::f64::consts::PI;

    fn natural() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn zero_field_stays_zero() {
        let grid = Grid1D::new(0.0, 1.0, 50, Boundary::DirichletZero).unwrap();
        let spec = EquationSpec::schrodinger_td(natural(), Potential::Free).unwrap();
        let init = InitialData::new(ComplexField::zeros(grid), VelocityInit::Zero);
        let s = init.state(Family::SchrodingerTD).unwrap();
        let next = step_schrodinger_cn(&spec, &s, 0.01).unwrap();
        assert!(next.psi.values().iter().all(|z| z.norm() == 0.0));
        assert_eq!(next.step_index, 1);
    }

    #[test]
    fn eigenstate_returns_after_one_period() {
        let grid = Grid1D::new(0.0, PI, 200, Boundary::DirichletZero).unwrap();
        let spec = EquationSpec::schrodinger_td(natural(), Potential::InfiniteWell).unwrap();
        let basis = solve_schrodinger_stationary(&spec, &grid, 1).unwrap();
        let phi = basis.eigenvectors[0].clone();
        let period = 2.0 * PI / basis.eigenvalues[0];
        let config = StepperConfig::new(period / 1000.0, period).with_stride(1000);
        let snaps = evolve(&spec, &InitialData::new(phi.clone(), VelocityInit::Zero), &config).unwrap();
        let last = snaps.last().unwrap();
        let fidelity = phi.inner(&last.psi).unwrap().norm_sqr();
        assert!(fidelity > 1.0 - 1e-6, "fidelity = {fidelity}");
    }

    #[test]
    fn t_end_zero_gives_initial_snapshot() {
        let grid = Grid1D::new(0.0, 1.0, 20, Boundary::Periodic).unwrap();
        let spec = EquationSpec::klein_gordon(natural()).unwrap();
        let psi = ComplexField::from_fn(grid, |x| Complex64::new((2.0 * PI * x).cos(), 0.0)).unwrap();
        let init = InitialData::new(psi.clone(), VelocityInit::Zero);
        let snaps = evolve(&spec, &init, &StepperConfig::new(0.01, 0.0)).unwrap();
        assert_eq!(snaps.len(), 1);
        assert_eq!(snaps[0].psi, psi);
        assert_eq!(snaps[0].t, 0.0);
    }

    #[test]
    fn cfl_violation_reported() {
        let grid = Grid1D::new(0.0, 1.0, 101, Boundary::Periodic).unwrap();
        let spec = EquationSpec::klein_gordon(natural()).unwrap();
        let init = InitialData::new(ComplexField::zeros(grid), VelocityInit::Zero);
        let err = evolve(&spec, &init, &StepperConfig::new(0.05, 1.0)).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }

    #[test]
    fn elliptic_region_named() {
        let grid = Grid1D::new(-5.0, 5.0, 101, Boundary::DirichletZero).unwrap();
        let spec = EquationSpec::new_td(
            natural(),
            Potential::Barrier {
                v0: 2.0,
                x_left: -1.0,
                x_right: 1.0,
            },
            1.0,
        )
        .unwrap();
        let init = InitialData::new(ComplexField::zeros(grid), VelocityInit::Zero);
        let err = evolve(&spec, &init, &StepperConfig::new(0.01, 0.1)).unwrap_err();
        match err {
            Error::EllipticRegime(msg) => assert!(msg.contains("[-1, 1]"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let mut clamp = StepperConfig::new(1e-9, 1e-9);
        clamp.elliptic_policy = EllipticPolicy::Clamp;
        assert!(check_run(&spec, &init, &clamp).is_ok());
        // clamped points force a tiny step through the exact stability bound
        clamp.dt = 0.01;
        clamp.t_end = 0.1;
        assert!(matches!(
            check_run(&spec, &init, &clamp),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn klein_gordon_rest_mode_rotates_uniformly() {
        let grid = Grid1D::new(0.0, 1.0, 16, Boundary::Periodic).unwrap();
        let spec = EquationSpec::klein_gordon(natural()).unwrap();
        let psi = ComplexField::from_fn(grid, |_| Complex64::new(1.0, 0.0)).unwrap();
        let init = InitialData::new(psi, VelocityInit::Stationary(1.0));
        let t_end = 2.0;
        let snaps = evolve(&spec, &init, &StepperConfig::new(1e-3, t_end).with_stride(2000)).unwrap();
        let last = snaps.last().unwrap();
        let expect = (-I * t_end).exp();
        for z in last.psi.values() {
            assert!((z - expect).norm() < 1e-6);
        }
    }

    #[test]
    fn schedule_lands_on_t_end() {
        let c = StepperConfig::new(0.3, 1.0);
        let (n, dt) = c.schedule();
        assert_eq!(n, 4);
        assert!((dt * n as f64 - 1.0).abs() < 1e-15);
        let c = StepperConfig::new(0.25, 1.0);
        assert_eq!(c.schedule(), (4, 0.25));
    }
}
