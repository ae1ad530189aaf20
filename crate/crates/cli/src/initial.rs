//! Initial fields for `evolve` and `compare`.

use std::f64::consts::TAU;

use rustfft::FftPlanner;
use wavelab_core::analytic::dispersion;
use wavelab_core::evolution::{InitialData, VelocityInit};
use wavelab_core::{Complex64, ComplexField, EquationSpec, Family, Grid1D};

use crate::error::{CliError, CliResult, CoreContext};
use crate::scenario::{stationary_basis, RawInitial, RawVelocity};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Signed distance `x - x0`, taken as the nearest image on periodic grids.
fn offset(grid: &Grid1D, x: f64, x0: f64) -> f64 {
    let d = x - x0;
    if grid.is_periodic() {
        let l = grid.length();
        d - l * (d / l).round()
    } else {
        d
    }
}

fn field(grid: &Grid1D, f: impl Fn(f64) -> Complex64) -> CliResult<ComplexField> {
    let out = if grid.is_periodic() {
        ComplexField::from_fn(*grid, f)
    } else {
        ComplexField::from_fn_bc(*grid, f)
    };
    out.at("initial")
}

fn unit(psi: ComplexField) -> CliResult<(ComplexField, f64)> {
    let n = psi.norm();
    if !(n > 0.0) {
        return Err(CliError::validation("initial", "initial field vanishes on the grid"));
    }
    Ok((psi.normalized(), 1.0 / n))
}

/// `psi_t = -i omega(k) psi` mode by mode, with `k` replaced by the wavenumber
/// the three-point Laplacian actually sees.
fn positive_frequency(spec: &EquationSpec, psi: &ComplexField) -> CliResult<ComplexField> {
    let grid = *psi.grid();
    if !grid.is_periodic() {
        return Err(CliError::validation(
            "initial.velocity",
            "positive_frequency needs a periodic grid",
        ));
    }
    let n = grid.len();
    let dx = grid.dx();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = psi.values().to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (j, z) in buf.iter_mut().enumerate() {
        let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        let k = TAU * m / grid.length();
        let k_eff = 2.0 / dx * (0.5 * k * dx).sin();
        let omega = dispersion(spec, k_eff).at("initial.velocity")?.omega;
        *z *= -I * omega / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    ComplexField::new(grid, buf).at("initial.velocity")
}

pub fn build(raw: &RawInitial, spec: &EquationSpec, grid: &Grid1D) -> CliResult<InitialData> {
    let family = spec.family();
    let hbar = spec.constants().hbar();
    let velocity = match raw {
        RawInitial::Gaussian { velocity, .. }
        | RawInitial::Eigenstates { velocity, .. }
        | RawInitial::PlaneWave { velocity, .. } => velocity,
    };
    if !family.is_second_order() && !matches!(velocity, RawVelocity::Zero) {
        return Err(CliError::validation(
            "initial.velocity",
            format!("family {family} is first order in time and takes no initial velocity"),
        ));
    }
    let spec_frequency = || -> Option<f64> {
        match family {
            Family::NewTD | Family::RelNewTD => spec.energy().map(|e| e / hbar),
            _ => None,
        }
    };
    let need_omega = || {
        CliError::validation(
            "initial.velocity.omega",
            format!("required for family {family} with this initial state"),
        )
    };

    match raw {
        RawInitial::Gaussian { x0, sigma, k0, .. } => {
            if !(*sigma > 0.0 && sigma.is_finite()) {
                return Err(CliError::validation("initial.sigma", "must be positive"));
            }
            if !(x0.is_finite() && *x0 >= grid.x_min() && *x0 <= grid.x_max()) {
                return Err(CliError::validation("initial.x0", "must lie inside the grid"));
            }
            let (s, k0, x0) = (*sigma, *k0, *x0);
            let g = |x: f64| {
                let d = offset(grid, x, x0);
                Complex64::from_polar((-d * d / (4.0 * s * s)).exp(), k0 * d)
            };
            let (psi, scale) = unit(field(grid, g)?)?;
            let v = match velocity {
                RawVelocity::Zero => VelocityInit::Zero,
                RawVelocity::Stationary { omega } => {
                    VelocityInit::Stationary(omega.or_else(spec_frequency).ok_or_else(need_omega)?)
                }
                RawVelocity::Transport { speed } => {
                    let speed = *speed;
                    let dg = field(grid, |x| {
                        let d = offset(grid, x, x0);
                        -speed * scale * g(x) * Complex64::new(-d / (2.0 * s * s), k0)
                    })?;
                    VelocityInit::Explicit(dg)
                }
                RawVelocity::PositiveFrequency => VelocityInit::Explicit(positive_frequency(spec, &psi)?),
            };
            Ok(InitialData::new(psi, v))
        }
        RawInitial::Eigenstates { states, weights, .. } => {
            if states.is_empty() {
                return Err(CliError::validation("initial.states", "must list at least one state"));
            }
            let weights = match weights {
                Some(w) if w.len() != states.len() => {
                    return Err(CliError::validation(
                        "initial.weights",
                        format!("expected {} weights, got {}", states.len(), w.len()),
                    ))
                }
                Some(w) => w.clone(),
                None => vec![1.0; states.len()],
            };
            let n = states.iter().max().unwrap() + 1;
            let basis = stationary_basis(spec, grid, n, "initial.states")?;
            let mut psi = ComplexField::zeros(*grid);
            for (&s, &w) in states.iter().zip(&weights) {
                psi.add_scaled(Complex64::new(w, 0.0), &basis.eigenvectors[s]).at("initial")?;
            }
            let (psi, _) = unit(psi)?;
            let v = match velocity {
                RawVelocity::Zero => VelocityInit::Zero,
                RawVelocity::Stationary { omega } => {
                    let single = (states.len() == 1 && family == Family::KleinGordon)
                        .then(|| basis.energies()[states[0]] / hbar);
                    VelocityInit::Stationary(
                        omega.or_else(spec_frequency).or(single).ok_or_else(need_omega)?,
                    )
                }
                RawVelocity::Transport { .. } => {
                    return Err(CliError::validation(
                        "initial.velocity",
                        "transport velocity needs a gaussian or plane-wave initial state",
                    ))
                }
                RawVelocity::PositiveFrequency => VelocityInit::Explicit(positive_frequency(spec, &psi)?),
            };
            Ok(InitialData::new(psi, v))
        }
        RawInitial::PlaneWave { k, .. } => {
            let k = *k;
            if grid.is_periodic() {
                let turns = k * grid.length() / TAU;
                if (turns - turns.round()).abs() > 1e-9 {
                    return Err(CliError::validation(
                        "initial.k",
                        "must fit an integer number of wavelengths on the periodic domain",
                    ));
                }
            }
            let (psi, _) = unit(field(grid, |x| (I * k * x).exp())?)?;
            let v = match velocity {
                RawVelocity::Zero => VelocityInit::Zero,
                RawVelocity::Stationary { omega } => {
                    let omega = match omega {
                        Some(w) => *w,
                        None => dispersion(spec, k).at("initial.velocity")?.omega,
                    };
                    VelocityInit::Stationary(omega)
                }
                RawVelocity::Transport { speed } => {
                    VelocityInit::Explicit(psi.scaled(-*speed * I * k))
                }
                RawVelocity::PositiveFrequency => VelocityInit::Explicit(positive_frequency(spec, &psi)?),
            };
            Ok(InitialData::new(psi, v))
        }
    }
}
