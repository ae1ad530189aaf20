//! Scenario files: TOML documents describing one run.
//!
//! Parsing rejects unknown keys. Building the numerical objects happens in
//! the accessor methods on [`Scenario`], which attach the offending key to every error.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use wavelab_core::evolution::{EllipticPolicy, StepperConfig};
use wavelab_core::stationary::{solve_relativistic_stationary, solve_schrodinger_stationary, SpectrumResult};
use wavelab_core::{
    Boundary, EmPotentials, EquationParams, EquationSpec, Family, Grid1D, PhysicalConstants, Potential,
};

use crate::error::{CliError, CliResult, CoreContext};
use crate::output::Provenance;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub name: String,
    pub seed: Option<u64>,
    pub constants: Option<RawConstants>,
    pub grid: Option<RawGrid>,
    pub equation: Option<RawEquation>,
    pub eigensolve: Option<RawEigensolve>,
    pub initial: Option<RawInitial>,
    pub stepper: Option<RawStepper>,
    #[serde(default)]
    pub outputs: RawOutputs,
    pub dispersion: Option<RawDispersion>,
    pub residual: Option<RawResidual>,
    pub calibrate: Option<RawCalibrate>,
    pub kinematics: Option<RawKinematics>,
    pub compare: Option<RawCompare>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConstants {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub m0: f64,
    #[serde(default = "one")]
    pub e: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub boundary: RawBoundary,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RawBoundary {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEquation {
    pub family: String,
    pub energy: Option<RawEnergy>,
    #[serde(default)]
    pub momentum: Option<[f64; 3]>,
    pub potential: Option<RawPotential>,
    pub em: Option<RawEm>,
}

/// Energy given directly, as the eigenvalue of a stationary state of the
/// matching stationary problem, or as `"mass_shell"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawEnergy {
    Value(f64),
    State { state: usize },
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawPotential {
    Free,
    InfiniteWell,
    Harmonic { k_spring: f64 },
    Step { v0: f64, x_step: f64 },
    Barrier { v0: f64, x_left: f64, x_right: f64 },
    Tabulated { values: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEm {
    #[serde(default)]
    pub vector_potential: [f64; 3],
    #[serde(default)]
    pub scalar_potential: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEigensolve {
    pub n_states: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawInitial {
    Gaussian {
        x0: f64,
        sigma: f64,
        #[serde(default)]
        k0: f64,
        #[serde(default)]
        velocity: RawVelocity,
    },
    Eigenstates {
        states: Vec<usize>,
        weights: Option<Vec<f64>>,
        #[serde(default)]
        velocity: RawVelocity,
    },
    PlaneWave {
        k: f64,
        #[serde(default)]
        velocity: RawVelocity,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawVelocity {
    #[default]
    Zero,
    Stationary { omega: Option<f64> },
    /// Right-moving profile `psi_t = -speed * psi_x`.
    Transport { speed: f64 },
    /// Each Fourier mode starts on its non-negative-frequency branch
    /// (periodic grids only).
    PositiveFrequency,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStepper {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub elliptic_policy: RawEllipticPolicy,
}

fn default_safety() -> f64 {
    0.9
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawEllipticPolicy {
    #[default]
    Reject,
    Clamp,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutputs {
    #[serde(default = "yes")]
    pub snapshots: bool,
    #[serde(default = "yes")]
    pub packet_stats: bool,
    /// Number of stationary states to project onto; zero disables populations.
    #[serde(default)]
    pub population_states: usize,
    /// Write eigenvectors alongside the spectrum.
    #[serde(default = "yes")]
    pub eigenvectors: bool,
}

impl Default for RawOutputs {
    fn default() -> Self {
        Self {
            snapshots: true,
            packet_stats: true,
            population_states: 0,
            eigenvectors: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDispersion {
    pub k: Option<Vec<f64>>,
    pub random: Option<RawRandomK>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRandomK {
    pub count: usize,
    pub k_min: f64,
    pub k_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawResidual {
    pub candidate: RawCandidate,
    #[serde(default)]
    pub state: usize,
    pub times: Option<Vec<f64>>,
    pub k: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RawCandidate {
    Separable,
    PlaneWave,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCalibrate {
    pub families: Option<Vec<String>>,
    /// Momentum magnitude of the calibrating free particle.
    pub p: f64,
    #[serde(default)]
    pub vector_potential: [f64; 3],
    #[serde(default)]
    pub scalar_potential: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawKinematics {
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Largest sampled speed as a fraction of `c`.
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
    #[serde(default = "one")]
    pub max_vector_potential: f64,
    #[serde(default = "one")]
    pub max_scalar_potential: f64,
}

fn default_samples() -> usize {
    10_000
}

fn default_max_speed() -> f64 {
    0.99
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCompare {
    pub a: PathBuf,
    pub b: PathBuf,
    #[serde(default)]
    pub population_states: usize,
}

/// A parsed scenario with its provenance.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub raw: RawScenario,
    pub provenance: Provenance,
    /// Directory of the scenario file; relative paths resolve against it.
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&bytes, base)
    }

    pub fn parse(bytes: &[u8], base_dir: PathBuf) -> CliResult<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| CliError::validation("<file>", format!("not UTF-8: {e}")))?;
        let raw: RawScenario = toml::from_str(text).map_err(|e| {
            let key = toml_error_key(&e, text).unwrap_or_else(|| "<file>".to_string());
            CliError::validation(key, e.message().to_string())
        })?;
        validate_name(&raw.name)?;
        let provenance = Provenance::new(&raw.name, bytes);
        Ok(Self {
            raw,
            provenance,
            base_dir,
        })
    }

    pub fn name(&self) -> &str {
        &self.raw.name
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, key: &str) -> CliResult<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| CliError::validation(key, "section is required for this command"))
    }

    pub fn constants(&self) -> CliResult<PhysicalConstants> {
        match &self.raw.constants {
            None => Ok(PhysicalConstants::natural()),
            Some(c) => PhysicalConstants::new(c.hbar, c.c, c.m0, c.e).at("constants"),
        }
    }

    pub fn grid(&self) -> CliResult<Grid1D> {
        let g = self.section(&self.raw.grid, "grid")?;
        let boundary = match g.boundary {
            RawBoundary::Dirichlet => Boundary::DirichletZero,
            RawBoundary::Periodic => Boundary::Periodic,
        };
        Grid1D::new(g.x_min, g.x_max, g.n, boundary).at("grid")
    }

    pub fn family(&self) -> CliResult<Family> {
        let eq = self.section(&self.raw.equation, "equation")?;
        Family::from_name(&eq.family).ok_or_else(|| {
            let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
            CliError::validation(
                "equation.family",
                format!("unknown family `{}`; expected one of {}", eq.family, names.join(", ")),
            )
        })
    }

    fn potential(&self, grid: Option<&Grid1D>) -> CliResult<Potential> {
        let eq = self.section(&self.raw.equation, "equation")?;
        let p = match &eq.potential {
            None => Potential::Free,
            Some(RawPotential::Free) => Potential::Free,
            Some(RawPotential::InfiniteWell) => Potential::InfiniteWell,
            Some(RawPotential::Harmonic { k_spring }) => Potential::Harmonic { k_spring: *k_spring },
            Some(RawPotential::Step { v0, x_step }) => Potential::Step {
                v0: *v0,
                x_step: *x_step,
            },
            Some(RawPotential::Barrier { v0, x_left, x_right }) => Potential::Barrier {
                v0: *v0,
                x_left: *x_left,
                x_right: *x_right,
            },
            Some(RawPotential::Tabulated { values }) => Potential::Tabulated(values.clone()),
        };
        p.validate().at("equation.potential")?;
        if let Some(grid) = grid {
            p.sample(grid).at("equation.potential")?;
        }
        Ok(p)
    }

    /// Equation specification with the energy resolved. Energies given by a
    /// state index require solving the matching stationary problem on the
    /// scenario grid.
    pub fn equation(&self) -> CliResult<EquationSpec> {
        let eq = self.section(&self.raw.equation, "equation")?;
        let family = self.family()?;
        let constants = self.constants()?;
        let grid = if self.raw.grid.is_some() {
            Some(self.grid()?)
        } else {
            None
        };
        let potential = self.potential(grid.as_ref())?;
        if eq.potential.is_some() && !family.uses_potential() {
            return Err(CliError::validation(
                "equation.potential",
                format!("family {family} does not take a scalar potential"),
            ));
        }
        let em = match &eq.em {
            Some(em) => EmPotentials::uniform(em.vector_potential, em.scalar_potential),
            None => EmPotentials::zero(),
        };
        if eq.em.is_some() && !family.is_electromagnetic() {
            return Err(CliError::validation(
                "equation.em",
                format!("family {family} does not take electromagnetic potentials"),
            ));
        }
        let momentum = eq.momentum.unwrap_or([0.0; 3]);
        if eq.momentum.is_some() && !family.is_electromagnetic() {
            return Err(CliError::validation(
                "equation.momentum",
                format!("family {family} does not take a momentum"),
            ));
        }
        let energy = match &eq.energy {
            None => None,
            Some(RawEnergy::Value(v)) => Some(*v),
            Some(RawEnergy::State { state }) => {
                let grid = grid.ok_or_else(|| {
                    CliError::validation("equation.energy", "a state energy needs a [grid] section")
                })?;
                Some(state_energy(family, constants, &potential, &grid, *state)?)
            }
            Some(RawEnergy::Named(name)) if name == "mass_shell" => {
                if !family.is_electromagnetic() {
                    return Err(CliError::validation(
                        "equation.energy",
                        "\"mass_shell\" applies to the electromagnetic families only",
                    ));
                }
                // the equation's momentum is the kinetic one
                let (_, phi) = em.as_uniform().expect("scenario potentials are uniform");
                let p2: f64 = momentum.iter().map(|x| x * x).sum();
                let e0 = constants.rest_energy();
                Some((constants.c().powi(2) * p2 + e0 * e0).sqrt() + constants.e() * phi)
            }
            Some(RawEnergy::Named(other)) => {
                return Err(CliError::validation(
                    "equation.energy",
                    format!("expected a number, {{ state = n }} or \"mass_shell\", got \"{other}\""),
                ))
            }
        };
        let params = EquationParams {
            energy,
            potential,
            em,
            momentum,
        };
        EquationSpec::new(family, params, constants).at("equation")
    }

    pub fn stepper(&self) -> CliResult<StepperConfig> {
        let s = self.section(&self.raw.stepper, "stepper")?;
        let config = StepperConfig {
            dt: s.dt,
            t_end: s.t_end,
            cfl_safety: s.cfl_safety,
            snapshot_stride: s.snapshot_stride,
            elliptic_policy: match s.elliptic_policy {
                RawEllipticPolicy::Reject => EllipticPolicy::Reject,
                RawEllipticPolicy::Clamp => EllipticPolicy::Clamp,
            },
        };
        config.validate().at("stepper")?;
        Ok(config)
    }
}

fn validate_name(name: &str) -> CliResult<()> {
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(CliError::validation(
            "name",
            "must be non-empty and contain only ASCII letters, digits, '_' or '-'",
        ));
    }
    Ok(())
}

/// Best-effort extraction of the dotted key path from a TOML error, using the
/// message for unknown/missing fields and the error span otherwise.
fn toml_error_key(err: &toml::de::Error, text: &str) -> Option<String> {
    let msg = err.message();
    for marker in ["unknown field `", "missing field `"] {
        if let Some(start) = msg.find(marker) {
            let rest = &msg[start + marker.len()..];
            return rest.find('`').map(|end| rest[..end].to_string());
        }
    }
    let at = err.span()?.start.min(text.len());
    let line_start = text[..at].rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    let key = line.split_once('=').map(|(k, _)| k.trim().trim_matches('"'))?;
    let section = text[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('[') && l.ends_with(']'))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim());
    Some(match section {
        Some(sec) => format!("{sec}.{key}"),
        None => key.to_string(),
    })
}

/// The stationary problem whose states seed a time-dependent family.
pub fn stationary_basis(
    spec: &EquationSpec,
    grid: &Grid1D,
    n_states: usize,
    key: &str,
) -> CliResult<SpectrumResult> {
    match spec.family() {
        Family::SchrodingerStationary | Family::SchrodingerTD | Family::NewTD => {
            // the fixed-energy family shares the Schrödinger basis of its potential
            let basis_spec = EquationSpec::schrodinger_stationary(*spec.constants(), spec.potential().clone()).at(key)?;
            solve_schrodinger_stationary(&basis_spec, grid, n_states).at(key)
        }
        Family::RelStationary | Family::RelNewTD | Family::KleinGordon => {
            let basis_spec = EquationSpec::rel_stationary(*spec.constants()).at(key)?;
            solve_relativistic_stationary(&basis_spec, grid, n_states).at(key)
        }
        other => Err(CliError::validation(
            key,
            format!("family {other} has no stationary basis"),
        )),
    }
}

fn state_energy(
    family: Family,
    constants: PhysicalConstants,
    potential: &Potential,
    grid: &Grid1D,
    state: usize,
) -> CliResult<f64> {
    let key = "equation.energy";
    let spectrum = match family {
        Family::SchrodingerStationary | Family::SchrodingerTD | Family::NewTD => {
            let spec = EquationSpec::schrodinger_stationary(constants, potential.clone()).at(key)?;
            solve_schrodinger_stationary(&spec, grid, state + 1).at(key)?
        }
        Family::RelStationary | Family::RelNewTD | Family::KleinGordon => {
            let spec = EquationSpec::rel_stationary(constants).at(key)?;
            solve_relativistic_stationary(&spec, grid, state + 1).at(key)?
        }
        other => {
            return Err(CliError::validation(
                key,
                format!("family {other} has no stationary states to take an energy from"),
            ))
        }
    };
    Ok(spectrum.energies()[state])
}
