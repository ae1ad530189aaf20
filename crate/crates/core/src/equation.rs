use std::fmt;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::potential::{EmPotentials, Potential};

/// The equation families handled by the laboratory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `[-hbar^2/(2m) d2 + V] psi = E psi`.
    SchrodingerStationary,
    /// `i hbar psi_t = [-hbar^2/(2m) d2 + V] psi`.
    SchrodingerTD,
    /// `d2 psi - 2m(E - V)/E^2 psi_tt = 0`, with `E` a fixed number.
    NewTD,
    /// `[E0^2 - c^2 hbar^2 d2] psi = E^2 psi`.
    RelStationary,
    /// `d2 psi - (E^2 - E0^2)/(E^2 c^2) psi_tt = 0`.
    RelNewTD,
    /// `d2 psi - (m0 c/hbar)^2 psi - psi_tt / c^2 = 0`.
    KleinGordon,
    /// Stationary charged-particle equation with c-number momentum.
    EmStationaryP,
    /// Time-dependent charged-particle equation with c-number momentum.
    EmTimeDepP,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::SchrodingerStationary,
        Family::SchrodingerTD,
        Family::NewTD,
        Family::RelStationary,
        Family::RelNewTD,
        Family::KleinGordon,
        Family::EmStationaryP,
        Family::EmTimeDepP,
    ];

    pub fn is_time_dependent(self) -> bool {
        matches!(
            self,
            Family::SchrodingerTD
                | Family::NewTD
                | Family::RelNewTD
                | Family::KleinGordon
                | Family::EmTimeDepP
        )
    }

    /// Families that are second order in time.
    pub fn is_second_order(self) -> bool {
        self.is_time_dependent() && self != Family::SchrodingerTD
    }

    pub fn requires_energy(self) -> bool {
        matches!(
            self,
            Family::NewTD | Family::RelNewTD | Family::EmStationaryP | Family::EmTimeDepP
        )
    }

    pub fn is_electromagnetic(self) -> bool {
        matches!(self, Family::EmStationaryP | Family::EmTimeDepP)
    }

    pub fn uses_potential(self) -> bool {
        matches!(
            self,
            Family::SchrodingerStationary | Family::SchrodingerTD | Family::NewTD
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::SchrodingerStationary => "schrodinger_stationary",
            Family::SchrodingerTD => "schrodinger_td",
            Family::NewTD => "new_td",
            Family::RelStationary => "rel_stationary",
            Family::RelNewTD => "rel_new_td",
            Family::KleinGordon => "klein_gordon",
            Family::EmStationaryP => "em_stationary_p",
            Family::EmTimeDepP => "em_time_dep_p",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-family parameters. Unused fields are ignored by families that do not read them.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationParams {
    /// Total energy, a plain number rather than an operator.
    pub energy: Option<f64>,
    pub potential: Potential,
    pub em: EmPotentials,
    /// Kinetic momentum, treated as a c-number in the charged-particle families.
    pub momentum: [f64; 3],
}

impl Default for EquationParams {
    fn default() -> Self {
        Self {
            energy: None,
            potential: Potential::Free,
            em: EmPotentials::zero(),
            momentum: [0.0; 3],
        }
    }
}

/// A validated equation: family, parameters and unit system.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationSpec {
    family: Family,
    params: EquationParams,
    constants: PhysicalConstants,
}

impl EquationSpec {
    pub fn new(family: Family, params: EquationParams, constants: PhysicalConstants) -> Result<Self> {
        params.potential.validate()?;
        params.em.validate()?;
        if params.momentum.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("momentum", "must be finite"));
        }
        if let Some(e) = params.energy {
            if !e.is_finite() {
                return Err(Error::invalid("energy", "must be finite"));
            }
        }
        let energy = if family.requires_energy() {
            params.energy.ok_or_else(|| {
                Error::invalid("energy", format!("family {family} requires a total energy E"))
            })?
        } else {
            params.energy.unwrap_or(0.0)
        };
        let e0 = constants.rest_energy();
        match family {
            Family::NewTD if energy == 0.0 => {
                return Err(Error::invalid("energy", "E must be nonzero (it divides psi_tt)"));
            }
            Family::RelNewTD if energy <= e0 => {
                return Err(Error::EllipticRegime(format!(
                    "E = {energy} must exceed the rest energy E0 = {e0} for wave character"
                )));
            }
            Family::EmTimeDepP => {
                let charge = constants.e();
                if params
                    .em
                    .scalar_values()
                    .iter()
                    .any(|phi| energy - charge * phi == 0.0)
                {
                    return Err(Error::invalid("energy", "E - e*Phi vanishes at a sample point"));
                }
            }
            _ => {}
        }
        Ok(Self {
            family,
            params,
            constants,
        })
    }

    pub fn schrodinger_stationary(constants: PhysicalConstants, potential: Potential) -> Result<Self> {
        Self::new(
            Family::SchrodingerStationary,
            EquationParams {
                potential,
                ..Default::default()
            },
            constants,
        )
    }

    pub fn schrodinger_td(constants: PhysicalConstants, potential: Potential) -> Result<Self> {
        Self::new(
            Family::SchrodingerTD,
            EquationParams {
                potential,
                ..Default::default()
            },
            constants,
        )
    }

    pub fn new_td(constants: PhysicalConstants, potential: Potential, energy: f64) -> Result<Self> {
        Self::new(
            Family::NewTD,
            EquationParams {
                potential,
                energy: Some(energy),
                ..Default::default()
            },
            constants,
        )
    }

    pub fn rel_stationary(constants: PhysicalConstants) -> Result<Self> {
        Self::new(Family::RelStationary, EquationParams::default(), constants)
    }

    pub fn rel_new_td(constants: PhysicalConstants, energy: f64) -> Result<Self> {
        Self::new(
            Family::RelNewTD,
            EquationParams {
                energy: Some(energy),
                ..Default::default()
            },
            constants,
        )
    }

    pub fn klein_gordon(constants: PhysicalConstants) -> Result<Self> {
        Self::new(Family::KleinGordon, EquationParams::default(), constants)
    }

    pub fn em_stationary(
        constants: PhysicalConstants,
        energy: f64,
        em: EmPotentials,
        momentum: [f64; 3],
    ) -> Result<Self> {
        Self::new(
            Family::EmStationaryP,
            EquationParams {
                energy: Some(energy),
                em,
                momentum,
                ..Default::default()
            },
            constants,
        )
    }

    pub fn em_time_dependent(
        constants: PhysicalConstants,
        energy: f64,
        em: EmPotentials,
        momentum: [f64; 3],
    ) -> Result<Self> {
        Self::new(
            Family::EmTimeDepP,
            EquationParams {
                energy: Some(energy),
                em,
                momentum,
                ..Default::default()
            },
            constants,
        )
    }

    /// Same equation with the energy parameter replaced (revalidated).
    pub fn with_energy(&self, energy: f64) -> Result<Self> {
        let mut params = self.params.clone();
        params.energy = Some(energy);
        Self::new(self.family, params, self.constants)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &EquationParams {
        &self.params
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn energy(&self) -> Option<f64> {
        self.params.energy
    }

    pub(crate) fn require_energy(&self) -> Result<f64> {
        self.params.energy.ok_or_else(|| {
            Error::invalid("energy", format!("{} needs an energy here", self.family))
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.params.potential
    }

    pub fn em(&self) -> &EmPotentials {
        &self.params.em
    }

    pub fn momentum(&self) -> [f64; 3] {
        self.params.momentum
    }

    pub(crate) fn expect_family(&self, allowed: &[Family]) -> Result<()> {
        if allowed.contains(&self.family) {
            Ok(())
        } else {
            Err(Error::invalid(
                "family",
                format!("{} is not accepted here", self.family),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn new_td_rejects_zero_energy() {
        assert!(EquationSpec::new_td(k(), Potential::Free, 0.0).is_err());
        assert!(EquationSpec::new_td(k(), Potential::Free, 0.5).is_ok());
    }

    #[test]
    fn rel_new_td_flags_sub_rest_energy() {
        assert!(matches!(
            EquationSpec::rel_new_td(k(), 1.0),
            Err(Error::EllipticRegime(_))
        ));
        assert!(matches!(
            EquationSpec::rel_new_td(k(), 0.3),
            Err(Error::EllipticRegime(_))
        ));
        assert!(EquationSpec::rel_new_td(k(), 1.5).is_ok());
    }

    #[test]
    fn em_time_dependent_rejects_vanishing_denominator() {
        let em = EmPotentials::uniform([0.0; 3], 2.0);
        assert!(EquationSpec::em_time_dependent(k(), 2.0, em.clone(), [1.0, 0.0, 0.0]).is_err());
        assert!(EquationSpec::em_time_dependent(k(), 3.0, em, [1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn energy_required_where_needed() {
        for family in Family::ALL {
            let res = EquationSpec::new(family, EquationParams::default(), k());
            assert_eq!(res.is_err(), family.requires_energy(), "{family}");
        }
    }

    #[test]
    fn names_roundtrip() {
        for family in Family::ALL {
            assert_eq!(Family::from_name(family.name()), Some(family));
        }
    }
}
