use crate::error::{Error, Result};

/// The unit system every formula reads from.
///
/// Defaults to natural units (`hbar = c = m0 = e = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    hbar: f64,
    c: f64,
    m0: f64,
    e: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, c: f64, m0: f64, e: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("c", c), ("m0", m0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and strictly positive, got {v}"),
                });
            }
        }
        if !e.is_finite() {
            return Err(Error::invalid("e", "must be finite"));
        }
        Ok(Self { hbar, c, m0, e })
    }

    pub const fn natural() -> Self {
        Self {
            hbar: 1.0,
            c: 1.0,
            m0: 1.0,
            e: 1.0,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    /// Rest energy `m0 c^2`.
    pub fn rest_energy(&self) -> f64 {
        self.m0 * self.c * self.c
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}
