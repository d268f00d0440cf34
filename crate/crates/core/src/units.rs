//! Unit systems at the I/O boundary.
//!
//! Internally everything is in natural units `ħ = c = ε₀ = 1` with the Bohr
//! radius as length unit, so energies and frequencies are measured in
//! `ħc/a₀` and `c/a₀`, and the elementary charge is `√(4πα)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOHR_RADIUS_M: f64 = 5.291_772_109_03e-11;
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
pub const HBAR_JS: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `E_h = α ħ c / a₀`
pub fn hartree_j() -> f64 {
    FINE_STRUCTURE * HBAR_JS * SPEED_OF_LIGHT / BOHR_RADIUS_M
}

/// Elementary charge in natural units.
pub fn charge_natural() -> f64 {
    (4.0 * std::f64::consts::PI * FINE_STRUCTURE).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    Si,
    #[serde(rename = "au")]
    Atomic,
    #[default]
    Natural,
}

impl FromStr for UnitSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "si" => Ok(UnitSystem::Si),
            "au" | "atomic" => Ok(UnitSystem::Atomic),
            "natural" => Ok(UnitSystem::Natural),
            other => Err(Error::Usage(format!(
                "unknown unit system `{other}` (expected si, au, natural)"
            ))),
        }
    }
}

impl fmt::Display for UnitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitSystem::Si => "si",
            UnitSystem::Atomic => "au",
            UnitSystem::Natural => "natural",
        })
    }
}

impl UnitSystem {
    pub fn length_unit(&self) -> &'static str {
        match self {
            UnitSystem::Si => "m",
            UnitSystem::Atomic | UnitSystem::Natural => "bohr",
        }
    }

    pub fn energy_unit(&self) -> &'static str {
        match self {
            UnitSystem::Si => "J",
            UnitSystem::Atomic => "hartree",
            UnitSystem::Natural => "hbar*c/bohr",
        }
    }

    pub fn frequency_unit(&self) -> &'static str {
        match self {
            UnitSystem::Si => "rad/s",
            UnitSystem::Atomic => "hartree/hbar",
            UnitSystem::Natural => "c/bohr",
        }
    }

    /// Natural units per unit of length in this system.
    fn length_factor(&self) -> f64 {
        match self {
            UnitSystem::Si => 1.0 / BOHR_RADIUS_M,
            UnitSystem::Atomic | UnitSystem::Natural => 1.0,
        }
    }

    fn energy_factor(&self) -> f64 {
        match self {
            UnitSystem::Si => BOHR_RADIUS_M / (HBAR_JS * SPEED_OF_LIGHT),
            UnitSystem::Atomic => FINE_STRUCTURE,
            UnitSystem::Natural => 1.0,
        }
    }

    fn frequency_factor(&self) -> f64 {
        match self {
            UnitSystem::Si => BOHR_RADIUS_M / SPEED_OF_LIGHT,
            UnitSystem::Atomic => FINE_STRUCTURE,
            UnitSystem::Natural => 1.0,
        }
    }

    pub fn length_to_natural(&self, x: f64) -> f64 {
        x * self.length_factor()
    }

    pub fn length_from_natural(&self, x: f64) -> f64 {
        x / self.length_factor()
    }

    pub fn energy_to_natural(&self, e: f64) -> f64 {
        e * self.energy_factor()
    }

    pub fn energy_from_natural(&self, e: f64) -> f64 {
        e / self.energy_factor()
    }

    pub fn frequency_to_natural(&self, w: f64) -> f64 {
        w * self.frequency_factor()
    }

    pub fn frequency_from_natural(&self, w: f64) -> f64 {
        w / self.frequency_factor()
    }
}

/// Frequency in `E_h/ħ` to natural units.
pub fn omega_au_to_natural(w: f64) -> f64 {
    UnitSystem::Atomic.frequency_to_natural(w)
}

/// A multipole moment in `e a₀ⁿ` to natural units.
pub fn moment_au_to_natural(m: f64) -> f64 {
    m * charge_natural()
}
