use serde::Serialize;

use crate::error::{Error, Result};
use crate::halfspace_green::PermittivityModel;
use crate::potentials::{Channel, PotentialSettings, QuadMode};
use crate::quadrature::Tolerance;
use crate::units::UnitSystem;

/// Half-space model as given on the command line; Drude–Lorentz
/// frequencies are in the run's unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Epsilon {
        epsilon: f64,
    },
    DrudeLorentz {
        plasma: f64,
        resonance: f64,
        damping: f64,
    },
    PerfectMirror,
}

impl ModelSpec {
    pub fn to_model(&self, units: UnitSystem) -> PermittivityModel {
        match *self {
            ModelSpec::Epsilon { epsilon } => PermittivityModel::Constant(epsilon),
            ModelSpec::DrudeLorentz {
                plasma,
                resonance,
                damping,
            } => PermittivityModel::DrudeLorentz {
                plasma: units.frequency_to_natural(plasma),
                resonance: units.frequency_to_natural(resonance),
                damping: units.frequency_to_natural(damping),
            },
            ModelSpec::PerfectMirror => PermittivityModel::PerfectMirror,
        }
    }

    /// Parses `WP,W0,GAMMA`.
    pub fn parse_drude_lorentz(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Usage(format!("--drude-lorentz expects WP,W0,GAMMA: {e}")))?;
        match parts[..] {
            [plasma, resonance, damping] => Ok(ModelSpec::DrudeLorentz {
                plasma,
                resonance,
                damping,
            }),
            _ => Err(Error::Usage(format!(
                "--drude-lorentz expects three values, got {}",
                parts.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl ZGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.min.is_finite()) {
            return Err(Error::Usage(format!(
                "--zmin must be positive, got {}",
                self.min
            )));
        }
        if !(self.max >= self.min && self.max.is_finite()) {
            return Err(Error::Usage(format!(
                "--zmax must be >= --zmin, got {}",
                self.max
            )));
        }
        if self.points == 0 {
            return Err(Error::Usage("--points must be at least 1".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let t = k as f64 / n;
                if k == self.points - 1 {
                    self.max
                } else if self.log {
                    self.min * (self.max / self.min).powf(t)
                } else {
                    self.min + (self.max - self.min) * t
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub grid: ZGrid,
    pub channels: Vec<Channel>,
    pub tol: f64,
    pub units: UnitSystem,
    pub qq_mode: QuadMode,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.channels.is_empty() {
            return Err(Error::Usage("channel list is empty".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Usage(format!(
                "--tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        self.permittivity().validate()
    }

    pub fn permittivity(&self) -> PermittivityModel {
        self.model.to_model(self.units)
    }

    /// Grid in the run's units and in natural units.
    pub fn z_grid(&self) -> (Vec<f64>, Vec<f64>) {
        let z = self.grid.values();
        let nat = z.iter().map(|&x| self.units.length_to_natural(x)).collect();
        (z, nat)
    }

    /// The inner Green-tensor quadrature stays two orders tighter.
    pub fn settings(&self) -> PotentialSettings {
        PotentialSettings {
            outer: Tolerance::relative(self.tol),
            inner: Tolerance::relative((self.tol * 1e-2).max(1e-14)),
            qq_mode: self.qq_mode,
        }
    }
}

pub fn parse_channels(s: &str) -> Result<Vec<Channel>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let c: Channel = part.parse()?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(Error::Usage("channel list is empty".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints() {
        let g = ZGrid {
            min: 1.0,
            max: 1000.0,
            points: 61,
            log: true,
        };
        let v = g.values();
        assert_eq!(v.len(), 61);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[60], 1000.0);
        assert!((v[20] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn channel_lists() {
        assert_eq!(
            parse_channels("dd,qq,dd").unwrap(),
            vec![Channel::DipoleDipole, Channel::QuadQuad]
        );
        assert!(parse_channels("").is_err());
        assert!(parse_channels("dd,xx").is_err());
    }

    #[test]
    fn drude_lorentz_triplet() {
        assert_eq!(
            ModelSpec::parse_drude_lorentz("1, 0.5,0.1").unwrap(),
            ModelSpec::DrudeLorentz {
                plasma: 1.0,
                resonance: 0.5,
                damping: 0.1
            }
        );
        assert!(ModelSpec::parse_drude_lorentz("1,2").is_err());
    }

    #[test]
    fn invalid_grid_rejected() {
        assert!(ZGrid {
            min: 0.0,
            max: 1.0,
            points: 3,
            log: false
        }
        .validate()
        .is_err());
        assert!(ZGrid {
            min: 2.0,
            max: 1.0,
            points: 3,
            log: false
        }
        .validate()
        .is_err());
    }
}
