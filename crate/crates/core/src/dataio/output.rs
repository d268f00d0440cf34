use std::io::{Read, Write};

use serde::Serialize;

use crate::dataio::config::{ModelSpec, RunConfig, ZGrid};
use crate::error::{Error, Result};
use crate::potentials::{Channel, PotentialSet};
use crate::units::{self, UnitSystem};

pub const HEADER: [&str; 11] = [
    "z",
    "U_dd",
    "U_qq",
    "U_od",
    "U_do",
    "U_total",
    "err_dd",
    "err_qq",
    "err_od",
    "err_do",
    "err_total",
];

/// Shortest representation that parses back to the same `f64`.
fn cell(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-3..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes one row per distance; columns of channels that were not run
/// stay empty, failed points are `NaN`.
pub fn write_csv<W: Write>(out: W, set: &PotentialSet, units: UnitSystem) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for (i, &z) in set.z.iter().enumerate() {
        let mut row = vec![cell(units.length_from_natural(z))];
        let energy = |v: f64| cell(units.energy_from_natural(v));
        let pick = |c: Channel, errors: bool| {
            set.curve(c)
                .map(|cv| energy(if errors { cv.errors[i] } else { cv.values[i] }))
                .unwrap_or_default()
        };
        for c in Channel::ALL {
            row.push(pick(c, false));
        }
        row.push(energy(set.total[i]));
        for c in Channel::ALL {
            row.push(pick(c, true));
        }
        row.push(energy(set.total_error[i]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed CSV table; empty cells become `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<CsvTable> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>()
                        .map(Some)
                        .map_err(|e| Error::Data(format!("bad CSV cell `{s}`: {e}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct Constants {
    pub bohr_radius_m: f64,
    pub fine_structure: f64,
    pub hbar_js: f64,
    pub speed_of_light_m_s: f64,
    pub hartree_j: f64,
    pub charge_natural: f64,
}

impl Constants {
    pub fn current() -> Self {
        Constants {
            bohr_radius_m: units::BOHR_RADIUS_M,
            fine_structure: units::FINE_STRUCTURE,
            hbar_js: units::HBAR_JS,
            speed_of_light_m_s: units::SPEED_OF_LIGHT,
            hartree_j: units::hartree_j(),
            charge_natural: units::charge_natural(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    pub channel: String,
    pub z: f64,
    pub message: String,
}

/// Sidecar written next to a CSV file.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub atom: String,
    pub provenance: String,
    pub units: UnitSystem,
    pub length_unit: &'static str,
    pub energy_unit: &'static str,
    pub natural_units: &'static str,
    pub constants: Constants,
    pub model: ModelSpec,
    pub grid: ZGrid,
    pub channels: Vec<String>,
    pub tolerance: f64,
    pub quadrupole_mode: String,
    pub failures: Vec<PointFailure>,
}

impl RunMetadata {
    pub fn new(config: &RunConfig, atom: &str, provenance: &str, set: &PotentialSet) -> Self {
        let failures = set
            .curves
            .iter()
            .flat_map(|c| {
                c.failures.iter().zip(&c.z).filter_map(move |(f, &z)| {
                    f.as_ref().map(|m| PointFailure {
                        channel: c.channel.to_string(),
                        z: config.units.length_from_natural(z),
                        message: m.clone(),
                    })
                })
            })
            .collect();
        RunMetadata {
            atom: atom.to_string(),
            provenance: provenance.to_string(),
            units: config.units,
            length_unit: config.units.length_unit(),
            energy_unit: config.units.energy_unit(),
            natural_units: "hbar = c = eps0 = 1, length unit bohr",
            constants: Constants::current(),
            model: config.model,
            grid: config.grid,
            channels: config.channels.iter().map(|c| c.to_string()).collect(),
            tolerance: config.tol,
            quadrupole_mode: format!("{:?}", config.qq_mode).to_lowercase(),
            failures,
        }
    }
}
