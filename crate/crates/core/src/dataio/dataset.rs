use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::response::TransitionRecord;
use crate::tensors::{SymTensor2, SymTensor3, Vec3};
use crate::units::{moment_au_to_natural, omega_au_to_natural};

/// One transition as stored on disk, in atomic units.
///
/// Quadrupole components are ordered `(xx, yy, zz, xy, xz, yz)`, octupole
/// components `(xxx, yyy, zzz, xxy, xxz, xyy, yyz, xzz, yzz, xyz)`. The
/// octupole convention is `O = e r⊗r⊗r / 6`. Missing moments are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionData {
    pub label: String,
    pub omega_au: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_au: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrupole_au: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub octupole_au: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDataset {
    pub atom: String,
    #[serde(default)]
    pub provenance: String,
    pub transitions: Vec<TransitionData>,
}

fn components<const N: usize>(field: &str, v: &Option<Vec<f64>>) -> Result<[f64; N]> {
    let Some(v) = v else {
        return Ok([0.0; N]);
    };
    let arr: [f64; N] = v
        .as_slice()
        .try_into()
        .map_err(|_| Error::schema(field, format!("expected {N} components, got {}", v.len())))?;
    if arr.iter().any(|x| !x.is_finite()) {
        return Err(Error::schema(field, "components must be finite"));
    }
    Ok(arr)
}

impl AtomDataset {
    pub fn from_json(text: &str) -> Result<Self> {
        let ds: AtomDataset =
            serde_json::from_str(text).map_err(|e| Error::schema("<document>", e.to_string()))?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.transitions.is_empty() {
            return Err(Error::schema(
                "transitions",
                "at least one transition is required",
            ));
        }
        let mut seen = HashSet::new();
        for (i, t) in self.transitions.iter().enumerate() {
            let at = |f: &str| format!("transitions[{i}].{f}");
            if !seen.insert(t.label.as_str()) {
                return Err(Error::schema(
                    at("label"),
                    format!("duplicate label `{}`", t.label),
                ));
            }
            if !(t.omega_au > 0.0 && t.omega_au.is_finite()) {
                return Err(Error::schema(
                    at("omega_au"),
                    format!("must be positive, got {}", t.omega_au),
                ));
            }
            components::<3>(&at("dipole_au"), &t.dipole_au)?;
            components::<6>(&at("quadrupole_au"), &t.quadrupole_au)?;
            components::<10>(&at("octupole_au"), &t.octupole_au)?;
        }
        Ok(())
    }

    /// Transition records in natural units.
    pub fn records(&self) -> Result<Vec<TransitionRecord>> {
        self.validate()?;
        self.transitions
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let at = |f: &str| format!("transitions[{i}].{f}");
                let d = components::<3>(&at("dipole_au"), &t.dipole_au)?.map(moment_au_to_natural);
                let q = components::<6>(&at("quadrupole_au"), &t.quadrupole_au)?
                    .map(moment_au_to_natural);
                let o =
                    components::<10>(&at("octupole_au"), &t.octupole_au)?.map(moment_au_to_natural);
                TransitionRecord::new(
                    t.label.clone(),
                    omega_au_to_natural(t.omega_au),
                    Vec3(d),
                    SymTensor2(q),
                    SymTensor3(o),
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn load_dataset(path: &Path) -> Result<AtomDataset> {
    let text = fs::read_to_string(path)?;
    AtomDataset::from_json(&text)
}

pub fn write_dataset(path: &Path, ds: &AtomDataset) -> Result<()> {
    fs::write(path, ds.to_json()? + "\n")?;
    Ok(())
}

const CS_FIXTURE: &str = include_str!("../../data/cs_6s.json");

pub fn bundled_cs_fixture() -> AtomDataset {
    AtomDataset::from_json(CS_FIXTURE).expect("bundled fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"atom": "X", "transitions": [{"label": "a", "omega_au": 0.1, "dipole_au": [0, 0, 1]}]}"#;

    #[test]
    fn minimal_file() {
        let ds = AtomDataset::from_json(MINIMAL).unwrap();
        assert_eq!(ds.transitions.len(), 1);
        let r = ds.records().unwrap();
        assert_eq!(r[0].quadrupole, SymTensor2::ZERO);
        assert!((r[0].dipole[2] - crate::units::charge_natural()).abs() < 1e-16);
    }

    #[test]
    fn short_quadrupole_names_the_field() {
        let text = r#"{"atom": "X", "transitions": [{"label": "a", "omega_au": 0.1, "quadrupole_au": [1, 2, 3, 4, 5]}]}"#;
        match AtomDataset::from_json(text) {
            Err(Error::Schema { field, message }) => {
                assert_eq!(field, "transitions[0].quadrupole_au");
                assert!(message.contains("6"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_frequency_and_duplicates() {
        let zero = r#"{"atom": "X", "transitions": [{"label": "a", "omega_au": 0.0}]}"#;
        assert!(matches!(
            AtomDataset::from_json(zero),
            Err(Error::Schema { .. })
        ));
        let dup = r#"{"atom": "X", "transitions": [{"label": "a", "omega_au": 1}, {"label": "a", "omega_au": 2}]}"#;
        assert!(matches!(
            AtomDataset::from_json(dup),
            Err(Error::Schema { .. })
        ));
        let typo =
            r#"{"atom": "X", "transitions": [{"label": "a", "omega_au": 1, "dipole": [0,0,1]}]}"#;
        assert!(matches!(
            AtomDataset::from_json(typo),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn write_then_load_is_identity() {
        let ds = bundled_cs_fixture();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cs.json");
        write_dataset(&path, &ds).unwrap();
        assert_eq!(load_dataset(&path).unwrap(), ds);
    }

    #[test]
    fn fixture_ratio() {
        let s = crate::response::isotropic_scalars(&bundled_cs_fixture().records().unwrap());
        assert!((s.polarizability_ratio().unwrap() - 3.915).abs() < 1e-9);
    }
}
