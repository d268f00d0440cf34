//! Atomic response tensors on the imaginary frequency axis, built from a
//! list of ground-state transitions. All quantities are in natural units.

use log::warn;

use crate::error::{Error, Result};
use crate::halfspace_green::Matrix3;
use crate::tensors::{octupole_trace_vector, Rank4, SymTensor2, SymTensor3, Vec3};

/// One ground-to-excited transition `0 -> k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRecord {
    pub label: String,
    pub omega: f64,
    pub dipole: Vec3,
    pub quadrupole: SymTensor2,
    pub octupole: SymTensor3,
}

impl TransitionRecord {
    pub fn new(
        label: impl Into<String>,
        omega: f64,
        dipole: Vec3,
        quadrupole: SymTensor2,
        octupole: SymTensor3,
    ) -> Result<Self> {
        let label = label.into();
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::domain(format!(
                "transition `{label}`: frequency must be positive, got {omega}"
            )));
        }
        if !(dipole.is_finite() && quadrupole.is_finite() && octupole.is_finite()) {
            return Err(Error::domain(format!(
                "transition `{label}`: non-finite moment"
            )));
        }
        Ok(TransitionRecord {
            label,
            omega,
            dipole,
            quadrupole,
            octupole,
        })
    }

    pub fn dipole_only(label: impl Into<String>, omega: f64, dipole: Vec3) -> Result<Self> {
        Self::new(label, omega, dipole, SymTensor2::ZERO, SymTensor3::ZERO)
    }

    pub fn quadrupole_only(
        label: impl Into<String>,
        omega: f64,
        quadrupole: SymTensor2,
    ) -> Result<Self> {
        Self::new(label, omega, Vec3::ZERO, quadrupole, SymTensor3::ZERO)
    }

    /// `T_i = O_ill`
    pub fn trace_vector(&self) -> Vec3 {
        octupole_trace_vector(&self.octupole)
    }
}

/// `1/(ω_k + iξ) + 1/(ω_k - iξ)`
pub fn resonance_weight(omega: f64, xi: f64) -> f64 {
    2.0 * omega / (omega * omega + xi * xi)
}

fn check(records: &[TransitionRecord], xi: f64, what: &str) -> Result<()> {
    if !(xi >= 0.0) {
        return Err(Error::domain(format!(
            "{what}: imaginary frequency must be >= 0, got {xi}"
        )));
    }
    if records.is_empty() {
        warn!("{what}: empty transition list, polarizability is zero");
    }
    Ok(())
}

pub fn alpha_dd(records: &[TransitionRecord], xi: f64) -> Result<Matrix3> {
    check(records, xi, "alpha_dd")?;
    let mut a = [[0.0; 3]; 3];
    for r in records {
        let w = resonance_weight(r.omega, xi);
        let dd = r.dipole.outer(&r.dipole);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += w * dd[i][j];
            }
        }
    }
    Ok(a)
}

/// `Σ_k Q_ij Q_km [1/(ω_k + iξ) + 1/(ω_k - iξ)]`
pub fn alpha_qq(records: &[TransitionRecord], xi: f64) -> Result<Rank4> {
    check(records, xi, "alpha_qq")?;
    let mut a = Rank4::default();
    for r in records {
        let w = resonance_weight(r.omega, xi);
        let q = &r.quadrupole;
        let pair = Rank4::from_fn(|i, j, k, m| w * q.get(i, j) * q.get(k, m));
        for (x, y) in a.0.iter_mut().zip(pair.0.iter()) {
            *x += y;
        }
    }
    Ok(a)
}

/// Real symmetric part of the octupole-dipole polarizability,
/// `Σ_k ω_k (d⊗T + T⊗d) / (ω_k² + ξ²)`. The antisymmetric remainder
/// is odd in the transition ordering and drops out against the symmetric
/// coincidence Green tensor.
pub fn alpha_od(records: &[TransitionRecord], xi: f64) -> Result<Matrix3> {
    check(records, xi, "alpha_od")?;
    Ok(mixed(records, xi, false))
}

/// Dipole-octupole counterpart with `d` and `T` exchanged.
pub fn alpha_do(records: &[TransitionRecord], xi: f64) -> Result<Matrix3> {
    check(records, xi, "alpha_do")?;
    Ok(mixed(records, xi, true))
}

fn mixed(records: &[TransitionRecord], xi: f64, swap: bool) -> Matrix3 {
    let mut a = [[0.0; 3]; 3];
    for r in records {
        let w = 0.5 * resonance_weight(r.omega, xi);
        let t = r.trace_vector();
        let (x, y) = if swap { (t, r.dipole) } else { (r.dipole, t) };
        let xy = x.outer(&y);
        let yx = y.outer(&x);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += w * (xy[i][j] + yx[i][j]);
            }
        }
    }
    a
}

pub fn trace(m: &Matrix3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// Static isotropic reductions.
///
/// `dipole`, `octupole_dipole` and `dipole_octupole` are rotational
/// averages `Tr α(0) / 3`; `quadrupole` is `Σ_k 2 Q̃:Q̃ / ω_k` with `Q̃` the
/// traceless part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicScalars {
    pub dipole: f64,
    pub quadrupole: f64,
    pub octupole_dipole: f64,
    pub dipole_octupole: f64,
}

impl IsotropicScalars {
    pub fn od_plus_do(&self) -> f64 {
        self.octupole_dipole + self.dipole_octupole
    }

    /// `(Tr α_od(0) + Tr α_do(0)) / α_qq(0)`
    pub fn polarizability_ratio(&self) -> Result<f64> {
        if self.quadrupole == 0.0 {
            return Err(Error::Data("dataset has no quadrupole strength".into()));
        }
        Ok(3.0 * self.od_plus_do() / self.quadrupole)
    }
}

/// Quadrupole weight `Σ_k w_k(ξ) Q̃_k : Q̃_k` used by the isotropic channel.
pub fn quadrupole_strength(records: &[TransitionRecord], xi: f64) -> f64 {
    records
        .iter()
        .map(|r| {
            let qt = r.quadrupole.deviator();
            resonance_weight(r.omega, xi) * qt.double_dot(&qt)
        })
        .sum()
}

pub fn isotropic_scalars(records: &[TransitionRecord]) -> IsotropicScalars {
    let tr = |m: Result<Matrix3>| trace(&m.expect("ξ = 0 is valid")) / 3.0;
    IsotropicScalars {
        dipole: tr(alpha_dd(records, 0.0)),
        quadrupole: quadrupole_strength(records, 0.0),
        octupole_dipole: tr(alpha_od(records, 0.0)),
        dipole_octupole: tr(alpha_do(records, 0.0)),
    }
}
