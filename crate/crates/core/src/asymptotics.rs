//! Retarded-limit closed forms and power-law fits.
//!
//! At distances large compared to every transition wavelength the
//! polarizabilities and the permittivity take their static values, the
//! frequency integral becomes `∫ ξⁿ e^{-2ξvz} dξ = n!/(2vz)^{n+1}`, and only a
//! one-dimensional integral over `v = b/ξ` remains. For a perfect mirror
//! that integral is elementary.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::halfspace_green::{reflection, Matrix3, PermittivityModel};
use crate::potentials::{Channel, PotentialCurve};
use crate::quadrature::{self, Tolerance};

/// `U ≈ coefficient / z^power` in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardedCoefficient {
    pub channel: Channel,
    pub power: i32,
    pub coefficient: f64,
    /// v-integrals multiplying the `(xx, yy, zz)` static polarizability,
    /// where the channel has a matrix polarizability.
    pub geometry: Option<[f64; 3]>,
}

const V_TOL: Tolerance = Tolerance {
    rel: 1e-13,
    abs: 0.0,
    max_intervals: 2000,
};

fn v_integral<const N: usize>(f: impl Fn(f64) -> [f64; N]) -> Result<[f64; N]> {
    Ok(quadrature::integrate_semi_infinite(f, 1.0, 1.0, &[], &V_TOL, "retarded v integral")?.value)
}

/// `∫_1^∞ dv [r_s - r_p v², r_s - r_p v², -r_p (2v² - 2)] / v^n`
fn matrix_geometry(eps: Option<f64>, n: i32) -> Result<[f64; 3]> {
    let out = v_integral(|v| {
        let r = reflection(eps, v, 1.0);
        let w = v.powi(-n);
        let xx = (r.r_s - r.r_p * v * v) * w;
        [xx, xx, -r.r_p * (2.0 * v * v - 2.0) * w]
    })?;
    Ok(out)
}

fn weighted(alpha: &Matrix3, g: &[f64; 3]) -> f64 {
    alpha[0][0] * g[0] + alpha[1][1] * g[1] + alpha[2][2] * g[2]
}

fn check_alpha(alpha: &Matrix3) -> Result<()> {
    if alpha.iter().flatten().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain(
            "static polarizability contains non-finite entries",
        ))
    }
}

/// Coefficient of `z⁻⁴` for the dipole channel.
pub fn retarded_dd(alpha0: &Matrix3, model: &PermittivityModel) -> Result<RetardedCoefficient> {
    check_alpha(alpha0)?;
    model.validate()?;
    let geometry = match model.static_value() {
        None => [-4.0 / 3.0; 3],
        Some(eps) => matrix_geometry(Some(eps), 4)?,
    };
    Ok(RetardedCoefficient {
        channel: Channel::DipoleDipole,
        power: 4,
        coefficient: 3.0 / (128.0 * PI * PI) * weighted(alpha0, &geometry),
        geometry: Some(geometry),
    })
}

/// Coefficient of `z⁻⁶` for the octupole-trace channel; `channel` tells
/// the od and do variants apart, both share the same geometry.
fn retarded_trace(
    alpha0: &Matrix3,
    model: &PermittivityModel,
    channel: Channel,
) -> Result<RetardedCoefficient> {
    check_alpha(alpha0)?;
    model.validate()?;
    let geometry = match model.static_value() {
        None => [-8.0 / 15.0, -8.0 / 15.0, -4.0 / 15.0],
        Some(eps) => matrix_geometry(Some(eps), 6)?,
    };
    Ok(RetardedCoefficient {
        channel,
        power: 6,
        coefficient: 3.0 / (128.0 * PI * PI) * weighted(alpha0, &geometry),
        geometry: Some(geometry),
    })
}

/// Perfect mirror: `-Tr[α_od(0) diag(2, 2, 1)] / (160 π²)`.
pub fn retarded_od_trace(
    alpha_od0: &Matrix3,
    model: &PermittivityModel,
) -> Result<RetardedCoefficient> {
    retarded_trace(alpha_od0, model, Channel::OctupoleDipoleTrace)
}

pub fn retarded_do_trace(
    alpha_do0: &Matrix3,
    model: &PermittivityModel,
) -> Result<RetardedCoefficient> {
    retarded_trace(alpha_do0, model, Channel::DipoleOctupoleTrace)
}

/// Perfect mirror: `-5 α_qq(0) / (64 π²)`, with `α_qq(0) = Σ_k 2 Q̃:Q̃ / ω_k`.
pub fn retarded_qq(alpha_qq0: f64, model: &PermittivityModel) -> Result<RetardedCoefficient> {
    if !alpha_qq0.is_finite() {
        return Err(Error::domain(
            "static quadrupole polarizability is not finite",
        ));
    }
    model.validate()?;
    let integral = match model.static_value() {
        None => -10.0 / 3.0,
        Some(eps) => qq_integral(Some(eps))?,
    };
    Ok(RetardedCoefficient {
        channel: Channel::QuadQuad,
        power: 6,
        coefficient: alpha_qq0 / 10.0 / (8.0 * PI * PI) * (15.0 / 8.0) * integral,
        geometry: None,
    })
}

/// `∫_1^∞ dv (2v² - 1)[r_s - r_p (2v² - 1)] / v⁶`
fn qq_integral(eps: Option<f64>) -> Result<f64> {
    Ok(v_integral(|v| {
        let r = reflection(eps, v, 1.0);
        let a = 2.0 * v * v - 1.0;
        [a * (r.r_s - r.r_p * a) / v.powi(6)]
    })?[0])
}

/// Converts a rotational average `Tr α / 3` into the contracted scalar
/// `Tr α` that the isotropic retarded formulas are written in.
///
/// With `α_od(0) = a 1` the anisotropic form gives `-5a / (160 π²)`; the
/// isotropic one gives `-α / (96 π²)`, so the two agree exactly when
/// `α = Tr α_od(0) = 3a`.
pub fn contracted_trace_scalar(rotational_average: f64) -> f64 {
    3.0 * rotational_average
}

/// Perfect-mirror `z⁻⁶` coefficients `(-α_od / 96π², -α_do / 96π²)` for
/// contracted scalars.
pub fn retarded_od_do_isotropic(alpha_od0: f64, alpha_do0: f64) -> (f64, f64) {
    let k = -1.0 / (96.0 * PI * PI);
    (k * alpha_od0, k * alpha_do0)
}

/// `(U_od + U_do) / U_qq = (2/15)(α_od + α_do) / α_qq` in the retarded limit.
pub fn ratio_od_do_over_qq(alpha_od0: f64, alpha_do0: f64, alpha_qq0: f64) -> Result<f64> {
    if alpha_qq0 == 0.0 || !alpha_qq0.is_finite() {
        return Err(Error::domain(format!(
            "quadrupole polarizability must be nonzero, got {alpha_qq0}"
        )));
    }
    Ok(2.0 / 15.0 * (alpha_od0 + alpha_do0) / alpha_qq0)
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope of `log|U|` against `log z` over points with `z` in `window`.
pub fn fit_scaling_exponent(z: &[f64], u: &[f64], window: (f64, f64)) -> Result<f64> {
    if z.len() != u.len() {
        return Err(Error::Shape(format!(
            "{} distances but {} values",
            z.len(),
            u.len()
        )));
    }
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = z
        .iter()
        .zip(u)
        .filter(|(&zi, _)| zi >= lo && zi <= hi)
        .map(|(&a, &b)| (a, b))
        .collect();
    if pts.len() < 5 {
        return Err(Error::domain(format!(
            "need at least 5 points in [{lo}, {hi}], got {}",
            pts.len()
        )));
    }
    if pts
        .iter()
        .any(|p| !(p.1.is_finite() && p.1 != 0.0 && p.0 > 0.0))
    {
        return Err(Error::domain(
            "fit window contains zero or non-finite values",
        ));
    }
    let sign = pts[0].1.signum();
    if pts.iter().any(|p| p.1.signum() != sign) {
        return Err(Error::domain(
            "potential changes sign inside the fit window",
        ));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.abs().ln()).collect();
    Ok(least_squares_slope(&x, &y))
}

pub fn fit_curve_exponent(curve: &PotentialCurve, window: (f64, f64)) -> Result<f64> {
    fit_scaling_exponent(&curve.z, &curve.values, window)
}

/// Order `p` in `|U zⁿ / C - 1| ~ z^{-p}`, from at least three samples.
pub fn convergence_order(z: &[f64], scaled: &[f64], limit: f64) -> Result<f64> {
    if z.len() != scaled.len() || z.len() < 3 {
        return Err(Error::domain(
            "convergence order needs at least three matching samples",
        ));
    }
    if limit == 0.0 {
        return Err(Error::domain("limit must be nonzero"));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (&zi, &si) in z.iter().zip(scaled) {
        let d = (si / limit - 1.0).abs();
        if d > 0.0 && d.is_finite() && zi > 0.0 {
            x.push(zi.ln());
            y.push(d.ln());
        }
    }
    if x.len() < 3 {
        return Err(Error::domain("deviations vanish; order undefined"));
    }
    Ok(-least_squares_slope(&x, &y))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PM: PermittivityModel = PermittivityModel::PerfectMirror;
    const ID: Matrix3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn perfect_mirror_closed_forms() {
        let pi2 = PI * PI;
        let od = retarded_od_trace(&ID, &PM).unwrap();
        assert!(close(od.coefficient, -5.0 / (160.0 * pi2), 1e-14));
        let qq = retarded_qq(1.0, &PM).unwrap();
        assert!(close(qq.coefficient, -5.0 / (64.0 * pi2), 1e-14));
        let dd = retarded_dd(&ID, &PM).unwrap();
        assert!(close(dd.coefficient, -3.0 / (32.0 * pi2), 1e-14));
        let aniso = [[0.0; 3], [0.0; 3], [0.0, 0.0, 2.0]];
        assert!(close(
            retarded_od_trace(&aniso, &PM).unwrap().coefficient,
            -2.0 / (160.0 * pi2),
            1e-14
        ));
    }

    #[test]
    fn v_integrals_reproduce_mirror_geometry() {
        let g6 = matrix_geometry(None, 6).unwrap();
        assert!(close(g6[0], -8.0 / 15.0, 1e-12) && close(g6[2], -4.0 / 15.0, 1e-12));
        let g4 = matrix_geometry(None, 4).unwrap();
        assert!(close(g4[0], -4.0 / 3.0, 1e-12) && close(g4[2], -4.0 / 3.0, 1e-12));
        assert!(close(qq_integral(None).unwrap(), -10.0 / 3.0, 1e-12));
        // 3/(128π²) · (8/15, 8/15, 4/15) = (2, 2, 1)/(160π²)
        assert!(close(3.0 / 128.0 * 8.0 / 15.0, 2.0 / 160.0, 1e-15));
    }

    #[test]
    fn vacuum_coefficients_vanish() {
        let vac = PermittivityModel::Constant(1.0);
        assert_eq!(retarded_od_trace(&ID, &vac).unwrap().coefficient, 0.0);
        assert_eq!(retarded_qq(1.0, &vac).unwrap().coefficient, 0.0);
        assert_eq!(retarded_dd(&ID, &vac).unwrap().coefficient, 0.0);
    }

    #[test]
    fn dielectric_approaches_mirror_monotonically() {
        let pm_od = retarded_od_trace(&ID, &PM).unwrap().coefficient;
        let pm_qq = retarded_qq(1.0, &PM).unwrap().coefficient;
        let mut prev_od = 0.0;
        let mut prev_qq = 0.0;
        for eps in [2.0, 10.0, 1e2, 1e4, 1e6] {
            let m = PermittivityModel::Constant(eps);
            let od = retarded_od_trace(&ID, &m).unwrap().coefficient;
            let qq = retarded_qq(1.0, &m).unwrap().coefficient;
            assert!(od < prev_od && od > pm_od);
            assert!(qq < prev_qq && qq > pm_qq);
            prev_od = od;
            prev_qq = qq;
        }
        assert!(close(prev_od, pm_od, 1e-2));
    }

    #[test]
    fn isotropic_and_anisotropic_forms_reconcile() {
        let a = 0.8;
        let iso = [[a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a]];
        let aniso = retarded_od_trace(&iso, &PM).unwrap().coefficient;
        let (od, d_o) =
            retarded_od_do_isotropic(contracted_trace_scalar(a), contracted_trace_scalar(a));
        assert!(close(od, aniso, 1e-14));
        assert_eq!(od, d_o);
        assert!(close(
            retarded_od_do_isotropic(1.0, 0.0).0,
            -1.0 / (96.0 * PI * PI),
            1e-15
        ));
        assert_eq!(retarded_od_do_isotropic(0.0, 0.0), (0.0, -0.0));
    }

    #[test]
    fn ratio_law() {
        assert!(close(
            ratio_od_do_over_qq(1.0, 1.0, 2.0 / 7.5).unwrap(),
            1.0,
            1e-15
        ));
        assert!(close(
            ratio_od_do_over_qq(3.915, 0.0, 1.0).unwrap(),
            0.522,
            1e-12
        ));
        assert_eq!(ratio_od_do_over_qq(0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(ratio_od_do_over_qq(1.0, 1.0, 0.0).is_err());
        // consistent with the ratio of isotropic closed forms
        let (od, d_o) = retarded_od_do_isotropic(0.4, 0.5);
        let qq = retarded_qq(0.9, &PM).unwrap().coefficient;
        assert!(close(
            (od + d_o) / qq,
            ratio_od_do_over_qq(0.4, 0.5, 0.9).unwrap(),
            1e-14
        ));
    }

    #[test]
    fn exact_power_law_fit() {
        let z: Vec<f64> = (0..20).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
        let u: Vec<f64> = z.iter().map(|z| -z.powi(-6)).collect();
        assert!((fit_scaling_exponent(&z, &u, (1.0, 100.0)).unwrap() + 6.0).abs() < 1e-12);
        assert!(fit_scaling_exponent(&z, &u, (1.0, 1.5)).is_err());
        let mut flipped = u.clone();
        flipped[3] = -flipped[3];
        assert!(fit_scaling_exponent(&z, &flipped, (1.0, 100.0)).is_err());
    }

    #[test]
    fn convergence_order_of_known_correction() {
        let z = [10.0, 20.0, 40.0, 80.0];
        let s: Vec<f64> = z.iter().map(|z| 2.0 * (1.0 + 3.0 / (z * z))).collect();
        assert!((convergence_order(&z, &s, 2.0).unwrap() - 2.0).abs() < 1e-9);
    }
}
