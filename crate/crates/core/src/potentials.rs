//! Casimir–Polder potentials by quadrature along the imaginary frequency
//! axis. The default evaluation integrates the coincidence Green tensor
//! over `b` first and then over ξ; [`channel_potential_swapped`] uses the
//! substitution `b = ξ v` and integrates over ξ first, as an independent
//! route to the same number.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::halfspace_green::{
    grad2_from_moments, green_from_moments, radial_point, CoincidenceMoments, Matrix3,
    PermittivityModel, N_MOMENTS,
};
use crate::quadrature::{self, Tolerance};
use crate::response::{self, TransitionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    DipoleDipole,
    QuadQuad,
    OctupoleDipoleTrace,
    DipoleOctupoleTrace,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::DipoleDipole,
        Channel::QuadQuad,
        Channel::OctupoleDipoleTrace,
        Channel::DipoleOctupoleTrace,
    ];

    pub fn short_name(&self) -> &'static str {
        match self {
            Channel::DipoleDipole => "dd",
            Channel::QuadQuad => "qq",
            Channel::OctupoleDipoleTrace => "od",
            Channel::DipoleOctupoleTrace => "do",
        }
    }

    /// Power of ξ multiplying `α • G` under the frequency integral.
    pub fn xi_power(&self) -> i32 {
        match self {
            Channel::DipoleDipole | Channel::QuadQuad => 2,
            Channel::OctupoleDipoleTrace | Channel::DipoleOctupoleTrace => 4,
        }
    }

    fn prefactor(&self) -> f64 {
        match self {
            Channel::DipoleDipole | Channel::QuadQuad => 1.0 / (2.0 * PI),
            Channel::OctupoleDipoleTrace | Channel::DipoleOctupoleTrace => 1.0 / (10.0 * PI),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl serde::Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.short_name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dd" => Ok(Channel::DipoleDipole),
            "qq" => Ok(Channel::QuadQuad),
            "od" => Ok(Channel::OctupoleDipoleTrace),
            "do" => Ok(Channel::DipoleOctupoleTrace),
            other => Err(Error::Usage(format!(
                "unknown channel `{other}` (expected dd, qq, od, do)"
            ))),
        }
    }
}

/// How the quadrupole channel contracts the double-gradient kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadMode {
    /// `(1/10) Σ_k w_k Q̃:Q̃ · ∂_i G_jj ∂'_i`, valid for rotationally
    /// averaged data.
    #[default]
    Isotropic,
    /// Full `Q_ij ∂_i G_jk ∂'_m Q_km` contraction per transition.
    Tensor,
}

impl FromStr for QuadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "isotropic" => Ok(QuadMode::Isotropic),
            "tensor" => Ok(QuadMode::Tensor),
            other => Err(Error::Usage(format!("unknown quadrupole mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSettings {
    pub outer: Tolerance,
    pub inner: Tolerance,
    pub qq_mode: QuadMode,
}

impl Default for PotentialSettings {
    fn default() -> Self {
        PotentialSettings {
            outer: Tolerance::relative(1e-8),
            inner: Tolerance::relative(1e-10),
            qq_mode: QuadMode::Isotropic,
        }
    }
}

impl PotentialSettings {
    pub fn with_rel(rel: f64) -> Self {
        PotentialSettings {
            outer: Tolerance::relative(rel),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn contract(a: &Matrix3, g: &Matrix3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * g[j][i];
        }
    }
    s
}

/// Frequency-integrand density without the channel prefactor; linear in
/// the ξ²-scaled radial moments.
fn density(
    channel: Channel,
    mode: QuadMode,
    records: &[TransitionRecord],
    xi: f64,
    moments: &[f64; N_MOMENTS],
) -> Result<f64> {
    Ok(match channel {
        Channel::DipoleDipole => contract(
            &response::alpha_dd(records, xi)?,
            &green_from_moments(moments),
        ),
        Channel::OctupoleDipoleTrace => {
            xi * xi
                * contract(
                    &response::alpha_od(records, xi)?,
                    &green_from_moments(moments),
                )
        }
        Channel::DipoleOctupoleTrace => {
            xi * xi
                * contract(
                    &response::alpha_do(records, xi)?,
                    &green_from_moments(moments),
                )
        }
        Channel::QuadQuad => {
            let k = grad2_from_moments(moments);
            match mode {
                QuadMode::Isotropic => {
                    response::quadrupole_strength(records, xi) / 10.0 * k.isotropic_invariants()[2]
                }
                QuadMode::Tensor => records
                    .iter()
                    .map(|r| {
                        response::resonance_weight(r.omega, xi)
                            * k.contract_pair(&r.quadrupole, &r.quadrupole)
                    })
                    .sum(),
            }
        }
    })
}

fn check_inputs(records: &[TransitionRecord], model: &PermittivityModel, z: f64) -> Result<()> {
    model.validate()?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain(format!(
            "atom-surface distance must be positive, got {z}"
        )));
    }
    if records.iter().any(|r| !(r.omega > 0.0)) {
        return Err(Error::domain("transition frequencies must be positive"));
    }
    Ok(())
}

fn is_silent(channel: Channel, records: &[TransitionRecord], model: &PermittivityModel) -> bool {
    if model.at_imaginary(0.0) == Some(1.0) && matches!(model, PermittivityModel::Constant(_)) {
        return true;
    }
    records.iter().all(|r| match channel {
        Channel::DipoleDipole => r.dipole.norm() == 0.0,
        Channel::QuadQuad => r.quadrupole.frobenius_norm() == 0.0,
        Channel::OctupoleDipoleTrace | Channel::DipoleOctupoleTrace => {
            r.dipole.norm() == 0.0 || r.trace_vector().norm() == 0.0
        }
    })
}

fn breakpoints(records: &[TransitionRecord]) -> Vec<f64> {
    records.iter().map(|r| r.omega).collect()
}

/// Runs `f` under a quadrature that cannot carry errors; the first failure
/// inside the integrand is surfaced instead of the resulting NaN.
fn guarded<T>(run: impl FnOnce(&mut dyn FnMut(Result<f64>) -> f64) -> Result<T>) -> Result<T> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut sink = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let out = run(&mut sink);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => out,
    }
}

/// One channel at one distance (b first, then ξ).
pub fn channel_potential(
    records: &[TransitionRecord],
    model: &PermittivityModel,
    z: f64,
    channel: Channel,
    settings: &PotentialSettings,
) -> Result<PointEstimate> {
    check_inputs(records, model, z)?;
    if is_silent(channel, records, model) {
        return Ok(PointEstimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let bps = breakpoints(records);
    let mut inner_evals = 0usize;
    let est = guarded(|sink| {
        quadrature::integrate_semi_infinite(
            |xi| {
                let value =
                    CoincidenceMoments::compute(model, z, xi, &settings.inner).and_then(|m| {
                        inner_evals += m.diagnostics.evaluations;
                        density(channel, settings.qq_mode, records, xi, &m.moments)
                    });
                [sink(value)]
            },
            0.0,
            1.0 / z,
            &bps,
            &settings.outer,
            "frequency integral",
        )
    })?;
    let pre = channel.prefactor();
    Ok(PointEstimate {
        value: pre * est.value[0],
        error: pre * est.error,
        evaluations: est.evaluations + inner_evals,
    })
}

/// Same quantity with the order of integration exchanged: `b = ξ v`,
/// outer integral over `v ∈ [1, ∞)`, inner over ξ.
pub fn channel_potential_swapped(
    records: &[TransitionRecord],
    model: &PermittivityModel,
    z: f64,
    channel: Channel,
    settings: &PotentialSettings,
) -> Result<PointEstimate> {
    check_inputs(records, model, z)?;
    if is_silent(channel, records, model) {
        return Ok(PointEstimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let bps = breakpoints(records);
    let mut inner_evals = 0usize;
    let est = guarded(|outer_sink| {
        quadrature::integrate_semi_infinite(
            |v| {
                let inner = guarded(|sink| {
                    quadrature::integrate_semi_infinite(
                        |xi| {
                            let m = radial_point(model.at_imaginary(xi), z, xi, xi * v);
                            [sink(
                                density(channel, settings.qq_mode, records, xi, &m).map(|d| d * xi),
                            )]
                        },
                        0.0,
                        0.5 / (v * z),
                        &bps,
                        &settings.inner,
                        "swapped frequency integral",
                    )
                });
                [outer_sink(inner.map(|e| {
                    inner_evals += e.evaluations;
                    e.value[0]
                }))]
            },
            1.0,
            1.0,
            &[],
            &settings.outer,
            "swapped v integral",
        )
    })?;
    let pre = channel.prefactor();
    Ok(PointEstimate {
        value: pre * est.value[0],
        error: pre * est.error,
        evaluations: est.evaluations + inner_evals,
    })
}

pub fn u_dipole(
    records: &[TransitionRecord],
    model: &PermittivityModel,
    z: f64,
    s: &PotentialSettings,
) -> Result<PointEstimate> {
    channel_potential(records, model, z, Channel::DipoleDipole, s)
}

pub fn u_quad(
    records: &[TransitionRecord],
    model: &PermittivityModel,
    z: f64,
    s: &PotentialSettings,
) -> Result<PointEstimate> {
    channel_potential(records, model, z, Channel::QuadQuad, s)
}

pub fn u_od_trace(
    records: &[TransitionRecord],
    model: &PermittivityModel,
    z: f64,
    s: &PotentialSettings,
) -> Result<PointEstimate> {
    channel_potential(records, model, z, Channel::OctupoleDipoleTrace, s)
}

pub fn u_do_trace(
    records: &[TransitionRecord],
    model: &PermittivityModel,
    z: f64,
    s: &PotentialSettings,
) -> Result<PointEstimate> {
    channel_potential(records, model, z, Channel::DipoleOctupoleTrace, s)
}

/// Distances beyond which every transition is retarded.
pub fn retarded_threshold(records: &[TransitionRecord]) -> Option<f64> {
    records
        .iter()
        .map(|r| r.omega)
        .reduce(f64::min)
        .map(|w| 10.0 / w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCurve {
    pub channel: Channel,
    pub z: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evaluations: Vec<usize>,
    pub failures: Vec<Option<String>>,
}

impl PotentialCurve {
    pub fn failure_count(&self) -> usize {
        self.failures.iter().filter(|f| f.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSet {
    pub z: Vec<f64>,
    pub curves: Vec<PotentialCurve>,
    pub total: Vec<f64>,
    pub total_error: Vec<f64>,
}

/// Distance where `|U_od + U_do| / |U_qq|` reaches its large-distance value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    pub z: f64,
    pub plateau: f64,
}

impl PotentialSet {
    pub fn curve(&self, channel: Channel) -> Option<&PotentialCurve> {
        self.curves.iter().find(|c| c.channel == channel)
    }

    pub fn failure_count(&self) -> usize {
        self.curves.iter().map(PotentialCurve::failure_count).sum()
    }

    /// Trace-to-quadrupole ratio per grid point.
    pub fn trace_ratio(&self) -> Option<Vec<f64>> {
        let qq = self.curve(Channel::QuadQuad)?;
        let od = self.curve(Channel::OctupoleDipoleTrace)?;
        let dd = self.curve(Channel::DipoleOctupoleTrace)?;
        Some(
            (0..self.z.len())
                .map(|i| ((od.values[i] + dd.values[i]) / qq.values[i]).abs())
                .collect(),
        )
    }

    /// Smallest distance from which the ratio stays within `fraction` of the
    /// value at the largest sampled distance.
    pub fn crossover(&self, fraction: f64) -> Option<Crossover> {
        let ratio = self.trace_ratio()?;
        let mut order: Vec<usize> = (0..self.z.len()).collect();
        order.sort_by(|&a, &b| self.z[b].total_cmp(&self.z[a]));
        let plateau = *ratio.get(*order.first()?)?;
        if !plateau.is_finite() || plateau == 0.0 {
            return None;
        }
        let mut z = self.z[order[0]];
        for &i in &order {
            if !ratio[i].is_finite() || (ratio[i] - plateau).abs() > fraction * plateau {
                break;
            }
            z = self.z[i];
        }
        Some(Crossover { z, plateau })
    }
}

/// Evaluates the requested channels over a distance grid. Grid points run
/// in parallel; a failed point is recorded as NaN with its error message.
pub fn total_potential(
    records: &[TransitionRecord],
    model: &PermittivityModel,
    zs: &[f64],
    channels: &[Channel],
    settings: &PotentialSettings,
) -> Result<PotentialSet> {
    if zs.is_empty() {
        return Err(Error::Usage("distance grid is empty".into()));
    }
    if channels.is_empty() {
        return Err(Error::Usage("no channels requested".into()));
    }
    model.validate()?;
    let mut curves = Vec::with_capacity(channels.len());
    for &channel in channels {
        let points: Vec<Result<PointEstimate>> = zs
            .par_iter()
            .map(|&z| channel_potential(records, model, z, channel, settings))
            .collect();
        let mut curve = PotentialCurve {
            channel,
            z: zs.to_vec(),
            values: Vec::with_capacity(zs.len()),
            errors: Vec::with_capacity(zs.len()),
            evaluations: Vec::with_capacity(zs.len()),
            failures: Vec::with_capacity(zs.len()),
        };
        for (p, &z) in points.into_iter().zip(zs) {
            match p {
                Ok(e) => {
                    curve.values.push(e.value);
                    curve.errors.push(e.error);
                    curve.evaluations.push(e.evaluations);
                    curve.failures.push(None);
                }
                Err(err) => {
                    log::warn!("{channel} at z = {z}: {err}");
                    curve.values.push(f64::NAN);
                    curve.errors.push(f64::NAN);
                    curve.evaluations.push(0);
                    curve.failures.push(Some(err.to_string()));
                }
            }
        }
        curves.push(curve);
    }
    let total = (0..zs.len())
        .map(|i| curves.iter().map(|c| c.values[i]).sum())
        .collect();
    let total_error = (0..zs.len())
        .map(|i| curves.iter().map(|c| c.errors[i]).sum())
        .collect();
    Ok(PotentialSet {
        z: zs.to_vec(),
        curves,
        total,
        total_error,
    })
}

/// Relative deviation of the quadrature value of `∫_0^∞ ξ⁵ e^{-2ξvz} dξ`
/// from `(15/8)(vz)^{-6}`.
pub fn xi5_laplace_residual(v: f64, z: f64, tol: &Tolerance) -> Result<(f64, f64)> {
    let s = 2.0 * v * z;
    let est = quadrature::semi_infinite_scalar(
        |x| x.powi(5) * (-s * x).exp(),
        0.0,
        1.0 / s,
        tol,
        "ξ⁵ Laplace",
    )?;
    let exact = 15.0 / 8.0 / (v * z).powi(6);
    Ok((est.value[0], ((est.value[0] - exact) / exact).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::{SymTensor2, SymTensor3, Vec3};

    fn trace_record(omega: f64) -> TransitionRecord {
        let mut o = SymTensor3::ZERO;
        o.0[2] = 1.0;
        TransitionRecord::new(
            "t",
            omega,
            Vec3::unit(2),
            SymTensor2::diag(0.3, 0.1, -0.4),
            o,
        )
        .unwrap()
    }

    #[test]
    fn channel_names_round_trip() {
        for c in Channel::ALL {
            assert_eq!(c.short_name().parse::<Channel>().unwrap(), c);
        }
        assert!("xx".parse::<Channel>().is_err());
    }

    #[test]
    fn vacuum_gives_zero() {
        let r = [trace_record(1.0)];
        for c in Channel::ALL {
            let u = channel_potential(
                &r,
                &PermittivityModel::Constant(1.0),
                2.0,
                c,
                &Default::default(),
            )
            .unwrap();
            assert_eq!(u.value, 0.0);
        }
    }

    #[test]
    fn nonpositive_distance_rejected() {
        let r = [trace_record(1.0)];
        assert!(u_dipole(
            &r,
            &PermittivityModel::PerfectMirror,
            0.0,
            &Default::default()
        )
        .is_err());
        assert!(u_dipole(
            &r,
            &PermittivityModel::PerfectMirror,
            -1.0,
            &Default::default()
        )
        .is_err());
    }

    #[test]
    fn all_channels_attract_near_a_mirror() {
        let r = [trace_record(1.0)];
        for z in [0.1, 1.0, 10.0] {
            for c in Channel::ALL {
                let u = channel_potential(
                    &r,
                    &PermittivityModel::PerfectMirror,
                    z,
                    c,
                    &Default::default(),
                )
                .unwrap();
                assert!(u.value < 0.0, "{c} at z = {z}");
            }
        }
    }

    #[test]
    fn exchanging_integration_order_agrees() {
        let r = [trace_record(1.0)];
        let s = PotentialSettings::with_rel(1e-9);
        for model in [
            PermittivityModel::PerfectMirror,
            PermittivityModel::Constant(3.0),
        ] {
            for z in [0.3, 2.0] {
                for c in Channel::ALL {
                    let a = channel_potential(&r, &model, z, c, &s).unwrap().value;
                    let b = channel_potential_swapped(&r, &model, z, c, &s)
                        .unwrap()
                        .value;
                    assert!(((a - b) / a).abs() < 1e-7, "{c} z={z}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn trace_free_data_has_no_mixed_channel() {
        let r = [TransitionRecord::dipole_only("d", 1.0, Vec3::unit(2)).unwrap()];
        let u = u_od_trace(
            &r,
            &PermittivityModel::PerfectMirror,
            1.0,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(u.value, 0.0);
    }

    #[test]
    fn raw_and_traceless_quadrupoles_agree() {
        let q = SymTensor2([0.4, -0.2, 0.9, 0.3, -0.1, 0.25]);
        let raw = [TransitionRecord::quadrupole_only("q", 1.0, q).unwrap()];
        let tl = [TransitionRecord::quadrupole_only("q", 1.0, q.deviator()).unwrap()];
        for mode in [QuadMode::Isotropic, QuadMode::Tensor] {
            let s = PotentialSettings {
                qq_mode: mode,
                ..Default::default()
            };
            let a = u_quad(&raw, &PermittivityModel::Constant(2.5), 0.7, &s)
                .unwrap()
                .value;
            let b = u_quad(&tl, &PermittivityModel::Constant(2.5), 0.7, &s)
                .unwrap()
                .value;
            assert!(((a - b) / a).abs() < 1e-9, "{mode:?}");
        }
    }

    #[test]
    fn total_is_channel_sum() {
        let r = [trace_record(1.0)];
        let zs = [0.5, 1.0, 4.0];
        let set = total_potential(
            &r,
            &PermittivityModel::PerfectMirror,
            &zs,
            &Channel::ALL,
            &Default::default(),
        )
        .unwrap();
        for i in 0..zs.len() {
            let sum: f64 = set.curves.iter().map(|c| c.values[i]).sum();
            assert_eq!(set.total[i], sum);
        }
        let dd = u_dipole(
            &r,
            &PermittivityModel::PerfectMirror,
            1.0,
            &Default::default(),
        )
        .unwrap()
        .value;
        assert_eq!(set.curve(Channel::DipoleDipole).unwrap().values[1], dd);
        assert!(total_potential(
            &r,
            &PermittivityModel::PerfectMirror,
            &zs,
            &[],
            &Default::default()
        )
        .is_err());
        assert!(total_potential(
            &r,
            &PermittivityModel::PerfectMirror,
            &[],
            &Channel::ALL,
            &Default::default()
        )
        .is_err());
    }

    #[test]
    fn failed_points_become_nan() {
        let r = [trace_record(1.0)];
        let zs = [1.0, -1.0];
        let set = total_potential(
            &r,
            &PermittivityModel::PerfectMirror,
            &zs,
            &[Channel::DipoleDipole],
            &Default::default(),
        )
        .unwrap();
        let c = set.curve(Channel::DipoleDipole).unwrap();
        assert!(c.values[0].is_finite() && c.values[1].is_nan());
        assert_eq!(set.failure_count(), 1);
    }

    #[test]
    fn laplace_moment_identity() {
        let (v, res) = xi5_laplace_residual(1.0, 0.5, &Tolerance::relative(1e-12)).unwrap();
        assert!((v - 120.0).abs() < 1e-9);
        assert!(res < 1e-10);
    }
}
