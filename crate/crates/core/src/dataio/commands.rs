use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{
    contracted_trace_scalar, convergence_order, fit_scaling_exponent, ratio_od_do_over_qq,
    retarded_dd, retarded_do_trace, retarded_od_trace, retarded_qq,
};
use crate::dataio::config::RunConfig;
use crate::dataio::dataset::AtomDataset;
use crate::dataio::output::write_csv;
use crate::error::{Error, Result};
use crate::halfspace_green::{
    grad2_transversality_residual, green_coincidence, green_grad2, mode_derivative_block,
    mode_helmholtz_residual, static_green, verify_helmholtz, verify_mode_transversality_with,
    DyadFault, PermittivityModel, Polarization, WeylMode,
};
use crate::potentials::{
    channel_potential, total_potential, xi5_laplace_residual, Channel, PotentialSet,
    PotentialSettings, QuadMode,
};
use crate::quadrature::Tolerance;
use crate::response::{alpha_dd, alpha_do, alpha_od, isotropic_scalars, TransitionRecord};
use crate::tensors::{
    octupole_trace_vector, traceless_octupole, traceless_quadrupole, verify_trace_survival,
    SymTensor2, SymTensor3, Vec3,
};

pub fn cmd_potential<W: Write>(
    config: &RunConfig,
    dataset: &AtomDataset,
    csv_out: W,
) -> Result<PotentialSet> {
    config.validate()?;
    let records = dataset.records()?;
    let (_, z) = config.z_grid();
    let set = total_potential(
        &records,
        &config.permittivity(),
        &z,
        &config.channels,
        &config.settings(),
    )?;
    write_csv(csv_out, &set, config.units)?;
    Ok(set)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, residual: f64, threshold: f64) -> Self {
        Check {
            name,
            residual,
            threshold,
            passed: residual <= threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub fault: Option<DyadFault>,
    pub seed: u64,
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

fn random_sym2(rng: &mut ChaCha8Rng) -> SymTensor2 {
    SymTensor2(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

fn random_sym3(rng: &mut ChaCha8Rng) -> SymTensor3 {
    SymTensor3(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

fn random_mode(rng: &mut ChaCha8Rng) -> WeylMode {
    let pol = if rng.gen_bool(0.5) {
        Polarization::S
    } else {
        Polarization::P
    };
    WeylMode {
        q: rng.gen_range(0.0..5.0),
        phi: rng.gen_range(0.0..2.0 * PI),
        xi: rng.gen_range(0.05..5.0),
        polarization: pol,
    }
}

/// Runs the invariant suites and reports the worst residual of each.
pub fn cmd_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();

    let mut trans = 0.0_f64;
    let mut helm = 0.0_f64;
    for pol in [Polarization::S, Polarization::P] {
        for iq in 0..10 {
            for ip in 0..10 {
                let mode = WeylMode {
                    q: 0.5 * iq as f64,
                    phi: 2.0 * PI * ip as f64 / 10.0,
                    xi: 0.7,
                    polarization: pol,
                };
                trans = trans.max(verify_mode_transversality_with(&mode, opts.fault));
                helm = helm.max(mode_helmholtz_residual(&mode));
            }
        }
    }
    checks.push(Check::new("mode_transversality", trans, 1e-14));
    checks.push(Check::new("mode_helmholtz", helm, 1e-14));

    let tol = Tolerance::relative(1e-12);
    let grid = logspace(0.1, 10.0, 10);
    let mut g_trans = 0.0_f64;
    let mut g_helm = 0.0_f64;
    for model in [
        PermittivityModel::PerfectMirror,
        PermittivityModel::Constant(2.0),
    ] {
        for &z in &grid {
            for &xi in &grid {
                g_trans = g_trans.max(grad2_transversality_residual(&green_grad2(
                    &model, z, xi, &tol,
                )?));
                g_helm = g_helm.max(verify_helmholtz(&model, z, xi, &tol)?);
            }
        }
    }
    checks.push(Check::new("green_transversality", g_trans, 1e-10));
    checks.push(Check::new("green_helmholtz", g_helm, 1e-10));

    let kernel = green_grad2(&PermittivityModel::Constant(3.0), 0.8, 0.9, &tol)?;
    let mut q_drop = 0.0_f64;
    let mut q_trace = 0.0_f64;
    for _ in 0..100 {
        let (a, b) = (random_sym2(&mut rng), random_sym2(&mut rng));
        let raw = kernel.contract_pair(&a, &b);
        let tl = kernel.contract_pair(&a.deviator(), &b.deviator());
        q_drop = q_drop.max((raw - tl).abs() / raw.abs().max(tl.abs()).max(f64::MIN_POSITIVE));
        q_trace = q_trace.max(traceless_quadrupole(&a).trace().abs() / a.frobenius_norm());
    }
    checks.push(Check::new("quadrupole_trace_drops_out", q_drop, 1e-12));
    checks.push(Check::new("traceless_quadrupole", q_trace, 1e-14));

    let mut o_trace = 0.0_f64;
    let mut survival = 0.0_f64;
    let mut pure = 0.0_f64;
    for _ in 0..100 {
        let o = random_sym3(&mut rng);
        let omega = traceless_octupole(&o);
        o_trace = o_trace.max(octupole_trace_vector(&omega).norm() / o.frobenius_norm());
        let mode = random_mode(&mut rng);
        let block = mode_derivative_block(&mode);
        let k_sq = -mode.xi * mode.xi;
        survival = survival.max(verify_trace_survival(&o, &block, k_sq));
        let t = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        pure = pure.max(verify_trace_survival(
            &SymTensor3::pure_trace(&t),
            &block,
            k_sq,
        ));
    }
    checks.push(Check::new("traceless_octupole", o_trace, 1e-14));
    checks.push(Check::new("trace_survival", survival, 1e-12));
    checks.push(Check::new("trace_survival_pure_trace", pure, 1e-12));

    let mut laplace = 0.0_f64;
    for _ in 0..20 {
        let (v, z) = (rng.gen_range(1.0..10.0), rng.gen_range(0.1..10.0));
        laplace = laplace.max(xi5_laplace_residual(v, z, &tol)?.1);
    }
    let (at_half, _) = xi5_laplace_residual(1.0, 0.5, &tol)?;
    laplace = laplace.max(((at_half - 120.0) / 120.0).abs());
    checks.push(Check::new("xi5_laplace_identity", laplace, 1e-10));

    let mut stat = 0.0_f64;
    for model in [
        PermittivityModel::PerfectMirror,
        PermittivityModel::Constant(2.0),
    ] {
        let z = 1.3;
        let xi = 1e-6 / z;
        let gamma = static_green(&model, z)?;
        let g = green_coincidence(&model, z, xi, &tol)?.g;
        for i in 0..3 {
            stat = stat.max((g[i][i] * xi * xi - gamma[i][i]).abs() / gamma[i][i].abs());
        }
    }
    checks.push(Check::new("static_limit", stat, 1e-5));

    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub atom: String,
    /// Contracted static scalars `Tr α_od(0)`, `Tr α_do(0)` and `α_qq(0)`.
    pub alpha_od: f64,
    pub alpha_do: f64,
    pub alpha_qq: f64,
    pub polarizability_ratio: f64,
    pub prefactor: f64,
    pub potential_ratio: f64,
    /// `(U_od + U_do) / U_qq` from quadrature at `numerical_z` over a
    /// perfect mirror.
    pub numerical_potential_ratio: Option<f64>,
    pub numerical_z: Option<f64>,
}

pub fn cmd_ratio(dataset: &AtomDataset, numerical: bool) -> Result<RatioReport> {
    let records = dataset.records()?;
    if records.iter().all(|r| r.quadrupole.frobenius_norm() == 0.0) {
        return Err(Error::Data(format!(
            "dataset `{}` has no quadrupole moments",
            dataset.atom
        )));
    }
    let s = isotropic_scalars(&records);
    let od = contracted_trace_scalar(s.octupole_dipole);
    let d_o = contracted_trace_scalar(s.dipole_octupole);
    let potential_ratio = ratio_od_do_over_qq(od, d_o, s.quadrupole)?;
    let (numerical_potential_ratio, numerical_z) = if numerical {
        let w_min = records
            .iter()
            .map(|r| r.omega)
            .fold(f64::INFINITY, f64::min);
        let z = 1e3 / w_min;
        let set = PotentialSettings::default();
        let pm = PermittivityModel::PerfectMirror;
        let u = |c| channel_potential(&records, &pm, z, c, &set).map(|e| e.value);
        let qq = u(Channel::QuadQuad)?;
        let mixed = u(Channel::OctupoleDipoleTrace)? + u(Channel::DipoleOctupoleTrace)?;
        (Some(mixed / qq), Some(z))
    } else {
        (None, None)
    };
    Ok(RatioReport {
        atom: dataset.atom.clone(),
        alpha_od: od,
        alpha_do: d_o,
        alpha_qq: s.quadrupole,
        polarizability_ratio: s.polarizability_ratio()?,
        prefactor: 2.0 / 15.0,
        potential_ratio,
        numerical_potential_ratio,
        numerical_z,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoteRow {
    pub channel: Channel,
    pub power: i32,
    pub analytic: f64,
    pub fitted: f64,
    pub deviation: f64,
    pub exponent: Option<f64>,
    pub convergence_order: Option<f64>,
}

fn analytic_coefficient(
    channel: Channel,
    records: &[TransitionRecord],
    model: &PermittivityModel,
) -> Result<(f64, i32)> {
    let c = match channel {
        Channel::DipoleDipole => retarded_dd(&alpha_dd(records, 0.0)?, model)?,
        Channel::QuadQuad => retarded_qq(isotropic_scalars(records).quadrupole, model)?,
        Channel::OctupoleDipoleTrace => retarded_od_trace(&alpha_od(records, 0.0)?, model)?,
        Channel::DipoleOctupoleTrace => retarded_do_trace(&alpha_do(records, 0.0)?, model)?,
    };
    Ok((c.coefficient, c.power))
}

/// Retarded sweep over `z ω_min ∈ [10, 10⁴]`: coefficient at `10³/ω_min`,
/// exponent over `[10², 10⁴]/ω_min`, convergence order over `[10, 10²]/ω_min`.
pub fn cmd_asymptote(config: &RunConfig, dataset: &AtomDataset) -> Result<Vec<AsymptoteRow>> {
    config.validate()?;
    let records = dataset.records()?;
    let model = config.permittivity();
    let w_min = records
        .iter()
        .map(|r| r.omega)
        .fold(f64::INFINITY, f64::min);
    let z: Vec<f64> = (0..13)
        .map(|k| 10f64.powf(1.0 + k as f64 / 4.0) / w_min)
        .collect();
    let settings = config.settings();
    if config.qq_mode == QuadMode::Tensor && config.channels.contains(&Channel::QuadQuad) {
        log::warn!("the analytic quadrupole coefficient assumes the isotropic contraction");
    }
    let set = total_potential(&records, &model, &z, &config.channels, &settings)?;
    let mut rows = Vec::new();
    for curve in &set.curves {
        let (analytic, power) = analytic_coefficient(curve.channel, &records, &model)?;
        if let Some(msg) = curve.failures.iter().flatten().next() {
            return Err(Error::Data(format!(
                "{} sweep failed: {msg}",
                curve.channel
            )));
        }
        let scaled: Vec<f64> = curve
            .values
            .iter()
            .zip(&z)
            .map(|(u, z)| u * z.powi(power))
            .collect();
        let fitted = scaled[8];
        let deviation = if analytic != 0.0 {
            (fitted / analytic - 1.0).abs()
        } else if fitted == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let exponent = fit_scaling_exponent(&z, &curve.values, (z[4], z[12])).ok();
        let convergence = if analytic != 0.0 {
            convergence_order(&z[..5], &scaled[..5], analytic).ok()
        } else {
            None
        };
        rows.push(AsymptoteRow {
            channel: curve.channel,
            power,
            analytic,
            fitted,
            deviation,
            exponent,
            convergence_order: convergence,
        });
    }
    Ok(rows)
}
