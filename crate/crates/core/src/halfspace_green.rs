//! Scattering Green tensor of a planar dielectric half-space (interface at
//! z = 0, atom on the vacuum side z > 0) on the imaginary frequency axis.
//!
//! Everything is built from the Weyl (angular-spectrum) representation:
//!
//! ```text
//! G(q, z, z', iξ) = 1/(8π² b) Σ_σ D_σ r_σ exp(-b (z + z')),   b² = q² + ξ²
//! ```
//!
//! with the derivative factors `∂ -> L = (iq cosφ, iq sinφ, -b)` acting on the
//! first argument and `∂' -> R = (-iq cosφ, -iq sinφ, -b)` on the second.
//! At coincidence every tensor entry is a sum of monomials `q^n b^m` times a
//! trigonometric monomial in φ; the φ-integral is taken exactly and only a
//! handful of radial moments have to be integrated numerically.
//!
//! Internally the quantities carry an extra factor ξ² ("scaled"), which
//! removes the `1/ξ²` of the p-polarization dyad and makes ξ = 0 the
//! electrostatic limit rather than a removable singularity.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::tensors::{Rank4, SecondDerivativeBlock};

pub type Matrix3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PermittivityModel {
    Constant(f64),
    /// `ε(iξ) = 1 + ω_p² / (ω_0² + ξ² + γ ξ)`
    DrudeLorentz {
        plasma: f64,
        resonance: f64,
        damping: f64,
    },
    PerfectMirror,
}

impl PermittivityModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PermittivityModel::Constant(eps) => {
                if !(eps.is_finite() && eps >= 1.0) {
                    return Err(Error::domain(format!(
                        "permittivity must be finite and >= 1, got {eps}"
                    )));
                }
            }
            PermittivityModel::DrudeLorentz {
                plasma,
                resonance,
                damping,
            } => {
                for (name, v) in [
                    ("plasma", plasma),
                    ("resonance", resonance),
                    ("damping", damping),
                ] {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::domain(format!(
                            "Drude-Lorentz {name} frequency must be finite and >= 0, got {v}"
                        )));
                    }
                }
            }
            PermittivityModel::PerfectMirror => {}
        }
        Ok(())
    }

    /// `ε(iξ)`, or `None` where the medium reflects perfectly.
    pub fn at_imaginary(&self, xi: f64) -> Option<f64> {
        match *self {
            PermittivityModel::Constant(eps) => Some(eps),
            PermittivityModel::DrudeLorentz {
                plasma,
                resonance,
                damping,
            } => {
                let den = resonance * resonance + xi * xi + damping * xi;
                if den == 0.0 {
                    if plasma == 0.0 {
                        Some(1.0)
                    } else {
                        None
                    }
                } else {
                    Some(1.0 + plasma * plasma / den)
                }
            }
            PermittivityModel::PerfectMirror => None,
        }
    }

    pub fn static_value(&self) -> Option<f64> {
        self.at_imaginary(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelPair {
    pub r_s: f64,
    pub r_p: f64,
}

impl FresnelPair {
    pub const PERFECT: FresnelPair = FresnelPair {
        r_s: -1.0,
        r_p: 1.0,
    };
}

/// Reflection coefficients for decay constant `b` in vacuum at frequency iξ.
/// Homogeneous of degree zero in `(b, ξ)`.
pub(crate) fn reflection(eps: Option<f64>, b: f64, xi: f64) -> FresnelPair {
    let Some(eps) = eps else {
        return FresnelPair::PERFECT;
    };
    let dk = (eps - 1.0) * xi * xi;
    let b1 = (b * b + dk).sqrt();
    let sum = b + b1;
    // b - b1 written without cancellation
    let r_s = if dk == 0.0 { 0.0 } else { -dk / (sum * sum) };
    let r_p = (eps * b - b1) / (eps * b + b1);
    FresnelPair { r_s, r_p }
}

/// Fresnel coefficients in terms of `v = b c / ξ >= 1`.
pub fn fresnel(model: &PermittivityModel, xi: f64, v: f64) -> Result<FresnelPair> {
    model.validate()?;
    if !(v >= 1.0) || !(xi >= 0.0) {
        return Err(Error::domain(format!(
            "fresnel needs v >= 1 and ξ >= 0, got v = {v}, ξ = {xi}"
        )));
    }
    Ok(reflection(model.at_imaginary(xi), v, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    S,
    P,
}

/// One Fourier component of the Weyl expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylMode {
    pub q: f64,
    pub phi: f64,
    pub xi: f64,
    pub polarization: Polarization,
}

impl WeylMode {
    pub fn new(q: f64, phi: f64, xi: f64, polarization: Polarization) -> Result<Self> {
        if !(q >= 0.0 && xi > 0.0 && q.is_finite() && xi.is_finite() && phi.is_finite()) {
            return Err(Error::domain(format!(
                "invalid Weyl mode q = {q}, ξ = {xi}, φ = {phi}"
            )));
        }
        Ok(WeylMode {
            q,
            phi,
            xi,
            polarization,
        })
    }

    pub fn b(&self) -> f64 {
        self.q.hypot(self.xi)
    }
}

/// Deliberate corruption of the p-dyad, used as a negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DyadFault {
    FlipPOffDiagonalSign,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `∂_i` on the first argument.
pub fn left_derivative(mode: &WeylMode) -> [Complex64; 3] {
    let (s, co) = mode.phi.sin_cos();
    [I * mode.q * co, I * mode.q * s, c(-mode.b())]
}

/// `∂'_m` on the second argument.
pub fn right_derivative(mode: &WeylMode) -> [Complex64; 3] {
    let (s, co) = mode.phi.sin_cos();
    [-I * mode.q * co, -I * mode.q * s, c(-mode.b())]
}

pub fn polarization_dyad(mode: &WeylMode) -> [[Complex64; 3]; 3] {
    polarization_dyad_with(mode, None)
}

/// `e_σ⁺ ⊗ e_σ⁻`. The s-dyad has no zz entry; the p-dyad carries `-1/ξ²`.
pub fn polarization_dyad_with(mode: &WeylMode, fault: Option<DyadFault>) -> [[Complex64; 3]; 3] {
    let (s, co) = mode.phi.sin_cos();
    match mode.polarization {
        Polarization::S => [
            [c(s * s), c(-s * co), c(0.0)],
            [c(-s * co), c(co * co), c(0.0)],
            [c(0.0), c(0.0), c(0.0)],
        ],
        Polarization::P => {
            let b = mode.b();
            let q = mode.q;
            let w = -1.0 / (mode.xi * mode.xi);
            let flip = if fault == Some(DyadFault::FlipPOffDiagonalSign) {
                -1.0
            } else {
                1.0
            };
            let m = [
                [
                    c(b * b * co * co),
                    c(b * b * s * co),
                    -I * b * q * co * flip,
                ],
                [c(b * b * s * co), c(b * b * s * s), -I * b * q * s * flip],
                [I * b * q * co * flip, I * b * q * s * flip, c(q * q)],
            ];
            m.map(|row| row.map(|x| x * w))
        }
    }
}

fn mat_norm(m: &[[Complex64; 3]; 3]) -> f64 {
    m.iter().flatten().fold(0.0, |a, x| a.max(x.norm()))
}

/// Largest of `|Σ_i L_i D_ij|` and `|Σ_j D_ij R_j|`, relative to `|L| |D|`.
pub fn verify_mode_transversality_with(mode: &WeylMode, fault: Option<DyadFault>) -> f64 {
    let l = left_derivative(mode);
    let r = right_derivative(mode);
    let d = polarization_dyad_with(mode, fault);
    let scale = l.iter().fold(0.0_f64, |a, x| a.max(x.norm())) * mat_norm(&d);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for j in 0..3 {
        let left: Complex64 = (0..3).map(|i| l[i] * d[i][j]).sum();
        let right: Complex64 = (0..3).map(|k| d[j][k] * r[k]).sum();
        worst = worst.max(left.norm()).max(right.norm());
    }
    worst / scale
}

pub fn verify_mode_transversality(mode: &WeylMode) -> f64 {
    verify_mode_transversality_with(mode, None)
}

/// `|Σ_i L_i L_i - ξ²|` relative to `q² + b²`: zero up to rounding.
pub fn mode_helmholtz_residual(mode: &WeylMode) -> f64 {
    let l = left_derivative(mode);
    let lap: Complex64 = l.iter().map(|x| x * x).sum();
    let b = mode.b();
    (lap - c(mode.xi * mode.xi)).norm() / (mode.q * mode.q + b * b)
}

/// `∂_i∂_j G_km` and `G_km` of one mode (common amplitude dropped).
pub fn mode_derivative_block(mode: &WeylMode) -> SecondDerivativeBlock {
    let l = left_derivative(mode);
    let d = polarization_dyad(mode);
    let mut dd = [c(0.0); 81];
    let mut g = [c(0.0); 9];
    for k in 0..3 {
        for m in 0..3 {
            g[k * 3 + m] = d[k][m];
            for i in 0..3 {
                for j in 0..3 {
                    dd[((i * 3 + j) * 3 + k) * 3 + m] = l[i] * l[j] * d[k][m];
                }
            }
        }
    }
    SecondDerivativeBlock { dd_g: dd, g }
}

// ---------------------------------------------------------------------------
// Coincidence tables

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coef: Complex64,
    cos: u8,
    sin: u8,
    q: u8,
    b: u8,
}

impl Term {
    const fn new(re: f64, im: f64, cos: u8, sin: u8, q: u8, b: u8) -> Self {
        Term {
            coef: Complex64::new(re, im),
            cos,
            sin,
            q,
            b,
        }
    }

    fn mul(&self, o: &Term) -> Term {
        Term {
            coef: self.coef * o.coef,
            cos: self.cos + o.cos,
            sin: self.sin + o.sin,
            q: self.q + o.q,
            b: self.b + o.b,
        }
    }
}

fn double_factorial(n: i32) -> f64 {
    let mut r = 1.0;
    let mut k = n;
    while k > 1 {
        r *= k as f64;
        k -= 2;
    }
    r
}

/// `∫_0^{2π} cos^a φ sin^b φ dφ`
fn trig_moment(a: u8, b: u8) -> f64 {
    if a % 2 == 1 || b % 2 == 1 {
        return 0.0;
    }
    let (a, b) = (a as i32, b as i32);
    2.0 * PI * double_factorial(a - 1) * double_factorial(b - 1) / double_factorial(a + b)
}

const LEFT: [Term; 3] = [
    Term::new(0.0, 1.0, 1, 0, 1, 0),
    Term::new(0.0, 1.0, 0, 1, 1, 0),
    Term::new(-1.0, 0.0, 0, 0, 0, 1),
];

const RIGHT: [Term; 3] = [
    Term::new(0.0, -1.0, 1, 0, 1, 0),
    Term::new(0.0, -1.0, 0, 1, 1, 0),
    Term::new(-1.0, 0.0, 0, 0, 0, 1),
];

fn dyad_term(pol: Polarization, j: usize, k: usize) -> Option<Term> {
    match pol {
        Polarization::S => match (j, k) {
            (0, 0) => Some(Term::new(1.0, 0.0, 0, 2, 0, 0)),
            (0, 1) | (1, 0) => Some(Term::new(-1.0, 0.0, 1, 1, 0, 0)),
            (1, 1) => Some(Term::new(1.0, 0.0, 2, 0, 0, 0)),
            _ => None,
        },
        // bracket only; the -1/ξ² weight is applied with the radial moments
        Polarization::P => Some(match (j, k) {
            (0, 0) => Term::new(1.0, 0.0, 2, 0, 0, 2),
            (0, 1) | (1, 0) => Term::new(1.0, 0.0, 1, 1, 0, 2),
            (1, 1) => Term::new(1.0, 0.0, 0, 2, 0, 2),
            (0, 2) => Term::new(0.0, -1.0, 1, 0, 1, 1),
            (1, 2) => Term::new(0.0, -1.0, 0, 1, 1, 1),
            (2, 0) => Term::new(0.0, 1.0, 1, 0, 1, 1),
            (2, 1) => Term::new(0.0, 1.0, 0, 1, 1, 1),
            _ => Term::new(1.0, 0.0, 0, 0, 2, 0),
        }),
    }
}

/// Radial monomials `(polarization, power of q, power of b)` needed by the
/// coincidence tensor, its double gradient and its Laplacian.
const MONOMIALS: [(Polarization, u8, u8); 8] = [
    (Polarization::S, 0, 0),
    (Polarization::S, 2, 0),
    (Polarization::S, 0, 2),
    (Polarization::P, 2, 0),
    (Polarization::P, 0, 2),
    (Polarization::P, 4, 0),
    (Polarization::P, 2, 2),
    (Polarization::P, 0, 4),
];

pub const N_MOMENTS: usize = MONOMIALS.len();

type Entry = Vec<(usize, f64)>;

fn accumulate(entry: &mut Entry, pol: Polarization, t: &Term) {
    let angular = t.coef * trig_moment(t.cos, t.sin);
    if angular.norm() == 0.0 {
        return;
    }
    debug_assert!(
        angular.im.abs() < 1e-12 * angular.norm(),
        "complex coincidence entry"
    );
    let idx = MONOMIALS
        .iter()
        .position(|&(p, q, b)| p == pol && q == t.q && b == t.b)
        .unwrap_or_else(|| panic!("radial monomial {pol:?} q^{} b^{} not registered", t.q, t.b));
    match entry.iter_mut().find(|(i, _)| *i == idx) {
        Some((_, k)) => *k += angular.re,
        None => entry.push((idx, angular.re)),
    }
}

struct Tables {
    green: Vec<Entry>,
    grad2: Vec<Entry>,
    laplacian: Vec<Entry>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let pols = [Polarization::S, Polarization::P];
        let mut green = vec![Entry::new(); 9];
        let mut laplacian = vec![Entry::new(); 9];
        let mut grad2 = vec![Entry::new(); 81];
        for j in 0..3 {
            for k in 0..3 {
                for pol in pols {
                    let Some(d) = dyad_term(pol, j, k) else {
                        continue;
                    };
                    accumulate(&mut green[j * 3 + k], pol, &d);
                    for l in &LEFT {
                        accumulate(&mut laplacian[j * 3 + k], pol, &l.mul(l).mul(&d));
                    }
                    for i in 0..3 {
                        for m in 0..3 {
                            let t = LEFT[i].mul(&d).mul(&RIGHT[m]);
                            accumulate(&mut grad2[((i * 3 + j) * 3 + k) * 3 + m], pol, &t);
                        }
                    }
                }
            }
        }
        Tables {
            green,
            grad2,
            laplacian,
        }
    })
}

fn assemble(entry: &Entry, moments: &[f64; N_MOMENTS]) -> f64 {
    entry.iter().map(|&(idx, k)| k * moments[idx]).sum()
}

/// ξ²-scaled radial integrand of each monomial at decay constant `b`.
pub(crate) fn radial_point(eps: Option<f64>, z: f64, xi: f64, b: f64) -> [f64; N_MOMENTS] {
    let r = reflection(eps, b, xi);
    let q2 = ((b - xi) * (b + xi)).max(0.0);
    let env = (-2.0 * b * z).exp() / (8.0 * PI * PI);
    if env == 0.0 {
        return [0.0; N_MOMENTS];
    }
    let xi2 = xi * xi;
    MONOMIALS.map(|(pol, qp, bp)| {
        let w = match pol {
            Polarization::S => r.r_s * xi2,
            Polarization::P => -r.r_p,
        };
        if w == 0.0 {
            return 0.0;
        }
        env * w * q2.powi(qp as i32 / 2) * b.powi(bp as i32)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadDiagnostics {
    pub error_estimate: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

/// ξ²-scaled radial moments at coincidence for one `(z, ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceMoments {
    pub z: f64,
    pub xi: f64,
    pub moments: [f64; N_MOMENTS],
    pub diagnostics: QuadDiagnostics,
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

impl CoincidenceMoments {
    pub fn compute(model: &PermittivityModel, z: f64, xi: f64, tol: &Tolerance) -> Result<Self> {
        model.validate()?;
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::domain(format!(
                "atom-surface distance must be positive, got {z}"
            )));
        }
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(Error::domain(format!(
                "imaginary frequency must be >= 0, got {xi}"
            )));
        }
        if xi == 0.0 {
            return Ok(Self::electrostatic(model, z));
        }
        let eps = model.at_imaginary(xi);
        let est = quadrature::integrate_semi_infinite(
            |b| radial_point(eps, z, xi, b),
            xi,
            0.5 / z,
            &[],
            tol,
            "half-space radial integral",
        )?;
        Ok(CoincidenceMoments {
            z,
            xi,
            moments: est.value,
            diagnostics: QuadDiagnostics {
                error_estimate: est.error,
                evaluations: est.evaluations,
                intervals: est.intervals,
            },
        })
    }

    /// Closed-form ξ = 0 moments: `r_p = (ε-1)/(ε+1)`, `q = b`, s-part absent.
    fn electrostatic(model: &PermittivityModel, z: f64) -> Self {
        let eta = image_factor(model);
        let moments = MONOMIALS.map(|(pol, qp, bp)| match pol {
            Polarization::S => 0.0,
            Polarization::P => {
                let n = qp + bp;
                -eta * factorial(n) / (2.0 * z).powi(n as i32 + 1) / (8.0 * PI * PI)
            }
        });
        CoincidenceMoments {
            z,
            xi: 0.0,
            moments,
            diagnostics: QuadDiagnostics::default(),
        }
    }

    /// `ξ² G(r_A, r_A, iξ)`
    pub fn scaled_green(&self) -> Matrix3 {
        let t = tables();
        let mut g = [[0.0; 3]; 3];
        for (j, row) in g.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = assemble(&t.green[j * 3 + k], &self.moments);
            }
        }
        g
    }

    /// `ξ² ∂_i G_jk ∂'_m`
    pub fn scaled_grad2(&self) -> Rank4 {
        let t = tables();
        let mut out = Rank4::default();
        for (n, e) in t.grad2.iter().enumerate() {
            out.0[n] = assemble(e, &self.moments);
        }
        out
    }

    /// `ξ² Σ_i ∂_i∂_i G_jk`
    pub fn scaled_laplacian(&self) -> Matrix3 {
        let t = tables();
        let mut g = [[0.0; 3]; 3];
        for (j, row) in g.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = assemble(&t.laplacian[j * 3 + k], &self.moments);
            }
        }
        g
    }
}

/// Scale an arbitrary radial-moment vector into the Green tensor blocks.
pub(crate) fn green_from_moments(moments: &[f64; N_MOMENTS]) -> Matrix3 {
    CoincidenceMoments {
        z: 0.0,
        xi: 0.0,
        moments: *moments,
        diagnostics: QuadDiagnostics::default(),
    }
    .scaled_green()
}

pub(crate) fn grad2_from_moments(moments: &[f64; N_MOMENTS]) -> Rank4 {
    CoincidenceMoments {
        z: 0.0,
        xi: 0.0,
        moments: *moments,
        diagnostics: QuadDiagnostics::default(),
    }
    .scaled_grad2()
}

/// `(ε(0) - 1) / (ε(0) + 1)`, one for a perfect mirror.
pub fn image_factor(model: &PermittivityModel) -> f64 {
    match model.static_value() {
        None => 1.0,
        Some(eps) => (eps - 1.0) / (eps + 1.0),
    }
}

/// Coincidence Green tensor; `grad2` and `lap_left` are filled in as well.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenEval {
    pub g: Matrix3,
    pub grad2: Option<Rank4>,
    pub lap_left: Option<Matrix3>,
    pub diagnostics: QuadDiagnostics,
}

pub fn green_coincidence(
    model: &PermittivityModel,
    z: f64,
    xi: f64,
    tol: &Tolerance,
) -> Result<GreenEval> {
    if xi == 0.0 {
        return Err(Error::domain(
            "ξ = 0 is the electrostatic limit; use static_green",
        ));
    }
    let m = CoincidenceMoments::compute(model, z, xi, tol)?;
    let inv = 1.0 / (xi * xi);
    Ok(GreenEval {
        g: m.scaled_green().map(|r| r.map(|x| x * inv)),
        grad2: Some(m.scaled_grad2().scale(inv)),
        lap_left: Some(m.scaled_laplacian().map(|r| r.map(|x| x * inv))),
        diagnostics: m.diagnostics,
    })
}

/// `Γ = lim_{ξ→0} (ξ²/c²) G = -η diag(1, 1, 2) / (32π z³)`.
pub fn static_green(model: &PermittivityModel, z: f64) -> Result<Matrix3> {
    model.validate()?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain(format!(
            "atom-surface distance must be positive, got {z}"
        )));
    }
    let s = -image_factor(model) / (32.0 * PI * z * z * z);
    Ok([[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, 2.0 * s]])
}

/// Electrostatic double gradient `lim ξ² ∂_i G_jk ∂'_m`.
pub fn static_grad2(model: &PermittivityModel, z: f64) -> Result<Rank4> {
    Ok(CoincidenceMoments::compute(model, z, 0.0, &Tolerance::default())?.scaled_grad2())
}

pub fn green_grad2(model: &PermittivityModel, z: f64, xi: f64, tol: &Tolerance) -> Result<Rank4> {
    green_coincidence(model, z, xi, tol).map(|e| e.grad2.expect("grad2 is always assembled"))
}

/// Left and right divergences of a double-gradient kernel relative to its
/// largest entry: `Σ_i K_iikm` and `Σ_k K_ijkk`.
pub fn grad2_transversality_residual(k: &Rank4) -> f64 {
    let scale = k.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for a in 0..3 {
        for b in 0..3 {
            let left: f64 = (0..3).map(|i| k.get(i, i, a, b)).sum();
            let right: f64 = (0..3).map(|n| k.get(a, b, n, n)).sum();
            worst = worst.max(left.abs()).max(right.abs());
        }
    }
    worst / scale
}

/// `‖ΔG - (ξ²/c²) G‖ / ‖(ξ²/c²) G‖` with all blocks from one quadrature.
pub fn verify_helmholtz(
    model: &PermittivityModel,
    z: f64,
    xi: f64,
    tol: &Tolerance,
) -> Result<f64> {
    if xi == 0.0 {
        return Err(Error::domain("Helmholtz check needs ξ > 0"));
    }
    let m = CoincidenceMoments::compute(model, z, xi, tol)?;
    let g = m.scaled_green();
    let lap = m.scaled_laplacian();
    let xi2 = xi * xi;
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for j in 0..3 {
        for k in 0..3 {
            num = num.max((lap[j][k] - xi2 * g[j][k]).abs());
            den = den.max((xi2 * g[j][k]).abs());
        }
    }
    Ok(if den == 0.0 { num } else { num / den })
}
