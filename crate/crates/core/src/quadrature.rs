//! Adaptive Gauss–Kronrod quadrature (10-point Gauss / 21-point Kronrod pair).
//!
//! Integrands are vector valued (`[f64; N]`) so that several radial moments
//! sharing the same exponential envelope are integrated on one partition.
//! The error of an interval is the max-norm of the Kronrod–Gauss difference,
//! and convergence is declared when the summed interval errors drop below
//! `max(abs, rel * |I|_inf)`.

use crate::error::{Error, QuadratureFailure, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance {
            rel,
            abs: 0.0,
            max_intervals: 2000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::relative(1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
    // Too narrow to split further in double precision.
    exhausted: bool,
}

fn max_norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn kronrod21<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];

    let fc = f(center);
    for c in 0..N {
        kron[c] = WGK[10] * fc[c];
    }
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            kron[c] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * s;
            }
        }
    }

    let mut error = 0.0_f64;
    for c in 0..N {
        kron[c] *= half;
        gauss[c] *= half;
        if !kron[c].is_finite() {
            return Err(Error::domain(format!(
                "integrand is not finite on [{a:e}, {b:e}]"
            )));
        }
        error = error.max((kron[c] - gauss[c]).abs());
    }
    let exhausted = half.abs() <= 4.0 * f64::EPSILON * center.abs().max(f64::MIN_POSITIVE);
    Ok(Segment {
        a,
        b,
        value: kron,
        error,
        exhausted,
    })
}

/// Integrates `f` over `[a, b]`, starting from a partition split at the
/// supplied breakpoints (those outside `(a, b)` are ignored).
pub fn integrate<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: &Tolerance,
    context: &str,
) -> Result<Estimate<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::domain(format!(
            "{context}: invalid interval [{a}, {b}]"
        )));
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut segments: Vec<Segment<N>> = Vec::new();
    for w in edges.windows(2) {
        segments.push(kronrod21(&mut f, w[0], w[1])?);
    }
    let mut evaluations = 21 * segments.len();

    loop {
        let mut total = [0.0; N];
        let mut err = 0.0;
        for s in &segments {
            for c in 0..N {
                total[c] += s.value[c];
            }
            err += s.error;
        }
        let target = tol.abs.max(tol.rel * max_norm(&total));

        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.exhausted)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);

        if err <= target {
            return Ok(Estimate {
                value: total,
                error: err,
                intervals: segments.len(),
                evaluations,
            });
        }
        let Some(worst) = worst.filter(|_| segments.len() < tol.max_intervals) else {
            return Err(Error::NonConvergence(QuadratureFailure {
                context: context.to_string(),
                estimate: max_norm(&total),
                error: err,
                tolerance: target,
                intervals: segments.len(),
                evaluations,
            }));
        };

        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(kronrod21(&mut f, s.a, mid)?);
        segments.push(kronrod21(&mut f, mid, s.b)?);
        evaluations += 42;
    }
}

/// Integrates `f` over `[a, inf)` using `x = a + scale * t / (1 - t)`.
///
/// `breakpoints` are given in the original variable `x`.
pub fn integrate_semi_infinite<const N: usize, F>(
    mut f: F,
    a: f64,
    scale: f64,
    breakpoints: &[f64],
    tol: &Tolerance,
    context: &str,
) -> Result<Estimate<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!(
            "{context}: mapping scale must be positive, got {scale}"
        )));
    }
    let cuts: Vec<f64> = breakpoints
        .iter()
        .filter(|&&x| x > a && x.is_finite())
        .map(|&x| (x - a) / (scale + x - a))
        .collect();
    integrate(
        |t| {
            let one_minus = 1.0 - t;
            let x = a + scale * t / one_minus;
            let jac = scale / (one_minus * one_minus);
            let mut v = f(x);
            for c in v.iter_mut() {
                // Exponentially decaying integrands underflow at the far end.
                *c = if *c == 0.0 { 0.0 } else { *c * jac };
            }
            v
        },
        0.0,
        1.0,
        &cuts,
        tol,
        context,
    )
}

/// Scalar convenience wrapper around [`integrate_semi_infinite`].
pub fn semi_infinite_scalar<F>(
    mut f: F,
    a: f64,
    scale: f64,
    tol: &Tolerance,
    context: &str,
) -> Result<Estimate<1>>
where
    F: FnMut(f64) -> f64,
{
    integrate_semi_infinite(|x| [f(x)], a, scale, &[], tol, context)
}
