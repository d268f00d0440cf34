#![allow(dead_code)]

use std::f64::consts::PI;

use cp_multipole::response::TransitionRecord;
use cp_multipole::tensors::{Rank4, SymTensor2, SymTensor3, Vec3};
use rand::Rng;

pub type Mat = [[f64; 3]; 3];

/// Uniform random rotation (Shoemake's quaternion construction).
pub fn random_rotation<R: Rng>(rng: &mut R) -> Mat {
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (x, y, z, w) = (
        a * (2.0 * PI * u2).sin(),
        a * (2.0 * PI * u2).cos(),
        b * (2.0 * PI * u3).sin(),
        b * (2.0 * PI * u3).cos(),
    );
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
        ],
        [
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
        ],
        [
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

pub fn rotate(r: &Mat, a: &Mat) -> Mat {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    s += r[i][k] * a[k][l] * r[j][l];
                }
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn random_spd<R: Rng>(rng: &mut R) -> SymTensor2 {
    let m: Mat = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] =
                (0..3).map(|k| m[i][k] * m[j][k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
        }
    }
    SymTensor2::from_matrix(&a)
}

/// Average of `(R a Rᵀ)_ij K_ijkm (R b Rᵀ)_km` over `n` sampled rotations.
pub fn monte_carlo_average<R: Rng>(
    rng: &mut R,
    a: &SymTensor2,
    b: &SymTensor2,
    k: &Rank4,
    n: usize,
) -> f64 {
    let (am, bm) = (a.to_matrix(), b.to_matrix());
    let mut acc = 0.0;
    for _ in 0..n {
        let r = random_rotation(rng);
        let ra = SymTensor2::from_matrix(&rotate(&r, &am));
        let rb = SymTensor2::from_matrix(&rotate(&r, &bm));
        acc += k.contract_pair(&ra, &rb);
    }
    acc / n as f64
}

/// Octupole whose only content is the trace vector `t` (`O_ill = t_i`).
pub fn pure_trace_octupole(t: Vec3) -> SymTensor3 {
    SymTensor3::pure_trace(&(t * 0.2))
}

/// Single transition at `omega` with `d ∥ T ∥ ẑ` and a uniaxial quadrupole.
pub fn single_transition(omega: f64) -> Vec<TransitionRecord> {
    vec![TransitionRecord::new(
        "0-1",
        omega,
        Vec3::unit(2),
        SymTensor2::diag(-0.5, -0.5, 1.0),
        pure_trace_octupole(Vec3::unit(2)),
    )
    .unwrap()]
}

/// Rotationally averaged set: one record per Cartesian axis for the
/// dipole/octupole part and five traceless basis records for the quadrupole.
pub fn isotropic_set(omega: f64) -> Vec<TransitionRecord> {
    let mut out = Vec::new();
    for a in 0..3 {
        let d = Vec3::unit(a);
        out.push(
            TransitionRecord::new(
                format!("p{a}"),
                omega,
                d,
                SymTensor2::ZERO,
                pure_trace_octupole(d),
            )
            .unwrap(),
        );
    }
    let s2 = 0.5f64.sqrt();
    let s6 = 1.0 / 6f64.sqrt();
    let basis = [
        [0.0, 0.0, 0.0, s2, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, s2, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, s2],
        [s2, -s2, 0.0, 0.0, 0.0, 0.0],
        [-s6, -s6, 2.0 * s6, 0.0, 0.0, 0.0],
    ];
    for (k, b) in basis.iter().enumerate() {
        out.push(
            TransitionRecord::quadrupole_only(format!("d{k}"), omega, SymTensor2(*b)).unwrap(),
        );
    }
    out
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}
