//! Symmetric Cartesian multipole tensors.
//!
//! Rank-2 and rank-3 tensors store only their independent components, so
//! symmetry is a property of the type. Component order (also used by the
//! dataset files):
//!
//! * rank 2: `xx, yy, zz, xy, xz, yz`
//! * rank 3: `xxx, yyy, zzz, xxy, xxz, xyy, yyz, xzz, yzz, xyz`
//!
//! Octupole moments follow the `e (r ⊗ r ⊗ r) / 6` normalization; the trace
//! vector `T_i = O_ill` is taken from that tensor as stored.

use std::f64::consts::PI;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance used for trace identities on double-precision data.
pub const TRACE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn unit(axis: usize) -> Self {
        let mut v = [0.0; 3];
        v[axis] = 1.0;
        Vec3(v)
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Outer product `a ⊗ b` as a plain matrix.
    pub fn outer(&self, other: &Vec3) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[i] * other.0[j];
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3(self.0.map(|x| x * s))
    }
}

const IDX2: [[usize; 3]; 3] = [[0, 3, 4], [3, 1, 5], [4, 5, 2]];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2(pub [f64; 6]);

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2([0.0; 6]);

    pub fn identity() -> Self {
        SymTensor2([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    }

    pub fn diag(x: f64, y: f64, z: f64) -> Self {
        SymTensor2([x, y, z, 0.0, 0.0, 0.0])
    }

    /// Symmetrizes an arbitrary matrix.
    pub fn from_matrix(m: &[[f64; 3]; 3]) -> Self {
        let mut c = [0.0; 6];
        for i in 0..3 {
            for j in i..3 {
                c[IDX2[i][j]] = 0.5 * (m[i][j] + m[j][i]);
            }
        }
        SymTensor2(c)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[IDX2[i][j]]
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.get(i, j);
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// Frobenius inner product `a_ij b_ij`.
    pub fn double_dot(&self, other: &SymTensor2) -> f64 {
        let d: f64 = (0..3).map(|i| self.0[i] * other.0[i]).sum();
        let o: f64 = (3..6).map(|i| self.0[i] * other.0[i]).sum();
        d + 2.0 * o
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.double_dot(self).sqrt()
    }

    /// Traceless part `Q - Tr(Q) I / 3`.
    pub fn deviator(&self) -> Self {
        let t = self.trace() / 3.0;
        let mut c = self.0;
        for x in c.iter_mut().take(3) {
            *x -= t;
        }
        SymTensor2(c)
    }

    pub fn scale(&self, s: f64) -> Self {
        SymTensor2(self.0.map(|x| x * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, o: SymTensor2) -> SymTensor2 {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(o.0) {
            *x += y;
        }
        SymTensor2(c)
    }
}

/// Index of the independent rank-3 component with the given multiplicities
/// of x, y and z.
fn idx3(i: usize, j: usize, k: usize) -> usize {
    let mut n = [0u8; 3];
    n[i] += 1;
    n[j] += 1;
    n[k] += 1;
    match n {
        [3, 0, 0] => 0,
        [0, 3, 0] => 1,
        [0, 0, 3] => 2,
        [2, 1, 0] => 3,
        [2, 0, 1] => 4,
        [1, 2, 0] => 5,
        [0, 2, 1] => 6,
        [1, 0, 2] => 7,
        [0, 1, 2] => 8,
        [1, 1, 1] => 9,
        _ => unreachable!("rank-3 index multiset"),
    }
}

/// Canonical index triple of each stored component.
const CANON3: [[usize; 3]; 10] = [
    [0, 0, 0],
    [1, 1, 1],
    [2, 2, 2],
    [0, 0, 1],
    [0, 0, 2],
    [0, 1, 1],
    [1, 1, 2],
    [0, 2, 2],
    [1, 2, 2],
    [0, 1, 2],
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor3(pub [f64; 10]);

impl SymTensor3 {
    pub const ZERO: SymTensor3 = SymTensor3([0.0; 10]);

    /// Builds a tensor from a function that is already symmetric in its
    /// arguments; only canonical index triples are evaluated.
    pub fn from_symmetric_fn(f: impl Fn(usize, usize, usize) -> f64) -> Self {
        SymTensor3(CANON3.map(|[i, j, k]| f(i, j, k)))
    }

    /// Symmetrizes an arbitrary rank-3 function over all index permutations.
    pub fn symmetrized(f: impl Fn(usize, usize, usize) -> f64) -> Self {
        Self::from_symmetric_fn(|i, j, k| {
            (f(i, j, k) + f(i, k, j) + f(j, i, k) + f(j, k, i) + f(k, i, j) + f(k, j, i)) / 6.0
        })
    }

    /// `(δ_ij t_k + δ_ik t_j + δ_jk t_i)`; its trace vector is `5 t`.
    pub fn pure_trace(t: &Vec3) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Self::from_symmetric_fn(|i, j, k| d(i, j) * t[k] + d(i, k) * t[j] + d(j, k) * t[i])
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.0[idx3(i, j, k)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    s += self.get(i, j, k).powi(2);
                }
            }
        }
        s.sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        SymTensor3(self.0.map(|x| x * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// `Θ = (3Q - Tr(Q) I) / 2`.
pub fn traceless_quadrupole(q: &SymTensor2) -> SymTensor2 {
    q.deviator().scale(1.5)
}

/// Trace vector `t_i = O_ill`. All pair traces of a symmetric tensor coincide.
pub fn octupole_trace_vector(o: &SymTensor3) -> Vec3 {
    let mut t = [0.0; 3];
    for (i, ti) in t.iter_mut().enumerate() {
        *ti = (0..3).map(|l| o.get(i, l, l)).sum();
    }
    Vec3(t)
}

/// `Ω_ijk = (5 O_ijk - O_ill δ_jk - O_jll δ_ik - O_kll δ_ij) / 2`.
pub fn traceless_octupole(o: &SymTensor3) -> SymTensor3 {
    let t = octupole_trace_vector(o);
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    SymTensor3::from_symmetric_fn(|i, j, k| {
        0.5 * (5.0 * o.get(i, j, k) - t[i] * d(j, k) - t[j] * d(i, k) - t[k] * d(i, j))
    })
}

/// Coefficients `(c3, c1)` with `cos³Θ = c3 Y_30(Θ) + c1 Y_10(Θ)`.
pub fn zzz_spherical_coefficients() -> (f64, f64) {
    (0.8 * (PI / 7.0).sqrt(), 1.2 * (PI / 3.0).sqrt())
}

/// `Y_10(Θ) = sqrt(3/4π) cosΘ`
pub fn y10(theta: f64) -> f64 {
    (3.0 / (4.0 * PI)).sqrt() * theta.cos()
}

/// `Y_30(Θ) = sqrt(7/16π) (5cos³Θ - 3cosΘ)`
pub fn y30(theta: f64) -> f64 {
    let c = theta.cos();
    (7.0 / (16.0 * PI)).sqrt() * (5.0 * c * c * c - 3.0 * c)
}

/// Isotropic average of `a_i b_j`: `(a·b / 3) δ_ij`.
pub fn rotational_average_rank2(a: &Vec3, b: &Vec3) -> SymTensor2 {
    SymTensor2::identity().scale(a.dot(b) / 3.0)
}

/// Weight matrix of the fourth-rank isotropic averaging tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicAvg4 {
    pub prefactor: f64,
    pub weights: [[f64; 3]; 3],
}

impl IsotropicAvg4 {
    pub const STANDARD: IsotropicAvg4 = IsotropicAvg4 {
        prefactor: 1.0 / 30.0,
        weights: [[4.0, -1.0, -1.0], [-1.0, 4.0, -1.0], [-1.0, -1.0, 4.0]],
    };

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.weights.map(|row| row.map(|w| w * self.prefactor))
    }

    /// Contracts kernel invariants `(K_iikk, K_ijij, K_ijji)` with the
    /// moment invariants `(Tr a Tr b, a:b, a:bᵀ)`.
    pub fn contract(&self, kernel: &[f64; 3], moments: &[f64; 3]) -> f64 {
        let mut s = 0.0;
        for p in 0..3 {
            for q in 0..3 {
                s += kernel[p] * self.weights[p][q] * moments[q];
            }
        }
        s * self.prefactor
    }
}

/// Dense real rank-4 array `K[i][j][k][m]`, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank4(pub [f64; 81]);

impl Default for Rank4 {
    fn default() -> Self {
        Rank4([0.0; 81])
    }
}

#[inline]
fn flat4(i: usize, j: usize, k: usize, m: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + m
}

impl Rank4 {
    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut d = [0.0; 81];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for m in 0..3 {
                        d[flat4(i, j, k, m)] = f(i, j, k, m);
                    }
                }
            }
        }
        Rank4(d)
    }

    /// Accepts a flat row-major slice; anything but 81 entries is rejected.
    pub fn from_slice(data: &[f64]) -> Result<Self> {
        let arr: [f64; 81] = data.try_into().map_err(|_| {
            Error::Shape(format!(
                "rank-4 kernel needs 3x3x3x3 = 81 entries, got {}",
                data.len()
            ))
        })?;
        Ok(Rank4(arr))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, m: usize) -> f64 {
        self.0[flat4(i, j, k, m)]
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, k: usize, m: usize, v: f64) {
        self.0[flat4(i, j, k, m)] += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Rank4(self.0.map(|x| x * s))
    }

    /// `(K_iikk, K_ijij, K_ijji)`.
    pub fn isotropic_invariants(&self) -> [f64; 3] {
        let mut x = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                x[0] += self.get(i, i, j, j);
                x[1] += self.get(i, j, i, j);
                x[2] += self.get(i, j, j, i);
            }
        }
        x
    }

    /// `a_ij K_ijkm b_km`.
    pub fn contract_pair(&self, a: &SymTensor2, b: &SymTensor2) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let aij = a.get(i, j);
                if aij == 0.0 {
                    continue;
                }
                for k in 0..3 {
                    for m in 0..3 {
                        s += aij * self.get(i, j, k, m) * b.get(k, m);
                    }
                }
            }
        }
        s
    }
}

/// Isotropically averaged contraction `<a_ij b_km> K_ijkm` over all rigid
/// rotations of the pair `(a, b)`.
pub fn rotational_average_rank4(a: &SymTensor2, b: &SymTensor2, kernel: &Rank4) -> f64 {
    let moments = [a.trace() * b.trace(), a.double_dot(b), a.double_dot(b)];
    IsotropicAvg4::STANDARD.contract(&kernel.isotropic_invariants(), &moments)
}

/// Second-derivative data of one Green-tensor evaluation: `∂_i∂_j G_km` and
/// `G_km`, both complex so that single Weyl modes can be represented.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondDerivativeBlock {
    pub dd_g: [Complex64; 81],
    pub g: [Complex64; 9],
}

impl SecondDerivativeBlock {
    pub fn from_slices(dd_g: &[Complex64], g: &[Complex64]) -> Result<Self> {
        let dd_g: [Complex64; 81] = dd_g
            .try_into()
            .map_err(|_| Error::Shape(format!("∂∂G block needs 81 entries, got {}", dd_g.len())))?;
        let g: [Complex64; 9] = g
            .try_into()
            .map_err(|_| Error::Shape(format!("G block needs 9 entries, got {}", g.len())))?;
        Ok(SecondDerivativeBlock { dd_g, g })
    }

    #[inline]
    pub fn dd(&self, i: usize, j: usize, k: usize, m: usize) -> Complex64 {
        self.dd_g[flat4(i, j, k, m)]
    }

    #[inline]
    pub fn green(&self, k: usize, m: usize) -> Complex64 {
        self.g[k * 3 + m]
    }
}

/// Residual of `O_ijk ∂_i∂_j G_km = (2/5) Ω_ijk ∂_i∂_j G_km - (k²/5) O_kll G_km`,
/// where `k_sq` is defined through `Δ G = -k_sq G` (so `k_sq = -ξ²` on the
/// imaginary axis). Returned relative to the largest of the three terms.
pub fn verify_trace_survival(o: &SymTensor3, block: &SecondDerivativeBlock, k_sq: f64) -> f64 {
    let omega = traceless_octupole(o);
    let t = octupole_trace_vector(o);
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for m in 0..3 {
        let mut lhs = Complex64::new(0.0, 0.0);
        let mut traceless = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let d = block.dd(i, j, k, m);
                    lhs += d * o.get(i, j, k);
                    traceless += d * omega.get(i, j, k);
                }
            }
        }
        let traceless = traceless * 0.4;
        let trace: Complex64 =
            (0..3).map(|k| block.green(k, m) * t[k]).sum::<Complex64>() * (-k_sq / 5.0);
        worst = worst.max((lhs - traceless - trace).norm());
        scale = scale
            .max(lhs.norm())
            .max(traceless.norm())
            .max(trace.norm());
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym2() -> impl Strategy<Value = SymTensor2> {
        prop::array::uniform6(-10.0..10.0f64).prop_map(SymTensor2)
    }

    fn sym3() -> impl Strategy<Value = SymTensor3> {
        prop::array::uniform10(-10.0..10.0f64).prop_map(SymTensor3)
    }

    #[test]
    fn quadrupole_identity_is_pure_trace() {
        assert_eq!(
            traceless_quadrupole(&SymTensor2::identity()),
            SymTensor2::ZERO
        );
    }

    #[test]
    fn quadrupole_uniaxial() {
        let theta = traceless_quadrupole(&SymTensor2::diag(1.0, 0.0, 0.0));
        assert_eq!(theta, SymTensor2::diag(1.0, -0.5, -0.5));
    }

    #[test]
    fn octupole_zzz_only() {
        let mut o = SymTensor3::ZERO;
        o.0[2] = 1.0;
        let omega = traceless_octupole(&o);
        assert_eq!(omega.get(2, 2, 2), 1.0);
        assert_eq!(omega.get(2, 0, 0), -0.5);
        assert_eq!(omega.get(0, 2, 2), 0.0);
        assert_eq!(omega.get(1, 1, 2), -0.5);
        for (n, &c) in omega.0.iter().enumerate() {
            if ![2, 4, 6].contains(&n) {
                assert_eq!(c, 0.0, "component {n}");
            }
        }
        assert_eq!(octupole_trace_vector(&o), Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn trace_vector_of_split_zzz() {
        let mut o = SymTensor3::ZERO;
        o.0[2] = 1.0 / 3.0; // zzz
        o.0[4] = 1.0 / 3.0; // xxz
        o.0[6] = 1.0 / 3.0; // yyz
        let t = octupole_trace_vector(&o);
        assert!((t[2] - 1.0).abs() < 1e-15);
        assert_eq!((t[0], t[1]), (0.0, 0.0));
    }

    #[test]
    fn pure_trace_octupole_has_no_traceless_part() {
        let t = Vec3::new(0.3, -1.2, 2.0);
        let o = SymTensor3::pure_trace(&t);
        let omega = traceless_octupole(&o);
        assert!(omega.frobenius_norm() < 1e-14 * o.frobenius_norm());
        let tv = octupole_trace_vector(&o);
        for i in 0..3 {
            assert!((tv[i] - 5.0 * t[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn component_order_matches_file_layout() {
        let o = SymTensor3([0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        assert_eq!(o.get(1, 0, 0), 3.0); // xxy
        assert_eq!(o.get(2, 1, 1), 6.0); // yyz
        assert_eq!(o.get(2, 0, 2), 7.0); // xzz
        assert_eq!(o.get(2, 1, 0), 9.0); // xyz
        let q = SymTensor2([0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(q.get(1, 0), 3.0);
        assert_eq!(q.get(2, 0), 4.0);
        assert_eq!(q.get(2, 1), 5.0);
    }

    #[test]
    fn spherical_coefficients_values() {
        let (c3, c1) = zzz_spherical_coefficients();
        assert!((c3 - 0.535_939_668_552_543).abs() < 1e-15);
        assert!((c1 - 1.227_992_049_535_786).abs() < 1e-15);
        assert!((c3 * y30(0.0) + c1 * y10(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank2_average() {
        let z = Vec3::unit(2);
        assert_eq!(
            rotational_average_rank2(&z, &z),
            SymTensor2::identity().scale(1.0 / 3.0)
        );
        assert_eq!(
            rotational_average_rank2(&z, &Vec3::unit(0)),
            SymTensor2::ZERO
        );
        let a = Vec3::new(1.0, -2.0, 0.5);
        assert!((rotational_average_rank2(&a, &a).trace() - a.dot(&a)).abs() < 1e-14);
    }

    #[test]
    fn isotropic_weight_matrix() {
        let m = IsotropicAvg4::STANDARD.matrix();
        assert_eq!(m[0][0], 4.0 / 30.0);
        assert_eq!(m[1][2], -1.0 / 30.0);
    }

    #[test]
    fn rank4_reduction_on_crossed_free_kernel() {
        // Kernel with K_iikk = K_ijij = 0 but K_ijji = 7: only the δ_im δ_jk
        // slot survives and the average collapses to (a:b) X3 / 10.
        let kernel = Rank4::from_fn(|i, j, k, m| {
            if i == m && j == k && i != j {
                if (i, j) == (0, 1) {
                    7.0
                } else {
                    0.0
                }
            } else {
                0.0
            }
        });
        assert_eq!(kernel.isotropic_invariants(), [0.0, 0.0, 7.0]);
        let a = traceless_quadrupole(&SymTensor2([1.0, 2.0, -0.5, 0.3, -0.7, 0.1]));
        let avg = rotational_average_rank4(&a, &a, &kernel);
        let expected = a.double_dot(&a) * 7.0 / 10.0;
        assert!((avg - expected).abs() < 1e-13 * expected.abs());
    }

    #[test]
    fn rank4_pure_trace_uses_delta_delta_weights() {
        // For a = I the contraction is <δ_ij b_km> K = (Tr b / 3) K_iikk
        // independent of the crossed invariants; check against all 81 terms.
        let kernel = Rank4::from_fn(|i, j, k, m| ((i + 2 * j + 3 * k + 5 * m) as f64).sin());
        let b = SymTensor2([0.4, -1.0, 2.2, 0.5, 0.0, -0.3]);
        let avg = rotational_average_rank4(&SymTensor2::identity(), &b, &kernel);
        let direct = b.trace() / 3.0 * kernel.isotropic_invariants()[0];
        assert!((avg - direct).abs() < 1e-13);
    }

    #[test]
    fn rank4_rejects_wrong_shape() {
        assert!(matches!(
            Rank4::from_slice(&[0.0; 80]),
            Err(Error::Shape(_))
        ));
        assert!(Rank4::from_slice(&[0.0; 81]).is_ok());
        let c = [Complex64::new(0.0, 0.0); 81];
        assert!(SecondDerivativeBlock::from_slices(&c, &c[..8]).is_err());
        assert!(SecondDerivativeBlock::from_slices(&c[..27], &c[..9]).is_err());
    }

    proptest! {
        #[test]
        fn quadrupole_is_traceless(q in sym2()) {
            let t = traceless_quadrupole(&q);
            prop_assert!(t.trace().abs() <= TRACE_TOLERANCE * q.frobenius_norm().max(1.0) * 10.0);
        }

        #[test]
        fn octupole_pair_traces_vanish(o in sym3()) {
            let omega = traceless_octupole(&o);
            let tv = octupole_trace_vector(&omega);
            prop_assert!(tv.norm() <= 10.0 * TRACE_TOLERANCE * o.frobenius_norm().max(1.0));
        }

        #[test]
        fn traceless_octupole_scales_on_traceless_input(o in sym3()) {
            let omega = traceless_octupole(&o);
            let twice = traceless_octupole(&omega);
            for n in 0..10 {
                prop_assert!((twice.0[n] - 2.5 * omega.0[n]).abs() <= 1e-12 * o.frobenius_norm().max(1.0));
            }
        }

        #[test]
        fn quadrupole_trace_drops_against_divergence_free_kernel(
            q in sym2(),
            raw in prop::collection::vec(-1.0..1.0f64, 27),
        ) {
            // Remove the ∂_i K_ik part so that Σ_i K_iik = 0 for every k.
            let mut kern = [[[0.0; 3]; 3]; 3];
            for i in 0..3 { for j in 0..3 { for k in 0..3 { kern[i][j][k] = raw[(i * 3 + j) * 3 + k]; } } }
            for k in 0..3 {
                let tr: f64 = (0..3).map(|i| kern[i][i][k]).sum::<f64>() / 3.0;
                for i in 0..3 { kern[i][i][k] -= tr; }
            }
            let dev = q.deviator();
            for k in 0..3 {
                let full: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| q.get(i, j) * kern[i][j][k]).sum();
                let tl: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| dev.get(i, j) * kern[i][j][k]).sum();
                prop_assert!((full - tl).abs() < 1e-12 * (1.0 + full.abs()));
            }
        }

        #[test]
        fn cos_cubed_reconstruction(theta in 0.0..std::f64::consts::PI) {
            let (c3, c1) = zzz_spherical_coefficients();
            prop_assert!((c3 * y30(theta) + c1 * y10(theta) - theta.cos().powi(3)).abs() < 1e-12);
        }
    }
}
