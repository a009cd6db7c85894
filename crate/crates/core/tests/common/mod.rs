#![allow(dead_code)]

use epswitch_core::linalg::{CMatrix, RMatrix};
use epswitch_core::{SystemParams, C64};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameters drawn from physically sensible ranges (kHz).
pub fn random_params(r: &mut impl Rng) -> SystemParams {
    SystemParams {
        omega1: r.gen_range(-1000.0..1000.0),
        omega2: r.gen_range(-1000.0..1000.0),
        delta1: r.gen_range(-2000.0..2000.0),
        delta2: r.gen_range(-2000.0..2000.0),
        gamma1: r.gen_range(0.0..2000.0),
        gamma2: r.gen_range(0.0..2000.0),
        kappa_u1: r.gen_range(0.0..50.0),
        kappa_u2: r.gen_range(0.0..50.0),
        kappa_d1: r.gen_range(0.0..50.0),
        kappa_d2: r.gen_range(0.0..50.0),
    }
}

pub fn to_na_real(m: &RMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.n(), m.n(), |i, j| m[(i, j)])
}

/// Eigenvalues of a complex matrix by an independent implementation.
/// Eigenvalues of the real embedding `[[A, −B], [B, A]]` of `A + iB`:
/// the spectrum of the complex matrix together with its conjugate.
/// `None` if the reference Schur iteration does not converge.
pub fn oracle_eigenvalues_doubled(m: &CMatrix) -> Option<Vec<C64>> {
    let n = m.n();
    let big = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let schur = nalgebra::Schur::try_new(big, f64::EPSILON, 20_000)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn oracle_eigenvalues_real(m: &RMatrix) -> Option<Vec<C64>> {
    let schur = nalgebra::Schur::try_new(to_na_real(m), f64::EPSILON, 20_000)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest distance in a greedy nearest-neighbour matching of two
/// multisets of equal size.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// `S(T) = S* + exp(M T)(S₀ − S*)` with `M S* + c = 0`, for constant `M`, `c`.
pub fn exact_affine_flow(m: &RMatrix, c: &[f64; 8], s0: &[f64; 8], t: f64) -> [f64; 8] {
    let mm = to_na_real(m);
    let cc = DVector::from_column_slice(c);
    let s_star = -mm.clone().lu().solve(&cc).expect("invertible dynamical matrix");
    let d = DVector::from_column_slice(s0) - &s_star;
    let s = (mm * t).exp() * d + s_star;
    std::array::from_fn(|i| s[i])
}
