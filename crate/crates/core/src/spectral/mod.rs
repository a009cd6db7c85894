//! Biorthogonal eigenanalysis of the dynamical matrix and branch tracking
//! along parameter paths.
//!
//! Eigenvalues carry canonical labels at a single point: sorted by
//! imaginary part descending, ties (real eigenvalues) by real part
//! ascending. With the reference parameters this puts the two coalescing
//! complex pairs on labels 1, 2 (upper half-plane) and 7, 8 (their
//! conjugates), so conjugate partners are `(1, 8)`, `(2, 7)`, `(3, 6)`.

mod permutation;
mod tracking;

use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::linalg::{dot, eig, norm, CMatrix, EigError, RMatrix, Scalar};
use crate::C64;

pub use permutation::Permutation;
pub use tracking::{
    track_along, track_grid, track_spectrum, LinePath, ParamPath, TrackOptions, TrackedSpectrum,
    DEFAULT_AMBIGUITY_RATIO,
};

/// |left·right| below this fraction of |left||right| marks a defective
/// (EP-cluster) eigenpair.
pub const EP_TOL: f64 = 1e-6;

/// Condition numbers are clamped to this value when the left/right overlap
/// underflows.
pub const COND_SENTINEL: f64 = f64::INFINITY;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("eigensolver failed: {0}")]
    ConvergenceFailure(#[from] EigError),
    #[error("branch matching is ambiguous near t = {t} (step {step:e} below floor)")]
    TrackingAmbiguous { t: f64, step: f64 },
    #[error("path evaluation failed at t = {t}")]
    PathEvaluation { t: f64 },
}

/// All eigenpairs of an n×n matrix with left eigenvectors in the
/// transpose convention (`Mᵀ l = λ l`).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<C64>,
    /// Unit norm, largest-magnitude component real and positive.
    pub right: Vec<Vec<C64>>,
    /// Scaled so that `left_i · right_i = 1`, except for EP-flagged pairs
    /// which keep unit norm.
    pub left: Vec<Vec<C64>>,
    pub cond: Vec<f64>,
    pub ep_flag: Vec<bool>,
    /// Index pairs `(i, j)` with `Im λ_i > 0` and `λ_j ≈ conj(λ_i)`.
    pub conj_pairs: Vec<(usize, usize)>,
}

fn fix_phase(v: &mut [C64]) {
    let nv = norm(v);
    if nv == 0.0 {
        return;
    }
    let (imax, _) =
        v.iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 + 1e-14 * nv { (i, z.norm()) } else { best });
    let pivot = v[imax];
    let phase = pivot.conj() / (pivot.norm() * nv);
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[imax] = C64::new(v[imax].re, 0.0);
}

/// Canonical ordering key comparison: Im descending, then Re ascending.
fn canonical_cmp(a: C64, b: C64, im_tol: f64) -> Ordering {
    let ia = if a.im.abs() <= im_tol { 0.0 } else { a.im };
    let ib = if b.im.abs() <= im_tol { 0.0 } else { b.im };
    ib.partial_cmp(&ia).unwrap_or(Ordering::Equal).then(a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal))
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Reorders so that new index `k` holds old index `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> EigenSystem {
        let mut inv = alloc::vec![0usize; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }
        EigenSystem {
            values: order.iter().map(|&k| self.values[k]).collect(),
            right: order.iter().map(|&k| self.right[k].clone()).collect(),
            left: order.iter().map(|&k| self.left[k].clone()).collect(),
            cond: order.iter().map(|&k| self.cond[k]).collect(),
            ep_flag: order.iter().map(|&k| self.ep_flag[k]).collect(),
            conj_pairs: self.conj_pairs.iter().map(|&(a, b)| (inv[a], inv[b])).collect(),
        }
    }

    pub fn max_cond(&self) -> f64 {
        self.cond.iter().cloned().fold(1.0, f64::max)
    }

    /// `Σ λ_i right_i left_iᵀ`; equals the decomposed matrix away from EPs.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(n, |a, b| {
            (0..n).fold(C64::new(0.0, 0.0), |acc, k| acc + self.values[k] * self.right[k][a] * self.left[k][b])
        })
    }

    /// Largest |left_i · right_j| over i ≠ j.
    pub fn biorthogonality_defect(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(dot(&self.left[i], &self.right[j]).norm());
                }
            }
        }
        worst
    }

    /// Coefficients `a_i = left_i · s` of a real vector in this eigenbasis.
    pub fn project(&self, s: &[f64]) -> Vec<C64> {
        self.left.iter().map(|l| l.iter().zip(s).fold(C64::new(0.0, 0.0), |acc, (x, &y)| acc + x * y)).collect()
    }

    /// Index of the eigenvalue closest to `z`.
    pub fn nearest(&self, z: C64) -> usize {
        let mut best = (0, f64::INFINITY);
        for (k, v) in self.values.iter().enumerate() {
            let d = (v - z).norm();
            if d < best.1 {
                best = (k, d);
            }
        }
        best.0
    }
}

/// `N(λ_i) = |l_i||r_i| / |l_i · r_i|`; invariant under rescaling of either
/// vector. Returns `+∞` when the overlap vanishes.
pub fn condition_numbers(es: &EigenSystem) -> Vec<f64> {
    es.left.iter().zip(&es.right).map(|(l, r)| condition_number(l, r)).collect()
}

pub fn condition_number(l: &[C64], r: &[C64]) -> f64 {
    let num = norm(l) * norm(r);
    let den = dot(l, r).norm();
    if den <= f64::MIN_POSITIVE * num.max(1.0) || den == 0.0 {
        COND_SENTINEL
    } else {
        (num / den).max(1.0)
    }
}

/// Eigendecomposition of a real matrix, canonically ordered.
pub fn eigendecompose(m: &RMatrix) -> Result<EigenSystem, SpectralError> {
    eigendecompose_complex_with(&m.to_complex(), true)
}

/// Eigendecomposition of a general complex matrix, canonically ordered.
/// Conjugate pairs are only detected for real input.
pub fn eigendecompose_complex(m: &CMatrix) -> Result<EigenSystem, SpectralError> {
    eigendecompose_complex_with(m, false)
}

fn eigendecompose_complex_with(m: &CMatrix, real_input: bool) -> Result<EigenSystem, SpectralError> {
    let n = m.n();
    let raw = eig(m)?;
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let im_tol = 1e-10 * scale;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| canonical_cmp(raw.values[a], raw.values[b], im_tol));

    let mut values = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut cond = Vec::with_capacity(n);
    let mut ep_flag = Vec::with_capacity(n);
    for &k in &order {
        let mut r = raw.right[k].clone();
        fix_phase(&mut r);
        let mut l = raw.left[k].clone();
        let overlap = dot(&l, &r);
        let nl = norm(&l);
        let flagged = overlap.norm() < EP_TOL * nl * norm(&r);
        if flagged {
            let s = 1.0 / nl.max(f64::MIN_POSITIVE);
            for z in l.iter_mut() {
                *z *= s;
            }
        } else {
            let s = overlap.inv();
            for z in l.iter_mut() {
                *z *= s;
            }
        }
        cond.push(condition_number(&l, &r));
        ep_flag.push(flagged);
        values.push(raw.values[k]);
        right.push(r);
        left.push(l);
    }

    let mut conj_pairs = Vec::new();
    if real_input {
        let mut used = alloc::vec![false; n];
        for i in 0..n {
            if values[i].im <= im_tol || used[i] {
                continue;
            }
            let target = values[i].conj();
            let best = (0..n).filter(|&j| j != i && !used[j] && values[j].im < -im_tol).min_by(|&a, &b| {
                (values[a] - target).norm().partial_cmp(&(values[b] - target).norm()).unwrap_or(Ordering::Equal)
            });
            if let Some(j) = best {
                if (values[j] - target).norm() <= 1e-8 * scale.max(1.0) {
                    used[i] = true;
                    used[j] = true;
                    conj_pairs.push((i, j));
                }
            }
        }
    }

    Ok(EigenSystem { values, right, left, cond, ep_flag, conj_pairs })
}

/// Max-pairwise-distance of the tightest size-`k` subset of `values`,
/// together with the (sorted) indices of that subset.
pub fn cluster_diameter(values: &[C64], k: usize) -> (f64, Vec<usize>) {
    let n = values.len();
    assert!(k >= 1 && k <= n, "cluster size {k} out of range for {n} values");
    let mut best = (f64::INFINITY, Vec::new());
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut d: f64 = 0.0;
        'outer: for a in 0..k {
            for b in a + 1..k {
                d = d.max((values[idx[a]] - values[idx[b]]).norm());
                if d >= best.0 {
                    break 'outer;
                }
            }
        }
        if d < best.0 {
            best = (d, idx.clone());
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return best;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{explicit_matrix, SystemParams};

    #[test]
    fn diagonal_matrix() {
        let m = RMatrix::from_fn(8, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let es = eigendecompose(&m).unwrap();
        for (k, v) in es.values.iter().enumerate() {
            assert!((v - C64::new((k + 1) as f64, 0.0)).norm() < 1e-14);
        }
        assert!(es.cond.iter().all(|c| (c - 1.0).abs() < 1e-12));
        assert!(es.conj_pairs.is_empty());
    }

    #[test]
    fn symmetric_matrix_is_perfectly_conditioned() {
        let m = RMatrix::from_fn(8, |i, j| libm::cos((i * j + i + j) as f64) + if i == j { 3.0 } else { 0.0 });
        let m = &m + &m.transpose();
        let es = eigendecompose(&m).unwrap();
        assert!(es.cond.iter().all(|c| (c - 1.0).abs() < 1e-9), "{:?}", es.cond);
    }

    #[test]
    fn jordan_block_is_flagged() {
        let mut m = RMatrix::from_fn(8, |i, j| if i == j { (i as f64) * 10.0 } else { 0.0 });
        m[(0, 0)] = 5.0;
        m[(1, 1)] = 5.0;
        m[(0, 1)] = 1.0;
        let es = eigendecompose(&m).unwrap();
        let worst = es.max_cond();
        assert!(worst >= 1e12 || worst.is_infinite(), "cond {worst}");
        assert_eq!(es.ep_flag.iter().filter(|&&f| f).count(), 2);
    }

    #[test]
    fn canonical_labels_at_reference_point() {
        let es = eigendecompose(&explicit_matrix(&SystemParams::nv_reference())).unwrap();
        let v = &es.values;
        // upper half-plane first, Im descending
        assert!(v[0].im > v[1].im && v[1].im > v[2].im && v[2].im > 0.0);
        assert!(v[3].im.abs() < 1e-9 && v[4].im.abs() < 1e-9 && v[3].re < v[4].re);
        assert_eq!(es.conj_pairs, [(0, 7), (1, 6), (2, 5)]);
        let tr: C64 = v.iter().sum();
        assert!((tr.re - explicit_matrix(&SystemParams::nv_reference()).trace()).abs() < 1e-9);
    }

    #[test]
    fn reconstruction_and_biorthogonality() {
        let m = explicit_matrix(&SystemParams::nv_reference().with(crate::ParamName::Omega1, 600.0));
        let es = eigendecompose(&m).unwrap();
        assert!(es.biorthogonality_defect() < 1e-8);
        let back = es.reconstruct();
        assert!((&back - &m.to_complex()).max_abs() < 1e-8 * m.max_abs());
    }

    #[test]
    fn cluster_diameter_picks_tightest_subset() {
        let v =
            [C64::new(0.0, 0.0), C64::new(10.0, 0.0), C64::new(10.5, 0.0), C64::new(11.0, 0.0), C64::new(30.0, 0.0)];
        let (d, idx) = cluster_diameter(&v, 2);
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(idx, [1, 2]);
        let (d, idx) = cluster_diameter(&v, 3);
        assert!((d - 1.0).abs() < 1e-15);
        assert_eq!(idx, [1, 2, 3]);
        let (d, _) = cluster_diameter(&v, 5);
        assert!((d - 30.0).abs() < 1e-15);
    }
}
