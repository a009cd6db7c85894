// Complex Schur decomposition (Householder Hessenberg reduction followed by
// single-shift QR with Wilkinson shifts) and eigenvectors by triangular
// substitution.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::{norm, CMatrix, Scalar};
use crate::C64;

const EPS: f64 = f64::EPSILON;
const MAX_ITER_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigError {
    #[error("QR iteration did not converge: {iterations} iterations, {unconverged} eigenvalues left")]
    NoConvergence { iterations: usize, unconverged: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// `a = q · t · qᴴ` with `t` upper triangular and `q` unitary.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: CMatrix,
    pub t: CMatrix,
    pub iterations: usize,
}

/// Eigenvalues with right eigenvectors (`A r = λ r`) and left eigenvectors
/// in the transpose convention (`Aᵀ l = λ l`). Both are returned with unit
/// Euclidean norm; no biorthogonal scaling is applied here.
#[derive(Debug, Clone)]
pub struct Eig {
    pub values: Vec<C64>,
    pub right: Vec<Vec<C64>>,
    pub left: Vec<Vec<C64>>,
    pub iterations: usize,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn abs(z: C64) -> f64 {
    z.modulus()
}

fn hessenberg(a: &mut CMatrix, q: &mut CMatrix) {
    let n = a.n();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if abs(x0) == 0.0 { C64::new(1.0, 0.0) } else { x0 / abs(x0) };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A <- (I - 2vvᴴ) A
        for j in 0..n {
            let mut s = zero();
            for (r, vi) in v.iter().enumerate() {
                s += vi.conj() * a[(k + 1 + r, j)];
            }
            for (r, vi) in v.iter().enumerate() {
                a[(k + 1 + r, j)] -= *vi * s * 2.0;
            }
        }
        // A <- A (I - 2vvᴴ), Q <- Q (I - 2vvᴴ)
        for m in [&mut *a, &mut *q] {
            for i in 0..n {
                let mut s = zero();
                for (r, vi) in v.iter().enumerate() {
                    s += m[(i, k + 1 + r)] * *vi;
                }
                for (r, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= s * vi.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = zero();
        }
    }
}

/// Rotation `G = [[c, s], [-s̄, c]]` with `G·[a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let aa = abs(a);
    let bb = abs(b);
    if bb == 0.0 {
        return (1.0, zero());
    }
    if aa == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = crate::math::hypot(aa, bb);
    let c = aa / r;
    let s = (a / aa) * b.conj() / r;
    (c, s)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = (a + d) * 0.5;
    let diff_half = (a - d) * 0.5;
    let disc = (diff_half * diff_half + b * c).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if abs(l1 - d) < abs(l2 - d) {
        l1
    } else {
        l2
    }
}

pub fn schur(a: &CMatrix) -> Result<Schur, EigError> {
    let n = a.n();
    if a.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigError::NonFinite);
    }
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    hessenberg(&mut h, &mut q);
    let anorm = a.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut iterations = 0usize;
    let mut since_deflation = 0usize;
    let max_iter = MAX_ITER_PER_EIGENVALUE * n.max(1);
    let mut hi = n.saturating_sub(1);
    while hi > 0 {
        // find the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let s = abs(h[(lo, lo)]) + abs(h[(lo - 1, lo - 1)]);
            let s = if s == 0.0 { anorm } else { s };
            if abs(h[(lo, lo - 1)]) <= EPS * s {
                h[(lo, lo - 1)] = zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        iterations += 1;
        since_deflation += 1;
        if iterations > max_iter {
            return Err(EigError::NoConvergence { iterations, unconverged: hi + 1 });
        }
        let mu = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(abs(h[(hi, hi - 1)]) * 0.75, abs(h[(hi, hi - 1)]) * 0.5)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = zero();
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = q[(i, k)];
                let y = q[(i, k + 1)];
                q[(i, k)] = x * c + y * s.conj();
                q[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = zero();
        }
    }
    Ok(Schur { q, t: h, iterations })
}

fn safe_divisor(d: C64, small: f64) -> C64 {
    if abs(d) < small {
        C64::new(small, 0.0)
    } else {
        d
    }
}

fn normalized(mut v: Vec<C64>) -> Vec<C64> {
    let nv = norm(&v);
    if nv > 0.0 {
        for z in v.iter_mut() {
            *z /= nv;
        }
    }
    v
}

/// `−s / d`, except that a negligible `s` over a negligible `d` (an
/// exactly repeated eigenvalue of a non-defective block) gives 0 so the
/// vector stays inside the eigenspace.
fn solve_entry(s: C64, d: C64, small: f64, sofar: &[C64]) -> C64 {
    let scale = sofar.iter().fold(1.0, |m: f64, z| m.max(z.norm()));
    if d.norm() < small && s.norm() <= 1e3 * small * scale {
        zero()
    } else {
        -s / safe_divisor(d, small)
    }
}

/// Full eigendecomposition of a general complex matrix.
pub fn eig(a: &CMatrix) -> Result<Eig, EigError> {
    let n = a.n();
    let Schur { q, t, iterations } = schur(a)?;
    let small = EPS * t.frobenius_norm().max(f64::MIN_POSITIVE);
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();

    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = values[k];

        // T y = λ y, y_k = 1, y_j = 0 for j > k
        let mut y = vec![zero(); n];
        y[k] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = zero();
            for m in j + 1..=k {
                s += t[(j, m)] * y[m];
            }
            y[j] = solve_entry(s, t[(j, j)] - lambda, small, &y);
        }
        right.push(normalized(q.mul_vec(&y)));

        // zᵀ T = λ zᵀ, z_k = 1, z_j = 0 for j < k
        let mut z = vec![zero(); n];
        z[k] = C64::new(1.0, 0.0);
        for j in k + 1..n {
            let mut s = zero();
            for m in k..j {
                s += z[m] * t[(m, j)];
            }
            z[j] = solve_entry(s, t[(j, j)] - lambda, small, &z);
        }
        // l = conj(Q) z
        let l: Vec<C64> = (0..n).map(|i| (0..n).fold(zero(), |acc, m| acc + q[(i, m)].conj() * z[m])).collect();
        left.push(normalized(l));
    }
    Ok(Eig { values, right, left, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, RMatrix};

    fn residual(a: &CMatrix, lambda: C64, v: &[C64]) -> f64 {
        let av = a.mul_vec(v);
        norm(&av.iter().zip(v).map(|(x, y)| *x - lambda * *y).collect::<Vec<_>>())
    }

    #[test]
    fn schur_reconstructs() {
        let a = RMatrix::from_rows(&[
            [4.0, 1.0, -2.0, 2.0],
            [1.0, 2.0, 0.0, 1.0],
            [-2.0, 0.0, 3.0, -2.0],
            [2.0, 1.0, -2.0, -1.0],
        ])
        .to_complex();
        let s = schur(&a).unwrap();
        let back = &(&s.q * &s.t) * &s.q.adjoint();
        assert!((&back - &a).max_abs() < 1e-12);
        for i in 0..4 {
            for j in 0..i {
                assert_eq!(s.t[(i, j)], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn rotation_generator_has_imaginary_pair() {
        let a = RMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).to_complex();
        let e = eig(&a).unwrap();
        let mut ims: Vec<f64> = e.values.iter().map(|z| z.im).collect();
        ims.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        for k in 0..2 {
            assert!(residual(&a, e.values[k], &e.right[k]) < 1e-13);
            assert!(residual(&a.transpose(), e.values[k], &e.left[k]) < 1e-13);
        }
    }

    #[test]
    fn nonsymmetric_residuals_and_biorthogonality() {
        let a = RMatrix::from_fn(7, |i, j| {
            let x = (i * 7 + j) as f64;
            libm::sin(1.3 * x) * 3.0 + if i == j { i as f64 } else { 0.0 }
        })
        .to_complex();
        let e = eig(&a).unwrap();
        let scale = a.frobenius_norm();
        for k in 0..7 {
            assert!(residual(&a, e.values[k], &e.right[k]) < 1e-12 * scale);
            assert!(residual(&a.transpose(), e.values[k], &e.left[k]) < 1e-12 * scale);
            for j in 0..7 {
                if j != k {
                    assert!(dot(&e.left[k], &e.right[j]).norm() < 1e-10);
                }
            }
        }
        let tr: C64 = e.values.iter().sum();
        assert!((tr - a.trace()).norm() < 1e-11);
    }

    #[test]
    fn rejects_nan() {
        let mut a = CMatrix::identity(3);
        a[(1, 2)] = C64::new(f64::NAN, 0.0);
        assert_eq!(schur(&a).unwrap_err(), EigError::NonFinite);
    }
}
