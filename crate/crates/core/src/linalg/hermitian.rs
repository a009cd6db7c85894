// Cyclic complex Jacobi for small Hermitian matrices.

use alloc::vec::Vec;

use super::{CMatrix, Scalar};
use crate::math::sqrt;
use crate::C64;

/// Eigenvalues in ascending order with the matching orthonormal
/// eigenvectors as columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    sqrt(s)
}

/// Hermitian eigendecomposition. The strictly lower triangle is taken as
/// the conjugate of the upper one, so tiny Hermiticity defects are ignored.
pub fn eigh(h: &CMatrix) -> Eigh {
    let n = h.n();
    let mut a = CMatrix::from_fn(n, |i, j| {
        if i == j {
            C64::new(h[(i, i)].re, 0.0)
        } else if i < j {
            h[(i, j)]
        } else {
            h[(j, i)].conj()
        }
    });
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        if off_diagonal_norm(&a) <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.modulus();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                // U = D·P with D = diag(.., e^{-iφ} at q, ..) and the real
                // rotation P; A <- Uᴴ A U.
                let mut u = CMatrix::identity(n);
                let ph = phase.conj();
                u[(p, p)] = C64::new(c, 0.0);
                u[(p, q)] = C64::new(s, 0.0);
                u[(q, p)] = ph * (-s);
                u[(q, q)] = ph * c;
                a = &(&u.adjoint() * &a) * &u;
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                v = &v * &u;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Eigh { values, vectors }
}
