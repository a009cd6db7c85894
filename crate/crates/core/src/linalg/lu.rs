use alloc::vec::Vec;

use thiserror::Error;

use super::{Matrix, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("matrix is numerically singular (pivot {pivot:e} at column {column})")]
pub struct Singular {
    pub column: usize,
    pub pivot: f64,
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// A pivot below `rel_tol · max|a|` is reported as [`Singular`].
pub fn lu_solve<T: Scalar + core::ops::Div<Output = T>>(
    a: &Matrix<T>,
    b: &[T],
    rel_tol: f64,
) -> Result<Vec<T>, Singular> {
    let n = a.n();
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x: Vec<T> = b.to_vec();
    let floor = rel_tol * a.max_abs();
    for col in 0..n {
        let (piv_row, piv_abs) =
            (col..n)
                .map(|r| (r, m[(r, col)].modulus()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= floor || piv_abs == 0.0 {
            return Err(Singular { column: col, pivot: piv_abs });
        }
        if piv_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv_row, j)];
                m[(piv_row, j)] = tmp;
            }
            x.swap(col, piv_row);
        }
        let p = m[(col, col)];
        for r in col + 1..n {
            let f = m[(r, col)] / p;
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                let v = m[(col, j)];
                m[(r, j)] = m[(r, j)] - f * v;
            }
            let xc = x[col];
            x[r] = x[r] - f * xc;
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for j in r + 1..n {
            s = s - m[(r, j)] * x[j];
        }
        x[r] = s / m[(r, r)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMatrix;

    #[test]
    fn solves_with_pivoting() {
        let a = RMatrix::from_rows(&[[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [2.0, 0.0, 3.0]]);
        let x = lu_solve(&a, &[7.0, 3.0, 11.0], 1e-14).unwrap();
        for (got, want) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn reports_singular() {
        let a = RMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(lu_solve(&a, &[1.0, 1.0], 1e-12).is_err());
    }
}
