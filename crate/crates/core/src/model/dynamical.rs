//! The real Gell-Mann dynamical system `Ṡ = M·S + c`, with `c = −M·S_eq`.
//!
//! Two constructions are provided. [`Method::Explicit`] writes the closed-form
//! matrix entry by entry; [`Method::Generic`] projects the Lindblad generator
//! onto the Gell-Mann basis, `M_ij = ½ Tr[σ_i 𝓛*[σ_j]]`,
//! `c_i = Tr[σ_i 𝓛*[𝟙/3]]`. The two are not identical; see
//! [`compare_methods`].

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use super::bloch::gell_mann;
use super::operators::apply_generator;
use super::SystemParams;
use crate::linalg::{lu_solve, CMatrix, RMatrix};
use crate::math::sqrt;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    /// Closed-form matrix with the explicit damping coefficients.
    #[default]
    Explicit,
    /// Projection of the 3×3 Lindblad generator onto the Gell-Mann basis.
    Generic,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Explicit => "explicit",
            Method::Generic => "generic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("dynamical matrix is numerically singular; steady state undefined (drive = {drive:?})")]
    SingularDynamics { drive: [f64; 8] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalSystem {
    pub m: RMatrix,
    pub drive: [f64; 8],
    pub steady_state: [f64; 8],
    pub method: Method,
}

impl DynamicalSystem {
    /// `M·S + c`.
    pub fn rhs(&self, s: &[f64; 8]) -> [f64; 8] {
        let ms = self.m.mul_vec(s);
        core::array::from_fn(|i| ms[i] + self.drive[i])
    }
}

/// Dynamical matrix with its damping coefficients written out in closed form.
pub fn explicit_matrix(p: &SystemParams) -> RMatrix {
    let s3 = sqrt(3.0);
    let (g1, g2) = (p.gamma1, p.gamma2);
    let (ku1, ku2, kd1, kd2) = (p.kappa_u1, p.kappa_u2, p.kappa_d1, p.kappa_d2);
    let (d1, d2, o1, o2) = (p.delta1, p.delta2, p.omega1, p.omega2);

    let g11 = g2 / 8.0 + (g1 + kd1 + ku1 + ku2) / 2.0;
    let g33 = ku2 / 2.0 + kd1 + ku1;
    let g38 = (kd1 - kd2 - ku1 - ku2 / 3.0) / s3;
    let g44 = g1 / 8.0 + (g2 + ku1 + kd2 + ku2) / 2.0;
    let g66 = (g1 + g2) / 8.0 + (kd1 + kd2) / 2.0;
    let g83 = -s3 / 2.0 * ku2;
    let g88 = ku2 / 2.0 + kd2;

    RMatrix::from_rows(&[
        [-g11, d1, 0.0, 0.0, 0.0, 0.0, o2, 0.0],
        [-d1, -g11, -2.0 * o1, 0.0, 0.0, o2, 0.0, 0.0],
        [0.0, 2.0 * o1, -g33, 0.0, o2, 0.0, 0.0, g38],
        [0.0, 0.0, 0.0, -g44, d2, 0.0, -o1, 0.0],
        [0.0, 0.0, -o2, -d2, -g44, o1, 0.0, -s3 * o2],
        [0.0, -o2, 0.0, 0.0, -o1, -g66, -(d1 - d2), 0.0],
        [-o2, 0.0, 0.0, o1, 0.0, d1 - d2, -g66, 0.0],
        [0.0, 0.0, g83, 0.0, s3 * o2, 0.0, 0.0, -g88],
    ])
}

fn explicit_drive(p: &SystemParams) -> [f64; 8] {
    let (dk1, dk2) = p.delta_kappa();
    let mut c = [0.0; 8];
    c[2] = dk2 / 3.0 + 2.0 * dk1 / 3.0;
    c[7] = dk2 / sqrt(3.0);
    c
}

/// `M_ij = ½ Tr[σ_i 𝓛*[σ_j]]` and `c_i = Tr[σ_i 𝓛*[𝟙/3]]`.
pub fn generic_matrix_and_drive(p: &SystemParams) -> (RMatrix, [f64; 8]) {
    let basis = gell_mann();
    let images: Vec<CMatrix> = basis.iter().map(|s| apply_generator(p, s)).collect();
    let m = RMatrix::from_fn(8, |i, j| 0.5 * (&basis[i] * &images[j]).trace().re);
    let third = CMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0));
    let image = apply_generator(p, &third);
    let drive = core::array::from_fn(|i| (&basis[i] * &image).trace().re);
    (m, drive)
}

/// Dynamical matrix only, for hot loops that do not need the drive.
pub fn dynamical_matrix(p: &SystemParams, method: Method) -> RMatrix {
    match method {
        Method::Explicit => explicit_matrix(p),
        Method::Generic => generic_matrix_and_drive(p).0,
    }
}

/// `(M, c)` without solving for the steady state.
pub fn dynamical_matrix_and_drive(p: &SystemParams, method: Method) -> (RMatrix, [f64; 8]) {
    match method {
        Method::Explicit => (explicit_matrix(p), explicit_drive(p)),
        Method::Generic => generic_matrix_and_drive(p),
    }
}

/// Builds `(M, c, S_eq)`. `S_eq = 0` whenever `c = 0`; otherwise it solves
/// `M·S_eq = −c` and fails with `SingularDynamics` if `M` is singular.
pub fn build_dynamical_system(p: &SystemParams, method: Method) -> Result<DynamicalSystem, DynamicsError> {
    let (m, drive) = dynamical_matrix_and_drive(p, method);
    let steady_state = if drive.iter().all(|&x| x == 0.0) {
        [0.0; 8]
    } else {
        let neg: Vec<f64> = drive.iter().map(|x| -x).collect();
        let s = lu_solve(&m, &neg, 1e-12).map_err(|_| DynamicsError::SingularDynamics { drive })?;
        core::array::from_fn(|i| s[i])
    };
    Ok(DynamicalSystem { m, drive, steady_state, method })
}

/// Why an explicit entry disagrees with the generic projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FindingKind {
    /// Entry matches the generic projection with Ω₁, Ω₂ → −Ω₁, −Ω₂, i.e. the
    /// explicit matrix uses the opposite drive-phase sign. The spectrum is
    /// invariant under this change.
    OmegaSignConvention,
    /// Diagonal damping coefficient differs (dephasing normalization or jump
    /// channel labeling).
    DecayRateNormalization,
    /// Population-sector coupling between σ₃ and σ₈.
    PopulationCoupling,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatrixFinding {
    /// 1-based Gell-Mann row index.
    pub row: usize,
    /// 1-based Gell-Mann column index.
    pub col: usize,
    pub explicit: f64,
    pub generic: f64,
    pub kind: FindingKind,
}

#[derive(Debug, Clone)]
pub struct MatrixComparison {
    pub explicit: RMatrix,
    pub generic: RMatrix,
    /// max |M_explicit − M_generic|
    pub max_abs_diff: f64,
    /// max(|M_explicit|, |M_generic|)
    pub scale: f64,
    pub findings: Vec<MatrixFinding>,
}

impl MatrixComparison {
    pub fn agrees(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Entrywise comparison of the two constructions at relative tolerance
/// `rel_tol`. Every entry outside tolerance becomes a classified finding.
pub fn compare_methods(p: &SystemParams, rel_tol: f64) -> MatrixComparison {
    let explicit = explicit_matrix(p);
    let generic = generic_matrix_and_drive(p).0;
    let flipped = {
        let mut q = *p;
        q.omega1 = -q.omega1;
        q.omega2 = -q.omega2;
        generic_matrix_and_drive(&q).0
    };
    let scale = explicit.max_abs().max(generic.max_abs());
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut findings = Vec::new();
    let mut max_abs_diff: f64 = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            let (e, g) = (explicit[(i, j)], generic[(i, j)]);
            let d = (e - g).abs();
            max_abs_diff = max_abs_diff.max(d);
            if d <= tol {
                continue;
            }
            let kind = if (e - flipped[(i, j)]).abs() <= tol {
                FindingKind::OmegaSignConvention
            } else if i == j {
                FindingKind::DecayRateNormalization
            } else if (i, j) == (2, 7) || (i, j) == (7, 2) {
                FindingKind::PopulationCoupling
            } else {
                FindingKind::Unclassified
            };
            findings.push(MatrixFinding { row: i + 1, col: j + 1, explicit: e, generic: g, kind });
        }
    }
    MatrixComparison { explicit, generic, max_abs_diff, scale, findings }
}
