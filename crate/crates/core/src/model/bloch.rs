//! Gell-Mann basis and the affine map between density matrices and
//! Bloch vectors, `S_i = Tr[ρ σ_i]` and `ρ = 𝟙/3 + ½ Σ S_i σ_i`.

use thiserror::Error;

use crate::linalg::{eigh, CMatrix};
use crate::math::sqrt;
use crate::C64;

/// Euclidean length of the Bloch vector of any pure state.
pub const PURE_STATE_RADIUS: f64 = 1.154_700_538_379_251_5; // 2/√3

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("expected a 3×3 matrix, got {0}×{0}")]
    WrongDimension(usize),
}

/// Qutrit density matrix. Hermitian with unit trace; positivity is not
/// enforced (see [`positivity_margin`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

/// Real Gell-Mann components of a qutrit state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlochVector(pub [f64; 8]);

impl DensityMatrix {
    pub const TOL: f64 = 1e-10;

    pub fn new(m: CMatrix) -> Result<Self, StateError> {
        Self::with_tolerance(m, Self::TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self, StateError> {
        if m.n() != 3 {
            return Err(StateError::WrongDimension(m.n()));
        }
        let defect = m.hermiticity_defect();
        if defect > tol {
            return Err(StateError::NotHermitian { defect });
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(StateError::BadTrace { trace: tr.re });
        }
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(CMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0)))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) ket.
    pub fn pure(psi: [C64; 3]) -> Self {
        let nrm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        DensityMatrix(CMatrix::from_fn(3, |i, j| psi[i] * psi[j].conj() / nrm))
    }

    pub fn from_real_diagonal(d: [f64; 3]) -> Result<Self, StateError> {
        Self::new(CMatrix::from_fn(3, |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) }))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Copy with the diagonal set to zero, for displaying coherences.
    pub fn off_diagonal(&self) -> CMatrix {
        let mut m = self.0.clone();
        for i in 0..3 {
            m[(i, i)] = C64::new(0.0, 0.0);
        }
        m
    }

    /// Largest off-diagonal modulus.
    pub fn max_coherence(&self) -> f64 {
        self.off_diagonal().max_abs()
    }
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector([0.0; 8]);

    pub fn norm(&self) -> f64 {
        sqrt(self.0.iter().map(|x| x * x).sum())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, a: f64) -> Self {
        BlochVector(self.0.map(|x| x * a))
    }
}

/// σ₁ … σ₈ (index 0 … 7), normalized so that `Tr[σ_i σ_j] = 2 δ_ij`.
pub fn gell_mann() -> [CMatrix; 8] {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let r3 = 1.0 / sqrt(3.0);
    let mk = |entries: &[(usize, usize, C64)]| {
        let mut m = CMatrix::zeros(3);
        for &(a, b, v) in entries {
            m[(a, b)] = v;
        }
        m
    };
    [
        mk(&[(0, 1, one), (1, 0, one)]),
        mk(&[(0, 1, -i), (1, 0, i)]),
        mk(&[(0, 0, one), (1, 1, -one)]),
        mk(&[(0, 2, one), (2, 0, one)]),
        mk(&[(0, 2, -i), (2, 0, i)]),
        mk(&[(1, 2, one), (2, 1, one)]),
        mk(&[(1, 2, -i), (2, 1, i)]),
        mk(&[(0, 0, C64::new(r3, 0.0)), (1, 1, C64::new(r3, 0.0)), (2, 2, C64::new(-2.0 * r3, 0.0))]),
    ]
}

/// `S_i = Tr[ρ σ_i]`.
pub fn rho_to_bloch(rho: &DensityMatrix) -> BlochVector {
    let basis = gell_mann();
    let mut s = [0.0; 8];
    for (k, sigma) in basis.iter().enumerate() {
        s[k] = (&rho.0 * sigma).trace().re;
    }
    BlochVector(s)
}

/// `ρ = 𝟙/3 + ½ Σ S_i σ_i`; Hermitian with unit trace by construction.
pub fn bloch_to_rho(s: &BlochVector) -> DensityMatrix {
    let basis = gell_mann();
    let mut m = CMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0));
    for (sigma, &sk) in basis.iter().zip(&s.0) {
        m = &m + &sigma.scale(C64::new(0.5 * sk, 0.0));
    }
    // exact Hermitian symmetry and real diagonal
    for a in 0..3 {
        m[(a, a)].im = 0.0;
        for b in a + 1..3 {
            m[(b, a)] = m[(a, b)].conj();
        }
    }
    DensityMatrix(m)
}

/// Smallest eigenvalue of ρ; non-negative iff ρ is a physical state.
pub fn positivity_margin(rho: &DensityMatrix) -> f64 {
    eigh(&rho.0).values[0]
}
