use alloc::vec::Vec;

use super::SystemParams;
use crate::linalg::CMatrix;
use crate::C64;

/// A jump operator paired with its rate.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTerm {
    pub op: CMatrix,
    pub rate: f64,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn ket_bra(i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(3);
    m[(i, j)] = c(1.0);
    m
}

/// Rotating-frame Hamiltonian in the basis `(|0⟩, |+1⟩, |−1⟩)`:
/// `Δ₁|+1⟩⟨+1| + Δ₂|−1⟩⟨−1| − Ω₁(|+1⟩⟨0| + h.c.) − Ω₂(|−1⟩⟨0| + h.c.)`.
pub fn build_hamiltonian(p: &SystemParams) -> CMatrix {
    let mut h = CMatrix::zeros(3);
    h[(1, 1)] = c(p.delta1);
    h[(2, 2)] = c(p.delta2);
    h[(0, 1)] = c(-p.omega1);
    h[(1, 0)] = c(-p.omega1);
    h[(0, 2)] = c(-p.omega2);
    h[(2, 0)] = c(-p.omega2);
    h
}

/// The six incoherent channels, in order: dephasing `|±1⟩⟨±1| − |0⟩⟨0|`
/// (γ⁽¹'²⁾), `|±1⟩⟨0|` (κ_d⁽¹'²⁾), `|0⟩⟨±1|` (κ_u⁽¹'²⁾).
pub fn build_lindblad_terms(p: &SystemParams) -> Vec<JumpTerm> {
    let deph = |k: usize| &ket_bra(k, k) - &ket_bra(0, 0);
    alloc::vec![
        JumpTerm { op: deph(1), rate: p.gamma1 },
        JumpTerm { op: deph(2), rate: p.gamma2 },
        JumpTerm { op: ket_bra(1, 0), rate: p.kappa_d1 },
        JumpTerm { op: ket_bra(2, 0), rate: p.kappa_d2 },
        JumpTerm { op: ket_bra(0, 1), rate: p.kappa_u1 },
        JumpTerm { op: ket_bra(0, 2), rate: p.kappa_u2 },
    ]
}

/// Schrödinger-picture generator acting on an arbitrary 3×3 operator:
/// `−i[H, X] + Σ Γ_j (2 L_j X L_j† − {L_j†L_j, X})`.
///
/// This is the adjoint of the Heisenberg form
/// `i[H, X] + Σ Γ_j (2 L_j† X L_j − {L_j†L_j, X})`.
pub fn apply_generator(p: &SystemParams, x: &CMatrix) -> CMatrix {
    let h = build_hamiltonian(p);
    let minus_i = C64::new(0.0, -1.0);
    let mut out = h.commutator(x).scale(minus_i);
    for JumpTerm { op, rate } in build_lindblad_terms(p) {
        if rate == 0.0 {
            continue;
        }
        let op_dag = op.adjoint();
        let ldl = &op_dag * &op;
        let sandwich = &(&op * x) * &op_dag;
        let anti = &(&ldl * x) + &(x * &ldl);
        let term = &sandwich.scale(c(2.0)) - &anti;
        out = &out + &term.scale(c(rate));
    }
    out
}

/// 9×9 matrix of the Schrödinger-picture generator on `vec(ρ)`, with
/// column stacking: `vec(ρ)[i + 3j] = ρ[i, j]`.
pub fn build_superoperator(p: &SystemParams) -> CMatrix {
    let mut s = CMatrix::zeros(9);
    for j in 0..3 {
        for i in 0..3 {
            let image = apply_generator(p, &ket_bra(i, j));
            let col = i + 3 * j;
            for b in 0..3 {
                for a in 0..3 {
                    s[(a + 3 * b, col)] = image[(a, b)];
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig, Scalar};
    use crate::math::sqrt;

    #[test]
    fn zero_params_give_zero_operators() {
        let p = SystemParams::ZERO;
        assert_eq!(build_hamiltonian(&p).max_abs(), 0.0);
        assert_eq!(build_superoperator(&p).max_abs(), 0.0);
        let terms = build_lindblad_terms(&p);
        assert_eq!(terms.len(), 6);
        assert!(terms.iter().all(|t| t.rate == 0.0));
    }

    #[test]
    fn reference_hamiltonian_entries() {
        let p = SystemParams::nv_reference();
        let h = build_hamiltonian(&p);
        let want = [[0.0, -225.0, -400.0], [-225.0, -80.0, 0.0], [-400.0, 0.0, 1400.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h[(i, j)], c(want[i][j]));
            }
        }
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn two_level_block_eigenvalues() {
        // closed-form 2×2 diagonalization as the oracle
        let p = SystemParams { omega1: 137.0, delta1: -55.0, ..SystemParams::ZERO };
        let e = eig(&build_hamiltonian(&p)).unwrap();
        let mut got: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let root = sqrt(p.delta1 * p.delta1 / 4.0 + p.omega1 * p.omega1);
        let mut want = [p.delta1 / 2.0 - root, 0.0, p.delta1 / 2.0 + root];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-11, "{g} vs {w}");
        }
    }

    #[test]
    fn reference_rates_in_channel_order() {
        let rates: Vec<f64> = build_lindblad_terms(&SystemParams::nv_reference()).iter().map(|t| t.rate).collect();
        assert_eq!(rates, [900.0, 1500.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn jumps_are_nilpotent() {
        for t in build_lindblad_terms(&SystemParams::nv_reference()).iter().skip(2) {
            assert_eq!((&t.op * &t.op).max_abs(), 0.0);
        }
    }

    #[test]
    fn trace_functional_is_left_null_vector() {
        let s = build_superoperator(&SystemParams::nv_reference());
        let mut id = [C64::new(0.0, 0.0); 9];
        for k in [0, 4, 8] {
            id[k] = c(1.0);
        }
        let row = s.transpose().mul_vec(&id);
        assert!(row.iter().all(|z| z.modulus() < 1e-12));
    }

    #[test]
    fn generator_preserves_hermiticity() {
        let p = SystemParams::nv_reference();
        let i = C64::new(0.0, 1.0);
        let x = CMatrix::from_rows(&[
            [c(0.2), c(0.1) + i * 0.3, c(-0.05)],
            [c(0.1) - i * 0.3, c(0.5), i * 0.2],
            [c(-0.05), -i * 0.2, c(0.3)],
        ]);
        let y = apply_generator(&p, &x);
        assert!(y.hermiticity_defect() < 1e-10);
        assert!(y.trace().modulus() < 1e-10);
    }
}
