//! Operator-level model of the driven three-level system and its real
//! Gell-Mann representation.
//!
//! Basis order is `(|0⟩, |+1⟩, |−1⟩)` throughout. Frequencies and rates are
//! in kHz (angular), ħ = 1.

mod bloch;
mod dynamical;
mod operators;

use core::fmt;
use core::str::FromStr;

use thiserror::Error;

pub use bloch::{
    bloch_to_rho, gell_mann, positivity_margin, rho_to_bloch, BlochVector, DensityMatrix, StateError, PURE_STATE_RADIUS,
};
pub use dynamical::{
    build_dynamical_system, compare_methods, dynamical_matrix, dynamical_matrix_and_drive, explicit_matrix,
    generic_matrix_and_drive, DynamicalSystem, DynamicsError, FindingKind, MatrixComparison, MatrixFinding, Method,
};
pub use operators::{apply_generator, build_hamiltonian, build_lindblad_terms, build_superoperator, JumpTerm};

/// One point in control space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SystemParams {
    /// Rabi frequency of the |0⟩↔|+1⟩ drive.
    pub omega1: f64,
    /// Rabi frequency of the |0⟩↔|−1⟩ drive.
    pub omega2: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Pure dephasing rates.
    pub gamma1: f64,
    pub gamma2: f64,
    pub kappa_u1: f64,
    pub kappa_u2: f64,
    pub kappa_d1: f64,
    pub kappa_d2: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter {name} is not finite ({value})")]
    NotFinite { name: ParamName, value: f64 },
    #[error("rate {name} must be non-negative, got {value}")]
    NegativeRate { name: ParamName, value: f64 },
    #[error("unknown parameter name `{0}`")]
    UnknownName(alloc::string::String),
}

impl SystemParams {
    pub const ZERO: SystemParams = SystemParams {
        omega1: 0.0,
        omega2: 0.0,
        delta1: 0.0,
        delta2: 0.0,
        gamma1: 0.0,
        gamma2: 0.0,
        kappa_u1: 0.0,
        kappa_u2: 0.0,
        kappa_d1: 0.0,
        kappa_d2: 0.0,
    };

    /// Room-temperature NV reference point: Ω₂ = 400, Δ₂ = 1400,
    /// γ⁽¹⁾ = 900, γ⁽²⁾ = 1500, all κ = 1 (kHz), with the first drive at
    /// (Δ₁, Ω₁) = (−80, 225).
    pub fn nv_reference() -> Self {
        SystemParams {
            omega1: 225.0,
            omega2: 400.0,
            delta1: -80.0,
            delta2: 1400.0,
            gamma1: 900.0,
            gamma2: 1500.0,
            kappa_u1: 1.0,
            kappa_u2: 1.0,
            kappa_d1: 1.0,
            kappa_d2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for name in ParamName::ALL {
            let value = self.get(name);
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
            if name.is_rate() && value < 0.0 {
                return Err(ParamError::NegativeRate { name, value });
            }
        }
        Ok(())
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::Omega1 => self.omega1,
            ParamName::Omega2 => self.omega2,
            ParamName::Delta1 => self.delta1,
            ParamName::Delta2 => self.delta2,
            ParamName::Gamma1 => self.gamma1,
            ParamName::Gamma2 => self.gamma2,
            ParamName::KappaU1 => self.kappa_u1,
            ParamName::KappaU2 => self.kappa_u2,
            ParamName::KappaD1 => self.kappa_d1,
            ParamName::KappaD2 => self.kappa_d2,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        let slot = match name {
            ParamName::Omega1 => &mut self.omega1,
            ParamName::Omega2 => &mut self.omega2,
            ParamName::Delta1 => &mut self.delta1,
            ParamName::Delta2 => &mut self.delta2,
            ParamName::Gamma1 => &mut self.gamma1,
            ParamName::Gamma2 => &mut self.gamma2,
            ParamName::KappaU1 => &mut self.kappa_u1,
            ParamName::KappaU2 => &mut self.kappa_u2,
            ParamName::KappaD1 => &mut self.kappa_d1,
            ParamName::KappaD2 => &mut self.kappa_d2,
        };
        *slot = value;
    }

    pub fn with(mut self, name: ParamName, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Δκᵢ = κ_d⁽ⁱ⁾ − κ_u⁽ⁱ⁾.
    pub fn delta_kappa(&self) -> (f64, f64) {
        (self.kappa_d1 - self.kappa_u1, self.kappa_d2 - self.kappa_u2)
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::nv_reference()
    }
}

/// Addressable scalar fields of [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ParamName {
    Omega1,
    Omega2,
    Delta1,
    Delta2,
    Gamma1,
    Gamma2,
    KappaU1,
    KappaU2,
    KappaD1,
    KappaD2,
}

impl ParamName {
    pub const ALL: [ParamName; 10] = [
        ParamName::Omega1,
        ParamName::Omega2,
        ParamName::Delta1,
        ParamName::Delta2,
        ParamName::Gamma1,
        ParamName::Gamma2,
        ParamName::KappaU1,
        ParamName::KappaU2,
        ParamName::KappaD1,
        ParamName::KappaD2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::Omega1 => "omega1",
            ParamName::Omega2 => "omega2",
            ParamName::Delta1 => "delta1",
            ParamName::Delta2 => "delta2",
            ParamName::Gamma1 => "gamma1",
            ParamName::Gamma2 => "gamma2",
            ParamName::KappaU1 => "kappa_u1",
            ParamName::KappaU2 => "kappa_u2",
            ParamName::KappaD1 => "kappa_d1",
            ParamName::KappaD2 => "kappa_d2",
        }
    }

    pub fn is_rate(self) -> bool {
        !matches!(self, ParamName::Omega1 | ParamName::Omega2 | ParamName::Delta1 | ParamName::Delta2)
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = ParamError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamName::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| ParamError::UnknownName(s.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SystemParams::nv_reference().validate().is_ok());
        let bad = SystemParams::nv_reference().with(ParamName::Gamma2, -1.0);
        assert!(matches!(bad.validate(), Err(ParamError::NegativeRate { name: ParamName::Gamma2, .. })));
        let nan = SystemParams::nv_reference().with(ParamName::Delta1, f64::NAN);
        assert!(matches!(nan.validate(), Err(ParamError::NotFinite { .. })));
        // detunings and Rabi frequencies may be negative
        assert!(SystemParams::nv_reference().with(ParamName::Omega2, -445.0).validate().is_ok());
    }

    #[test]
    fn names_round_trip() {
        for p in ParamName::ALL {
            assert_eq!(p.as_str().parse::<ParamName>().unwrap(), p);
        }
        assert!("omega3".parse::<ParamName>().is_err());
    }
}
