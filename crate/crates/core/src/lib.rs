//! Exceptional-point based mode switching in a microwave-driven three-level
//! (V-configuration) system with dephasing and up/down jumps.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`model`]: Hamiltonian, jump operators, the 9×9 Schrödinger-picture
//!   Lindblad superoperator and the real 8×8 Gell-Mann dynamical matrix,
//!   plus exact density-matrix/Bloch-vector conversions.
//! * [`spectral`]: biorthogonal left/right eigensystems, eigenvalue condition
//!   numbers and continuity-based branch tracking (monodromy) along paths.
//! * [`ep`]: condition-number maps, local refinement of exceptional points,
//!   order classification and multi-start search for high-order EPs.
//! * [`dynamics`]: elliptic parameter loops, RK4 propagation of the Bloch
//!   vector, adiabatic coefficients, accumulated decay rates and the full
//!   non-reciprocal switch experiment.
//!
//! Units: ħ = 1, frequencies and rates in kHz, times in ms.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod dynamics;
pub mod ep;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod spectral;

mod math;

pub use num_complex::Complex64 as C64;

pub use dynamics::{Direction, LoopPath, PlaneAxes, SwitchReport, Trajectory};
pub use ep::{EpCandidate, ScanGrid};
pub use model::{BlochVector, DensityMatrix, DynamicalSystem, Method, ParamName, SystemParams};
pub use spectral::{EigenSystem, Permutation, TrackedSpectrum};

/// Library version, echoed into result manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
