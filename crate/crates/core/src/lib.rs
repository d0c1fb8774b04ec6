//! Observables of non-Hermitian quantum systems.
//!
//! Four ways of extracting normalised expectation values from dynamics
//! generated by a non-Hermitian Hamiltonian are implemented side by side:
//!
//! * [`biorthogonal`]: left/right eigenbases, associated states and the
//!   pseudo-Hermiticity operator `S` for static Hamiltonians;
//! * [`metric`]: the time-dependent metric `ρ(t)` and the Hermitian picture
//!   `|Ψ(t)⟩ = η(t)|ψ(t)⟩`;
//! * [`dissipative`]: the Lindblad master equation and its no-jump limit
//!   (division by the norm);
//! * [`symmetry`]: left/right similarity maps between momentum modes `k` and
//!   `-k` and the parity of spin observables.
//!
//! [`experiments`] wires them into reproducible scenarios with CSV output and
//! a self-verification suite.

pub mod biorthogonal;
pub mod dissipative;
pub mod error;
pub mod experiments;
pub mod integrate;
pub mod linalg;
pub mod metric;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
pub use integrate::{HamiltonianFn, TimeGrid};
pub use linalg::{c64, CMatrix, PauliCoeffs, Spectrum, Tolerances, C64};
