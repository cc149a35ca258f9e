//! Long-time-stable propagators and phase factors for periodically driven
//! two-level systems.
//!
//! The evolution operator of `H(t) = eps*s1 + f(t)*s3` with a periodic drive
//! `f` is represented as a finite quasi-periodic Fourier sum ([`QPSeries`]),
//! built from a truncated Hill-matrix eigenproblem ([`floquet`]). Total,
//! dynamical and geometric phases are assembled from that representation with
//! all time integrals carried out analytically term by term ([`phases`]).
//! Pairs of driven systems coupled at first order in the interaction strength
//! are handled in [`twoqubit`]. An independent adaptive Runge-Kutta
//! integrator ([`oracle`]) exists purely for cross-validation and never feeds
//! the main pipeline.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod error;
pub mod floquet;
pub mod mat;
pub mod oracle;
pub mod phases;
pub mod qpseries;
pub mod twoqubit;

mod eigen;

pub use error::Error;
pub use floquet::{solve_floquet, Backend, Cutoff, Drive, FloquetSolution, TwoLevelParams};
pub use phases::{InitialState, PhaseReport};
pub use qpseries::{QPSeries, SecularSeries};
pub use twoqubit::{BasisState, CompositeParams, CompositeSystem, GateReport, Interaction};

pub(crate) type C64 = num_complex::Complex64;
