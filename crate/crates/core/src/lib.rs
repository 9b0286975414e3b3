//! Simulation and benchmarking toolkit for two gravitationally coupled
//! mechanical oscillators.
//!
//! The crate covers four views of the same two-oscillator system:
//!
//! - [`quantum_dynamics`]: the rotating-wave beam-splitter evolution, closed
//!   and under Markovian thermal noise (Lyapunov equation for the covariance).
//! - [`sn_dynamics`]: Schrödinger–Newton mean-field dynamics, where each
//!   oscillator only feels the other's mean position.
//! - [`bounds`]: classical (LOCC measure-and-prepare) simulation fidelity
//!   bounds for a Gaussian prior over coherent inputs.
//! - [`experiment`]: SI-unit feasibility numbers for a mirror-pair setup.
//!
//! Gaussian states live in [`gaussian`] (ħ = 1, vacuum variance 1/2).
//! [`fock_oracle`] is an independent truncated-Fock-space engine used to
//! cross-check the Gaussian closed forms, and [`ensemble`] does prior
//! sampling and reproducible Monte-Carlo averages.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example` lists them.

// Parameter checks are written `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod constants;
pub mod ensemble;
mod error;
pub mod experiment;
pub mod fock_oracle;
pub mod gaussian;
pub mod quadrature;
pub mod quantum_dynamics;
pub mod sn_dynamics;

pub use error::{Error, Result};
pub use num_complex::Complex64;
