//! Equilibria and stability of non-rotating self-gravitating gaseous stars.
//!
//! The crate builds steady stars for general barotropic pressure laws,
//! classifies their stability through the turning point principle and through
//! discretized spectral operators, evaluates the energy-Casimir / distance /
//! dual functionals together with their exact identities, and stress-tests
//! the predictions with a spherically symmetric Euler-Poisson finite-volume
//! simulator.  All quantities are expressed in G = 1 units.
//!
//! The main entry points, roughly in dependency order:
//!
//! * [`eos`]: pressure laws, the enthalpy `Phi` and its inverse, the pointwise
//!   Legendre transform `psi_star`.
//! * [`star`]: the steady-state shooting solver producing [`star::StarProfile`].
//! * [`family`]: mass-radius sweeps and the turning point classifier.
//! * [`spectral`]: finite-element quadratic forms, inertia counts, kernels.
//! * [`functionals`]: the distance `d1..d5`, the energy-Casimir difference,
//!   the projection `P`, and the dual functional `B`.
//! * [`hydro`]: the conservative radial Euler-Poisson scheme and stability
//!   experiments tracking `d(t)`.
//! * [`cli`]: the `starstab` command line driver used by the thin binary.
//!
//! The `examples/` directory contains one runnable example per capability;
//! `cargo run --example polytrope_star` is a good place to start.

pub mod cli;
pub mod config;
pub mod eos;
pub mod error;
pub mod family;
pub mod functionals;
pub mod hydro;
pub mod interp;
pub mod io;
pub mod quad;
pub mod spectral;
pub mod star;

pub use error::{Error, Result};
