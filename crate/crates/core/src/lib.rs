//! Numerical laboratory for a ratio-dependent three-species food chain
//! (prey `u`, specialist predator `v`, generalist top predator `r`) in which
//! the top predator is subject to a strong Allee effect with threshold `m`.
//!
//! The crate covers the kinetic steady states, linear (Turing) stability of
//! the coexistence state under diffusion, one- and two-dimensional pattern
//! simulators, and the analysis layer used by the experiments: discrete
//! norms, least-squares fits, pattern classification, the decay-rate sweep
//! in `m` and the overexploitation scenarios.
//!
//! Simulators implement [`simulate::Simulator`] and are looked up by name in a
//! [`simulate::SimulatorRegistry`], so experiments can be pointed at either
//! discretization from configuration.

pub mod analysis;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod poly;
pub mod simulate;
pub mod solver1d;
pub mod solver2d;
pub mod turing;

pub use error::{Error, Result};
pub use model::{Params, StatePoint};
