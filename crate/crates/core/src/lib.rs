//! Numerical toolkit for mixed stable moving averages driven by a nonsingular flow.
//!
//! The crate is organised bottom-up:
//!
//! * [`stable`] samples symmetric α-stable laws and evaluates characteristic-function exponents.
//! * [`quadrature`] is the breakpoint-aware adaptive line integrator used everywhere else.
//! * [`kernels`] holds the kernel registry, flows and the sampled-path kernel.
//! * [`classifier`] labels every x-node as fixed, cyclic, conservative non-periodic or dissipative.
//! * [`decomposer`] turns a classification into restricted component kernels.
//! * [`simulator`] draws path ensembles from the discretised random measure.
//! * [`verifier`] checks flow axioms, generation identities and self-similarity.

pub mod classifier;
pub mod decomposer;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod numeric;
pub mod quadrature;
pub mod rng;
pub mod simulator;
pub mod stable;
pub mod verifier;

pub use error::{FsmError, Result};
pub use grid::GridSpec;
pub use kernels::{FlowSpec, KernelSpec};
pub use stable::{LinearCombination, StableParams};
