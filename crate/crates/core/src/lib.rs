//! Minimisation of `v = f - g` where `f` and `g` are submodular functions on
//! an integer lattice `{0..k_1-1} x ... x {0..k_n-1}`.
//!
//! The crate provides the building blocks (oracles, separable functions,
//! structural checkers, the greedy extension, modular lower and upper bounds,
//! decompositions) and three majorisation-minimisation loops built on them:
//! [`mm::subsup`], [`mm::supsub`] and [`mm::modmod`].

pub mod checks;
pub mod decompositions;
pub mod error;
pub mod extension;
pub mod functions;
pub mod lattice;
pub mod mm;
pub mod oracle;
pub mod problems;
pub mod separable;
pub mod solvers;
pub mod upper_bounds;

pub use checks::{check_dr, check_monotone, check_submodular, Verdict, Violation, Witness};
pub use decompositions::{DsProblem, Provenance};
pub use error::{Error, Result};
pub use extension::{Chain, ChainMode, RhoProfile};
pub use lattice::{LatticeDomain, LatticePoint, DEFAULT_CAP};
pub use mm::{solve, Algorithm, SolveOptions, SolveReport, Status, UbPolicy};
pub use oracle::{LatticeFunction, Oracle};
pub use separable::SeparableFunction;
pub use upper_bounds::BoundVariant;
