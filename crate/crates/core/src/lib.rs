//! Stochastic line-search optimization for finite-sum problems.
//!
//! The crate implements SGD-type methods whose step size comes from a
//! backtracking Armijo search on the sampled batch function, with search
//! directions that may carry memory (momentum, nonlinear conjugate gradient,
//! diagonal preconditioning). Every emitted direction is passed through a
//! stochastic-gradient-related safeguard
//!
//! ```text
//! ‖d‖ ≤ c1 ‖g‖,    dᵀg ≤ −c2 ‖g‖²
//! ```
//!
//! and replaced by the plain stochastic gradient step when it fails. Under that
//! safeguard the accepted step has a computable floor and the backtracking
//! count a computable ceiling; both are recorded in the iteration trace and
//! can be re-checked after the fact (see [`linesearch::alpha_low`],
//! [`linesearch::jstar`] and the `verify` subcommand).
//!
//! Modules:
//! - [`problems`]: finite-sum objectives, batch sampling and synthetic generators
//!   with known smoothness / PL constants.
//! - [`directions`]: direction rules and the safeguard.
//! - [`linesearch`]: the stochastic Armijo backtracking search.
//! - [`optimizer`]: the outer loop and trajectory records.
//! - [`diagnostics`]: exact moment enumeration and sampled growth / PL / covariance constants.
//! - [`cli`]: config files, CSV / SVG output and the subcommands behind the `slsgd` binary.

// `!(a < b)` is used on purpose so NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod directions;
mod error;
pub mod linalg;
pub mod linesearch;
pub mod optimizer;
pub mod problems;
pub mod rng;

pub use error::{Error, Result};
