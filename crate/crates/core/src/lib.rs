//! Approximate minimax strategies for zero-sum games in which the maximizing
//! player's best response is monotone submodular maximization over a
//! matroid.
//!
//! The pipeline: a stochastic Frank-Wolfe solver ([`optimizer`]) maximizes
//! the smoothed minimum of multilinear extensions over the matroid polytope
//! using only best responses to independent distributions, and swap
//! rounding ([`matroid`]) turns the fractional point into samples or an
//! explicit mixed strategy ([`equilibria`]). Two domains ship with exact
//! adversary oracles: network security games ([`nsg`]) and robust budget
//! allocation ([`budget`]). [`baselines`] provides greedy, double oracle and
//! brute-force references.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod budget;
pub mod error;
pub mod experiment;
pub mod equilibria;
pub mod function;
pub mod game;
pub mod items;
pub mod matroid;
pub mod nsg;
pub mod optimizer;
pub mod rng;

pub use error::{Error, Result};
pub use function::{Handle, SetFunction};
pub use items::{GroundSet, ItemSet};
pub use matroid::{ConvexDecomposition, Matroid};
pub use equilibria::MixedStrategy;
pub use optimizer::{SfwConfig, SfwResult, StartPoint};
