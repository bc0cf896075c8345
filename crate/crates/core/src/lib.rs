//! Feasibility seeking for finite families of unions of disjoint convex sets.
//!
//! Each set in a [`Problem`] is a [`UcsSet`]: a union of pairwise-disjoint
//! closed convex pieces ([`ConvexPiece`]). The solver in [`solver`] runs cyclic
//! nearest-piece projections from a start point in every piece of the first
//! set, prunes orbits that do not come back to their own start piece after one
//! sweep, and iterates the rest. [`verifier`] holds brute-force oracles used to
//! cross-check the solver on small instances.

pub mod cli;
pub mod convex;
pub mod error;
pub mod io;
pub mod solver;
pub mod ucs;
pub mod verifier;

pub use convex::{ConvexPiece, Point, Shape};
pub use error::{Error, Result};
pub use solver::{solve, OrbitState, OrbitStatus, Problem, SolveReport, SolverConfig};
pub use ucs::{UcsProjection, UcsSet};
