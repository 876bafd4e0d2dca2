//! Exact-arithmetic workbench for slack matrices, LP factorizations,
//! reductions with distortion, concrete gadget reductions, pseudoexpectation
//! composition and the uniform LP over bounded-treewidth graphs.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, reports and
//! the command-line front end live in the companion `reductio` crate.

#![no_std]

extern crate alloc;

pub mod eigen;
pub mod error;
pub mod factor;
pub mod gadgets;
pub mod graph;
pub mod linalg;
pub mod lasserre;
pub mod lp_proof;
pub mod matrix;
pub mod problems;
pub mod reduction;
pub mod rational;
pub mod simplex;
pub mod slack;
pub mod suite;
pub mod table;
pub mod treewidth;
pub mod twlp;
pub mod verdict;

pub use error::{Error, Result};
pub use rational::Rational;
pub use verdict::Verdict;
