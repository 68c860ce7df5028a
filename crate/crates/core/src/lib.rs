//! Nonnegative r-potent operators on finite weighted spaces.
//!
//! The crate builds nonnegative range bases with pairwise disjoint supports
//! and uses them to certify whether an operator leaves a nontrivial standard
//! subspace `L^2(U)` invariant.
//!
//! ```
//! use rpotent::decomposer::{decide_decomposability, DecideOptions, Verdict};
//! use rpotent::measure_space::ToleranceConfig;
//! use rpotent::operator::NonnegativeOperator;
//!
//! let cfg = ToleranceConfig::default();
//! let rows = vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
//! let op = NonnegativeOperator::from_rows(vec![1.0; 3], &rows, 3, &cfg).unwrap();
//! let cert = decide_decomposability(&op, &cfg, &DecideOptions::default()).unwrap();
//! assert_eq!(cert.verdict, Verdict::DecomposableByU);
//! assert_eq!(cert.witness_u.unwrap().to_one_based(), vec![3]);
//! ```

pub mod cli;
pub mod decomposer;
pub mod error;
pub mod forge;
pub mod generator;
pub mod io;
mod linalg;
pub mod measure_space;
pub mod operator;
pub mod suite;

pub use error::{Error, Result};
