//! Ensemble-of-forests Markov random fields over copula edge potentials.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and the benchmark harness live in the `efmrf` companion crate.

#![no_std]

extern crate alloc;

pub mod copula;
pub mod cuts;
pub mod data;
pub mod error;
pub mod graph;
pub mod learner;
pub mod linalg;
pub mod objectives;
pub mod special;
pub mod spg;
pub mod synth;
pub mod tree_kernel;

pub use copula::{CopulaFamily, CopulaSpec, PseudoObservations};
pub use data::DataMatrix;
pub use error::{CopulaError, FitError, KernelError, ObjectiveError, SpgError, SynthError};
pub use tree_kernel::{EdgeWeights, PairMatrix};
