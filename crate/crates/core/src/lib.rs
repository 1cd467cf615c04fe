//! Classical statistical mechanics on a finite phase space under two-time
//! boundary conditions.
//!
//! * [`phase_space`]: cells, regions, macrostate partitions and permutation
//!   dynamics with exact counting measure.
//! * [`two_time`]: macrostate probabilities conditioned on an initial and a
//!   final macrostate, and the perfect-mixing reduction.
//! * [`scenario`]: bounded probabilities and entropy when small sets evolve
//!   without mixing.
//! * [`retrodiction`]: forward probabilities and Bayesian inference of past
//!   macrostates, including the explaining-away perturbation.
//! * [`oracle`]: brute-force enumerators and a Monte Carlo scenario sampler
//!   used to cross-check the closed forms.

pub mod error;
pub mod fixtures;
pub mod oracle;
pub mod phase_space;
pub mod retrodiction;
pub mod rng;
pub mod scenario;
pub mod two_time;

pub use error::{Error, Result};
pub use phase_space::{Cell, MacrostatePartition, PermutationDynamics, PhaseSpace, RegionSet};
pub use two_time::{Exact, MacrostateDistribution, TwoTimeProblem};
