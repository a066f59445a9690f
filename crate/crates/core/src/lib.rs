//! Classical simulation of the dihedral hidden-subgroup sieves.
//!
//! A hidden reflection (1, d) in the dihedral group D_{2^n} is recovered
//! end-to-end from black-box queries alone: a sampling machine turns oracle
//! calls into phase objects labelled uniformly mod 2^n, combination
//! operations zero out blocks of label bits at the price of destroying
//! objects, a pipeline of stages drives labels to 2^{n-1}, a Hadamard
//! measurement converts that object into the least significant bit of d,
//! and oracle restrictions recurse on the remaining bits.
//!
//! Two pipelines are implemented: the pairwise collision sieve (piles keyed
//! on label blocks, subexponential space) and the block sieve (fixed-size
//! buffers, polynomial space). A dense amplitude simulator provides ground
//! truth for every measurement distribution the abstraction samples from.

pub mod combine;
pub mod error;
pub mod exactsim;
pub mod label;
pub mod oracle;
pub mod params;
pub mod recovery;
pub mod report;
pub mod rng;
pub mod sieve;
pub mod stats;
pub mod verify;

pub use combine::{BlockCombineConfig, CombineOutcome, SolutionSet};
pub use error::{Error, Result};
pub use label::{Label, PhaseObject};
pub use oracle::{GroupElement, HiddenOracle};
pub use params::{SieveParams, Variant};
pub use recovery::{RecoveryConfig, RecoveryOutcome};
pub use report::TrialReport;
pub use sieve::{PipelinePlan, RunMode};
