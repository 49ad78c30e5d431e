//! Exact top-k set selection and ranking under prefix diversity constraints.
//!
//! The crate owns the full pipeline: the item pool and its group views
//! ([`dataset`]), the two in-group fairness measures ([`metrics`]), the
//! diversity lower-bound table ([`constraints`]), the integer-program
//! builders ([`model`]), an exact branch-and-bound solver with a
//! bounded-variable primal simplex ([`solver`], [`simplex`]), and the
//! leximin balancing loop ([`leximin`]).
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the CLI
//! live in the companion `fairsel` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod constraints;
pub mod dataset;
pub mod leximin;
pub mod metrics;
pub mod model;
pub mod prefix;
pub mod simplex;
pub mod solver;

/// Exact rational used for scores, metric values and model coefficients.
pub type Rat = num_rational::Ratio<i64>;

pub use constraints::{DiversityConstraints, Violation};
pub use dataset::{
    AttributeSchema, Dataset, DatasetStats, Item, LoadError, Outcome, RawRow, ValueId,
};
pub use leximin::{leximin_solve, maximin_q, LeximinError, LeximinRound, LeximinTrace, SearchStep};
pub use metrics::{igf_aggregated, igf_ratio, igf_vector, IgfMode, IgfVector};
pub use model::{
    build_aggregated_model, build_model, build_ratio_model, IgfBounds, IntegerProgram, ModelError,
};
pub use solver::{
    brute_force_solve, solve_ip, solve_ip_with_clock, Clock, NoClock, Solution, SolveError,
    SolveStatus, SolverOptions,
};
