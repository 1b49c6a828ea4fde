//! Scheduling of continuous, energy-constrained jobs on a shared resource.
//!
//! Each job must receive a given amount of energy inside its time window
//! while its instantaneous consumption rate stays between per-job bounds,
//! and the summed rate over all jobs never exceeds the resource capacity.
//! Completing job `j` at time `C_j` costs `w_j * C_j + B_j`; schedules are
//! compared by the sum of those costs.
//!
//! The crate is organised around a two-level view of a schedule:
//!
//! * an [`model::EventOrder`] fixes only the chronological order of all job
//!   starts and completions, and
//! * given an order, the best event times and per-interval consumption are
//!   a linear program away ([`evaluator`]).
//!
//! On top of that sit [`search`] (greedy construction plus simulated
//! annealing over orders), [`exact`] (order enumeration for small
//! instances, and a mixed-integer model with an LP-file exporter for
//! external solvers), [`feasibility`] (a fast max-flow necessary condition)
//! and [`generator`] (random instances with tunable difficulty).

pub mod evaluator;
pub mod exact;
pub mod feasibility;
pub mod generator;
pub mod lp;
pub mod model;
pub mod search;
