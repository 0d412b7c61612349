//! Discrete particle swarm search over precedence-feasible task sequences.
//!
//! Positions are task permutations, velocities are lists of index swaps. Each
//! iteration moves every particle, repairs precedence, and scores the result by
//! the makespan of its earliest-available-time schedule.

mod repair;
mod rules;
mod swaps;
mod swarm;
mod velocity;

pub use crate::eat::fitness;
pub use repair::{repair, RepairError};
pub use rules::{priority_orderings, PriorityRule};
pub use swaps::{apply_swaps, sequence_difference, SwapError, SwapPair, SwapPairList};
pub use swarm::{
    generate_initial_swarm, run_pso, velocity_band, HistoryPoint, Particle, PsoConfig, PsoError, RunReport,
    SwarmState,
};
pub use velocity::{combine_velocity, pick_count, update_velocity};
