//! Shared fixtures for the scheduling benchmarks.

use uavsched_core::datagen::{generate_lab_instance, GenSpec};
use uavsched_core::ProblemInstance;

/// Generated lab-map instance with `n_tasks` tasks and at most two
/// predecessors per task.
pub fn lab_instance(n_tasks: usize, seed: u64) -> ProblemInstance {
    generate_lab_instance(&GenSpec { n_tasks, seed, ..GenSpec::default() }).expect("benchmark spec is feasible")
}
