//! Task scheduling for battery-capacitated UAV fleets operating indoors.
//!
//! A problem instance is a high-level position graph (a symmetric flight-time
//! matrix), a set of recharge stations, a precedence-constrained task set and
//! a UAV fleet. Schedules are built from a task sequence by the earliest
//! available time heuristic in [`eat`], and sequences are searched with a
//! discrete swap-pair particle swarm in [`pso`]. The objective is makespan.
//!
//! ```
//! use uavsched_core::{eat, sample};
//!
//! let instance = sample::twelve_task_instance();
//! let order = uavsched_core::pso::priority_orderings(&instance).unwrap();
//! let schedule = eat::build_schedule(&order[0].1, &instance).unwrap();
//! assert!(schedule.makespan() > 0);
//! ```

pub mod datagen;
pub mod eat;
pub mod experiment;
pub mod gantt;
pub mod graph;
pub mod io;
pub mod model;
pub mod pso;
pub mod sample;
pub mod validate;

pub use graph::{PrecedenceGraph, PrecedenceViolation};
pub use model::{
    Action, ActionKind, ModelError, PosIdx, Position, PositionKind, ProblemInstance, RechargeStation,
    Schedule, Seconds, Task, TaskId, TaskType, TrajectoryMap, Uav,
};
pub use validate::{validate_schedule, Violation, ViolationKind};
