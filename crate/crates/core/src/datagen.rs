//! Seeded random instance generation.
//!
//! Processing times are drawn from per-type bands: single inspections 20-80 s,
//! compound inspections 100-200 s, material handling a fixed 60 s plus the
//! flight between its start and end. Precedence edges only point from lower to
//! higher task indices and are transitively reduced afterwards.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{PrecedenceGraph, PrecedenceViolation};
use crate::model::{
    worst_case_engagement, ModelError, PosIdx, ProblemInstance, RechargeStation, Seconds, Task, TaskId, TaskType,
    TrajectoryMap, Uav,
};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generation spec: {0}")]
    Spec(String),
    #[error("no {0} task fits in one battery charge after {1} attempts")]
    Infeasible(&'static str, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n_tasks: usize,
    pub max_predecessors: usize,
    /// Relative weights of single inspection, compound inspection, material handling.
    pub type_weights: [u32; 3],
    pub single_band: (Seconds, Seconds),
    pub compound_band: (Seconds, Seconds),
    pub handling_base: Seconds,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            n_tasks: 10,
            max_predecessors: 2,
            type_weights: [1, 1, 1],
            single_band: (20, 80),
            compound_band: (100, 200),
            handling_base: 60,
            seed: 0,
        }
    }
}

const MAX_ATTEMPTS: usize = 1000;

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        for (name, (lo, hi)) in [("single", self.single_band), ("compound", self.compound_band)] {
            if lo == 0 || lo > hi {
                return Err(GenError::Spec(format!("{name} band {lo}-{hi} must be positive and ordered")));
            }
        }
        if self.type_weights.iter().all(|&w| w == 0) {
            return Err(GenError::Spec("at least one task type needs a positive weight".into()));
        }
        Ok(())
    }
}

fn draw_task<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &GenSpec,
    kind: TaskType,
    id: TaskId,
    work: &[PosIdx],
    map: &TrajectoryMap,
) -> Task {
    let (start, end, proc_time) = match kind {
        TaskType::SingleInspection | TaskType::CompoundInspection => {
            let p = *work.choose(rng).expect("work positions checked");
            let (lo, hi) = if kind == TaskType::SingleInspection { spec.single_band } else { spec.compound_band };
            (p, p, rng.gen_range(lo..=hi))
        }
        TaskType::MaterialHandling => {
            let pair: Vec<PosIdx> = work.choose_multiple(rng, 2).copied().collect();
            (pair[0], pair[1], spec.handling_base + map.flight(pair[0], pair[1]))
        }
    };
    Task { id, task_type: kind, start, end, proc_time, predecessors: Vec::new() }
}

/// Random acyclic, transitively reduced precedence over `ids` (in order).
/// Task `k` gets a uniform number in `[0, min(max_predecessors, k)]` of
/// distinct predecessors among the tasks before it.
pub fn generate_precedence<R: Rng + ?Sized>(ids: &[TaskId], max_predecessors: usize, rng: &mut R) -> PrecedenceGraph {
    let mut edges = Vec::new();
    for (k, &id) in ids.iter().enumerate() {
        let count = rng.gen_range(0..=max_predecessors.min(k));
        for p in rand::seq::index::sample(rng, k.max(1), count.min(k)).into_vec() {
            edges.push((ids[p], id));
        }
    }
    PrecedenceGraph::new(ids.iter().copied(), edges).transitive_reduction()
}

/// Cycles, redundant edges and dangling references in `graph`.
pub fn validate_precedence(graph: &PrecedenceGraph) -> Vec<PrecedenceViolation> {
    graph.validate()
}

/// Instance with `spec.n_tasks` tasks (ids 1..=n) on `map`. Tasks that would
/// not fit in one charge from the worst starting position are redrawn.
pub fn generate_instance(
    spec: &GenSpec,
    map: TrajectoryMap,
    uavs: Vec<Uav>,
    stations: Vec<RechargeStation>,
) -> Result<ProblemInstance, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let work: Vec<PosIdx> = map.work_positions().collect();
    let capacity = uavs.iter().map(|u| u.battery_capacity).min().ok_or(ModelError::NoUavs)?;
    if spec.n_tasks > 0 {
        if work.is_empty() {
            return Err(GenError::Spec("map has no work positions".into()));
        }
        if work.len() < 2 && spec.type_weights[2] > 0 {
            return Err(GenError::Spec("material handling needs two work positions".into()));
        }
        if stations.is_empty() {
            return Err(ModelError::NoStations.into());
        }
    }
    let kinds = [TaskType::SingleInspection, TaskType::CompoundInspection, TaskType::MaterialHandling];
    let type_dist = WeightedIndex::new(spec.type_weights).map_err(|e| GenError::Spec(e.to_string()))?;
    let to_station = |p: PosIdx| stations.iter().map(|s| map.flight(p, s.pos)).min().unwrap_or(0);

    let mut tasks = Vec::with_capacity(spec.n_tasks);
    for k in 0..spec.n_tasks {
        let kind = kinds[type_dist.sample(&mut rng)];
        let id = TaskId(k as u32 + 1);
        let mut attempt = 0;
        let task = loop {
            let t = draw_task(&mut rng, spec, kind, id, &work, &map);
            if worst_case_engagement(&map, &t, to_station(t.end)) <= capacity {
                break t;
            }
            attempt += 1;
            if attempt >= MAX_ATTEMPTS {
                let name = match kind {
                    TaskType::SingleInspection => "single inspection",
                    TaskType::CompoundInspection => "compound inspection",
                    TaskType::MaterialHandling => "material handling",
                };
                return Err(GenError::Infeasible(name, MAX_ATTEMPTS));
            }
        };
        tasks.push(task);
    }

    let ids: Vec<TaskId> = tasks.iter().map(|t| t.id).collect();
    let graph = generate_precedence(&ids, spec.max_predecessors, &mut rng);
    for t in &mut tasks {
        t.predecessors = graph.predecessors(t.id);
    }
    Ok(ProblemInstance::new(map, tasks, uavs, stations)?)
}

/// [`generate_instance`] on the laboratory map with the default fleet.
pub fn generate_lab_instance(spec: &GenSpec) -> Result<ProblemInstance, GenError> {
    let map = crate::sample::lab_map();
    let uavs = crate::sample::default_uavs(&map);
    let stations = crate::sample::default_stations(&map);
    generate_instance(spec, map, uavs, stations)
}
