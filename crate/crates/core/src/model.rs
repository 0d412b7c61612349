//! Problem domain: positions, flight times, tasks, UAVs, recharge stations
//! and the schedules built over them.
//!
//! Time is integer seconds everywhere.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{PrecedenceGraph, PrecedenceViolation};

pub type Seconds = u64;

/// Default airborne time on a full battery.
pub const DEFAULT_BATTERY_CAPACITY: Seconds = 1200;
/// Default duration of one full recharge.
pub const DEFAULT_RECHARGE_DURATION: Seconds = 2700;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of a position inside a [`TrajectoryMap`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PosIdx(pub usize);

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown position `{0}`")]
    UnknownPosition(String),
    #[error("duplicate position id `{0}`")]
    DuplicatePosition(String),
    #[error("flight-time matrix must be {expected}x{expected}, found a row of length {found}")]
    MatrixShape { expected: usize, found: usize },
    #[error("flight time {from}->{to} must be 0 on the diagonal")]
    NonZeroDiagonal { from: String, to: String },
    #[error("flight time {from}->{to} must be positive")]
    ZeroFlight { from: String, to: String },
    #[error("flight-time matrix is asymmetric: {a}->{b} = {ab} but {b}->{a} = {ba}")]
    Asymmetric { a: String, b: String, ab: Seconds, ba: Seconds },
    #[error("no recharge stations configured")]
    NoStations,
    #[error("station at `{0}` is not a recharge-kind position")]
    StationNotRecharge(String),
    #[error("recharge position `{0}` must be referenced by exactly one station (found {1})")]
    StationCount(String, usize),
    #[error("station at `{0}` has zero slots")]
    ZeroSlots(String),
    #[error("duplicate task id {0}")]
    DuplicateTask(TaskId),
    #[error("task {0}: processing time must be positive")]
    ZeroProcTime(TaskId),
    #[error("task {task}: position `{pos}` is not a work position")]
    TaskAtStation { task: TaskId, pos: String },
    #[error("task {0}: inspection tasks must start and end at the same position")]
    InspectionMoves(TaskId),
    #[error("task {task}: worst-case engagement {required}s exceeds battery capacity {capacity}s")]
    TaskTooLong { task: TaskId, required: Seconds, capacity: Seconds },
    #[error("invalid precedence: {0}")]
    Precedence(PrecedenceViolation),
    #[error("duplicate UAV id `{0}`")]
    DuplicateUav(String),
    #[error("UAV `{0}`: battery capacity and recharge duration must be positive")]
    InvalidUav(String),
    #[error("instance has tasks but no UAVs")]
    NoUavs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionKind {
    Work,
    Recharge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub id: String,
    pub kind: PositionKind,
}

impl Position {
    pub fn work(id: impl Into<String>) -> Self {
        Self { id: id.into(), kind: PositionKind::Work }
    }

    pub fn recharge(id: impl Into<String>) -> Self {
        Self { id: id.into(), kind: PositionKind::Recharge }
    }
}

/// High-level map: positions plus the symmetric shortest flight-time matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryMap {
    positions: Vec<Position>,
    flight: Vec<Seconds>,
    lookup: HashMap<String, PosIdx>,
}

impl TrajectoryMap {
    pub fn new(positions: Vec<Position>, matrix: Vec<Vec<Seconds>>) -> Result<Self, ModelError> {
        let n = positions.len();
        let mut lookup = HashMap::with_capacity(n);
        for (i, p) in positions.iter().enumerate() {
            if lookup.insert(p.id.clone(), PosIdx(i)).is_some() {
                return Err(ModelError::DuplicatePosition(p.id.clone()));
            }
        }
        if matrix.len() != n {
            return Err(ModelError::MatrixShape { expected: n, found: matrix.len() });
        }
        let mut flight = Vec::with_capacity(n * n);
        for row in &matrix {
            if row.len() != n {
                return Err(ModelError::MatrixShape { expected: n, found: row.len() });
            }
            flight.extend_from_slice(row);
        }
        for a in 0..n {
            for b in 0..n {
                let ab = flight[a * n + b];
                let (ida, idb) = (positions[a].id.clone(), positions[b].id.clone());
                if a == b && ab != 0 {
                    return Err(ModelError::NonZeroDiagonal { from: ida, to: idb });
                }
                if a != b && ab == 0 {
                    return Err(ModelError::ZeroFlight { from: ida, to: idb });
                }
                let ba = flight[b * n + a];
                if ab != ba {
                    return Err(ModelError::Asymmetric { a: ida, b: idb, ab, ba });
                }
            }
        }
        Ok(Self { positions, flight, lookup })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn position(&self, idx: PosIdx) -> &Position {
        &self.positions[idx.0]
    }

    pub fn id(&self, idx: PosIdx) -> &str {
        &self.positions[idx.0].id
    }

    pub fn index_of(&self, id: &str) -> Result<PosIdx, ModelError> {
        self.lookup
            .get(id)
            .copied()
            .ok_or_else(|| ModelError::UnknownPosition(id.to_string()))
    }

    /// Matrix entry by index. Panics on out-of-range indices.
    #[inline]
    pub fn flight(&self, from: PosIdx, to: PosIdx) -> Seconds {
        self.flight[from.0 * self.positions.len() + to.0]
    }

    /// Matrix entry by position label.
    pub fn flight_time(&self, from: &str, to: &str) -> Result<Seconds, ModelError> {
        Ok(self.flight(self.index_of(from)?, self.index_of(to)?))
    }

    pub fn rows(&self) -> Vec<Vec<Seconds>> {
        self.flight.chunks(self.positions.len().max(1)).map(<[_]>::to_vec).collect()
    }

    pub fn work_positions(&self) -> impl Iterator<Item = PosIdx> + '_ {
        self.positions
            .iter()
            .enumerate()
            .filter(|(_, p)| p.kind == PositionKind::Work)
            .map(|(i, _)| PosIdx(i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    SingleInspection,
    CompoundInspection,
    MaterialHandling,
}

impl TaskType {
    pub fn is_inspection(self) -> bool {
        !matches!(self, TaskType::MaterialHandling)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub task_type: TaskType,
    pub start: PosIdx,
    pub end: PosIdx,
    pub proc_time: Seconds,
    pub predecessors: Vec<TaskId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RechargeStation {
    pub pos: PosIdx,
    /// Number of UAVs that can recharge simultaneously.
    pub slots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Uav {
    pub id: String,
    pub initial_pos: PosIdx,
    pub battery_capacity: Seconds,
    pub recharge_duration: Seconds,
}

impl Uav {
    pub fn new(id: impl Into<String>, initial_pos: PosIdx) -> Self {
        Self {
            id: id.into(),
            initial_pos,
            battery_capacity: DEFAULT_BATTERY_CAPACITY,
            recharge_duration: DEFAULT_RECHARGE_DURATION,
        }
    }
}

/// Station index and flight seconds to the nearest recharge station from `pos`.
/// Ties go to the lowest station index.
pub fn nearest_recharge_station(
    map: &TrajectoryMap,
    stations: &[RechargeStation],
    pos: PosIdx,
) -> Result<(usize, Seconds), ModelError> {
    stations
        .iter()
        .enumerate()
        .map(|(i, s)| (i, map.flight(pos, s.pos)))
        .min_by_key(|&(i, t)| (t, i))
        .ok_or(ModelError::NoStations)
}

/// A validated scheduling problem. All cross references resolve, the
/// precedence graph is acyclic and transitively reduced, and every task fits in
/// one battery charge from any position.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    map: TrajectoryMap,
    tasks: Vec<Task>,
    graph: PrecedenceGraph,
    uavs: Vec<Uav>,
    stations: Vec<RechargeStation>,
    task_index: HashMap<TaskId, usize>,
    nearest_rs: Vec<(usize, Seconds)>,
    station_at: Vec<Option<usize>>,
}

impl ProblemInstance {
    pub fn new(
        map: TrajectoryMap,
        tasks: Vec<Task>,
        uavs: Vec<Uav>,
        stations: Vec<RechargeStation>,
    ) -> Result<Self, ModelError> {
        if stations.is_empty() {
            return Err(ModelError::NoStations);
        }
        let mut station_at = vec![None; map.len()];
        for (i, s) in stations.iter().enumerate() {
            let p = map.position(s.pos);
            if p.kind != PositionKind::Recharge {
                return Err(ModelError::StationNotRecharge(p.id.clone()));
            }
            if s.slots == 0 {
                return Err(ModelError::ZeroSlots(p.id.clone()));
            }
            if station_at[s.pos.0].is_some() {
                return Err(ModelError::StationCount(p.id.clone(), 2));
            }
            station_at[s.pos.0] = Some(i);
        }
        for (i, p) in map.positions().iter().enumerate() {
            if p.kind == PositionKind::Recharge && station_at[i].is_none() {
                return Err(ModelError::StationCount(p.id.clone(), 0));
            }
        }

        let nearest_rs = (0..map.len())
            .map(|p| nearest_recharge_station(&map, &stations, PosIdx(p)))
            .collect::<Result<Vec<_>, _>>()?;

        let mut seen = HashMap::new();
        for u in &uavs {
            if seen.insert(u.id.clone(), ()).is_some() {
                return Err(ModelError::DuplicateUav(u.id.clone()));
            }
            if u.battery_capacity == 0 || u.recharge_duration == 0 {
                return Err(ModelError::InvalidUav(u.id.clone()));
            }
        }
        if !tasks.is_empty() && uavs.is_empty() {
            return Err(ModelError::NoUavs);
        }
        let min_capacity = uavs.iter().map(|u| u.battery_capacity).min().unwrap_or(0);

        let mut task_index = HashMap::with_capacity(tasks.len());
        for (i, t) in tasks.iter().enumerate() {
            if task_index.insert(t.id, i).is_some() {
                return Err(ModelError::DuplicateTask(t.id));
            }
            if t.proc_time == 0 {
                return Err(ModelError::ZeroProcTime(t.id));
            }
            for pos in [t.start, t.end] {
                if map.position(pos).kind != PositionKind::Work {
                    return Err(ModelError::TaskAtStation { task: t.id, pos: map.id(pos).into() });
                }
            }
            if t.task_type.is_inspection() && t.start != t.end {
                return Err(ModelError::InspectionMoves(t.id));
            }
            let required = worst_case_engagement(&map, t, nearest_rs[t.end.0].1);
            if required > min_capacity {
                return Err(ModelError::TaskTooLong { task: t.id, required, capacity: min_capacity });
            }
        }

        let graph = PrecedenceGraph::from_tasks(&tasks);
        if let Some(v) = graph.validate().into_iter().next() {
            return Err(ModelError::Precedence(v));
        }

        Ok(Self { map, tasks, graph, uavs, stations, task_index, nearest_rs, station_at })
    }

    pub fn map(&self) -> &TrajectoryMap {
        &self.map
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task_ids(&self) -> Vec<TaskId> {
        self.tasks.iter().map(|t| t.id).collect()
    }

    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.task_index.get(&id).map(|&i| &self.tasks[i])
    }

    pub fn task_slot(&self, id: TaskId) -> Option<usize> {
        self.task_index.get(&id).copied()
    }

    pub fn graph(&self) -> &PrecedenceGraph {
        &self.graph
    }

    pub fn uavs(&self) -> &[Uav] {
        &self.uavs
    }

    pub fn stations(&self) -> &[RechargeStation] {
        &self.stations
    }

    /// Nearest station (index, flight seconds) from a position.
    pub fn nearest_station(&self, pos: PosIdx) -> (usize, Seconds) {
        self.nearest_rs[pos.0]
    }

    pub fn station_at(&self, pos: PosIdx) -> Option<usize> {
        self.station_at[pos.0]
    }
}

/// Worst-case airborne time of one task: the longest preparation flight from
/// any position, the processing time, and the flight to the nearest station.
pub fn worst_case_engagement(map: &TrajectoryMap, task: &Task, to_station: Seconds) -> Seconds {
    let prep = (0..map.len()).map(|p| map.flight(PosIdx(p), task.start)).max().unwrap_or(0);
    prep + task.proc_time + to_station
}

/// Airborne time a UAV must have left to take a task after `prep_time`
/// seconds of preparation: prep + processing + flight to the nearest station
/// from the task's end position.
pub fn task_upper_bound_time(prep_time: Seconds, task: &Task, instance: &ProblemInstance) -> Seconds {
    prep_time + task.proc_time + instance.nearest_station(task.end).1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Flight,
    TaskExec,
    Hover,
    WaitOnGround,
    Recharge,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Flight => "flight",
            ActionKind::TaskExec => "task_exec",
            ActionKind::Hover => "hover",
            ActionKind::WaitOnGround => "wait_on_ground",
            ActionKind::Recharge => "recharge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "flight" => ActionKind::Flight,
            "task_exec" => ActionKind::TaskExec,
            "hover" => ActionKind::Hover,
            "wait_on_ground" => ActionKind::WaitOnGround,
            "recharge" => ActionKind::Recharge,
            _ => return None,
        })
    }

    /// Whether time spent in this action drains the battery.
    pub fn is_airborne(self) -> bool {
        matches!(self, ActionKind::Flight | ActionKind::TaskExec | ActionKind::Hover)
    }
}

/// One interval on a UAV timeline. `from == to` for everything except flights
/// and material-handling task executions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub kind: ActionKind,
    pub start: Seconds,
    pub end: Seconds,
    pub from: PosIdx,
    pub to: PosIdx,
    pub task: Option<TaskId>,
}

impl Action {
    pub fn duration(&self) -> Seconds {
        self.end.saturating_sub(self.start)
    }
}

/// Per-UAV action timelines, indexed like [`ProblemInstance::uavs`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    lanes: Vec<Vec<Action>>,
}

impl Schedule {
    pub fn new(uav_count: usize) -> Self {
        Self { lanes: vec![Vec::new(); uav_count] }
    }

    pub fn from_lanes(lanes: Vec<Vec<Action>>) -> Self {
        Self { lanes }
    }

    pub fn lanes(&self) -> &[Vec<Action>] {
        &self.lanes
    }

    pub fn lane(&self, uav: usize) -> &[Action] {
        &self.lanes[uav]
    }

    pub fn push(&mut self, uav: usize, action: Action) {
        self.lanes[uav].push(action);
    }

    /// Latest action end over all UAVs, 0 for an empty schedule.
    pub fn makespan(&self) -> Seconds {
        self.lanes.iter().flatten().map(|a| a.end).max().unwrap_or(0)
    }

    /// `(uav index, action)` for every task execution, in lane order.
    pub fn task_executions(&self) -> impl Iterator<Item = (usize, &Action)> + '_ {
        self.lanes
            .iter()
            .enumerate()
            .flat_map(|(u, lane)| lane.iter().map(move |a| (u, a)))
            .filter(|(_, a)| a.kind == ActionKind::TaskExec)
    }
}

pub fn makespan(schedule: &Schedule) -> Seconds {
    schedule.makespan()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    #[test]
    fn flight_time_lookups() {
        let map = sample::lab_map();
        assert_eq!(map.flight_time("a", "b").unwrap(), 108);
        assert_eq!(map.flight_time("c", "c").unwrap(), 0);
        assert_eq!(map.flight_time("e", "R2").unwrap(), 60);
        assert_eq!(map.flight_time("R2", "e").unwrap(), 60);
        assert_eq!(map.flight_time("a", "zz"), Err(ModelError::UnknownPosition("zz".into())));
    }

    #[test]
    fn nearest_station_with_tie_break() {
        let inst = sample::twelve_task_instance();
        let map = inst.map();
        let at = |id: &str| map.index_of(id).unwrap();
        let name = |i: usize| map.id(inst.stations()[i].pos).to_string();
        let (s, t) = nearest_recharge_station(map, inst.stations(), at("a")).unwrap();
        assert_eq!((name(s).as_str(), t), ("R1", 40));
        let (s, t) = nearest_recharge_station(map, inst.stations(), at("d")).unwrap();
        assert_eq!((name(s).as_str(), t), ("R2", 40));
        let (s, t) = nearest_recharge_station(map, inst.stations(), at("c")).unwrap();
        assert_eq!((name(s).as_str(), t), ("R1", 60));
        assert_eq!(nearest_recharge_station(map, &[], at("c")), Err(ModelError::NoStations));
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let pos = vec![Position::work("a"), Position::work("b")];
        let err = TrajectoryMap::new(pos, vec![vec![0, 5], vec![6, 0]]).unwrap_err();
        assert!(matches!(err, ModelError::Asymmetric { ab: 5, ba: 6, .. }));
    }

    #[test]
    fn rejects_bad_diagonal_and_zero_offdiagonal() {
        let pos = || vec![Position::work("a"), Position::work("b")];
        assert!(matches!(
            TrajectoryMap::new(pos(), vec![vec![1, 5], vec![5, 0]]),
            Err(ModelError::NonZeroDiagonal { .. })
        ));
        assert!(matches!(
            TrajectoryMap::new(pos(), vec![vec![0, 0], vec![0, 0]]),
            Err(ModelError::ZeroFlight { .. })
        ));
        assert!(matches!(
            TrajectoryMap::new(pos(), vec![vec![0, 5]]),
            Err(ModelError::MatrixShape { .. })
        ));
    }

    #[test]
    fn upper_bound_time_matches_trace_arithmetic() {
        let inst = sample::twelve_task_instance();
        let t2 = inst.task(TaskId(2)).unwrap();
        // UAV3 before task 2: 759 used, prep a->c 131
        assert_eq!(759 + task_upper_bound_time(131, t2, &inst), 1195);
        let t4 = inst.task(TaskId(4)).unwrap();
        // UAV2 before task 4: 503 used, prep f->e 123
        assert_eq!(503 + task_upper_bound_time(123, t4, &inst), 1236);
        assert_eq!(task_upper_bound_time(0, t4, &inst), t4.proc_time + 60);
    }

    #[test]
    fn rejects_task_exceeding_battery() {
        let map = sample::lab_map();
        let a = map.index_of("a").unwrap();
        let task = Task {
            id: TaskId(1),
            task_type: TaskType::SingleInspection,
            start: a,
            end: a,
            proc_time: 900,
            predecessors: vec![],
        };
        let err = ProblemInstance::new(map.clone(), vec![task], sample::default_uavs(&map), sample::default_stations(&map))
            .unwrap_err();
        // worst prep is e->a 376, nearest station from a is 40
        assert_eq!(err, ModelError::TaskTooLong { task: TaskId(1), required: 376 + 900 + 40, capacity: 1200 });
    }

    #[test]
    fn empty_schedule_has_zero_makespan() {
        assert_eq!(makespan(&Schedule::new(3)), 0);
        assert_eq!(Schedule::default().makespan(), 0);
    }
}
