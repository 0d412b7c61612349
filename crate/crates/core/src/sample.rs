//! The 12-task laboratory example: six work positions `a`..`f`, two recharge
//! stations `R1`/`R2`, three UAVs.

use crate::model::{
    PosIdx, Position, ProblemInstance, RechargeStation, Task, TaskId, TaskType, TrajectoryMap, Uav,
};

/// 8-position flight-time map measured from a lab test flight.
pub fn lab_map() -> TrajectoryMap {
    let positions = ["a", "b", "c", "d", "e", "f"]
        .into_iter()
        .map(Position::work)
        .chain(["R1", "R2"].into_iter().map(Position::recharge))
        .collect();
    let matrix = vec![
        vec![0, 108, 131, 222, 376, 353, 40, 160],
        vec![108, 0, 120, 241, 347, 371, 60, 160],
        vec![131, 120, 0, 127, 228, 254, 60, 60],
        vec![222, 241, 127, 0, 116, 122, 160, 40],
        vec![376, 347, 228, 116, 0, 123, 260, 60],
        vec![353, 371, 254, 122, 123, 0, 260, 60],
        vec![40, 60, 60, 160, 260, 260, 0, 120],
        vec![160, 160, 60, 40, 60, 60, 120, 0],
    ];
    TrajectoryMap::new(positions, matrix).expect("lab map is well formed")
}

/// One single-slot station per recharge position, in map order.
pub fn default_stations(map: &TrajectoryMap) -> Vec<RechargeStation> {
    map.positions()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.kind == crate::model::PositionKind::Recharge)
        .map(|(i, _)| RechargeStation { pos: PosIdx(i), slots: 1 })
        .collect()
}

/// UAV1 and UAV2 parked at the first station, UAV3 at the second (or the
/// first, when the map has only one).
pub fn default_uavs(map: &TrajectoryMap) -> Vec<Uav> {
    let stations = default_stations(map);
    let first = stations[0].pos;
    let second = stations.get(1).map_or(first, |s| s.pos);
    vec![Uav::new("UAV1", first), Uav::new("UAV2", first), Uav::new("UAV3", second)]
}

/// Task table of the worked example: (id, start, end, processing seconds, predecessors).
pub const TWELVE_TASKS: [(u32, &str, &str, u64, &[u32]); 12] = [
    (1, "e", "f", 243, &[]),
    (2, "c", "c", 245, &[]),
    (3, "d", "a", 719, &[]),
    (4, "e", "b", 550, &[1]),
    (5, "c", "c", 235, &[2]),
    (6, "d", "d", 241, &[2]),
    (7, "a", "e", 478, &[4]),
    (8, "b", "c", 304, &[4, 5]),
    (9, "e", "e", 395, &[7]),
    (10, "c", "f", 344, &[6, 8]),
    (11, "f", "f", 270, &[10]),
    (12, "a", "d", 514, &[3, 6]),
];

pub fn twelve_tasks(map: &TrajectoryMap) -> Vec<Task> {
    TWELVE_TASKS
        .iter()
        .map(|&(id, s, e, proc_time, preds)| {
            let start = map.index_of(s).expect("known position");
            let end = map.index_of(e).expect("known position");
            Task {
                id: TaskId(id),
                // The table does not label types; a moving task is material handling.
                task_type: if start == end { TaskType::SingleInspection } else { TaskType::MaterialHandling },
                start,
                end,
                proc_time,
                predecessors: preds.iter().map(|&p| TaskId(p)).collect(),
            }
        })
        .collect()
}

pub fn twelve_task_instance() -> ProblemInstance {
    let map = lab_map();
    let tasks = twelve_tasks(&map);
    let uavs = default_uavs(&map);
    let stations = default_stations(&map);
    ProblemInstance::new(map, tasks, uavs, stations).expect("sample instance is valid")
}

/// Sequence prefix traced step by step in the worked example.
pub const TRACE_PREFIX: [u32; 7] = [3, 2, 1, 4, 6, 5, 7];
