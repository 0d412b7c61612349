//! File formats: instance JSON, task-table CSV import, schedule CSV and
//! per-iteration history CSV.
//!
//! Instance JSON:
//!
//! ```json
//! {
//!   "positions": [{"id": "a", "kind": "work"}, {"id": "R1", "kind": "recharge"}],
//!   "flight_time": [[0, 40], [40, 0]],
//!   "stations": [{"pos": "R1", "slots": 1}],
//!   "tasks": [{"id": 1, "type": "single_inspection", "start": "a", "end": "a",
//!              "proc_time": 60, "predecessors": []}],
//!   "uavs": [{"id": "UAV1", "initial_pos": "R1", "battery_capacity": 1200,
//!             "recharge_duration": 2700}]
//! }
//! ```
//!
//! `type`, `battery_capacity` and `recharge_duration` may be omitted on input.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Action, ActionKind, ModelError, Position, ProblemInstance, RechargeStation, Schedule, Seconds, Task, TaskId,
    TaskType, TrajectoryMap, Uav, DEFAULT_BATTERY_CAPACITY, DEFAULT_RECHARGE_DURATION,
};
use crate::pso::HistoryPoint;

#[derive(Error, Debug)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    positions: Vec<Position>,
    flight_time: Vec<Vec<Seconds>>,
    stations: Vec<StationRecord>,
    tasks: Vec<TaskRecord>,
    uavs: Vec<UavRecord>,
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    positions: Vec<Position>,
    flight_time: Vec<Vec<Seconds>>,
}

#[derive(Serialize, Deserialize)]
struct StationRecord {
    pos: String,
    slots: usize,
}

#[derive(Serialize, Deserialize)]
struct TaskRecord {
    id: TaskId,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    task_type: Option<TaskType>,
    start: String,
    end: String,
    proc_time: Seconds,
    #[serde(default)]
    predecessors: Vec<TaskId>,
}

#[derive(Serialize, Deserialize)]
struct UavRecord {
    id: String,
    initial_pos: String,
    #[serde(default = "default_capacity")]
    battery_capacity: Seconds,
    #[serde(default = "default_recharge")]
    recharge_duration: Seconds,
}

fn default_capacity() -> Seconds {
    DEFAULT_BATTERY_CAPACITY
}

fn default_recharge() -> Seconds {
    DEFAULT_RECHARGE_DURATION
}

/// Type used when a file does not say: moving tasks are material handling,
/// stationary ones single inspections.
pub fn infer_task_type(start: &str, end: &str) -> TaskType {
    if start == end {
        TaskType::SingleInspection
    } else {
        TaskType::MaterialHandling
    }
}

fn build_task(map: &TrajectoryMap, r: TaskRecord) -> Result<Task, IoError> {
    let task_type = r.task_type.unwrap_or_else(|| infer_task_type(&r.start, &r.end));
    Ok(Task {
        id: r.id,
        task_type,
        start: map.index_of(&r.start)?,
        end: map.index_of(&r.end)?,
        proc_time: r.proc_time,
        predecessors: r.predecessors,
    })
}

pub fn instance_from_json(text: &str) -> Result<ProblemInstance, IoError> {
    let f: InstanceFile = serde_json::from_str(text)?;
    let map = TrajectoryMap::new(f.positions, f.flight_time)?;
    let stations = f
        .stations
        .into_iter()
        .map(|s| Ok(RechargeStation { pos: map.index_of(&s.pos)?, slots: s.slots }))
        .collect::<Result<Vec<_>, IoError>>()?;
    let uavs = f
        .uavs
        .into_iter()
        .map(|u| {
            Ok(Uav {
                initial_pos: map.index_of(&u.initial_pos)?,
                id: u.id,
                battery_capacity: u.battery_capacity,
                recharge_duration: u.recharge_duration,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let tasks = f.tasks.into_iter().map(|t| build_task(&map, t)).collect::<Result<Vec<_>, _>>()?;
    Ok(ProblemInstance::new(map, tasks, uavs, stations)?)
}

/// Pretty JSON; the same instance always serializes to the same bytes.
pub fn instance_to_json(instance: &ProblemInstance) -> String {
    let map = instance.map();
    let f = InstanceFile {
        positions: map.positions().to_vec(),
        flight_time: map.rows(),
        stations: instance
            .stations()
            .iter()
            .map(|s| StationRecord { pos: map.id(s.pos).to_string(), slots: s.slots })
            .collect(),
        tasks: instance
            .tasks()
            .iter()
            .map(|t| TaskRecord {
                id: t.id,
                task_type: Some(t.task_type),
                start: map.id(t.start).to_string(),
                end: map.id(t.end).to_string(),
                proc_time: t.proc_time,
                predecessors: t.predecessors.clone(),
            })
            .collect(),
        uavs: instance
            .uavs()
            .iter()
            .map(|u| UavRecord {
                id: u.id.clone(),
                initial_pos: map.id(u.initial_pos).to_string(),
                battery_capacity: u.battery_capacity,
                recharge_duration: u.recharge_duration,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&f).expect("instance serializes");
    s.push('\n');
    s
}

pub fn map_from_json(text: &str) -> Result<TrajectoryMap, IoError> {
    let f: MapFile = serde_json::from_str(text)?;
    Ok(TrajectoryMap::new(f.positions, f.flight_time)?)
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance, IoError> {
    instance_from_json(&read_file(path)?)
}

pub fn save_instance(path: &Path, instance: &ProblemInstance) -> Result<(), IoError> {
    write_file(path, &instance_to_json(instance))
}

#[derive(Deserialize)]
struct TaskCsvRow {
    #[serde(rename = "TaskID")]
    id: u32,
    #[serde(rename = "Start")]
    start: String,
    #[serde(rename = "End")]
    end: String,
    #[serde(rename = "ProcTime")]
    proc_time: Seconds,
    #[serde(rename = "Precedence", default)]
    precedence: String,
    #[serde(rename = "Type", default)]
    task_type: Option<String>,
}

fn parse_task_type(s: &str) -> Result<TaskType, IoError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| IoError::Format(format!("unknown task type `{s}`")))
}

/// Task table with columns `TaskID,Start,End,ProcTime,Precedence` and an
/// optional `Type`. Predecessors are `;`-separated ids, `-` or empty for none.
pub fn tasks_from_csv<R: Read>(reader: R, map: &TrajectoryMap) -> Result<Vec<Task>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut tasks = Vec::new();
    for row in rdr.deserialize() {
        let row: TaskCsvRow = row?;
        let predecessors = match row.precedence.as_str() {
            "" | "-" => Vec::new(),
            list => list
                .split(';')
                .map(|p| {
                    p.trim()
                        .parse::<u32>()
                        .map(TaskId)
                        .map_err(|_| IoError::Format(format!("task {}: bad predecessor `{p}`", row.id)))
                })
                .collect::<Result<_, _>>()?,
        };
        let task_type = row.task_type.as_deref().filter(|s| !s.is_empty()).map(parse_task_type).transpose()?;
        tasks.push(build_task(
            map,
            TaskRecord { id: TaskId(row.id), task_type, start: row.start, end: row.end, proc_time: row.proc_time, predecessors },
        )?);
    }
    Ok(tasks)
}

#[derive(Serialize, Deserialize)]
struct ActionRow {
    uav: String,
    action: String,
    start: Seconds,
    end: Seconds,
    from: String,
    to: String,
    task: Option<u32>,
}

/// One row per action, lanes in fleet order.
pub fn schedule_to_csv(schedule: &Schedule, instance: &ProblemInstance) -> String {
    let map = instance.map();
    let mut w = csv::Writer::from_writer(Vec::new());
    for (u, lane) in schedule.lanes().iter().enumerate() {
        for a in lane {
            w.serialize(ActionRow {
                uav: instance.uavs()[u].id.clone(),
                action: a.kind.as_str().to_string(),
                start: a.start,
                end: a.end,
                from: map.id(a.from).to_string(),
                to: map.id(a.to).to_string(),
                task: a.task.map(|t| t.0),
            })
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Inverse of [`schedule_to_csv`].
pub fn schedule_from_csv<R: Read>(reader: R, instance: &ProblemInstance) -> Result<Schedule, IoError> {
    let map = instance.map();
    let mut schedule = Schedule::new(instance.uavs().len());
    let mut rdr = csv::Reader::from_reader(reader);
    for row in rdr.deserialize() {
        let row: ActionRow = row?;
        let uav = instance
            .uavs()
            .iter()
            .position(|u| u.id == row.uav)
            .ok_or_else(|| IoError::Format(format!("unknown UAV `{}`", row.uav)))?;
        let kind = ActionKind::parse(&row.action)
            .ok_or_else(|| IoError::Format(format!("unknown action `{}`", row.action)))?;
        schedule.push(
            uav,
            Action {
                kind,
                start: row.start,
                end: row.end,
                from: map.index_of(&row.from)?,
                to: map.index_of(&row.to)?,
                task: row.task.map(TaskId),
            },
        );
    }
    Ok(schedule)
}

pub fn history_to_csv(history: &[HistoryPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for h in history {
        w.serialize(h).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
