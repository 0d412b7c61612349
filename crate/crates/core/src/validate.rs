//! Independent feasibility check of a finished schedule.
//!
//! Nothing here reuses the scheduler's bookkeeping: every property is
//! recomputed from the action lists and the instance alone.

use std::collections::HashMap;
use std::fmt;

use crate::model::{ActionKind, PosIdx, PositionKind, ProblemInstance, Schedule, Seconds, TaskId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    LaneCount,
    BadInterval,
    TimelineOverlap,
    TimelineGap,
    SpatialContinuity,
    InitialPosition,
    FlightDuration,
    GroundedAway,
    UnknownTask,
    TaskMismatch,
    DuplicateTask,
    MissingTask,
    Precedence,
    PositionExclusivity,
    Battery,
    RechargeDuration,
    BayCapacity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub uav: Option<String>,
    pub tasks: Vec<TaskId>,
    pub position: Option<String>,
    pub start: Seconds,
    pub end: Seconds,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{}, {})", self.kind, self.start, self.end)?;
        if let Some(u) = &self.uav {
            write!(f, " uav={u}")?;
        }
        if !self.tasks.is_empty() {
            let ids: Vec<String> = self.tasks.iter().map(ToString::to_string).collect();
            write!(f, " tasks={}", ids.join(","))?;
        }
        if let Some(p) = &self.position {
            write!(f, " pos={p}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

struct Collector<'a> {
    inst: &'a ProblemInstance,
    out: Vec<Violation>,
}

impl Collector<'_> {
    fn add(
        &mut self,
        kind: ViolationKind,
        uav: Option<usize>,
        tasks: Vec<TaskId>,
        position: Option<PosIdx>,
        span: (Seconds, Seconds),
        detail: String,
    ) {
        self.out.push(Violation {
            kind,
            uav: uav.map(|u| self.inst.uavs()[u].id.clone()),
            tasks,
            position: position.map(|p| self.inst.map().id(p).to_string()),
            start: span.0,
            end: span.1,
            detail,
        });
    }
}

/// Every violated schedule invariant. Empty iff the schedule is feasible and
/// executes every instance task exactly once.
pub fn validate_schedule(schedule: &Schedule, instance: &ProblemInstance) -> Vec<Violation> {
    check(schedule, instance, true)
}

/// Like [`validate_schedule`] but tolerates tasks that were not scheduled yet
/// (a schedule built from a sequence prefix).
pub fn validate_partial_schedule(schedule: &Schedule, instance: &ProblemInstance) -> Vec<Violation> {
    check(schedule, instance, false)
}

fn check(schedule: &Schedule, inst: &ProblemInstance, complete: bool) -> Vec<Violation> {
    use ViolationKind::*;
    let mut c = Collector { inst, out: Vec::new() };
    let map = inst.map();
    if schedule.lanes().len() != inst.uavs().len() {
        c.add(
            LaneCount,
            None,
            vec![],
            None,
            (0, 0),
            format!("{} lanes for {} UAVs", schedule.lanes().len(), inst.uavs().len()),
        );
        return c.out;
    }
    let is_station = |p: PosIdx| map.position(p).kind == PositionKind::Recharge;

    // (uav, start, end) per executed task
    let mut executed: HashMap<TaskId, (usize, Seconds, Seconds)> = HashMap::new();
    let mut recharges: HashMap<PosIdx, Vec<(Seconds, Seconds)>> = HashMap::new();

    for (u, lane) in schedule.lanes().iter().enumerate() {
        let spec = &inst.uavs()[u];
        let mut battery: Seconds = 0;
        let mut over = false;
        let mut span_start: Seconds = lane.first().map_or(0, |a| a.start);
        if let Some(first) = lane.first() {
            if first.from != spec.initial_pos {
                c.add(InitialPosition, Some(u), vec![], Some(first.from), (first.start, first.end),
                    format!("first action starts at {} but the UAV starts at {}", map.id(first.from), map.id(spec.initial_pos)));
            }
        }
        for (k, a) in lane.iter().enumerate() {
            let span = (a.start, a.end);
            if a.end < a.start {
                c.add(BadInterval, Some(u), a.task.into_iter().collect(), Some(a.from), span, "end before start".into());
                continue;
            }
            if k > 0 {
                let prev = &lane[k - 1];
                if a.start < prev.end {
                    c.add(TimelineOverlap, Some(u), vec![], Some(a.from), span,
                        format!("{} starts before previous {} ends at {}", a.kind.as_str(), prev.kind.as_str(), prev.end));
                } else if a.start > prev.end {
                    c.add(TimelineGap, Some(u), vec![], Some(a.from), (prev.end, a.start),
                        format!("idle gap before {}", a.kind.as_str()));
                }
                if prev.to != a.from {
                    c.add(SpatialContinuity, Some(u), vec![], Some(a.from), span,
                        format!("previous action ends at {} but {} starts at {}", map.id(prev.to), a.kind.as_str(), map.id(a.from)));
                }
            }
            match a.kind {
                ActionKind::Flight => {
                    let expected = map.flight(a.from, a.to);
                    if a.duration() != expected {
                        c.add(FlightDuration, Some(u), vec![], Some(a.from), span,
                            format!("flight {}->{} lasts {}s, map says {}s", map.id(a.from), map.id(a.to), a.duration(), expected));
                    }
                }
                ActionKind::Hover | ActionKind::WaitOnGround | ActionKind::Recharge => {
                    if a.from != a.to {
                        c.add(SpatialContinuity, Some(u), vec![], Some(a.from), span,
                            format!("{} moves from {} to {}", a.kind.as_str(), map.id(a.from), map.id(a.to)));
                    }
                    if a.kind != ActionKind::Hover && !is_station(a.from) {
                        c.add(GroundedAway, Some(u), vec![], Some(a.from), span,
                            format!("{} away from a recharge station", a.kind.as_str()));
                    }
                }
                ActionKind::TaskExec => {
                    let Some(id) = a.task else {
                        c.add(TaskMismatch, Some(u), vec![], Some(a.from), span, "task execution without a task id".into());
                        continue;
                    };
                    let Some(task) = inst.task(id) else {
                        c.add(UnknownTask, Some(u), vec![id], Some(a.from), span, "task not in instance".into());
                        continue;
                    };
                    if a.duration() != task.proc_time || a.from != task.start || a.to != task.end {
                        c.add(TaskMismatch, Some(u), vec![id], Some(a.from), span,
                            format!("expected {}s from {} to {}", task.proc_time, map.id(task.start), map.id(task.end)));
                    }
                    if executed.insert(id, (u, a.start, a.end)).is_some() {
                        c.add(DuplicateTask, Some(u), vec![id], Some(a.from), span, "task executed more than once".into());
                    }
                }
            }

            match a.kind {
                ActionKind::Recharge => {
                    if a.duration() != spec.recharge_duration {
                        c.add(RechargeDuration, Some(u), vec![], Some(a.from), span,
                            format!("recharge lasts {}s, expected {}s", a.duration(), spec.recharge_duration));
                    }
                    recharges.entry(a.from).or_default().push(span);
                    battery = 0;
                    over = false;
                    span_start = a.end;
                }
                kind if kind.is_airborne() => {
                    battery += a.duration();
                    if battery > spec.battery_capacity && !over {
                        over = true;
                        c.add(Battery, Some(u), vec![], None, (span_start, a.end),
                            format!("{battery}s airborne exceeds capacity {}s", spec.battery_capacity));
                    }
                }
                _ => {}
            }
        }
    }

    if complete {
        for t in inst.tasks() {
            if !executed.contains_key(&t.id) {
                c.add(MissingTask, None, vec![t.id], Some(t.start), (0, 0), "task never executed".into());
            }
        }
    }

    for t in inst.tasks() {
        let Some(&(u, start, _)) = executed.get(&t.id) else { continue };
        for &p in &t.predecessors {
            match executed.get(&p) {
                Some(&(_, _, pend)) if pend <= start => {}
                Some(&(_, _, pend)) => c.add(Precedence, Some(u), vec![p, t.id], Some(t.start), (start, pend),
                    format!("task {} starts at {start} before predecessor {p} ends at {pend}", t.id)),
                None => c.add(Precedence, Some(u), vec![p, t.id], Some(t.start), (start, start),
                    format!("predecessor {p} of task {} never executed", t.id)),
            }
        }
    }

    let mut execs: Vec<(TaskId, Seconds, Seconds)> = executed.iter().map(|(&id, &(_, s, e))| (id, s, e)).collect();
    execs.sort();
    for (i, &(a, sa, ea)) in execs.iter().enumerate() {
        let ta = inst.task(a).expect("executed tasks are known");
        for &(b, sb, eb) in &execs[i + 1..] {
            let tb = inst.task(b).expect("executed tasks are known");
            let shared = [ta.start, ta.end].into_iter().find(|p| *p == tb.start || *p == tb.end);
            if let Some(pos) = shared {
                if sa < eb && sb < ea {
                    c.add(PositionExclusivity, None, vec![a, b], Some(pos), (sa.max(sb), ea.min(eb)),
                        format!("tasks {a} and {b} occupy {} at the same time", map.id(pos)));
                }
            }
        }
    }

    let mut stations: Vec<_> = recharges.into_iter().collect();
    stations.sort();
    for (pos, mut spans) in stations {
        let slots = inst.station_at(pos).map_or(0, |s| inst.stations()[s].slots);
        spans.sort();
        let mut events: Vec<(Seconds, i64)> = spans.iter().flat_map(|&(s, e)| [(s, 1), (e, -1)]).collect();
        // ends sort before starts at the same instant
        events.sort();
        let mut live = 0i64;
        let mut flagged = false;
        for (t, d) in events {
            live += d;
            if live > slots as i64 && !flagged {
                flagged = true;
                c.add(BayCapacity, None, vec![], Some(pos), (t, t),
                    format!("{live} concurrent recharges at a {slots}-slot station"));
            } else if live <= slots as i64 {
                flagged = false;
            }
        }
    }

    c.out
}
