//! Earliest Available Time schedule construction.
//!
//! Tasks are taken in sequence order. Each one becomes available once its
//! start and end positions are released and its predecessors are done; every
//! UAV then quotes the earliest time it could begin the task, detouring to a
//! recharge station first when its battery would not cover the engagement plus
//! the flight to the nearest station afterwards. The UAV with the earliest
//! quote gets the task (ties go to fleet order).
//!
//! Waiting is realised as wait-on-ground when the UAV sits at a recharge
//! station, otherwise as hover at the task's start position after the flight.
//! Hover drains the battery; wait-on-ground and recharge do not.

use thiserror::Error;

use crate::model::{Action, ActionKind, PosIdx, ProblemInstance, Schedule, Seconds, Task, TaskId};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("unknown task {0} in sequence")]
    UnknownTask(TaskId),
    #[error("task {0} appears more than once in the sequence")]
    DuplicateTask(TaskId),
    #[error("sequence places task {succ} before its predecessor {pred}")]
    Infeasible { pred: TaskId, succ: TaskId },
    #[error("sequence covers {found} of {expected} tasks")]
    Incomplete { expected: usize, found: usize },
    #[error("UAV {uav} cannot reach any recharge station with its remaining battery")]
    Stranded { uav: String },
    #[error("instance has no UAVs")]
    NoUavs,
}

/// Mutable per-UAV state during one scheduling pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UavState {
    pub pos: PosIdx,
    /// Moment the UAV finished its latest task (or 0).
    pub ready: Seconds,
    /// Airborne seconds since the last full charge.
    pub battery_used: Seconds,
}

/// Latest release timestamp per position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionOccupancy {
    release: Vec<Seconds>,
}

impl PositionOccupancy {
    pub fn new(positions: usize) -> Self {
        Self { release: vec![0; positions] }
    }

    pub fn release_time(&self, pos: PosIdx) -> Seconds {
        self.release[pos.0]
    }

    fn occupy_until(&mut self, pos: PosIdx, t: Seconds) {
        debug_assert!(t >= self.release[pos.0], "position release must not move backwards");
        self.release[pos.0] = t;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RechargeChoice {
    pub station: usize,
    pub bay: usize,
    /// Arrival at the station.
    pub charge_tstp: Seconds,
    pub recharge_start: Seconds,
    pub recharge_end: Seconds,
    /// Earliest moment the UAV can begin the task after recharging.
    pub prepared_tstp: Seconds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UavCandidate {
    pub uav: usize,
    /// Time from ready to task start that counts against the battery.
    pub task_prep_time: Seconds,
    /// Earliest task start without a recharge detour.
    pub task_prep_tstp: Seconds,
    pub start_tstp: Seconds,
    pub end_tstp: Seconds,
    pub needs_recharge: bool,
    pub recharge: Option<RechargeChoice>,
}

/// Where one task ended up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub task: TaskId,
    pub uav: usize,
    pub start: Seconds,
    pub end: Seconds,
    pub recharged: bool,
}

/// One scheduling pass over an instance. Tasks are added one at a time with
/// [`schedule_task`](Self::schedule_task); [`build_schedule`] drives a whole
/// sequence.
#[derive(Clone, Debug)]
pub struct EatScheduler<'a> {
    instance: &'a ProblemInstance,
    states: Vec<UavState>,
    occupancy: PositionOccupancy,
    /// Per station, per bay: when the bay frees up.
    bays: Vec<Vec<Seconds>>,
    task_end: Vec<Option<Seconds>>,
    schedule: Schedule,
    assignments: Vec<Assignment>,
}

impl<'a> EatScheduler<'a> {
    pub fn new(instance: &'a ProblemInstance) -> Self {
        let states = instance
            .uavs()
            .iter()
            .map(|u| UavState { pos: u.initial_pos, ready: 0, battery_used: 0 })
            .collect();
        Self {
            instance,
            states,
            occupancy: PositionOccupancy::new(instance.map().len()),
            bays: instance.stations().iter().map(|s| vec![0; s.slots]).collect(),
            task_end: vec![None; instance.tasks().len()],
            schedule: Schedule::new(instance.uavs().len()),
            assignments: Vec::with_capacity(instance.tasks().len()),
        }
    }

    pub fn uav_state(&self, uav: usize) -> UavState {
        self.states[uav]
    }

    pub fn occupancy(&self) -> &PositionOccupancy {
        &self.occupancy
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn task_end(&self, id: TaskId) -> Option<Seconds> {
        self.instance.task_slot(id).and_then(|i| self.task_end[i])
    }

    /// Max of the position releases and the predecessors' end times.
    pub fn task_available_time(&self, task: &Task) -> Result<Seconds, ScheduleError> {
        let pos_at = self.occupancy.release_time(task.start).max(self.occupancy.release_time(task.end));
        let mut pred_at = 0;
        for &p in &task.predecessors {
            let end = self.task_end(p).ok_or(ScheduleError::Infeasible { pred: p, succ: task.id })?;
            pred_at = pred_at.max(end);
        }
        Ok(pos_at.max(pred_at))
    }

    /// Quote from one UAV for `task`, available from `task_at`.
    pub fn uav_candidate(&self, uav: usize, task: &Task, task_at: Seconds) -> Result<UavCandidate, ScheduleError> {
        let inst = self.instance;
        let st = self.states[uav];
        let spec = &inst.uavs()[uav];
        let ft = inst.map().flight(st.pos, task.start);
        let task_prep_tstp = (st.ready + ft).max(task_at);
        let task_prep_time = if inst.station_at(st.pos).is_some() {
            // waits on the ground, only the flight drains the battery
            ft
        } else {
            task_prep_tstp - st.ready
        };
        let needed = crate::model::task_upper_bound_time(task_prep_time, task, inst);
        if st.battery_used + needed <= spec.battery_capacity {
            return Ok(UavCandidate {
                uav,
                task_prep_time,
                task_prep_tstp,
                start_tstp: task_prep_tstp,
                end_tstp: task_prep_tstp + task.proc_time,
                needs_recharge: false,
                recharge: None,
            });
        }
        let choice = self
            .select_recharge_station(uav, task, task_at)
            .ok_or_else(|| ScheduleError::Stranded { uav: spec.id.clone() })?;
        Ok(UavCandidate {
            uav,
            task_prep_time,
            task_prep_tstp,
            start_tstp: choice.prepared_tstp,
            end_tstp: choice.prepared_tstp + task.proc_time,
            needs_recharge: true,
            recharge: Some(choice),
        })
    }

    /// Station that gets the recharged UAV to `task.start` soonest, counting
    /// the flight there, any wait for a free bay, the full recharge and the
    /// flight on to the task. Ties go to the lowest station index. Stations
    /// beyond the remaining battery are skipped.
    pub fn select_recharge_station(&self, uav: usize, task: &Task, task_at: Seconds) -> Option<RechargeChoice> {
        let inst = self.instance;
        let st = self.states[uav];
        let spec = &inst.uavs()[uav];
        let mut best: Option<RechargeChoice> = None;
        for (idx, station) in inst.stations().iter().enumerate() {
            let to_station = inst.map().flight(st.pos, station.pos);
            if st.battery_used + to_station > spec.battery_capacity {
                continue;
            }
            let charge_tstp = st.ready + to_station;
            let (bay, slot_release) = self.bays[idx]
                .iter()
                .copied()
                .enumerate()
                .min_by_key(|&(b, t)| (t, b))
                .expect("stations have at least one slot");
            let recharge_start = charge_tstp.max(slot_release);
            let recharge_end = recharge_start + spec.recharge_duration;
            let prepared_tstp = (recharge_end + inst.map().flight(station.pos, task.start)).max(task_at);
            if best.is_none_or(|b| prepared_tstp < b.prepared_tstp) {
                best = Some(RechargeChoice {
                    station: idx,
                    bay,
                    charge_tstp,
                    recharge_start,
                    recharge_end,
                    prepared_tstp,
                });
            }
        }
        best
    }

    /// Schedule the next task of the sequence and return its assignment.
    pub fn schedule_task(&mut self, id: TaskId) -> Result<Assignment, ScheduleError> {
        let inst = self.instance;
        let slot = inst.task_slot(id).ok_or(ScheduleError::UnknownTask(id))?;
        if self.task_end[slot].is_some() {
            return Err(ScheduleError::DuplicateTask(id));
        }
        if inst.uavs().is_empty() {
            return Err(ScheduleError::NoUavs);
        }
        let task = &inst.tasks()[slot];
        let task_at = self.task_available_time(task)?;
        let candidates = (0..inst.uavs().len())
            .map(|uav| self.uav_candidate(uav, task, task_at))
            .collect::<Result<Vec<_>, _>>()?;
        let cand = pick_earliest_uav(&candidates).expect("at least one UAV");
        self.put_task_into_schedule(&cand, task);
        self.task_end[slot] = Some(cand.end_tstp);
        let a = Assignment {
            task: id,
            uav: cand.uav,
            start: cand.start_tstp,
            end: cand.end_tstp,
            recharged: cand.needs_recharge,
        };
        self.assignments.push(a);
        Ok(a)
    }

    fn push(&mut self, uav: usize, kind: ActionKind, start: Seconds, end: Seconds, from: PosIdx, to: PosIdx) {
        debug_assert!(end >= start, "negative action span");
        if end > start {
            self.schedule.push(uav, Action { kind, start, end, from, to, task: None });
        }
    }

    /// Append the recharge leg (if any), the flight, any hover or
    /// wait-on-ground, and the task execution to the chosen UAV's timeline,
    /// then update its state, the position releases and bay occupancy.
    pub fn put_task_into_schedule(&mut self, cand: &UavCandidate, task: &Task) {
        let inst = self.instance;
        let map = inst.map();
        let u = cand.uav;
        let mut st = self.states[u];
        let start = cand.start_tstp;

        if let Some(rc) = cand.recharge {
            let station = inst.stations()[rc.station].pos;
            self.push(u, ActionKind::Flight, st.ready, rc.charge_tstp, st.pos, station);
            st.battery_used += rc.charge_tstp - st.ready;
            self.push(u, ActionKind::WaitOnGround, rc.charge_tstp, rc.recharge_start, station, station);
            self.push(u, ActionKind::Recharge, rc.recharge_start, rc.recharge_end, station, station);
            self.bays[rc.station][rc.bay] = rc.recharge_end;
            st.battery_used = 0;
            st.pos = station;
            st.ready = rc.recharge_end;
        }

        let ft = map.flight(st.pos, task.start);
        if inst.station_at(st.pos).is_some() {
            let depart = start - ft;
            debug_assert!(depart >= st.ready, "departure before the UAV is ready");
            self.push(u, ActionKind::WaitOnGround, st.ready, depart, st.pos, st.pos);
            self.push(u, ActionKind::Flight, depart, start, st.pos, task.start);
            st.battery_used += ft;
        } else {
            let arrive = st.ready + ft;
            debug_assert!(start >= arrive, "task starts before the UAV arrives");
            self.push(u, ActionKind::Flight, st.ready, arrive, st.pos, task.start);
            self.push(u, ActionKind::Hover, arrive, start, task.start, task.start);
            st.battery_used += start - st.ready;
        }

        let end = start + task.proc_time;
        debug_assert_eq!(end, cand.end_tstp);
        self.schedule.push(
            u,
            Action {
                kind: ActionKind::TaskExec,
                start,
                end,
                from: task.start,
                to: task.end,
                task: Some(task.id),
            },
        );
        st.battery_used += task.proc_time;
        debug_assert!(st.battery_used <= inst.uavs()[u].battery_capacity, "battery overdrawn");
        st.pos = task.end;
        st.ready = end;
        self.states[u] = st;

        self.occupancy.occupy_until(task.start, end);
        if task.end != task.start {
            self.occupancy.occupy_until(task.end, end);
        }
    }

    pub fn into_schedule(self) -> Schedule {
        self.schedule
    }
}

/// Candidate with the smallest start; the first one wins ties.
pub fn pick_earliest_uav(candidates: &[UavCandidate]) -> Option<UavCandidate> {
    candidates.iter().copied().enumerate().min_by_key(|&(i, c)| (c.start_tstp, i)).map(|(_, c)| c)
}

/// Build the schedule for a complete, precedence-feasible task sequence.
pub fn build_schedule(sequence: &[TaskId], instance: &ProblemInstance) -> Result<Schedule, ScheduleError> {
    Ok(build_with_assignments(sequence, instance)?.0)
}

/// [`build_schedule`] plus the per-task assignments in sequence order.
pub fn build_with_assignments(
    sequence: &[TaskId],
    instance: &ProblemInstance,
) -> Result<(Schedule, Vec<Assignment>), ScheduleError> {
    check_sequence(sequence, instance)?;
    if sequence.len() != instance.tasks().len() {
        return Err(ScheduleError::Incomplete { expected: instance.tasks().len(), found: sequence.len() });
    }
    let mut eat = EatScheduler::new(instance);
    for &id in sequence {
        eat.schedule_task(id)?;
    }
    let assignments = eat.assignments.clone();
    Ok((eat.into_schedule(), assignments))
}

/// Schedule a (possibly partial) feasible prefix.
pub fn build_prefix<'a>(sequence: &[TaskId], instance: &'a ProblemInstance) -> Result<EatScheduler<'a>, ScheduleError> {
    check_sequence(sequence, instance)?;
    let mut eat = EatScheduler::new(instance);
    for &id in sequence {
        eat.schedule_task(id)?;
    }
    Ok(eat)
}

fn check_sequence(sequence: &[TaskId], instance: &ProblemInstance) -> Result<(), ScheduleError> {
    let mut seen = vec![false; instance.tasks().len()];
    for &id in sequence {
        let slot = instance.task_slot(id).ok_or(ScheduleError::UnknownTask(id))?;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(ScheduleError::DuplicateTask(id));
        }
    }
    if let Some((pred, succ)) = instance.graph().first_violation(sequence) {
        return Err(ScheduleError::Infeasible { pred, succ });
    }
    Ok(())
}

/// Makespan of the schedule built from `sequence`.
pub fn fitness(sequence: &[TaskId], instance: &ProblemInstance) -> Result<Seconds, ScheduleError> {
    build_schedule(sequence, instance).map(|s| s.makespan())
}
