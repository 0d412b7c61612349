//! Restores precedence feasibility after swaps.

use thiserror::Error;

use crate::graph::PrecedenceGraph;
use crate::model::TaskId;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RepairError {
    #[error("task {0} is not in the precedence graph")]
    UnknownTask(TaskId),
    #[error("task {0} appears more than once")]
    DuplicateTask(TaskId),
    #[error("tasks {0:?} can never be placed (cycle or missing predecessor)")]
    Stuck(Vec<TaskId>),
}

/// Left-to-right scan. A task whose predecessors are not all placed yet goes
/// onto a waiting list; after every placement the waiting list is scanned in
/// order and the first task that became ready is placed, then the scan
/// restarts. Feasible sequences come back unchanged.
pub fn repair(seq: &[TaskId], graph: &PrecedenceGraph) -> Result<Vec<TaskId>, RepairError> {
    let mut slots = Vec::with_capacity(seq.len());
    let mut seen = vec![false; graph.len()];
    for &t in seq {
        let s = graph.slot(t).ok_or(RepairError::UnknownTask(t))?;
        if std::mem::replace(&mut seen[s], true) {
            return Err(RepairError::DuplicateTask(t));
        }
        slots.push(s);
    }

    let mut placed = vec![false; graph.len()];
    let ready = |s: usize, placed: &[bool]| graph.pred_slots(s).iter().all(|&p| placed[p]);
    let mut out = Vec::with_capacity(seq.len());
    let mut waiting: Vec<usize> = Vec::new();
    for s in slots {
        if !ready(s, &placed) {
            waiting.push(s);
            continue;
        }
        placed[s] = true;
        out.push(graph.nodes()[s]);
        while let Some(k) = waiting.iter().position(|&w| ready(w, &placed)) {
            let w = waiting.remove(k);
            placed[w] = true;
            out.push(graph.nodes()[w]);
        }
    }
    if !waiting.is_empty() {
        return Err(RepairError::Stuck(waiting.into_iter().map(|w| graph.nodes()[w]).collect()));
    }
    Ok(out)
}
