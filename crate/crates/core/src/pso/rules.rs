//! Priority rules that seed the swarm with reasonable starting sequences.

use std::fmt;
use std::str::FromStr;

use crate::model::{ProblemInstance, Seconds, TaskId};

use super::repair::{repair, RepairError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PriorityRule {
    /// Own time plus the time of every transitive successor, descending.
    MaxRankedPositionalWeight,
    /// Own time plus the time of every transitive predecessor, ascending.
    MinInversePositionalWeight,
    /// Transitive predecessor count, ascending.
    MinTotalPredecessors,
    /// Transitive follower count, descending.
    MaxTotalFollowers,
    MaxTaskTime,
    MinTaskTime,
    /// Direct predecessor count, ascending.
    MinCumulativePredecessors,
    /// Direct follower count, descending.
    MaxCumulativeFollowers,
}

impl PriorityRule {
    pub const ALL: [PriorityRule; 8] = [
        PriorityRule::MaxRankedPositionalWeight,
        PriorityRule::MinInversePositionalWeight,
        PriorityRule::MinTotalPredecessors,
        PriorityRule::MaxTotalFollowers,
        PriorityRule::MaxTaskTime,
        PriorityRule::MinTaskTime,
        PriorityRule::MinCumulativePredecessors,
        PriorityRule::MaxCumulativeFollowers,
    ];

    /// Short command-line name.
    pub fn slug(self) -> &'static str {
        match self {
            PriorityRule::MaxRankedPositionalWeight => "max-rpw",
            PriorityRule::MinInversePositionalWeight => "min-ipw",
            PriorityRule::MinTotalPredecessors => "min-total-preds",
            PriorityRule::MaxTotalFollowers => "max-total-followers",
            PriorityRule::MaxTaskTime => "max-time",
            PriorityRule::MinTaskTime => "min-time",
            PriorityRule::MinCumulativePredecessors => "min-cum-preds",
            PriorityRule::MaxCumulativeFollowers => "max-cum-followers",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            PriorityRule::MaxRankedPositionalWeight => "Maximum Ranked Positional Weight",
            PriorityRule::MinInversePositionalWeight => "Minimum Inverse Positional Weight",
            PriorityRule::MinTotalPredecessors => "Minimum Total Number Of Predecessors Tasks",
            PriorityRule::MaxTotalFollowers => "Maximum Total Number of Follower Tasks",
            PriorityRule::MaxTaskTime => "Maximum Task Execution Time",
            PriorityRule::MinTaskTime => "Minimum Task Execution Time",
            PriorityRule::MinCumulativePredecessors => "Minimum Number of Cumulative Predecessor Tasks",
            PriorityRule::MaxCumulativeFollowers => "Maximum Number of Cumulative Follower Tasks",
        }
    }

    /// Rule ordering (sorted, ties by id, then repaired).
    pub fn ordering(self, instance: &ProblemInstance) -> Result<Vec<TaskId>, RepairError> {
        let g = instance.graph();
        let proc = |id: TaskId| instance.task(id).map_or(0, |t| t.proc_time);
        let sum = |ids: std::collections::BTreeSet<TaskId>| ids.into_iter().map(proc).sum::<Seconds>();
        // Lower key sorts first.
        let key = |id: TaskId| -> i128 {
            let v: i128 = match self {
                PriorityRule::MaxRankedPositionalWeight => -((proc(id) + sum(g.transitive_successors(id))) as i128),
                PriorityRule::MinInversePositionalWeight => (proc(id) + sum(g.transitive_predecessors(id))) as i128,
                PriorityRule::MinTotalPredecessors => g.transitive_predecessors(id).len() as i128,
                PriorityRule::MaxTotalFollowers => -(g.transitive_successors(id).len() as i128),
                PriorityRule::MaxTaskTime => -(proc(id) as i128),
                PriorityRule::MinTaskTime => proc(id) as i128,
                PriorityRule::MinCumulativePredecessors => g.predecessors(id).len() as i128,
                PriorityRule::MaxCumulativeFollowers => -(g.successors(id).len() as i128),
            };
            v
        };
        let mut ids = instance.task_ids();
        ids.sort_by_cached_key(|&id| (key(id), id));
        repair(&ids, g)
    }
}

impl fmt::Display for PriorityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for PriorityRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PriorityRule::ALL
            .into_iter()
            .find(|r| r.slug() == s)
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

/// All eight rule sequences in a fixed order.
pub fn priority_orderings(instance: &ProblemInstance) -> Result<Vec<(PriorityRule, Vec<TaskId>)>, RepairError> {
    PriorityRule::ALL.into_iter().map(|r| Ok((r, r.ordering(instance)?))).collect()
}
