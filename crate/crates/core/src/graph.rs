//! Task precedence DAG: validation (cycles, redundant edges), transitive
//! closure and reduction, and sequence feasibility checks.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::model::{Task, TaskId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrecedenceViolation {
    /// Tasks forming a strongly connected component (a cycle).
    Cycle(Vec<TaskId>),
    /// `pred -> succ` is implied by a longer path.
    Redundant { pred: TaskId, succ: TaskId },
    /// A predecessor list names a task that does not exist.
    UnknownTask { task: TaskId, referenced_by: TaskId },
}

impl fmt::Display for PrecedenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecedenceViolation::Cycle(ids) => {
                let ids: Vec<String> = ids.iter().map(ToString::to_string).collect();
                write!(f, "cyclic precedence among tasks {}", ids.join(", "))
            }
            PrecedenceViolation::Redundant { pred, succ } => {
                write!(f, "redundant precedence {pred} -> {succ} is implied by a longer path")
            }
            PrecedenceViolation::UnknownTask { task, referenced_by } => {
                write!(f, "task {referenced_by} lists unknown predecessor {task}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrecedenceGraph {
    nodes: Vec<TaskId>,
    index: HashMap<TaskId, usize>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    unknown: Vec<(TaskId, TaskId)>,
}

impl PrecedenceGraph {
    /// Build from explicit edges `(pred, succ)`. Edges naming ids outside
    /// `nodes` are kept aside and reported by [`validate`](Self::validate).
    pub fn new(nodes: impl IntoIterator<Item = TaskId>, edges: impl IntoIterator<Item = (TaskId, TaskId)>) -> Self {
        let nodes: Vec<TaskId> = nodes.into_iter().collect();
        let index: HashMap<TaskId, usize> = nodes.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut preds = vec![Vec::new(); nodes.len()];
        let mut succs = vec![Vec::new(); nodes.len()];
        let mut unknown = Vec::new();
        let mut seen = BTreeSet::new();
        for (p, s) in edges {
            match (index.get(&p), index.get(&s)) {
                (Some(&pi), Some(&si)) => {
                    if seen.insert((pi, si)) {
                        preds[si].push(pi);
                        succs[pi].push(si);
                    }
                }
                (None, _) => unknown.push((p, s)),
                (_, None) => unknown.push((s, p)),
            }
        }
        for list in preds.iter_mut().chain(succs.iter_mut()) {
            list.sort_unstable();
        }
        Self { nodes, index, preds, succs, unknown }
    }

    pub fn from_tasks(tasks: &[Task]) -> Self {
        let edges = tasks.iter().flat_map(|t| t.predecessors.iter().map(move |&p| (p, t.id)));
        Self::new(tasks.iter().map(|t| t.id), edges)
    }

    pub fn nodes(&self) -> &[TaskId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All edges `(pred, succ)` in ascending order.
    pub fn edges(&self) -> BTreeSet<(TaskId, TaskId)> {
        self.succs
            .iter()
            .enumerate()
            .flat_map(|(p, ss)| ss.iter().map(move |&s| (self.nodes[p], self.nodes[s])))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.succs.iter().map(Vec::len).sum()
    }

    pub fn predecessors(&self, id: TaskId) -> Vec<TaskId> {
        self.index.get(&id).map_or_else(Vec::new, |&i| self.preds[i].iter().map(|&p| self.nodes[p]).collect())
    }

    pub fn successors(&self, id: TaskId) -> Vec<TaskId> {
        self.index.get(&id).map_or_else(Vec::new, |&i| self.succs[i].iter().map(|&s| self.nodes[s]).collect())
    }

    /// Kahn's algorithm, smallest task id first among ready nodes.
    /// `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<TaskId>> {
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<(TaskId, usize)> =
            (0..self.len()).filter(|&i| indeg[i] == 0).map(|i| (self.nodes[i], i)).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some((id, i)) = ready.pop_first() {
            order.push(id);
            for &s in &self.succs[i] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.insert((self.nodes[s], s));
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    /// `reach[i][j]` is true iff a path of length >= 1 leads from node i to j.
    /// Requires an acyclic graph.
    fn closure(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let order = self.topological_order().expect("closure requires a DAG");
        let mut reach = vec![vec![false; n]; n];
        for id in order.iter().rev() {
            let u = self.index[id];
            for &s in &self.succs[u] {
                reach[u][s] = true;
                let below = reach[s].clone();
                for (a, b) in reach[u].iter_mut().zip(below) {
                    *a |= b;
                }
            }
        }
        reach
    }

    /// Every task reachable from `id` (its transitive followers).
    pub fn transitive_successors(&self, id: TaskId) -> BTreeSet<TaskId> {
        self.walk(id, &self.succs)
    }

    /// Every task from which `id` is reachable.
    pub fn transitive_predecessors(&self, id: TaskId) -> BTreeSet<TaskId> {
        self.walk(id, &self.preds)
    }

    fn walk(&self, id: TaskId, adj: &[Vec<usize>]) -> BTreeSet<TaskId> {
        let mut out = BTreeSet::new();
        let Some(&start) = self.index.get(&id) else { return out };
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    out.insert(self.nodes[v]);
                    stack.push(v);
                }
            }
        }
        out
    }

    /// Drop every edge implied by a longer path. Panics on a cyclic graph.
    pub fn transitive_reduction(&self) -> Self {
        let reach = self.closure();
        let mut kept = Vec::new();
        for u in 0..self.len() {
            for &w in &self.succs[u] {
                let implied = self.succs[u].iter().any(|&v| v != w && reach[v][w]);
                if !implied {
                    kept.push((self.nodes[u], self.nodes[w]));
                }
            }
        }
        Self::new(self.nodes.iter().copied(), kept)
    }

    /// Cycles (one entry per strongly connected component), redundant edges
    /// and dangling references. Empty for a valid graph.
    pub fn validate(&self) -> Vec<PrecedenceViolation> {
        let mut out: Vec<PrecedenceViolation> = self
            .unknown
            .iter()
            .map(|&(task, referenced_by)| PrecedenceViolation::UnknownTask { task, referenced_by })
            .collect();
        for comp in self.strongly_connected() {
            let cyclic = comp.len() > 1 || self.succs[comp[0]].contains(&comp[0]);
            if cyclic {
                let mut ids: Vec<TaskId> = comp.iter().map(|&i| self.nodes[i]).collect();
                ids.sort();
                out.push(PrecedenceViolation::Cycle(ids));
            }
        }
        for u in 0..self.len() {
            for &w in &self.succs[u] {
                if self.succs[u].iter().any(|&v| v != w && v != u && self.reaches(v, w, u)) {
                    out.push(PrecedenceViolation::Redundant { pred: self.nodes[u], succ: self.nodes[w] });
                }
            }
        }
        out
    }

    /// Path from `from` to `to` that never passes through `avoid`.
    fn reaches(&self, from: usize, to: usize, avoid: usize) -> bool {
        let mut seen = vec![false; self.len()];
        seen[avoid] = true;
        seen[from] = true;
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for &v in &self.succs[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    /// Tarjan's algorithm (iterative).
    fn strongly_connected(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comps = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (u, ref mut next)) = call.last_mut() {
                if *next < self.succs[u].len() {
                    let v = self.succs[u][*next];
                    *next += 1;
                    if index[v] == usize::MAX {
                        index[v] = counter;
                        low[v] = counter;
                        counter += 1;
                        stack.push(v);
                        on_stack[v] = true;
                        call.push((v, 0));
                    } else if on_stack[v] {
                        low[u] = low[u].min(index[v]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[u]);
                    }
                    if low[u] == index[u] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == u {
                                break;
                            }
                        }
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }

    /// First `(pred, succ)` pair that `seq` places out of order, if any.
    /// Tasks missing from `seq` count as never scheduled.
    pub fn first_violation(&self, seq: &[TaskId]) -> Option<(TaskId, TaskId)> {
        let mut placed = vec![false; self.len()];
        for &t in seq {
            let Some(&i) = self.index.get(&t) else { continue };
            if let Some(&p) = self.preds[i].iter().find(|&&p| !placed[p]) {
                return Some((self.nodes[p], t));
            }
            placed[i] = true;
        }
        None
    }

    pub fn is_feasible(&self, seq: &[TaskId]) -> bool {
        self.first_violation(seq).is_none()
    }

    pub(crate) fn slot(&self, id: TaskId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub(crate) fn pred_slots(&self, slot: usize) -> &[usize] {
        &self.preds[slot]
    }
}
