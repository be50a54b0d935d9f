//! Search tree storage, the UCTF tree policy, and the failure-aware backup.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::vertex_set::VertexSet;

pub type NodeId = usize;

/// Statistics a node keeps for one of its children.
///
/// `q` is the expected reward of the best continuation known through the
/// child, `f` the estimated failure probability of that same continuation, and
/// `visits` how often the child was selected.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChildStats {
    pub visits: u64,
    pub q: f64,
    pub f: f64,
}

impl ChildStats {
    pub fn new(q: f64, f: f64) -> Self {
        Self { visits: 0, q, f }
    }

    pub fn is_feasible(&self, p_f: f64) -> bool {
        self.f <= p_f
    }

    /// Replaces `(q, f)` by a candidate continuation when it is better.
    ///
    /// A feasible entry only accepts feasible candidates with strictly larger
    /// reward. An infeasible entry accepts any candidate with strictly smaller
    /// failure probability. Returns whether the entry changed.
    pub fn offer(&mut self, q: f64, f: f64, p_f: f64) -> bool {
        let accept = if self.is_feasible(p_f) { f <= p_f && self.q < q } else { self.f > f };
        if accept {
            self.q = q;
            self.f = f;
        }
        accept
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Child {
    pub node: NodeId,
    pub stats: ChildStats,
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub vertex: usize,
    pub parent: Option<NodeId>,
    /// Keyed by child vertex id; iteration order gives lowest-id tie-breaking.
    pub children: BTreeMap<usize, Child>,
}

/// Arena-allocated search tree. The same graph vertex may sit at several nodes,
/// one per distinct root path.
#[derive(Clone, Debug)]
pub struct SearchTree {
    nodes: Vec<TreeNode>,
}

impl SearchTree {
    pub fn new(root_vertex: usize) -> Self {
        Self { nodes: vec![TreeNode { vertex: root_vertex, parent: None, children: BTreeMap::new() }] }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn vertex(&self, id: NodeId) -> usize {
        self.nodes[id].vertex
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn add_child(&mut self, parent: NodeId, vertex: usize, stats: ChildStats) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(TreeNode { vertex, parent: Some(parent), children: BTreeMap::new() });
        let prev = self.nodes[parent].children.insert(vertex, Child { node: id, stats });
        assert!(prev.is_none(), "vertex {vertex} already a child of node {parent}");
        id
    }

    pub fn child(&self, parent: NodeId, vertex: usize) -> Option<&Child> {
        self.nodes[parent].children.get(&vertex)
    }

    /// Stats stored in `parent` for its child node `child`.
    pub fn stats_of(&self, child: NodeId) -> Option<&ChildStats> {
        let parent = self.parent(child)?;
        self.nodes[parent].children.get(&self.vertex(child)).map(|c| &c.stats)
    }

    pub fn stats_of_mut(&mut self, child: NodeId) -> Option<&mut ChildStats> {
        let parent = self.parent(child)?;
        let vertex = self.vertex(child);
        self.nodes[parent].children.get_mut(&vertex).map(|c| &mut c.stats)
    }

    /// Vertices from the root down to `id`, inclusive.
    pub fn path_vertices(&self, id: NodeId) -> Vec<usize> {
        let mut out = vec![self.vertex(id)];
        let mut cur = id;
        while let Some(p) = self.parent(cur) {
            out.push(self.vertex(p));
            cur = p;
        }
        out.reverse();
        out
    }

    /// Vertices excluded from expansion below `id`: the global visited set
    /// plus every vertex on the root path to `id`.
    pub fn excluded_at(&self, id: NodeId, visited: &VertexSet) -> VertexSet {
        let mut set = visited.clone();
        for v in self.path_vertices(id) {
            set.insert(v);
        }
        set
    }

    /// Sum of child visit counts, the `t` in the UCTF exploration term.
    pub fn child_visit_total(&self, id: NodeId) -> u64 {
        self.nodes[id].children.values().map(|c| c.stats.visits).sum()
    }
}

/// UCT with failures: `Q (1 - F) + z sqrt(ln t / N)`, infinite for unvisited
/// children.
pub fn uctf_score(stats: &ChildStats, t: u64, z: f64) -> Result<f64> {
    if t < stats.visits {
        return Err(Error::Invariant(format!("sibling visit total {t} below child visits {}", stats.visits)));
    }
    if stats.visits == 0 {
        return Ok(f64::INFINITY);
    }
    let n = stats.visits as f64;
    Ok(stats.q * (1.0 - stats.f) + z * ((t as f64).ln() / n).sqrt())
}

/// Where the tree policy stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Descent {
    /// Node that owns the selected child.
    pub parent: NodeId,
    /// Selected child vertex.
    pub vertex: usize,
    /// Existing node for the child, if it is already in the tree. This only
    /// happens for the goal, which is never expanded further.
    pub existing: Option<NodeId>,
}

/// Follows the highest-UCTF child from the root until it selects a vertex not
/// yet in the tree (or the goal). Ties go to the lowest vertex id. A node with
/// no admissible neighbour is given the goal as forced child.
pub fn tree_policy_descend(tree: &SearchTree, inst: &ProblemInstance, visited: &VertexSet, z: f64) -> Result<Descent> {
    let goal = inst.goal();
    let mut node = tree.root();
    let mut excluded = tree.excluded_at(node, visited);
    loop {
        let here = tree.node(node);
        let t = tree.child_visit_total(node);
        let mut best: Option<(usize, f64)> = None;
        for v in (0..inst.n()).filter(|&v| !excluded.contains(v) && inst.has_edge(here.vertex, v)) {
            let score = match here.children.get(&v) {
                Some(c) => uctf_score(&c.stats, t, z)?,
                None => f64::INFINITY,
            };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((v, score));
            }
        }
        let Some((v, _)) = best else {
            return Ok(Descent { parent: node, vertex: goal, existing: here.children.get(&goal).map(|c| c.node) });
        };
        match here.children.get(&v) {
            None => return Ok(Descent { parent: node, vertex: v, existing: None }),
            Some(c) if v == goal => return Ok(Descent { parent: node, vertex: v, existing: Some(c.node) }),
            Some(c) => {
                node = c.node;
                excluded.insert(v);
            }
        }
    }
}

/// Propagates improved `(Q, F)` pairs from `leaf` towards the root.
///
/// At each level, with `v_j` the lower child, `v_i` its parent and `v_k` the
/// grandparent, the continuation `(Q[v_j] + r(v_i), F[v_j])` stored in `v_i`
/// is offered to the entry for `v_i` in `v_k` under [`ChildStats::offer`].
/// The walk continues to the root whether or not an entry changed.
pub fn backup(tree: &mut SearchTree, inst: &ProblemInstance, leaf: NodeId, p_f: f64) {
    let Some(mut mid) = tree.parent(leaf) else {
        return;
    };
    let mut child = leaf;
    while tree.parent(mid).is_some() {
        let cand = *tree.stats_of(child).expect("child of a parent has stats");
        let q = cand.q + inst.reward(tree.vertex(mid));
        tree.stats_of_mut(mid).expect("non-root node has stats").offer(q, cand.f, p_f);
        child = mid;
        mid = tree.parent(mid).expect("checked above");
    }
}

/// Increments the visit count of every edge on the root-to-`leaf` path.
pub fn backup_visit_counts(tree: &mut SearchTree, leaf: NodeId) {
    let mut cur = leaf;
    while let Some(parent) = tree.parent(cur) {
        tree.stats_of_mut(cur).expect("non-root node has stats").visits += 1;
        cur = parent;
    }
}
