//! Anytime Monte Carlo tree search under a chance constraint.
//!
//! Each call to [`mcts_sopcc`] grows a fresh tree rooted at the robot's current
//! vertex for `K` iterations. One iteration:
//!
//! 1. descends by UCTF to a vertex not yet in the tree,
//! 2. runs `S` rollouts from it, each with its own sampled root-to-leaf travel
//!    time subtracted from the budget,
//! 3. stores the rollout reward/failure averages in the leaf's parent (or
//!    offers them to the existing entry),
//! 4. backs the best feasible (or least infeasible) continuation up to the
//!    root and bumps visit counts.
//!
//! The move returned is the feasible root child with the highest `Q`, or the
//! goal if no root child is feasible.

mod rollout;
mod tree;

pub use rollout::{evaluate_rollouts, greedy_step, rollout, Rollout};
pub use tree::{
    backup, backup_visit_counts, tree_policy_descend, uctf_score, Child, ChildStats, Descent, NodeId, SearchTree,
    TreeNode,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::stochastic::sample_path_unchecked;
use crate::vertex_set::VertexSet;

/// Planner tunables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Tree expansion iterations `K`.
    #[serde(rename = "K")]
    pub iterations: usize,
    /// Rollouts per new leaf `S`.
    #[serde(rename = "S")]
    pub rollouts: usize,
    /// Samples per feasibility screen inside rollouts `M`.
    #[serde(rename = "M")]
    pub feasibility_samples: usize,
    /// Probability of a random rather than greedy rollout step `P_R`.
    #[serde(rename = "P_R")]
    pub random_branch_prob: f64,
    /// UCTF exploration coefficient `z`.
    #[serde(rename = "z")]
    pub exploration: f64,
    /// Bound on the failure probability `P_f`.
    #[serde(rename = "P_f")]
    pub failure_bound: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            iterations: 350,
            rollouts: 100,
            feasibility_samples: 100,
            random_branch_prob: 0.3,
            exploration: 3.0,
            failure_bound: 0.1,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.iterations < 1 || self.rollouts < 1 || self.feasibility_samples < 1 {
            return bad(format!(
                "K, S and M must be at least 1 (got {}, {}, {})",
                self.iterations, self.rollouts, self.feasibility_samples
            ));
        }
        if !(0.0..=1.0).contains(&self.random_branch_prob) {
            return bad(format!("P_R must lie in [0, 1], got {}", self.random_branch_prob));
        }
        if !(self.exploration >= 0.0 && self.exploration.is_finite()) {
            return bad(format!("z must be non-negative, got {}", self.exploration));
        }
        if !(self.failure_bound > 0.0 && self.failure_bound < 1.0) {
            return bad(format!("P_f must lie in (0, 1), got {}", self.failure_bound));
        }
        Ok(())
    }
}

/// Feasible child of `node` with the highest `Q`; the goal when none is
/// feasible. Ties go to the lowest vertex id.
pub fn action_selection(tree: &SearchTree, node: NodeId, p_f: f64, goal: usize) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (&v, child) in &tree.node(node).children {
        if child.stats.is_feasible(p_f) && best.is_none_or(|(_, q)| child.stats.q > q) {
            best = Some((v, child.stats.q));
        }
    }
    best.map_or(goal, |(v, _)| v)
}

/// Grows the search tree for one planning call and returns it.
pub fn build_tree<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    current: usize,
    budget: f64,
    visited: &VertexSet,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<SearchTree> {
    let mut tree = SearchTree::new(current);
    if current == inst.goal() {
        return Ok(tree);
    }
    let mut root_visited = visited.clone();
    root_visited.insert(current);

    let s = cfg.rollouts;
    let mut paths = Vec::with_capacity(s);
    let mut budgets = Vec::with_capacity(s);
    let mut costs = Vec::with_capacity(s);
    for _ in 0..cfg.iterations {
        let descent = tree_policy_descend(&tree, inst, &root_visited, cfg.exploration)?;
        let mut prefix = tree.path_vertices(descent.parent);
        prefix.push(descent.vertex);
        let mut excluded = root_visited.clone();
        prefix.iter().for_each(|&v| {
            excluded.insert(v);
        });

        paths.clear();
        budgets.clear();
        costs.clear();
        for _ in 0..s {
            let elapsed = sample_path_unchecked(inst, &prefix, rng);
            let residual = budget - elapsed;
            let r = rollout(inst, descent.vertex, residual, cfg, &excluded, rng);
            paths.push(r.path);
            budgets.push(residual);
            costs.push(r.cost);
        }
        let (q, f) = evaluate_rollouts(inst, &paths, &budgets, &costs)?;

        let leaf = match descent.existing {
            Some(node) => {
                tree.stats_of_mut(node).expect("existing child").offer(q, f, cfg.failure_bound);
                node
            }
            None => tree.add_child(descent.parent, descent.vertex, ChildStats::new(q, f)),
        };
        backup(&mut tree, inst, leaf, cfg.failure_bound);
        backup_visit_counts(&mut tree, leaf);
    }
    Ok(tree)
}

/// One planning call: the next vertex to move to from `current` with
/// `budget` left, never a vertex in `visited`.
pub fn mcts_sopcc<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    current: usize,
    budget: f64,
    visited: &VertexSet,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<usize> {
    if !inst.is_complete() {
        return Err(Error::Incomplete);
    }
    cfg.validate()?;
    let tree = build_tree(inst, current, budget, visited, cfg, rng)?;
    Ok(action_selection(&tree, tree.root(), cfg.failure_bound, inst.goal()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random_instance, CostModel, Vertex};
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn small_cfg() -> PlannerConfig {
        PlannerConfig { iterations: 60, rollouts: 20, feasibility_samples: 50, ..PlannerConfig::default() }
    }

    fn selection_tree(children: &[(usize, f64, f64)]) -> SearchTree {
        let mut tree = SearchTree::new(0);
        for &(v, q, f) in children {
            tree.add_child(0, v, ChildStats { visits: 1, q, f });
        }
        tree
    }

    #[test]
    fn selects_only_feasible_child() {
        let tree = selection_tree(&[(1, 3.0, 0.04), (2, 5.0, 0.2)]);
        assert_eq!(action_selection(&tree, 0, 0.05, 9), 1);
    }

    #[test]
    fn boundary_failure_counts_as_feasible() {
        let tree = selection_tree(&[(1, 3.0, 0.04), (2, 5.0, 0.05)]);
        assert_eq!(action_selection(&tree, 0, 0.05, 9), 2);
    }

    #[test]
    fn no_feasible_child_returns_goal() {
        let tree = selection_tree(&[(1, 3.0, 0.5), (2, 5.0, 0.2)]);
        assert_eq!(action_selection(&tree, 0, 0.05, 9), 9);
        assert_eq!(action_selection(&SearchTree::new(0), 0, 0.05, 9), 9);
    }

    #[test]
    fn selection_ties_go_to_lowest_id() {
        let tree = selection_tree(&[(4, 2.0, 0.0), (2, 2.0, 0.0), (3, 1.0, 0.0)]);
        assert_eq!(action_selection(&tree, 0, 0.1, 9), 2);
    }

    fn three_vertex(reward_mid: f64) -> ProblemInstance {
        let vertices = vec![
            Vertex { id: 0, x: 0.0, y: 0.0, reward: 0.0 },
            Vertex { id: 1, x: 0.5, y: 0.3, reward: reward_mid },
            Vertex { id: 2, x: 1.0, y: 0.0, reward: 0.0 },
        ];
        ProblemInstance::new("tri", vertices, 0, 2, CostModel::EuclideanExponential { kappa: 0.5 }).unwrap()
    }

    #[test]
    fn generous_budget_visits_rewarded_vertex() {
        let inst = three_vertex(1.0);
        let total: f64 = [(0, 1), (1, 2), (0, 2)].iter().map(|&(i, j)| inst.expected_cost(i, j).unwrap()).sum();
        let next = mcts_sopcc(&inst, 0, 100.0 * total, &VertexSet::new(3), &small_cfg(), &mut seeded(1)).unwrap();
        assert_eq!(next, 1);
    }

    #[test]
    fn hopeless_budget_returns_goal() {
        let inst = generate_random_instance(8, 2, 0.0, 1.0, 0.5).unwrap();
        for seed in 0..100 {
            let next = mcts_sopcc(&inst, 0, 1e-6, &VertexSet::new(8), &small_cfg(), &mut seeded(seed)).unwrap();
            assert_eq!(next, 7);
        }
    }

    #[test]
    fn single_iteration_is_reproducible() {
        let inst = generate_random_instance(10, 4, 0.0, 1.0, 0.5).unwrap();
        let cfg = PlannerConfig { iterations: 1, rollouts: 1, ..PlannerConfig::default() };
        let a = mcts_sopcc(&inst, 0, 2.0, &VertexSet::new(10), &cfg, &mut seeded(77)).unwrap();
        let b = mcts_sopcc(&inst, 0, 2.0, &VertexSet::new(10), &cfg, &mut seeded(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn visited_vertices_are_never_chosen() {
        let inst = generate_random_instance(9, 6, 0.0, 1.0, 0.5).unwrap();
        let visited = VertexSet::from_iter_with_capacity(9, [0, 1, 2, 5]);
        for seed in 0..10 {
            let next = mcts_sopcc(&inst, 3, 3.0, &visited, &small_cfg(), &mut seeded(seed)).unwrap();
            assert!(!visited.contains(next) && next != 3);
        }
    }

    #[test]
    fn config_validation() {
        assert!(PlannerConfig::default().validate().is_ok());
        for bad in [
            PlannerConfig { iterations: 0, ..PlannerConfig::default() },
            PlannerConfig { rollouts: 0, ..PlannerConfig::default() },
            PlannerConfig { feasibility_samples: 0, ..PlannerConfig::default() },
            PlannerConfig { random_branch_prob: 1.5, ..PlannerConfig::default() },
            PlannerConfig { exploration: -1.0, ..PlannerConfig::default() },
            PlannerConfig { failure_bound: 0.0, ..PlannerConfig::default() },
            PlannerConfig { failure_bound: 1.0, ..PlannerConfig::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Parameter(_))), "{bad:?}");
        }
    }

    /// Structural checks on a built tree.
    fn check_tree(tree: &SearchTree, inst: &ProblemInstance, visited: &VertexSet, iterations: usize) {
        let root = tree.root();
        assert_eq!(tree.child_visit_total(root), iterations as u64);
        for id in 0..tree.len() {
            let node = tree.node(id);
            let excluded = tree.excluded_at(id, visited);
            let mut total = 0;
            for (&v, child) in &node.children {
                assert!(!excluded.contains(v), "child {v} is excluded at node {id}");
                assert_eq!(tree.vertex(child.node), v);
                assert_eq!(tree.parent(child.node), Some(id));
                assert!((0.0..=1.0).contains(&child.stats.f) && child.stats.q >= 0.0);
                // every node's visit count equals the total of its own children plus its own leaf visits
                total += child.stats.visits;
                let below = tree.child_visit_total(child.node);
                assert!(below <= child.stats.visits);
            }
            if id != root {
                assert!(total <= tree.stats_of(id).unwrap().visits);
            }
            if node.vertex == inst.goal() {
                assert!(node.children.is_empty());
            }
        }
    }

    #[test]
    fn built_tree_is_consistent() {
        let inst = generate_random_instance(10, 11, 0.0, 1.0, 0.5).unwrap();
        let visited = VertexSet::from_iter_with_capacity(10, [0, 4]);
        let cfg = small_cfg();
        let tree = build_tree(&inst, 2, 2.0, &visited, &cfg, &mut seeded(5)).unwrap();
        check_tree(&tree, &inst, &visited, cfg.iterations);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn selection_invariant_under_positive_rescaling(
            qs in proptest::collection::vec((0.0f64..10.0, 0.0f64..0.3), 1..8),
            scale in 0.01f64..100.0,
        ) {
            let children: Vec<_> = qs.iter().enumerate().map(|(i, &(q, f))| (i + 1, q, f)).collect();
            let scaled: Vec<_> = children.iter().map(|&(v, q, f)| (v, q * scale, f)).collect();
            prop_assert_eq!(
                action_selection(&selection_tree(&children), 0, 0.1, 99),
                action_selection(&selection_tree(&scaled), 0, 0.1, 99)
            );
        }

        #[test]
        fn random_trees_are_consistent(seed in 0u64..1000, budget in 0.2f64..4.0) {
            let inst = generate_random_instance(7, seed, 0.0, 1.0, 0.5).unwrap();
            let visited = VertexSet::from_iter_with_capacity(7, [0]);
            let cfg = PlannerConfig { iterations: 40, rollouts: 5, feasibility_samples: 20, ..PlannerConfig::default() };
            let tree = build_tree(&inst, 0, budget, &visited, &cfg, &mut seeded(seed)).unwrap();
            check_tree(&tree, &inst, &visited, cfg.iterations);
        }
    }
}
