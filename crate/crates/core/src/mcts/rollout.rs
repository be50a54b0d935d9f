//! Feasibility-screened rollouts from a freshly selected leaf.

use rand::Rng;

use super::PlannerConfig;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::stochastic::two_hop_within_bound;
use crate::vertex_set::VertexSet;

/// One simulated continuation to the goal.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    /// Vertices from the rollout start to the goal, inclusive.
    pub path: Vec<usize>,
    /// Sum of the cost samples drawn for each traversed edge.
    pub cost: f64,
}

fn candidates<'a>(
    inst: &'a ProblemInstance,
    current: usize,
    excluded: &'a VertexSet,
) -> impl Iterator<Item = usize> + 'a {
    let goal = inst.goal();
    (0..inst.n()).filter(move |&v| v != current && v != goal && !excluded.contains(v) && inst.has_edge(current, v))
}

/// Best reward-to-expected-cost vertex among those whose two-hop path
/// `current -> v -> goal` passes the chance-constraint screen; the goal when
/// none does. Ties go to the lowest id.
///
/// Candidates are screened in ratio order and the first survivor returned,
/// which selects the same vertex as screening every candidate first.
pub fn greedy_step<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    current: usize,
    excluded: &VertexSet,
    residual_budget: f64,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> usize {
    let goal = inst.goal();
    let mut ranked: Vec<(usize, f64)> = candidates(inst, current, excluded)
        .filter(|&v| inst.has_edge(v, goal))
        .map(|v| (v, inst.reward(v) / inst.expected_cost(current, v).expect("edge")))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .find(|&(v, _)| {
            two_hop_within_bound(
                inst,
                current,
                v,
                goal,
                residual_budget,
                cfg.feasibility_samples,
                cfg.failure_bound,
                rng,
            )
        })
        .map_or(goal, |(v, _)| v)
}

/// Uniform draw among unexcluded neighbours of `current`, goal included.
fn random_child<R: Rng + ?Sized>(inst: &ProblemInstance, current: usize, excluded: &VertexSet, rng: &mut R) -> usize {
    let mut options: Vec<usize> = candidates(inst, current, excluded).collect();
    options.push(inst.goal());
    options[rng.random_range(0..options.len())]
}

/// Builds one path from `start` to the goal.
///
/// Each step proposes a random neighbour with probability `P_R` and the greedy
/// choice otherwise. A non-goal proposal is admitted only if the estimated
/// probability that `current -> new -> goal` overruns the residual budget is at
/// most `P_f`; admitting it charges one cost sample against the budget. After
/// `3 n` consecutive rejections the greedy choice is admitted without a second
/// screen, which guarantees termination.
pub fn rollout<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    start: usize,
    residual_budget: f64,
    cfg: &PlannerConfig,
    visited: &VertexSet,
    rng: &mut R,
) -> Rollout {
    let goal = inst.goal();
    let mut path = vec![start];
    if start == goal {
        return Rollout { path, cost: 0.0 };
    }
    let mut excluded = visited.clone();
    excluded.insert(start);
    let mut current = start;
    let mut budget = residual_budget;
    let mut cost = 0.0;
    let mut rejections = 0;
    let rejection_cap = 3 * inst.n();
    loop {
        let forced = rejections >= rejection_cap;
        let new = if !forced && cfg.random_branch_prob > 0.0 && rng.random::<f64>() < cfg.random_branch_prob {
            random_child(inst, current, &excluded, rng)
        } else {
            greedy_step(inst, current, &excluded, budget, cfg, rng)
        };
        if new == goal {
            cost += inst.sample_edge(current, goal, rng);
            path.push(goal);
            return Rollout { path, cost };
        }
        if forced
            || two_hop_within_bound(inst, current, new, goal, budget, cfg.feasibility_samples, cfg.failure_bound, rng)
        {
            let c = inst.sample_edge(current, new, rng);
            budget -= c;
            cost += c;
            path.push(new);
            excluded.insert(new);
            current = new;
            rejections = 0;
        } else {
            rejections += 1;
        }
    }
}

/// Reward and failure estimates from a batch of rollouts.
///
/// `Q` is the mean over paths of the distinct-vertex reward sum, `F` the
/// fraction of paths whose cost exceeded their residual budget.
pub fn evaluate_rollouts(
    inst: &ProblemInstance,
    paths: &[Vec<usize>],
    budgets: &[f64],
    costs: &[f64],
) -> Result<(f64, f64)> {
    if paths.is_empty() {
        return Err(Error::Parameter("need at least one rollout".into()));
    }
    if paths.len() != budgets.len() || paths.len() != costs.len() {
        return Err(Error::Parameter(format!(
            "rollout lists differ in length: {} paths, {} budgets, {} costs",
            paths.len(),
            budgets.len(),
            costs.len()
        )));
    }
    let s = paths.len() as f64;
    let q = paths.iter().map(|p| inst.collected_reward(p)).sum::<f64>() / s;
    let failures = costs.iter().zip(budgets).filter(|(c, b)| c > b).count();
    Ok((q, failures as f64 / s))
}
