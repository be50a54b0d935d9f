//! Online execution: plan one move, take it, pay a sampled cost, repeat.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::mcts::{mcts_sopcc, PlannerConfig};
use crate::rng;
use crate::vertex_set::VertexSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub path: Vec<usize>,
    pub realized_costs: Vec<f64>,
    pub collected_reward: f64,
    pub outcome: Outcome,
    pub final_budget: f64,
    /// Seconds spent in the whole plan/execute loop.
    pub wall_time: f64,
    pub planning_calls: usize,
}

impl EpisodeResult {
    pub fn failed(&self) -> bool {
        self.outcome == Outcome::Failure
    }
}

/// Source of the costs the robot actually pays.
pub trait Environment: Sync {
    fn traverse(&self, inst: &ProblemInstance, from: usize, to: usize, rng: &mut dyn rand::RngCore) -> f64;
}

/// Draws realized costs from the instance's own cost model.
#[derive(Clone, Copy, Debug, Default)]
pub struct ModelEnvironment;

impl Environment for ModelEnvironment {
    fn traverse(&self, inst: &ProblemInstance, from: usize, to: usize, rng: &mut dyn rand::RngCore) -> f64 {
        inst.sample_edge(from, to, rng)
    }
}

pub fn run_episode<R: Rng>(
    inst: &ProblemInstance,
    budget: f64,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<EpisodeResult> {
    run_episode_in(&ModelEnvironment, inst, budget, cfg, rng)
}

/// Runs the plan/execute loop until the goal is reached or the budget is
/// spent. Reaching the goal with exactly zero budget left is a failure.
pub fn run_episode_in<R: Rng, E: Environment + ?Sized>(
    env: &E,
    inst: &ProblemInstance,
    budget: f64,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<EpisodeResult> {
    if budget.is_nan() || budget <= 0.0 {
        return Err(Error::Parameter(format!("budget must be positive, got {budget}")));
    }
    if !inst.is_complete() {
        return Err(Error::Incomplete);
    }
    cfg.validate()?;

    let started = Instant::now();
    let goal = inst.goal();
    let mut v = inst.start();
    let mut path = vec![v];
    let mut realized_costs = Vec::new();
    let mut visited = VertexSet::new(inst.n());
    visited.insert(v);
    let mut spent = 0.0;
    let mut planning_calls = 0;

    while budget - spent > 0.0 && v != goal {
        let next = mcts_sopcc(inst, v, budget - spent, &visited, cfg, rng)?;
        planning_calls += 1;
        if !visited.insert(next) {
            return Err(Error::Invariant(format!("planner revisited vertex {next}")));
        }
        let cost = env.traverse(inst, v, next, rng);
        realized_costs.push(cost);
        spent = realized_costs.iter().sum();
        path.push(next);
        v = next;
    }

    let final_budget = budget - spent;
    let outcome = if v == goal && final_budget > 0.0 { Outcome::Success } else { Outcome::Failure };
    Ok(EpisodeResult {
        collected_reward: inst.collected_reward(&path),
        path,
        realized_costs,
        outcome,
        final_budget,
        wall_time: started.elapsed().as_secs_f64(),
        planning_calls,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub trial: usize,
    pub seed: u64,
    pub result: EpisodeResult,
}

/// Summary over a batch of episodes. Standard deviations use the `n - 1`
/// denominator and are zero for a single trial.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchStats {
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_wall_time: f64,
    pub std_wall_time: f64,
    pub mean_final_budget: f64,
    pub mean_planning_calls: f64,
    /// Sorted by trial index.
    pub episodes: Vec<EpisodeRecord>,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl BatchStats {
    pub fn from_episodes(mut episodes: Vec<EpisodeRecord>) -> Result<Self> {
        if episodes.is_empty() {
            return Err(Error::Parameter("batch has no episodes".into()));
        }
        episodes.sort_by_key(|e| e.trial);
        let trials = episodes.len();
        let failures = episodes.iter().filter(|e| e.result.failed()).count();
        let (mean_reward, std_reward) = mean_std(episodes.iter().map(|e| e.result.collected_reward));
        let (mean_wall_time, std_wall_time) = mean_std(episodes.iter().map(|e| e.result.wall_time));
        let (mean_final_budget, _) = mean_std(episodes.iter().map(|e| e.result.final_budget));
        let (mean_planning_calls, _) = mean_std(episodes.iter().map(|e| e.result.planning_calls as f64));
        Ok(Self {
            trials,
            failures,
            failure_rate: failures as f64 / trials as f64,
            mean_reward,
            std_reward,
            mean_wall_time,
            std_wall_time,
            mean_final_budget,
            mean_planning_calls,
            episodes,
        })
    }

    pub fn reward_standard_error(&self) -> f64 {
        self.std_reward / (self.trials as f64).sqrt()
    }
}

/// Runs `trials` independent episodes, trial `k` seeded with `base_seed + k`.
///
/// Episodes run on the current rayon pool; results do not depend on the
/// number of threads.
pub fn run_batch(
    inst: &ProblemInstance,
    budget: f64,
    cfg: &PlannerConfig,
    trials: usize,
    base_seed: u64,
) -> Result<BatchStats> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let episodes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = base_seed.wrapping_add(trial as u64);
            let result = run_episode(inst, budget, cfg, &mut rng::seeded(seed))?;
            Ok(EpisodeRecord { trial, seed, result })
        })
        .collect::<Result<Vec<_>>>()?;
    BatchStats::from_episodes(episodes)
}
