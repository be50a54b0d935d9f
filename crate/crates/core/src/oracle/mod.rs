//! Exact baseline by exhaustive enumeration of simple start-to-goal paths, and
//! statistical checks of the planner's error bounds.

mod bounds;

pub use bounds::{
    check_concentration_bound, check_selection_error_bound, concentration_bound, selection_error_bound, BoundCheck,
    BoundParams, ReturnNoise,
};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::rng;
use crate::stochastic::{estimate_exceedance, ExceedanceEstimate};

pub const DEFAULT_ENUMERATION_CAP: usize = 10;
pub const DEFAULT_EVAL_SAMPLES: usize = 10_000;
pub const MIN_EVAL_SAMPLES: usize = 1_000;

/// Streaming depth-first enumeration of every simple path from start to goal,
/// over every ordered subset of the intermediate vertices. The direct path
/// comes first.
#[derive(Clone, Debug)]
pub struct SimplePaths {
    start: usize,
    goal: usize,
    inner: Vec<usize>,
    used: Vec<bool>,
    prefix: Vec<usize>,
    cursor: Vec<usize>,
    emit_prefix: bool,
}

impl SimplePaths {
    fn new(start: usize, goal: usize, n: usize) -> Self {
        let inner: Vec<usize> = (0..n).filter(|&v| v != start && v != goal).collect();
        Self {
            start,
            goal,
            used: vec![false; inner.len()],
            inner,
            prefix: Vec::new(),
            cursor: vec![0],
            emit_prefix: true,
        }
    }

    fn current(&self) -> Vec<usize> {
        let mut p = Vec::with_capacity(self.prefix.len() + 2);
        p.push(self.start);
        p.extend(self.prefix.iter().map(|&i| self.inner[i]));
        p.push(self.goal);
        p
    }
}

impl Iterator for SimplePaths {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if std::mem::take(&mut self.emit_prefix) {
            return Some(self.current());
        }
        loop {
            let m = self.inner.len();
            let c = self.cursor.last_mut()?;
            while *c < m && self.used[*c] {
                *c += 1;
            }
            if *c >= m {
                self.cursor.pop();
                if let Some(i) = self.prefix.pop() {
                    self.used[i] = false;
                }
                continue;
            }
            let i = *c;
            *c += 1;
            self.used[i] = true;
            self.prefix.push(i);
            self.cursor.push(0);
            return Some(self.current());
        }
    }
}

pub fn enumerate_paths(inst: &ProblemInstance, cap: usize) -> Result<SimplePaths> {
    if inst.n() > cap {
        return Err(Error::SizeCap { n: inst.n(), cap });
    }
    if !inst.is_complete() {
        return Err(Error::Incomplete);
    }
    Ok(SimplePaths::new(inst.start(), inst.goal(), inst.n()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathEvaluation {
    pub path: Vec<usize>,
    pub expected_reward: f64,
    pub exceedance: ExceedanceEstimate,
}

/// True when some edge of the path has an exponential component, which makes
/// the true exceedance probability positive for every finite budget.
fn has_unbounded_cost(inst: &ProblemInstance, path: &[usize]) -> bool {
    path.windows(2).any(|w| inst.is_noisy(w[0], w[1]))
}

fn check_eval_args(p_f: f64, n_eval: usize) -> Result<()> {
    if n_eval < MIN_EVAL_SAMPLES {
        return Err(Error::Parameter(format!("n_eval must be at least {MIN_EVAL_SAMPLES}, got {n_eval}")));
    }
    if !(0.0..1.0).contains(&p_f) {
        return Err(Error::Parameter(format!("P_f must lie in [0, 1), got {p_f}")));
    }
    Ok(())
}

fn evaluate(
    inst: &ProblemInstance,
    index: usize,
    path: Vec<usize>,
    budget: f64,
    n_eval: usize,
    key: u64,
) -> Result<PathEvaluation> {
    let exceedance = estimate_exceedance(inst, &path, budget, n_eval, &mut rng::stream(key, index as u64))?;
    Ok(PathEvaluation { expected_reward: inst.collected_reward(&path), path, exceedance })
}

/// Evaluates every enumerated path with `n_eval` samples each.
///
/// Path `k` in enumeration order is sampled from stream `k` of a generator
/// keyed by one draw from `rng`, so each estimate is independent of which
/// other paths are evaluated and of the thread count.
pub fn evaluate_all_paths<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    budget: f64,
    n_eval: usize,
    rng: &mut R,
    cap: usize,
) -> Result<Vec<PathEvaluation>> {
    check_eval_args(0.0, n_eval)?;
    let key: u64 = rng.random();
    let paths: Vec<Vec<usize>> = enumerate_paths(inst, cap)?.collect();
    paths.into_par_iter().enumerate().map(|(k, p)| evaluate(inst, k, p, budget, n_eval, key)).collect()
}

/// Maximum-reward path whose estimated exceedance is at most `p_f`, or `None`
/// when no path qualifies.
///
/// Uses the same per-path sampling streams as [`evaluate_all_paths`], so the
/// answer equals filtering that full evaluation. Paths are visited in order of
/// decreasing reward (ties in enumeration order) and the first qualifying one
/// is returned. With `p_f = 0`, a path with any exponential edge is rejected
/// outright: its true exceedance probability is strictly positive.
pub fn oracle_best_feasible<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    budget: f64,
    p_f: f64,
    n_eval: usize,
    rng: &mut R,
    cap: usize,
) -> Result<Option<PathEvaluation>> {
    check_eval_args(p_f, n_eval)?;
    let key: u64 = rng.random();
    let mut ranked: Vec<(usize, f64, Vec<usize>)> =
        enumerate_paths(inst, cap)?.enumerate().map(|(k, p)| (k, inst.collected_reward(&p), p)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (k, _, path) in ranked {
        if p_f == 0.0 && has_unbounded_cost(inst, &path) {
            continue;
        }
        let eval = evaluate(inst, k, path, budget, n_eval, key)?;
        if eval.exceedance.p_hat() <= p_f {
            return Ok(Some(eval));
        }
    }
    Ok(None)
}

/// Executes a fixed path `trials` times, trial `k` seeded with
/// `base_seed + k`, and returns the fraction of runs that ended with no budget
/// left.
pub fn fixed_path_failure_rate(
    inst: &ProblemInstance,
    path: &[usize],
    budget: f64,
    trials: usize,
    base_seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let mut failures = 0;
    for k in 0..trials {
        let mut rng = rng::seeded(base_seed.wrapping_add(k as u64));
        let cost = crate::stochastic::sample_path_cost(inst, path, &mut rng)?.value();
        if budget - cost <= 0.0 {
            failures += 1;
        }
    }
    Ok(failures as f64 / trials as f64)
}
