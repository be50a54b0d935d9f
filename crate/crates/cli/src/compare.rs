//! Planner versus the exhaustive fixed-path oracle.

use std::time::Instant;

use sopcc_core::oracle::{fixed_path_failure_rate, oracle_best_feasible, PathEvaluation};
use sopcc_core::{rng, run_batch, BatchStats, PlannerConfig, ProblemInstance};

use crate::config::ExperimentConfig;
use crate::csv_out;
use crate::error::CliResult;

pub const HEADER: [&str; 21] = [
    "instance",
    "n",
    "B",
    "Pf",
    "K",
    "S",
    "M",
    "PR",
    "z",
    "trials",
    "n_eval",
    "oracle_reward",
    "oracle_p_hat",
    "oracle_failure_rate",
    "oracle_wall_time_s",
    "mcts_reward",
    "mcts_reward_se",
    "mcts_failure_rate",
    "mcts_wall_time_s",
    "ratio",
    "oracle_path",
];

/// One `(B, P_f)` comparison. Oracle columns are empty when no path meets
/// the chance constraint.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub budget: f64,
    pub planner: PlannerConfig,
    pub oracle: Option<PathEvaluation>,
    /// Failure rate of the oracle path executed `trials` times.
    pub oracle_failure_rate: Option<f64>,
    pub oracle_wall_time: f64,
    pub mcts: BatchStats,
    /// Total wall time of the planner batch.
    pub mcts_wall_time: f64,
}

impl Comparison {
    /// Planner mean reward over oracle expected reward.
    pub fn ratio(&self) -> Option<f64> {
        self.oracle.as_ref().filter(|o| o.expected_reward > 0.0).map(|o| self.mcts.mean_reward / o.expected_reward)
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonOutput {
    pub instance: String,
    pub n: usize,
    pub trials: usize,
    pub n_eval: usize,
    pub record_timing: bool,
    pub rows: Vec<Comparison>,
}

impl ComparisonOutput {
    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let timing = |t: f64| if self.record_timing { csv_out::real(t) } else { String::new() };
        let rows = self.rows.iter().map(|c| {
            let p = &c.planner;
            vec![
                self.instance.clone(),
                self.n.to_string(),
                csv_out::real(c.budget),
                csv_out::real(p.failure_bound),
                p.iterations.to_string(),
                p.rollouts.to_string(),
                p.feasibility_samples.to_string(),
                csv_out::real(p.random_branch_prob),
                csv_out::real(p.exploration),
                self.trials.to_string(),
                self.n_eval.to_string(),
                csv_out::opt_real(c.oracle.as_ref().map(|o| o.expected_reward)),
                csv_out::opt_real(c.oracle.as_ref().map(|o| o.exceedance.p_hat())),
                csv_out::opt_real(c.oracle_failure_rate),
                timing(c.oracle_wall_time),
                csv_out::real(c.mcts.mean_reward),
                csv_out::real(c.mcts.reward_standard_error()),
                csv_out::real(c.mcts.failure_rate),
                timing(c.mcts_wall_time),
                csv_out::opt_real(c.ratio()),
                c.oracle.as_ref().map(|o| csv_out::path(&o.path)).unwrap_or_default(),
            ]
        });
        csv_out::to_bytes(&HEADER, rows)
    }
}

/// For every budget in `compare_budgets` and failure bound in
/// `compare_failure_bounds`, finds the oracle's best feasible path and runs a
/// planner batch. Refuses instances larger than the enumeration cap before
/// doing any work.
pub fn compare_with_oracle(cfg: &ExperimentConfig, inst: &ProblemInstance) -> CliResult<ComparisonOutput> {
    cfg.validate()?;
    if inst.n() > cfg.cap {
        return Err(sopcc_core::Error::SizeCap { n: inst.n(), cap: cfg.cap }.into());
    }
    let mut rows = Vec::new();
    for budget in cfg.compare_budgets() {
        for p_f in cfg.compare_failure_bounds() {
            let planner = PlannerConfig { failure_bound: p_f, ..cfg.planner };
            let started = Instant::now();
            let oracle = oracle_best_feasible(inst, budget, p_f, cfg.n_eval, &mut rng::seeded(cfg.base_seed), cfg.cap)?;
            let oracle_wall_time = started.elapsed().as_secs_f64();
            let oracle_failure_rate = oracle
                .as_ref()
                .map(|o| fixed_path_failure_rate(inst, &o.path, budget, cfg.trials, cfg.base_seed))
                .transpose()?;
            let started = Instant::now();
            let mcts = run_batch(inst, budget, &planner, cfg.trials, cfg.base_seed)?;
            let mcts_wall_time = started.elapsed().as_secs_f64();
            rows.push(Comparison {
                budget,
                planner,
                oracle,
                oracle_failure_rate,
                oracle_wall_time,
                mcts,
                mcts_wall_time,
            });
        }
    }
    Ok(ComparisonOutput {
        instance: inst.name().to_string(),
        n: inst.n(),
        trials: cfg.trials,
        n_eval: cfg.n_eval,
        record_timing: cfg.record_timing,
        rows,
    })
}
