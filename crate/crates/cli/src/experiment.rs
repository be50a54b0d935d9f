//! Batch runs over an optional parameter sweep.

use sopcc_core::executor::EpisodeRecord;
use sopcc_core::{run_batch, BatchStats, PlannerConfig, ProblemInstance};

use crate::config::ExperimentConfig;
use crate::csv_out;
use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 18] = [
    "kind",
    "instance",
    "n",
    "B",
    "Pf",
    "K",
    "S",
    "M",
    "PR",
    "z",
    "seed",
    "trial",
    "reward",
    "failed",
    "final_budget",
    "planning_calls",
    "wall_time_s",
    "path",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Episode,
    Summary,
}

/// One CSV line. Summary rows carry batch means in the value columns, the
/// failure rate in `failed`, the batch's base seed, and no trial or path.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub kind: RowKind,
    pub instance: String,
    pub n: usize,
    pub budget: f64,
    pub planner: PlannerConfig,
    pub seed: u64,
    pub trial: Option<usize>,
    pub reward: f64,
    pub failed: f64,
    pub final_budget: f64,
    pub planning_calls: f64,
    pub wall_time_s: Option<f64>,
    pub path: Vec<usize>,
}

impl Row {
    fn fields(&self) -> Vec<String> {
        let p = &self.planner;
        vec![
            match self.kind {
                RowKind::Episode => "episode".into(),
                RowKind::Summary => "summary".into(),
            },
            self.instance.clone(),
            self.n.to_string(),
            csv_out::real(self.budget),
            csv_out::real(p.failure_bound),
            p.iterations.to_string(),
            p.rollouts.to_string(),
            p.feasibility_samples.to_string(),
            csv_out::real(p.random_branch_prob),
            csv_out::real(p.exploration),
            self.seed.to_string(),
            self.trial.map(|t| t.to_string()).unwrap_or_default(),
            csv_out::real(self.reward),
            csv_out::real(self.failed),
            csv_out::real(self.final_budget),
            csv_out::real(self.planning_calls),
            csv_out::opt_real(self.wall_time_s),
            csv_out::path(&self.path),
        ]
    }
}

/// Results for one sweep point.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    /// Swept value, `None` without a sweep.
    pub value: Option<f64>,
    pub planner: PlannerConfig,
    pub stats: BatchStats,
}

impl SweepPoint {
    /// Mean over episodes of wall time per planning call, in seconds.
    pub fn mean_time_per_call(&self) -> f64 {
        let eps = &self.stats.episodes;
        eps.iter().map(|e| e.result.wall_time / e.result.planning_calls.max(1) as f64).sum::<f64>() / eps.len() as f64
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub points: Vec<SweepPoint>,
    pub rows: Vec<Row>,
}

impl ExperimentOutput {
    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        csv_out::to_bytes(&HEADER, self.rows.iter().map(Row::fields))
    }

    /// Each point's mean reward divided by the largest mean reward in the
    /// sweep.
    pub fn normalized_rewards(&self) -> Vec<f64> {
        let best = self.points.iter().map(|p| p.stats.mean_reward).fold(f64::NEG_INFINITY, f64::max);
        self.points.iter().map(|p| if best > 0.0 { p.stats.mean_reward / best } else { 0.0 }).collect()
    }
}

fn check_episode(inst: &ProblemInstance, budget: f64, rec: &EpisodeRecord) -> CliResult<()> {
    let ep = &rec.result;
    let fail = |m: String| Err(CliError::Invariant(format!("trial {}: {m}", rec.trial)));
    let mut seen = ep.path.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != ep.path.len() {
        return fail(format!("path {:?} revisits a vertex", ep.path));
    }
    if ep.realized_costs.len() + 1 != ep.path.len() {
        return fail("realized costs do not match the path".into());
    }
    if ep.final_budget != budget - ep.realized_costs.iter().sum::<f64>() {
        return fail("final budget differs from the budget minus realized costs".into());
    }
    let reached = ep.path.last() == Some(&inst.goal());
    if ep.failed() == (reached && ep.final_budget > 0.0) {
        return fail("outcome disagrees with the final budget".into());
    }
    Ok(())
}

fn episode_row(inst: &ProblemInstance, budget: f64, planner: &PlannerConfig, rec: &EpisodeRecord, timing: bool) -> Row {
    let ep = &rec.result;
    Row {
        kind: RowKind::Episode,
        instance: inst.name().to_string(),
        n: inst.n(),
        budget,
        planner: *planner,
        seed: rec.seed,
        trial: Some(rec.trial),
        reward: ep.collected_reward,
        failed: if ep.failed() { 1.0 } else { 0.0 },
        final_budget: ep.final_budget,
        planning_calls: ep.planning_calls as f64,
        wall_time_s: timing.then_some(ep.wall_time),
        path: ep.path.clone(),
    }
}

fn summary_row(
    inst: &ProblemInstance,
    budget: f64,
    planner: &PlannerConfig,
    seed: u64,
    stats: &BatchStats,
    timing: bool,
) -> Row {
    Row {
        kind: RowKind::Summary,
        instance: inst.name().to_string(),
        n: inst.n(),
        budget,
        planner: *planner,
        seed,
        trial: None,
        reward: stats.mean_reward,
        failed: stats.failure_rate,
        final_budget: stats.mean_final_budget,
        planning_calls: stats.mean_planning_calls,
        wall_time_s: timing.then_some(stats.mean_wall_time),
        path: Vec::new(),
    }
}

/// Runs one batch per sweep point (or a single batch) and collects a summary
/// row followed by the episode rows for each, in sweep order.
pub fn run_experiment(cfg: &ExperimentConfig, inst: &ProblemInstance) -> CliResult<ExperimentOutput> {
    cfg.validate()?;
    let values: Vec<Option<f64>> = match &cfg.sweep {
        None => vec![None],
        Some(s) => s.values.iter().copied().map(Some).collect(),
    };
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for (value, planner) in values.into_iter().zip(cfg.planner_configs()?) {
        let stats = run_batch(inst, cfg.budget, &planner, cfg.trials, cfg.base_seed)?;
        for rec in &stats.episodes {
            check_episode(inst, cfg.budget, rec)?;
        }
        if stats.failure_rate != stats.failures as f64 / stats.trials as f64 {
            return Err(CliError::Invariant("summary failure rate is not failures / trials".into()));
        }
        rows.push(summary_row(inst, cfg.budget, &planner, cfg.base_seed, &stats, cfg.record_timing));
        rows.extend(stats.episodes.iter().map(|rec| episode_row(inst, cfg.budget, &planner, rec, cfg.record_timing)));
        points.push(SweepPoint { value, planner, stats });
    }
    Ok(ExperimentOutput { points, rows })
}
