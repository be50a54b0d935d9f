//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sopcc_core::instance::{complete_graph_closure, generate_random_instance, parse_tsplib, DEFAULT_KAPPA};
use sopcc_core::oracle::{DEFAULT_ENUMERATION_CAP, DEFAULT_EVAL_SAMPLES};
use sopcc_core::{PlannerConfig, ProblemInstance};

use crate::error::{CliError, CliResult};

fn default_reward_low() -> f64 {
    1.0
}

fn default_reward_high() -> f64 {
    4.0
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

/// Where the problem instance comes from. Relative paths are resolved against
/// the directory of the configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    /// An instance JSON file.
    File { path: PathBuf },
    /// A seeded random instance in the unit square.
    Generate {
        n: usize,
        seed: u64,
        #[serde(default = "default_reward_low")]
        reward_low: f64,
        #[serde(default = "default_reward_high")]
        reward_high: f64,
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
    /// A TSPLIB coordinate file with seeded rewards.
    Tsplib {
        path: PathBuf,
        reward_seed: u64,
        #[serde(default = "default_reward_low")]
        reward_low: f64,
        #[serde(default = "default_reward_high")]
        reward_high: f64,
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
}

impl InstanceSource {
    /// Builds the instance and closes it into a complete graph.
    pub fn load(&self, base_dir: &Path) -> CliResult<ProblemInstance> {
        let inst = match self {
            InstanceSource::File { path } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                ProblemInstance::from_json(&text)?
            }
            InstanceSource::Generate { n, seed, reward_low, reward_high, kappa } => {
                generate_random_instance(*n, *seed, *reward_low, *reward_high, *kappa)?
            }
            InstanceSource::Tsplib { path, reward_seed, reward_low, reward_high, kappa } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                parse_tsplib(&text, *reward_seed, *reward_low, *reward_high, *kappa)?
            }
        };
        let report = inst.validate();
        if !report.is_empty() {
            return Err(sopcc_core::Error::InvalidInstance(report.to_string()).into());
        }
        Ok(complete_graph_closure(&inst)?)
    }
}

/// Planner parameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    K,
    S,
    #[serde(rename = "P_R")]
    PR,
    #[serde(rename = "P_f")]
    Pf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Sweep {
    /// `base` with the swept parameter set to `value`.
    pub fn apply(&self, base: &PlannerConfig, value: f64) -> CliResult<PlannerConfig> {
        let count = |name: &str| {
            if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(CliError::Config(format!("sweep values for {name} must be positive integers, got {value}")))
            }
        };
        let mut cfg = *base;
        match self.axis {
            SweepAxis::K => cfg.iterations = count("K")?,
            SweepAxis::S => cfg.rollouts = count("S")?,
            SweepAxis::PR => cfg.random_branch_prob = value,
            SweepAxis::Pf => cfg.failure_bound = value,
        }
        Ok(cfg)
    }
}

fn default_trials() -> usize {
    50
}

fn default_cap() -> usize {
    DEFAULT_ENUMERATION_CAP
}

fn default_n_eval() -> usize {
    DEFAULT_EVAL_SAMPLES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    #[serde(rename = "B")]
    pub budget: f64,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    /// CSV destination; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Write wall-clock times into the CSV. Off by default so that reruns
    /// produce identical bytes.
    #[serde(default)]
    pub record_timing: bool,
    /// Budgets for the oracle comparison; `[B]` when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compare_budgets: Vec<f64>,
    /// Failure bounds for the oracle comparison; `[P_f]` when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compare_failure_bounds: Vec<f64>,
    /// Largest instance the oracle will enumerate.
    #[serde(default = "default_cap")]
    pub cap: usize,
    /// Samples per path for the oracle's exceedance estimates.
    #[serde(default = "default_n_eval")]
    pub n_eval: usize,
}

impl ExperimentConfig {
    pub fn new(instance: InstanceSource, budget: f64) -> Self {
        Self {
            instance,
            budget,
            planner: PlannerConfig::default(),
            trials: default_trials(),
            base_seed: 0,
            sweep: None,
            output: None,
            record_timing: false,
            compare_budgets: Vec::new(),
            compare_failure_bounds: Vec::new(),
            cap: default_cap(),
            n_eval: default_n_eval(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg = Self::from_json(&text).map_err(|source| CliError::ConfigSyntax { path: path.into(), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(CliError::Config(format!("B must be positive, got {}", self.budget)));
        }
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        self.planner.validate()?;
        for cfg in self.planner_configs()? {
            cfg.validate()?;
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::Config("sweep has no values".into()));
            }
        }
        if let Some(b) = self.compare_budgets.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(CliError::Config(format!("compare budgets must be positive, got {b}")));
        }
        if let Some(p) = self.compare_failure_bounds.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(CliError::Config(format!("compare failure bounds must lie in (0, 1), got {p}")));
        }
        Ok(())
    }

    /// One planner configuration per sweep point, or the base configuration.
    pub fn planner_configs(&self) -> CliResult<Vec<PlannerConfig>> {
        match &self.sweep {
            None => Ok(vec![self.planner]),
            Some(sweep) => sweep.values.iter().map(|&v| sweep.apply(&self.planner, v)).collect(),
        }
    }

    pub fn compare_budgets(&self) -> Vec<f64> {
        if self.compare_budgets.is_empty() {
            vec![self.budget]
        } else {
            self.compare_budgets.clone()
        }
    }

    pub fn compare_failure_bounds(&self) -> Vec<f64> {
        if self.compare_failure_bounds.is_empty() {
            vec![self.planner.failure_bound]
        } else {
            self.compare_failure_bounds.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn generated(n: usize) -> InstanceSource {
        InstanceSource::Generate { n, seed: 1, reward_low: 1.0, reward_high: 4.0, kappa: 0.5 }
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg =
            ExperimentConfig::from_json(r#"{"instance": {"kind": "generate", "n": 10, "seed": 3}, "B": 2.0}"#).unwrap();
        assert_eq!(cfg.planner, PlannerConfig::default());
        assert_eq!(cfg.trials, 50);
        assert_eq!(cfg.cap, 10);
        assert!(!cfg.record_timing);
        assert_eq!(
            cfg.instance,
            InstanceSource::Generate { n: 10, seed: 3, reward_low: 1.0, reward_high: 4.0, kappa: 0.5 }
        );
        cfg.validate().unwrap();
    }

    #[test]
    fn planner_fields_use_symbolic_names() {
        let cfg = ExperimentConfig::from_json(
            r#"{"instance": {"kind": "generate", "n": 10, "seed": 3}, "B": 2.0,
                "planner": {"K": 1000, "P_f": 0.05},
                "sweep": {"axis": "P_R", "values": [0.1, 0.5]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.planner.iterations, 1000);
        assert_eq!(cfg.planner.failure_bound, 0.05);
        assert_eq!(cfg.planner.rollouts, 100);
        let cfgs = cfg.planner_configs().unwrap();
        assert_eq!(cfgs.iter().map(|c| c.random_branch_prob).collect::<Vec<_>>(), vec![0.1, 0.5]);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(
            r#"{"instance": {"kind": "generate", "n": 10, "seed": 3}, "B": 2.0, "budget": 1}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"instance": {"kind": "generate", "n": 10, "seed": 3, "x": 1}, "B": 2.0}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"instance": {"kind": "generate", "n": 10, "seed": 3}, "B": 2.0, "planner": {"Z": 1}}"#
        )
        .is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut cfg = ExperimentConfig::new(generated(5), 0.0);
        assert!(cfg.validate().is_err());
        cfg.budget = 1.0;
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.sweep = Some(Sweep { axis: SweepAxis::K, values: vec![10.5] });
        assert!(cfg.validate().is_err());
        cfg.sweep = Some(Sweep { axis: SweepAxis::Pf, values: vec![1.5] });
        assert!(cfg.validate().is_err());
        cfg.sweep = Some(Sweep { axis: SweepAxis::S, values: vec![] });
        assert!(cfg.validate().is_err());
        cfg.sweep = Some(Sweep { axis: SweepAxis::S, values: vec![10.0, 20.0] });
        cfg.validate().unwrap();
    }

    #[test]
    fn relative_instance_paths_follow_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let inst = generate_random_instance(6, 2, 1.0, 4.0, 0.5).unwrap();
        inst.save(dir.path().join("inst.json")).unwrap();
        let source = InstanceSource::File { path: "inst.json".into() };
        assert_eq!(source.load(dir.path()).unwrap(), inst);
        let missing = InstanceSource::File { path: "nope.json".into() };
        assert_eq!(missing.load(dir.path()).unwrap_err().exit_code(), 2);
    }

    fn arb_source() -> impl Strategy<Value = InstanceSource> {
        prop_oneof![
            "[a-z]{1,8}\\.json".prop_map(|p| InstanceSource::File { path: p.into() }),
            (3usize..40, any::<u64>(), 0.0f64..2.0, 2.0f64..5.0, 0.01f64..0.99).prop_map(|(n, seed, lo, hi, kappa)| {
                InstanceSource::Generate { n, seed, reward_low: lo, reward_high: hi, kappa }
            }),
            ("[a-z]{1,8}\\.tsp", any::<u64>(), 0.01f64..0.99).prop_map(|(p, s, kappa)| InstanceSource::Tsplib {
                path: p.into(),
                reward_seed: s,
                reward_low: 1.0,
                reward_high: 4.0,
                kappa
            }),
        ]
    }

    fn arb_sweep() -> impl Strategy<Value = Option<Sweep>> {
        let axis = prop_oneof![Just(SweepAxis::K), Just(SweepAxis::S), Just(SweepAxis::PR), Just(SweepAxis::Pf)];
        proptest::option::of(
            (axis, proptest::collection::vec(0.0f64..2000.0, 0..5)).prop_map(|(axis, values)| Sweep { axis, values }),
        )
    }

    prop_compose! {
        fn arb_config()(
            instance in arb_source(),
            budget in 0.01f64..100.0,
            planner in (1usize..5000, 1usize..500, 1usize..500, 0.0f64..1.0, 0.0f64..10.0, 0.001f64..0.999),
            trials in 1usize..1000,
            base_seed in any::<u64>(),
            sweep in arb_sweep(),
            output in proptest::option::of("[a-z]{1,8}\\.csv"),
            record_timing in any::<bool>(),
            compare_budgets in proptest::collection::vec(0.01f64..10.0, 0..4),
            compare_failure_bounds in proptest::collection::vec(0.01f64..0.5, 0..4),
            cap in 2usize..12,
            n_eval in 1000usize..100_000,
        ) -> ExperimentConfig {
            let (iterations, rollouts, feasibility_samples, random_branch_prob, exploration, failure_bound) = planner;
            ExperimentConfig {
                instance,
                budget,
                planner: PlannerConfig { iterations, rollouts, feasibility_samples, random_branch_prob, exploration, failure_bound },
                trials,
                base_seed,
                sweep,
                output: output.map(PathBuf::from),
                record_timing,
                compare_budgets,
                compare_failure_bounds,
                cap,
                n_eval,
            }
        }
    }

    proptest! {
        #[test]
        fn config_round_trips(cfg in arb_config()) {
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
