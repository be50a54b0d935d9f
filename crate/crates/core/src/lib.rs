//! Stochastic orienteering with chance constraints.
//!
//! A robot starts at a designated vertex and must reach a goal vertex before a
//! travel budget runs out. Edge costs are random, so the planner cannot make
//! the budget a hard constraint; instead the probability of overrunning it must
//! stay below a user bound `P_f`. Within that constraint the robot tries to
//! collect as much vertex reward as possible.
//!
//! The crate is organised by concern:
//!
//! - [`instance`]: problem instances, random generation, TSPLIB ingestion and
//!   complete-graph closure of sparse graphs.
//! - [`stochastic`]: edge/path cost sampling and sample-average estimates of
//!   budget exceedance.
//! - [`mcts`]: the anytime tree search (UCT with failure estimates,
//!   feasibility-screened rollouts, failure-aware backup, action selection).
//! - [`executor`]: the online loop that alternates planning and execution in a
//!   simulated environment.
//! - [`oracle`]: exhaustive enumeration baseline and statistical validators for
//!   the planner's error bounds.

pub mod error;
pub mod executor;
pub mod instance;
pub mod mcts;
pub mod oracle;
pub mod rng;
pub mod stochastic;
pub mod vertex_set;

pub use error::{Error, Result};
pub use executor::{run_batch, run_episode, BatchStats, EpisodeResult, Outcome};
pub use instance::{CostModel, ProblemInstance, Vertex};
pub use mcts::{mcts_sopcc, PlannerConfig};
pub use rng::SimRng;
pub use vertex_set::VertexSet;
