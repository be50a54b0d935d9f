//! Problem instances.
//!
//! A [`ProblemInstance`] is a set of rewarded vertices, a start and a goal, and
//! a stochastic cost model for travelling between vertices. The cost of every
//! edge is a shifted exponential: a deterministic part `kappa * d` plus an
//! exponential term with mean `(1 - kappa) * d`, so the expected cost is `d`.
//!
//! Instances are immutable once built. The per-pair tables used by the
//! samplers are computed at construction time.

mod closure;
mod generate;
mod tsplib;
mod validate;

pub use closure::complete_graph_closure;
pub use generate::generate_random_instance;
pub use tsplib::parse_tsplib;
pub use validate::ValidationReport;

use std::path::Path;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_KAPPA: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub reward: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitEdge {
    pub i: usize,
    pub j: usize,
    pub mean: f64,
}

/// How edge expectations `d` are obtained. `kappa` splits each edge cost into
/// its deterministic and exponential parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostModel {
    /// Complete graph, `d` is the Euclidean distance between coordinates.
    EuclideanExponential { kappa: f64 },
    /// Directed edges with given expected costs. Missing pairs stay undefined
    /// until [`complete_graph_closure`] fills them in.
    ExplicitEdges {
        #[serde(default = "default_kappa")]
        kappa: f64,
        edges: Vec<ExplicitEdge>,
    },
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

impl CostModel {
    pub fn kappa(&self) -> f64 {
        match self {
            CostModel::EuclideanExponential { kappa } | CostModel::ExplicitEdges { kappa, .. } => *kappa,
        }
    }
}

/// One shifted-exponential leg: `shift + scale * Exp(1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Segment {
    pub shift: f64,
    pub scale: f64,
}

impl Segment {
    fn new(mean: f64, kappa: f64) -> Self {
        Self { shift: kappa * mean, scale: (1.0 - kappa) * mean }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = rng.sample(Exp1);
        self.shift + self.scale * e
    }
}

/// How an ordered pair is traversed.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Route {
    Direct(Segment),
    /// Added by closure: the full vertex sequence of the shortest explicit path.
    Composite(Box<[usize]>),
}

/// Per ordered pair tables, row-major `from * n + to`.
#[derive(Clone, Debug, PartialEq)]
struct EdgeTable {
    n: usize,
    routes: Vec<Option<Route>>,
    mean: Vec<Option<f64>>,
    floor: Vec<Option<f64>>,
    noisy: Vec<bool>,
}

impl EdgeTable {
    fn empty(n: usize) -> Self {
        Self {
            n,
            routes: vec![None; n * n],
            mean: vec![None; n * n],
            floor: vec![None; n * n],
            noisy: vec![false; n * n],
        }
    }

    fn set_direct(&mut self, i: usize, j: usize, mean: f64, kappa: f64) {
        let k = i * self.n + j;
        let seg = Segment::new(mean, kappa);
        self.routes[k] = Some(Route::Direct(seg));
        self.mean[k] = Some(mean);
        self.floor[k] = Some(seg.shift);
        self.noisy[k] = seg.scale > 0.0;
    }

    fn set_composite(&mut self, via: Vec<usize>) {
        let (i, j) = (via[0], *via.last().expect("non-empty route"));
        let mut mean = 0.0;
        let mut floor = 0.0;
        let mut noisy = false;
        for w in via.windows(2) {
            let k = w[0] * self.n + w[1];
            mean += self.mean[k].expect("closure segments are explicit edges");
            floor += self.floor[k].expect("closure segments are explicit edges");
            noisy |= self.noisy[k];
        }
        let k = i * self.n + j;
        self.routes[k] = Some(Route::Composite(via.into_boxed_slice()));
        self.mean[k] = Some(mean);
        self.floor[k] = Some(floor);
        self.noisy[k] = noisy;
    }

    fn is_complete(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.mean[i * self.n + j].is_some()))
    }
}

/// Serialized form of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    name: String,
    vertices: Vec<Vertex>,
    start: usize,
    goal: usize,
    cost_model: CostModel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    name: String,
    vertices: Vec<Vertex>,
    start: usize,
    goal: usize,
    cost_model: CostModel,
    edges: EdgeTable,
}

impl ProblemInstance {
    /// Builds the instance and its edge tables.
    ///
    /// Construction is permissive: reward signs, start/goal distinctness and
    /// similar invariants are reported by [`ProblemInstance::validate`] rather
    /// than rejected here. Only inputs that make the tables impossible to build
    /// (edge endpoints out of range, start/goal out of range) are errors.
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Vertex>,
        start: usize,
        goal: usize,
        cost_model: CostModel,
    ) -> Result<Self> {
        let n = vertices.len();
        if start >= n || goal >= n {
            return Err(Error::InvalidInstance(format!("start {start} / goal {goal} out of range for {n} vertices")));
        }
        let mut edges = EdgeTable::empty(n);
        match &cost_model {
            CostModel::EuclideanExponential { kappa } => {
                for (i, a) in vertices.iter().enumerate() {
                    for (j, b) in vertices.iter().enumerate() {
                        if i != j {
                            edges.set_direct(i, j, (a.x - b.x).hypot(a.y - b.y), *kappa);
                        }
                    }
                }
            }
            CostModel::ExplicitEdges { kappa, edges: list } => {
                for e in list {
                    if e.i >= n || e.j >= n || e.i == e.j {
                        return Err(Error::InvalidEdge { from: e.i, to: e.j });
                    }
                    edges.set_direct(e.i, e.j, e.mean, *kappa);
                }
            }
        }
        Ok(Self { name: name.into(), vertices, start, goal, cost_model, edges })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost_model
    }

    pub fn kappa(&self) -> f64 {
        self.cost_model.kappa()
    }

    #[inline]
    pub fn reward(&self, v: usize) -> f64 {
        self.vertices[v].reward
    }

    /// True when every ordered pair of distinct vertices has an expected cost.
    pub fn is_complete(&self) -> bool {
        self.edges.is_complete()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n() && j < self.n() && self.edges.mean[i * self.n() + j].is_some()
    }

    /// Expected traversal cost `c(i, j)`, if the pair is an edge.
    #[inline]
    pub fn expected_cost(&self, i: usize, j: usize) -> Option<f64> {
        if i >= self.n() || j >= self.n() {
            return None;
        }
        self.edges.mean[i * self.n() + j]
    }

    /// Deterministic lower bound of the edge cost (sum of `kappa * d` parts).
    #[inline]
    pub fn cost_floor(&self, i: usize, j: usize) -> Option<f64> {
        if i >= self.n() || j >= self.n() {
            return None;
        }
        self.edges.floor[i * self.n() + j]
    }

    /// Whether the edge cost has an unbounded exponential component.
    pub fn is_noisy(&self, i: usize, j: usize) -> bool {
        i < self.n() && j < self.n() && self.edges.noisy[i * self.n() + j]
    }

    /// Vertex sequence used to traverse `(i, j)`: `[i, j]` for direct edges,
    /// the stored shortest explicit path for edges added by closure.
    pub fn route(&self, i: usize, j: usize) -> Option<Vec<usize>> {
        match self.edges.routes.get(i * self.n() + j)? {
            Some(Route::Direct(_)) => Some(vec![i, j]),
            Some(Route::Composite(via)) => Some(via.to_vec()),
            None => None,
        }
    }

    pub(crate) fn is_explicit_direct(&self, i: usize, j: usize) -> bool {
        matches!(self.edges.routes.get(i * self.n() + j), Some(Some(Route::Direct(_))))
    }

    /// One draw of the cost of `(i, j)`. Panics if the pair is not an edge.
    #[inline]
    pub(crate) fn sample_edge<R: Rng + ?Sized>(&self, i: usize, j: usize, rng: &mut R) -> f64 {
        let n = self.n();
        match &self.edges.routes[i * n + j] {
            Some(Route::Direct(seg)) => seg.sample(rng),
            Some(Route::Composite(via)) => via
                .windows(2)
                .map(|w| match &self.edges.routes[w[0] * n + w[1]] {
                    Some(Route::Direct(seg)) => seg.sample(rng),
                    _ => unreachable!("composite routes consist of explicit edges"),
                })
                .sum(),
            None => panic!("({i}, {j}) is not an edge"),
        }
    }

    /// Sum of rewards of the distinct vertices in `path`.
    pub fn collected_reward(&self, path: &[usize]) -> f64 {
        let mut seen = vec![false; self.n()];
        path.iter().filter(|&&v| !std::mem::replace(&mut seen[v], true)).map(|&v| self.reward(v)).sum()
    }

    /// Expected cost of a path, summed over its consecutive pairs.
    pub fn expected_path_cost(&self, path: &[usize]) -> Option<f64> {
        path.windows(2).map(|w| self.expected_cost(w[0], w[1])).sum()
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            name: self.name.clone(),
            vertices: self.vertices.clone(),
            start: self.start,
            goal: self.goal,
            cost_model: self.cost_model.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parses the JSON instance format. Explicit-edge instances come back as
    /// given; closure is not applied implicitly.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        Self::new(file.name, file.vertices, file.start, file.goal, file.cost_model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}
