use std::fmt;

use super::{CostModel, ProblemInstance};

/// Invariant violations found in an instance; empty means valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "- {v}")?;
        }
        Ok(())
    }
}

pub(super) fn validate(inst: &ProblemInstance) -> ValidationReport {
    let mut out = Vec::new();
    let n = inst.n();
    if n < 2 {
        out.push(format!("instance has {n} vertices, need at least 2"));
    }
    for (pos, v) in inst.vertices().iter().enumerate() {
        if v.id != pos {
            out.push(format!("vertex at position {pos} has id {}, ids must be dense 0..n-1", v.id));
        }
        if !(v.reward >= 0.0 && v.reward.is_finite()) {
            out.push(format!("vertex {pos} has invalid reward {}", v.reward));
        }
        if !(v.x.is_finite() && v.y.is_finite()) {
            out.push(format!("vertex {pos} has non-finite coordinates"));
        }
    }
    if inst.start() == inst.goal() {
        out.push(format!("start and goal are the same vertex {}", inst.start()));
    }
    let kappa = inst.kappa();
    if !(kappa > 0.0 && kappa < 1.0) {
        out.push(format!("kappa {kappa} outside (0, 1)"));
    }
    if let CostModel::ExplicitEdges { edges, .. } = inst.cost_model() {
        for e in edges {
            if !(e.mean > 0.0 && e.mean.is_finite()) {
                out.push(format!("edge ({}, {}) has non-positive mean {}", e.i, e.j, e.mean));
            }
        }
    }
    // Explicit edge means were checked above; this covers distances and closure routes.
    let euclidean = matches!(inst.cost_model(), CostModel::EuclideanExponential { .. });
    for i in 0..n {
        for j in 0..n {
            if i == j || (!euclidean && inst.is_explicit_direct(i, j)) {
                continue;
            }
            if let Some(c) = inst.expected_cost(i, j) {
                if !(c > 0.0 && c.is_finite()) {
                    out.push(format!("expected cost of ({i}, {j}) is {c}, must be finite and positive"));
                }
            }
        }
    }
    ValidationReport { violations: out }
}
