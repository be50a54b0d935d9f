//! Cost sampling and sample-average estimates of budget exceedance.
//!
//! Exceedance is strict: a sampled cost counts against the budget only when it
//! is greater than the budget.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;

/// One sampled traversal cost, in budget units.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct CostSample(pub f64);

impl CostSample {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Fraction of `n_samples` draws whose cost exceeded the budget.
///
/// Stored as a count so `p_hat * n_samples` is always an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExceedanceEstimate {
    pub exceed_count: usize,
    pub n_samples: usize,
}

impl ExceedanceEstimate {
    pub fn p_hat(&self) -> f64 {
        self.exceed_count as f64 / self.n_samples as f64
    }
}

pub fn sample_edge_cost<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    i: usize,
    j: usize,
    rng: &mut R,
) -> Result<CostSample> {
    if i == j || !inst.has_edge(i, j) {
        return Err(Error::InvalidEdge { from: i, to: j });
    }
    Ok(CostSample(inst.sample_edge(i, j, rng)))
}

fn check_path(inst: &ProblemInstance, path: &[usize]) -> Result<()> {
    if path.len() < 2 {
        return Err(Error::InvalidPath(format!("path needs at least 2 vertices, got {}", path.len())));
    }
    for w in path.windows(2) {
        if w[0] == w[1] || !inst.has_edge(w[0], w[1]) {
            return Err(Error::InvalidEdge { from: w[0], to: w[1] });
        }
    }
    Ok(())
}

/// Sum of one fresh sample per consecutive edge; `path` is assumed valid.
#[inline]
pub(crate) fn sample_path_unchecked<R: Rng + ?Sized>(inst: &ProblemInstance, path: &[usize], rng: &mut R) -> f64 {
    path.windows(2).map(|w| inst.sample_edge(w[0], w[1], rng)).sum()
}

pub fn sample_path_cost<R: Rng + ?Sized>(inst: &ProblemInstance, path: &[usize], rng: &mut R) -> Result<CostSample> {
    check_path(inst, path)?;
    Ok(CostSample(sample_path_unchecked(inst, path, rng)))
}

/// Sample-average estimate of `Pr[cost(path) > budget]` from `n_samples`
/// independent path draws.
pub fn estimate_exceedance<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    path: &[usize],
    budget: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<ExceedanceEstimate> {
    if n_samples == 0 {
        return Err(Error::Parameter("n_samples must be at least 1".into()));
    }
    check_path(inst, path)?;
    let exceed_count = (0..n_samples).filter(|_| sample_path_unchecked(inst, path, rng) > budget).count();
    Ok(ExceedanceEstimate { exceed_count, n_samples })
}

/// Exceedance estimate over a fixed list of cost samples.
pub fn exceedance_from_samples(samples: &[f64], budget: f64) -> Result<ExceedanceEstimate> {
    if samples.is_empty() {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let exceed_count = samples.iter().filter(|&&c| c > budget).count();
    Ok(ExceedanceEstimate { exceed_count, n_samples: samples.len() })
}

/// Largest exceed count `c` with `c / m <= p_f`.
pub(crate) fn max_allowed_exceedances(m: usize, p_f: f64) -> usize {
    let mut c = (p_f * m as f64).floor().clamp(0.0, m as f64) as usize;
    while c < m && (c + 1) as f64 / m as f64 <= p_f {
        c += 1;
    }
    while c > 0 && c as f64 / m as f64 > p_f {
        c -= 1;
    }
    c
}

/// Decides whether the `m`-sample estimate of `Pr[cost > budget]` is at most
/// `p_f`, drawing samples only until the outcome is settled.
///
/// `floor` is a deterministic lower bound of every cost draw: when it already
/// exceeds the budget all `m` samples would exceed, so none are drawn. The
/// decision equals the one taken on a full estimate over the same draws.
pub(crate) fn saa_within_bound<R: Rng + ?Sized>(
    m: usize,
    p_f: f64,
    budget: f64,
    floor: f64,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> f64,
) -> bool {
    let allowed = max_allowed_exceedances(m, p_f);
    if floor > budget {
        return allowed >= m;
    }
    if budget == f64::INFINITY {
        return true;
    }
    let mut exceeded = 0;
    for i in 0..m {
        if draw(rng) > budget {
            exceeded += 1;
            if exceeded > allowed {
                return false;
            }
        }
        if exceeded + (m - i - 1) <= allowed {
            return true;
        }
    }
    exceeded <= allowed
}

/// Screening test `Pr[c(a, b) + c(b, c) > budget] <= p_f` with `m` samples.
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn two_hop_within_bound<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    a: usize,
    b: usize,
    c: usize,
    budget: f64,
    m: usize,
    p_f: f64,
    rng: &mut R,
) -> bool {
    let floor = inst.cost_floor(a, b).expect("edge") + inst.cost_floor(b, c).expect("edge");
    saa_within_bound(m, p_f, budget, floor, rng, |r| inst.sample_edge(a, b, r) + inst.sample_edge(b, c, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CostModel, ExplicitEdge, Vertex};
    use crate::rng::seeded;
    use proptest::prelude::*;

    /// Two vertices, one edge each way with mean `d`.
    fn single_edge(d: f64, kappa: f64) -> ProblemInstance {
        let vertices = (0..2).map(|id| Vertex { id, x: 0.0, y: 0.0, reward: 0.0 }).collect();
        let edges = vec![ExplicitEdge { i: 0, j: 1, mean: d }, ExplicitEdge { i: 1, j: 0, mean: d }];
        ProblemInstance::new("edge", vertices, 0, 1, CostModel::ExplicitEdges { kappa, edges }).unwrap()
    }

    fn chain() -> ProblemInstance {
        let vertices = (0..3).map(|id| Vertex { id, x: 0.0, y: 0.0, reward: 0.0 }).collect();
        let edges = vec![
            ExplicitEdge { i: 0, j: 1, mean: 1.0 },
            ExplicitEdge { i: 1, j: 2, mean: 2.0 },
            ExplicitEdge { i: 0, j: 2, mean: 2.5 },
        ];
        ProblemInstance::new("chain", vertices, 0, 2, CostModel::ExplicitEdges { kappa: 0.5, edges }).unwrap()
    }

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn edge_samples_respect_floor_and_mean() {
        let inst = single_edge(1.0, 0.5);
        let mut rng = seeded(1);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_edge_cost(&inst, 0, 1, &mut rng).unwrap().value()).collect();
        assert!(xs.iter().all(|&x| x >= 0.5));
        let (mean, _) = moments(&xs);
        assert!((0.97..=1.03).contains(&mean), "{mean}");
    }

    #[test]
    fn edge_sample_variance() {
        // Var = ((1 - kappa) d)^2 = 1
        let inst = single_edge(2.0, 0.5);
        let mut rng = seeded(2);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_edge_cost(&inst, 0, 1, &mut rng).unwrap().value()).collect();
        let (_, var) = moments(&xs);
        assert!((var - 1.0).abs() <= 0.05, "{var}");
    }

    #[test]
    fn self_edge_and_missing_edge_are_errors() {
        let inst = chain();
        let mut rng = seeded(0);
        assert!(matches!(sample_edge_cost(&inst, 1, 1, &mut rng), Err(Error::InvalidEdge { .. })));
        assert!(matches!(sample_edge_cost(&inst, 2, 0, &mut rng), Err(Error::InvalidEdge { .. })));
        assert!(matches!(sample_path_cost(&inst, &[0, 0], &mut rng), Err(Error::InvalidEdge { .. })));
        assert!(matches!(sample_path_cost(&inst, &[0], &mut rng), Err(Error::InvalidPath(_))));
    }

    #[test]
    fn single_edge_path_is_one_edge_draw() {
        let inst = chain();
        let a = sample_path_cost(&inst, &[0, 1], &mut seeded(5)).unwrap();
        let b = sample_edge_cost(&inst, 0, 1, &mut seeded(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn path_mean_is_sum_of_edge_means() {
        let inst = chain();
        let mut rng = seeded(3);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_path_cost(&inst, &[0, 1, 2], &mut rng).unwrap().value()).collect();
        let (mean, _) = moments(&xs);
        // independent legs: sd = sqrt(0.5^2 + 1^2)
        let sigma = (0.25f64 + 1.0).sqrt();
        assert!((mean - 3.0).abs() <= 3.0 * sigma / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn infinite_budget_never_exceeded() {
        let est = estimate_exceedance(&chain(), &[0, 1, 2], f64::INFINITY, 1000, &mut seeded(0)).unwrap();
        assert_eq!(est.p_hat(), 0.0);
    }

    #[test]
    fn pure_exponential_tail() {
        // kappa = 0: Pr[Exp(mean 1) > ln 2] = 1/2
        let inst = single_edge(1.0, 0.0);
        let est = estimate_exceedance(&inst, &[0, 1], std::f64::consts::LN_2, 100_000, &mut seeded(11)).unwrap();
        assert!((est.p_hat() - 0.5).abs() <= 0.01, "{}", est.p_hat());
    }

    #[test]
    fn fixed_samples() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let est = exceedance_from_samples(&xs, 7.0).unwrap();
        assert_eq!(est.exceed_count, 3);
        assert_eq!(est.p_hat(), 0.3);
        assert!(exceedance_from_samples(&[], 1.0).is_err());
    }

    #[test]
    fn zero_samples_is_parameter_error() {
        assert!(matches!(estimate_exceedance(&chain(), &[0, 2], 1.0, 0, &mut seeded(0)), Err(Error::Parameter(_))));
    }

    #[test]
    fn estimates_are_deterministic() {
        let a = estimate_exceedance(&chain(), &[0, 1, 2], 3.0, 5000, &mut seeded(4)).unwrap();
        let b = estimate_exceedance(&chain(), &[0, 1, 2], 3.0, 5000, &mut seeded(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn allowed_exceedances() {
        assert_eq!(max_allowed_exceedances(100, 0.1), 10);
        assert_eq!(max_allowed_exceedances(100, 0.0), 0);
        assert_eq!(max_allowed_exceedances(10, 0.05), 0);
        assert_eq!(max_allowed_exceedances(3, 0.999), 2);
        assert_eq!(max_allowed_exceedances(7, 1.0), 7);
    }

    proptest! {
        #[test]
        fn p_hat_monotone_in_budget(xs in proptest::collection::vec(0.0f64..10.0, 1..200), b1 in 0.0f64..10.0, b2 in 0.0f64..10.0) {
            let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            let p_lo = exceedance_from_samples(&xs, lo).unwrap().p_hat();
            let p_hi = exceedance_from_samples(&xs, hi).unwrap().p_hat();
            prop_assert!(p_hi <= p_lo);
        }

        /// Early-stopping screen agrees with the full count over the same draws.
        #[test]
        fn screening_matches_full_estimate(
            xs in proptest::collection::vec(0.0f64..4.0, 1..120),
            budget in 0.0f64..4.0,
            p_f in 0.0f64..0.99,
        ) {
            let full = exceedance_from_samples(&xs, budget).unwrap().p_hat() <= p_f;
            let mut it = xs.iter().copied();
            let mut rng = seeded(0);
            let screened = saa_within_bound(xs.len(), p_f, budget, 0.0, &mut rng, |_| it.next().unwrap());
            prop_assert_eq!(full, screened);
        }
    }
}
