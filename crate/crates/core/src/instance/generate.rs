use rand::Rng;

use super::{CostModel, ProblemInstance, Vertex};
use crate::error::{Error, Result};
use crate::rng;

pub(crate) fn check_reward_range(low: f64, high: f64) -> Result<()> {
    if !(low.is_finite() && high.is_finite()) || low < 0.0 || low > high {
        return Err(Error::Parameter(format!("reward range [{low}, {high}] must satisfy 0 <= low <= high")));
    }
    Ok(())
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Parameter(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    Ok(())
}

pub(crate) fn draw_reward<R: Rng>(rng: &mut R, low: f64, high: f64) -> f64 {
    let u: f64 = rng.random();
    low + (high - low) * u
}

/// Random complete Euclidean instance in the unit square.
///
/// Each vertex draws `x`, `y`, then its reward, in id order, from
/// [`rng::seeded`]`(seed)`. Vertex 0 is the start and vertex `n - 1` the goal.
pub fn generate_random_instance(
    n: usize,
    seed: u64,
    reward_low: f64,
    reward_high: f64,
    kappa: f64,
) -> Result<ProblemInstance> {
    if n < 3 {
        return Err(Error::InvalidInstance(format!("random instances need at least 3 vertices, got {n}")));
    }
    check_reward_range(reward_low, reward_high)?;
    check_kappa(kappa)?;
    let mut rng = rng::seeded(seed);
    let vertices = (0..n)
        .map(|id| {
            let x = rng.random::<f64>();
            let y = rng.random::<f64>();
            let reward = draw_reward(&mut rng, reward_low, reward_high);
            Vertex { id, x, y, reward }
        })
        .collect();
    ProblemInstance::new(format!("random-n{n}-s{seed}"), vertices, 0, n - 1, CostModel::EuclideanExponential { kappa })
}
