//! Monte Carlo checks of the planner's finite-sample error bounds.
//!
//! [`check_concentration_bound`] covers the probability of overestimating a
//! feasible action's failure probability past `P_f`; the bound is the
//! Gaussian-tail form of the Cramér–Chernoff inequality. [`check_selection_error_bound`]
//! covers the probability of ranking a worse feasible action above a better
//! one, with the Chebyshev-style bound `sigma_z^2 / (min(N1, N2) G)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundParams {
    Concentration { f: f64, p_f: f64, n: usize, delta: f64 },
    Selection { q1: f64, q2: f64, n1: usize, n2: usize, gap: f64, var_z: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    /// Observed frequency of the error event.
    pub empirical: f64,
    pub bound: f64,
    pub replications: usize,
    pub params: BoundParams,
}

impl BoundCheck {
    /// Binomial standard error of `empirical`.
    pub fn standard_error(&self) -> f64 {
        (self.empirical * (1.0 - self.empirical) / self.replications as f64).sqrt()
    }

    /// `empirical <= bound + k * standard_error`.
    pub fn holds_within(&self, k: f64) -> bool {
        self.empirical <= self.bound + k * self.standard_error()
    }
}

/// `sqrt(f (1 - f) / (2 pi N D^2)) exp(-N D^2 / (2 f (1 - f)))` with `D = P_f - f`.
pub fn concentration_bound(f: f64, p_f: f64, n: usize) -> f64 {
    let var = f * (1.0 - f);
    let delta = p_f - f;
    let nd2 = n as f64 * delta * delta;
    (var / (2.0 * PI * nd2)).sqrt() * (-nd2 / (2.0 * var)).exp()
}

/// Frequency with which the mean of `n` Bernoulli(`f`) draws exceeds `p_f`,
/// over `replications` independent repetitions, next to the bound.
pub fn check_concentration_bound<R: Rng + ?Sized>(
    f: f64,
    p_f: f64,
    n: usize,
    replications: usize,
    rng: &mut R,
) -> Result<BoundCheck> {
    if !(f > 0.0 && f < p_f && p_f < 1.0) {
        return Err(Error::Parameter(format!("need 0 < f < P_f < 1, got f = {f}, P_f = {p_f}")));
    }
    if n == 0 || replications == 0 {
        return Err(Error::Parameter("N and replications must be at least 1".into()));
    }
    let threshold = p_f * n as f64;
    let hits = (0..replications)
        .filter(|_| {
            let failures = (0..n).filter(|_| rng.random::<f64>() < f).count();
            // mean > P_f, compared on counts
            failures as f64 > threshold
        })
        .count();
    Ok(BoundCheck {
        empirical: hits as f64 / replications as f64,
        bound: concentration_bound(f, p_f, n),
        replications,
        params: BoundParams::Concentration { f, p_f, n, delta: p_f - f },
    })
}

/// Zero-mean noise added to an action's expected return.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReturnNoise {
    Gaussian {
        sigma: f64,
    },
    /// Uniform on `[-half_width, half_width]`.
    Uniform {
        half_width: f64,
    },
    /// `Exp(mean = scale) - scale`.
    CenteredExponential {
        scale: f64,
    },
}

impl ReturnNoise {
    pub fn variance(&self) -> f64 {
        match *self {
            ReturnNoise::Gaussian { sigma } => sigma * sigma,
            ReturnNoise::Uniform { half_width } => half_width * half_width / 3.0,
            ReturnNoise::CenteredExponential { scale } => scale * scale,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ReturnNoise::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            ReturnNoise::Uniform { half_width } => rng.random_range(-half_width..=half_width),
            ReturnNoise::CenteredExponential { scale } => {
                let e: f64 = Exp1.sample(rng);
                scale * (e - 1.0)
            }
        }
    }
}

/// `sigma_z^2 / (min(N1, N2) G)`.
pub fn selection_error_bound(var_z: f64, n1: usize, n2: usize, gap: f64) -> f64 {
    var_z / (n1.min(n2) as f64 * gap)
}

/// Frequency with which the mean of `n2` samples of return 2 exceeds the mean
/// of `n1` samples of return 1, next to the bound. `sigma_z^2` is the variance
/// of one sample of the difference, i.e. the sum of the two noise variances.
#[allow(clippy::too_many_arguments)]
pub fn check_selection_error_bound<R: Rng + ?Sized>(
    q1: f64,
    q2: f64,
    noise1: ReturnNoise,
    noise2: ReturnNoise,
    n1: usize,
    n2: usize,
    replications: usize,
    rng: &mut R,
) -> Result<BoundCheck> {
    if q1.is_nan() || q2.is_nan() || q1 <= q2 {
        return Err(Error::Parameter(format!("need q1 > q2, got q1 = {q1}, q2 = {q2}")));
    }
    if n1 == 0 || n2 == 0 || replications == 0 {
        return Err(Error::Parameter("N1, N2 and replications must be at least 1".into()));
    }
    let gap = q1 - q2;
    let var_z = noise1.variance() + noise2.variance();
    let mean = |q: f64, noise: ReturnNoise, n: usize, rng: &mut R| {
        (0..n).map(|_| q + noise.sample(rng)).sum::<f64>() / n as f64
    };
    let hits = (0..replications)
        .filter(|_| {
            let m1 = mean(q1, noise1, n1, rng);
            let m2 = mean(q2, noise2, n2, rng);
            m2 > m1
        })
        .count();
    Ok(BoundCheck {
        empirical: hits as f64 / replications as f64,
        bound: selection_error_bound(var_z, n1, n2, gap),
        replications,
        params: BoundParams::Selection { q1, q2, n1, n2, gap, var_z },
    })
}
