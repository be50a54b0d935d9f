//! Monte Carlo checks of the planner's error bounds over a fixed grid.

use sopcc_core::oracle::{
    check_concentration_bound, check_selection_error_bound, BoundCheck, BoundParams, ReturnNoise,
};
use sopcc_core::rng;

use crate::csv_out;
use crate::error::CliResult;

pub const HEADER: [&str; 13] = [
    "check",
    "f",
    "P_f",
    "N1",
    "N2",
    "delta_or_gap",
    "var_z",
    "noise",
    "replications",
    "empirical",
    "bound",
    "std_error",
    "holds",
];

/// Failure-estimate overestimation grid: `f` in {0.05, 0.1}, `P_f` in
/// {0.1, 0.2}, `N` in {50, 100}, keeping `f < P_f`.
pub fn concentration_grid() -> Vec<(f64, f64, usize)> {
    let mut grid = Vec::new();
    for f in [0.05, 0.1] {
        for p_f in [0.1, 0.2] {
            if f >= p_f {
                continue;
            }
            for n in [50, 100] {
                grid.push((f, p_f, n));
            }
        }
    }
    grid
}

/// Action-ranking cases: `(q1, q2, noise, N)` with equal noise on both arms.
pub fn selection_cases() -> Vec<(f64, f64, ReturnNoise, usize)> {
    vec![
        (1.0, 0.0, ReturnNoise::Gaussian { sigma: 1.0 }, 25),
        (1.0, 0.5, ReturnNoise::Gaussian { sigma: 1.0 }, 50),
        (1.0, 0.8, ReturnNoise::Uniform { half_width: 1.0 }, 40),
        (2.0, 1.0, ReturnNoise::CenteredExponential { scale: 1.0 }, 20),
    ]
}

#[derive(Clone, Debug)]
pub struct BoundRow {
    pub check: BoundCheck,
    pub noise: Option<ReturnNoise>,
}

/// Runs every grid point; point `k` draws from stream `k` of `seed`.
pub fn run_bounds(replications: usize, seed: u64) -> CliResult<Vec<BoundRow>> {
    let mut rows = Vec::new();
    let mut k = 0u64;
    for (f, p_f, n) in concentration_grid() {
        let check = check_concentration_bound(f, p_f, n, replications, &mut rng::stream(seed, k))?;
        rows.push(BoundRow { check, noise: None });
        k += 1;
    }
    for (q1, q2, noise, n) in selection_cases() {
        let check = check_selection_error_bound(q1, q2, noise, noise, n, n, replications, &mut rng::stream(seed, k))?;
        rows.push(BoundRow { check, noise: Some(noise) });
        k += 1;
    }
    Ok(rows)
}

fn noise_label(noise: &ReturnNoise) -> String {
    match noise {
        ReturnNoise::Gaussian { sigma } => format!("gaussian(sigma={sigma})"),
        ReturnNoise::Uniform { half_width } => format!("uniform(half_width={half_width})"),
        ReturnNoise::CenteredExponential { scale } => format!("centered_exponential(scale={scale})"),
    }
}

pub fn to_csv(rows: &[BoundRow]) -> CliResult<Vec<u8>> {
    let records = rows.iter().map(|row| {
        let c = &row.check;
        let mut fields = match c.params {
            BoundParams::Concentration { f, p_f, n, delta } => vec![
                "concentration".to_string(),
                csv_out::real(f),
                csv_out::real(p_f),
                n.to_string(),
                String::new(),
                csv_out::real(delta),
                String::new(),
                String::new(),
            ],
            BoundParams::Selection { n1, n2, gap, var_z, .. } => vec![
                "selection".to_string(),
                String::new(),
                String::new(),
                n1.to_string(),
                n2.to_string(),
                csv_out::real(gap),
                csv_out::real(var_z),
                row.noise.as_ref().map(noise_label).unwrap_or_default(),
            ],
        };
        fields.extend([
            c.replications.to_string(),
            csv_out::real(c.empirical),
            csv_out::real(c.bound),
            csv_out::real(c.standard_error()),
            c.holds_within(3.0).to_string(),
        ]);
        fields
    });
    csv_out::to_bytes(&HEADER, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_skips_infeasible_pairs() {
        let grid = concentration_grid();
        assert_eq!(grid.len(), 6);
        assert!(grid.iter().all(|&(f, p_f, _)| f < p_f));
    }

    #[test]
    fn rows_cover_grid_and_cases() {
        let rows = run_bounds(2_000, 1).unwrap();
        assert_eq!(rows.len(), concentration_grid().len() + selection_cases().len());
        let text = String::from_utf8(to_csv(&rows).unwrap()).unwrap();
        assert_eq!(text.lines().count(), rows.len() + 1);
        assert!(text.lines().nth(1).unwrap().starts_with("concentration,0.05,0.1,50,,0.05,,,2000,"));
        assert_eq!(to_csv(&run_bounds(2_000, 1).unwrap()).unwrap(), text.into_bytes());
    }
}
