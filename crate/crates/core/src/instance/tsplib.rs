use std::collections::HashSet;

use super::generate::{check_kappa, check_reward_range, draw_reward};
use super::{CostModel, ProblemInstance, Vertex};
use crate::error::{Error, Result};
use crate::rng;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads the `NODE_COORD_SECTION` of a TSPLIB `.tsp` file.
///
/// Coordinates are taken as planar and distances as plain Euclidean, whatever
/// `EDGE_WEIGHT_TYPE` says. Rewards are drawn uniformly from
/// `[reward_low, reward_high]` with `reward_seed`, in file order. The first
/// node is the start, the last node the goal.
pub fn parse_tsplib(
    text: &str,
    reward_seed: u64,
    reward_low: f64,
    reward_high: f64,
    kappa: f64,
) -> Result<ProblemInstance> {
    check_reward_range(reward_low, reward_high)?;
    check_kappa(kappa)?;

    let mut name = String::from("tsplib");
    let mut dimension: Option<(usize, usize)> = None;
    let mut coords: Vec<(f64, f64)> = Vec::new();
    let mut seen = HashSet::new();
    let mut in_section = false;
    let mut section_line = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_section {
            let mut fields = line.split_whitespace();
            let first = fields.next().unwrap_or_default();
            if first.parse::<f64>().is_err() {
                // Next keyword section ends the coordinates.
                in_section = false;
            } else {
                let index: usize = first.parse().map_err(|_| parse_err(lineno, format!("bad node index {first:?}")))?;
                let mut coord = || -> Result<f64> {
                    let tok = fields.next().ok_or_else(|| parse_err(lineno, "expected `index x y`"))?;
                    tok.parse().map_err(|_| parse_err(lineno, format!("bad coordinate {tok:?}")))
                };
                let (x, y) = (coord()?, coord()?);
                if fields.next().is_some() {
                    return Err(parse_err(lineno, "trailing fields after `index x y`"));
                }
                if !seen.insert(index) {
                    return Err(parse_err(lineno, format!("duplicate node index {index}")));
                }
                coords.push((x, y));
                continue;
            }
        }
        if line.starts_with("NODE_COORD_SECTION") {
            in_section = true;
            section_line = Some(lineno);
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            match key.trim() {
                "NAME" => name = value.trim().to_string(),
                "DIMENSION" => {
                    let d = value
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad DIMENSION {:?}", value.trim())))?;
                    dimension = Some((d, lineno));
                }
                _ => {}
            }
        }
    }

    let Some(section_line) = section_line else {
        return Err(parse_err(last_line + 1, "missing NODE_COORD_SECTION"));
    };
    if coords.is_empty() {
        return Err(parse_err(section_line, "empty NODE_COORD_SECTION"));
    }
    if let Some((d, lineno)) = dimension {
        if d != coords.len() {
            return Err(parse_err(lineno, format!("DIMENSION {d} but {} coordinate lines", coords.len())));
        }
    }
    if coords.len() < 2 {
        return Err(parse_err(section_line, "need at least two nodes"));
    }

    let mut rng = rng::seeded(reward_seed);
    let vertices: Vec<Vertex> = coords
        .into_iter()
        .enumerate()
        .map(|(id, (x, y))| Vertex { id, x, y, reward: draw_reward(&mut rng, reward_low, reward_high) })
        .collect();
    let goal = vertices.len() - 1;
    ProblemInstance::new(name, vertices, 0, goal, CostModel::EuclideanExponential { kappa })
}
