use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pairwise_sum, GridFunction};
use crate::error::{Error, Result};

/// Constructions used to approximate a function by nicer ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Approximation {
    /// Clamp to `[-n, n]`.
    ValueTruncate { n: f64 },
    /// Zero the values with `0 < |u| < eps`.
    SmallCutoff { eps: f64 },
    /// Zero the values outside the closed ball.
    SupportTruncate { center: Vec<f64>, radius: f64 },
    /// Convolve with the normalized bump of radius `eps`.
    Mollify { eps: f64 },
}

pub fn approximate(u: &GridFunction, method: &Approximation) -> Result<GridFunction> {
    match method {
        Approximation::ValueTruncate { n } => Ok(u.map(|v| v.clamp(-n, *n))),
        Approximation::SmallCutoff { eps } => Ok(u.map(|v| if v.abs() < *eps { 0.0 } else { v })),
        Approximation::SupportTruncate { center, radius } => {
            let g = u.grid();
            if center.len() != g.dim() {
                return Err(Error::SizeMismatch { expected: g.dim(), actual: center.len() });
            }
            let values = g
                .nodes()
                .zip(u.values())
                .map(|(x, &v)| {
                    let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                    if r2 <= radius * radius {
                        v
                    } else {
                        0.0
                    }
                })
                .collect();
            GridFunction::new(g.clone(), values)
        }
        Approximation::Mollify { eps } => mollify(u, *eps),
    }
}

/// `exp(-1 / (1 - s²))` for `s < 1`, else 0.
fn bump(s2: f64) -> f64 {
    if s2 < 1.0 {
        (-1.0 / (1.0 - s2)).exp()
    } else {
        0.0
    }
}

/// Discrete mollification: at each node the bump weights `ρ(x_i - x_j) w_j`
/// over the nodes of the domain are normalized to sum 1.
pub fn mollify(u: &GridFunction, eps: f64) -> Result<GridFunction> {
    let g = u.grid();
    let half = g.min_half_width();
    if !(eps > 0.0) || eps > half {
        return Err(Error::MollifierTooWide { eps, half_width: half });
    }
    let n = g.len();
    let vals = u.values();
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = g.node(i);
            let mut w = Vec::new();
            let mut wu = Vec::new();
            for j in 0..n {
                let s2: f64 = xi.iter().zip(g.node(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (eps * eps);
                let k = bump(s2) * g.weight(j);
                if k > 0.0 {
                    w.push(k);
                    wu.push(k * vals[j]);
                }
            }
            let total = pairwise_sum(&w);
            if total > 0.0 {
                pairwise_sum(&wu) / total
            } else {
                vals[i]
            }
        })
        .collect();
    GridFunction::new(g.clone(), out)
}

/// Weights of the mollifier at node `i`, normalized; for inspection.
pub fn mollifier_weights(u: &GridFunction, i: usize, eps: f64) -> Vec<(usize, f64)> {
    let g = u.grid();
    let xi = g.node(i);
    let raw: Vec<(usize, f64)> = (0..g.len())
        .filter_map(|j| {
            let s2: f64 = xi.iter().zip(g.node(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (eps * eps);
            let k = bump(s2) * g.weight(j);
            (k > 0.0).then_some((j, k))
        })
        .collect();
    let total = pairwise_sum(&raw.iter().map(|p| p.1).collect::<Vec<_>>());
    raw.into_iter().map(|(j, k)| (j, k / total)).collect()
}
