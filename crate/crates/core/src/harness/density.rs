//! Approximation ladders: truncation, cutoff and mollification.

use serde::{Deserialize, Serialize};

use crate::discretization::{approximate, mollify, Approximation, Discretization, GridFunction};
use crate::error::{Error, Result};
use crate::functionals::eval_F;
use crate::norms::{luxemburg, Modular};
use crate::phi::PhiFunction;

/// `F(u - u_ε)` for one rung.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub eps: f64,
    pub gap: f64,
}

/// `value_truncate(1/ε) → small_cutoff(ε) → support_truncate(center, 1/ε) → mollify(ε)`.
pub fn approximation_chain(u: &GridFunction, eps: f64, center: &[f64]) -> Result<GridFunction> {
    let steps = [
        Approximation::ValueTruncate { n: 1.0 / eps },
        Approximation::SmallCutoff { eps },
        Approximation::SupportTruncate { center: center.to_vec(), radius: 1.0 / eps },
        Approximation::Mollify { eps },
    ];
    let mut v = u.clone();
    for s in &steps {
        v = approximate(&v, s)?;
    }
    Ok(v)
}

/// Runs the chain for every `ε` of the ladder. Needs at least 3 rungs.
pub fn density_ladder(
    disc: &Discretization,
    phi: &PhiFunction,
    u: &GridFunction,
    ladder: &[f64],
    center: Option<&[f64]>,
) -> Result<Vec<Rung>> {
    if ladder.len() < 3 {
        return Err(Error::LadderTooShort { rungs: ladder.len() });
    }
    let origin = vec![0.0; disc.grid().dim()];
    let center = center.unwrap_or(&origin);
    ladder
        .iter()
        .map(|&eps| {
            let approx = approximation_chain(u, eps, center)?;
            let gap = eval_F(disc, phi, &u.sub(&approx)?)?.value();
            Ok(Rung { eps, gap })
        })
        .collect()
}

/// Norm of `u - mollify(u, ε)` per rung and the least-squares slope of
/// `log norm` against `log ε`.
pub fn mollification_order(
    disc: &Discretization,
    phi: &PhiFunction,
    u: &GridFunction,
    ladder: &[f64],
) -> Result<(Vec<Rung>, f64)> {
    if ladder.len() < 2 {
        return Err(Error::LadderTooShort { rungs: ladder.len() });
    }
    let rungs = ladder
        .iter()
        .map(|&eps| {
            let diff = u.sub(&mollify(u, eps)?)?;
            Ok(Rung { eps, gap: luxemburg(disc, phi, Modular::F(&diff))?.value })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rungs.iter().map(|r| (r.eps.ln(), r.gap.ln())).collect();
    Ok((rungs, slope(&pts)))
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
