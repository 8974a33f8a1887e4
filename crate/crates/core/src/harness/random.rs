//! Seeded random test functions.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::discretization::{Grid, GridFunction, PairFunction};

/// Random trigonometric polynomials
/// `Σ_{k<=terms} (c_k cos kπx + s_k sin kπx) / k²` with standard normal
/// coefficients, one such sum per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrigFamily {
    pub terms: usize,
    /// Functions drawn per scenario.
    pub samples: usize,
}

impl Default for TrigFamily {
    fn default() -> Self {
        TrigFamily { terms: 8, samples: 8 }
    }
}

impl TrigFamily {
    pub fn sample<R: Rng + ?Sized>(&self, grid: &Arc<Grid>, rng: &mut R) -> GridFunction {
        let d = grid.dim();
        let coeffs: Vec<Vec<(f64, f64)>> = (0..d)
            .map(|_| {
                (1..=self.terms)
                    .map(|_| (rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
                    .collect()
            })
            .collect();
        GridFunction::from_fn(grid, |x| {
            let mut s = 0.0;
            for (a, axis) in coeffs.iter().enumerate() {
                for (k, (c, sn)) in axis.iter().enumerate() {
                    let k = (k + 1) as f64;
                    s += (c * (k * PI * x[a]).cos() + sn * (k * PI * x[a]).sin()) / (k * k);
                }
            }
            s
        })
        .expect("trigonometric sums are finite")
    }

    pub fn sample_many<R: Rng + ?Sized>(&self, grid: &Arc<Grid>, rng: &mut R, count: usize) -> Vec<GridFunction> {
        (0..count).map(|_| self.sample(grid, rng)).collect()
    }

    /// `W(x, y) = u1(x) u2(y) + u3(x)` from three independent draws.
    pub fn sample_pair<R: Rng + ?Sized>(&self, grid: &Arc<Grid>, rng: &mut R) -> PairFunction {
        let u1 = self.sample(grid, rng).into_values();
        let u2 = self.sample(grid, rng).into_values();
        let u3 = self.sample(grid, rng).into_values();
        let n = grid.len();
        let values = (0..n * n).map(|k| {
            let (i, j) = (k / n, k % n);
            u1[i] * u2[j] + u3[i]
        });
        PairFunction::dense(n, values.collect()).expect("square pair table")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::DomainSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_and_non_constant() {
        let g = Arc::new(Grid::new(&DomainSpec::unit_square(8)).unwrap());
        let fam = TrigFamily::default();
        let a = fam.sample(&g, &mut ChaCha8Rng::seed_from_u64(5));
        let b = fam.sample(&g, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        let spread =
            a.values().iter().cloned().fold(f64::MIN, f64::max) - a.values().iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 1e-3);
        let w = fam.sample_pair(&g, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(w.n(), 64);
    }
}
