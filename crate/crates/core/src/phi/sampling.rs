use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Axis-aligned box holding the points `x`, `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Default for PhiDomain {
    fn default() -> Self {
        PhiDomain::unit(1)
    }
}

impl PhiDomain {
    pub fn unit(dim: usize) -> Self {
        PhiDomain { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box corners differ in dimension");
        PhiDomain { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// All `(x, y)` pairs of an `n`-per-axis lattice including the corners.
    pub(crate) fn lattice_pairs(&self, n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        let d = self.dim();
        let axis = |k: usize, i: usize| {
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
            self.lo[k] + t * (self.hi[k] - self.lo[k])
        };
        let total = n.pow(2 * d as u32);
        (0..total)
            .map(|mut idx| {
                let mut coords = Vec::with_capacity(2 * d);
                for c in 0..2 * d {
                    coords.push(axis(c % d, idx % n));
                    idx /= n;
                }
                let y = coords.split_off(d);
                (coords, y)
            })
            .collect()
    }
}

/// Sample sets used by the condition checks and the combinator
/// certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub z_min: f64,
    pub z_max: f64,
    /// Log-spaced points; `z = 1` is always added.
    pub z_points: usize,
    pub xy_pairs: usize,
    pub epsilons: Vec<f64>,
    pub seed: u64,
    pub domain: PhiDomain,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            z_min: 1e-4,
            z_max: 1e4,
            z_points: 64,
            xy_pairs: 128,
            epsilons: vec![0.5, 0.25, 0.1],
            seed: 7,
            domain: PhiDomain::default(),
        }
    }
}

impl SamplingConfig {
    pub fn on_domain(domain: PhiDomain) -> Self {
        SamplingConfig { domain, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sorted log-spaced grid with `z = 1` inserted.
    pub fn z_grid(&self) -> Vec<f64> {
        let n = self.z_points.max(2);
        let (a, b) = (self.z_min.ln(), self.z_max.ln());
        let mut zs: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        if !zs.contains(&1.0) && self.z_min <= 1.0 && 1.0 <= self.z_max {
            zs.push(1.0);
            zs.sort_by(f64::total_cmp);
        }
        zs
    }

    /// Seeded uniform `(x, y)` pairs in the domain box.
    pub fn xy_samples(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let d = &self.domain;
        let point =
            |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..d.dim()).map(|k| rng.random_range(d.lo[k]..=d.hi[k])).collect() };
        (0..self.xy_pairs)
            .map(|_| {
                let x = point(&mut rng);
                let y = point(&mut rng);
                (x, y)
            })
            .collect()
    }

    pub fn record(&self) -> SamplingRecord {
        SamplingRecord { seed: self.seed, z_grid: self.z_grid(), xy_samples: self.xy_samples() }
    }
}

/// The concrete sample sets of a check, kept for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingRecord {
    pub seed: u64,
    pub z_grid: Vec<f64>,
    pub xy_samples: Vec<(Vec<f64>, Vec<f64>)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_grid_contains_one_and_endpoints() {
        let g = SamplingConfig::default().z_grid();
        assert_eq!(g.len(), 65);
        assert!(g.contains(&1.0));
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!((g[64] - 1e4).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn samples_are_seeded() {
        let a = SamplingConfig::default().xy_samples();
        let b = SamplingConfig::default().xy_samples();
        let c = SamplingConfig::default().with_seed(8).xy_samples();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 128);
    }

    #[test]
    fn lattice_covers_corners() {
        let pairs = PhiDomain::unit(2).lattice_pairs(3);
        assert_eq!(pairs.len(), 81);
        assert!(pairs.contains(&(vec![0.0, 1.0], vec![1.0, 0.5])));
    }
}
