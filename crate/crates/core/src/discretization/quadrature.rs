use std::sync::Arc;

use rayon::prelude::*;

use super::{Grid, Kernel};
use crate::error::{Error, Result};

/// Above this many pairs the kernel weights are recomputed on the fly.
const CACHE_LIMIT: usize = 1 << 22;

/// A grid paired with a kernel, caching `K_ij = a(x_i - x_j) w_i w_j`.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Arc<Grid>,
    kernel: Arc<Kernel>,
    weights: Option<Arc<Vec<f64>>>,
}

impl Discretization {
    /// Pairs a grid with a kernel after checking dimensions and component
    /// gaps.
    pub fn new(grid: Arc<Grid>, kernel: Arc<Kernel>) -> Result<Self> {
        if grid.dim() != kernel.dim() {
            return Err(Error::InvalidDomain(format!(
                "grid dimension {} differs from kernel dimension {}",
                grid.dim(),
                kernel.dim()
            )));
        }
        grid.check_gaps(kernel.r0())?;
        let n = grid.len();
        let mut disc = Discretization { grid, kernel, weights: None };
        if n * n <= CACHE_LIMIT {
            let w: Vec<f64> = (0..n * n).into_par_iter().map(|k| disc.compute_weight(k / n, k % n)).collect();
            disc.weights = Some(Arc::new(w));
        }
        Ok(disc)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kernel(&self) -> &Arc<Kernel> {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    fn compute_weight(&self, i: usize, j: usize) -> f64 {
        let (xi, xj) = (self.grid.node(i), self.grid.node(j));
        let mut off = [0.0; 2];
        for a in 0..xi.len() {
            off[a] = xi[a] - xj[a];
        }
        self.kernel.eval(&off[..xi.len()]) * self.grid.weight(i) * self.grid.weight(j)
    }

    /// `a(x_i - x_j) w_i w_j`
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i * self.grid.len() + j],
            None => self.compute_weight(i, j),
        }
    }

    /// `a(x_i - x_j)`
    pub fn kernel_at(&self, i: usize, j: usize) -> f64 {
        self.weight(i, j) / (self.grid.weight(i) * self.grid.weight(j))
    }

    /// `Σ_ij f(i, j) K_ij`, pairwise summed in a fixed order. Pairs with zero
    /// kernel weight are skipped. `+∞` terms give `+∞`; any other
    /// non-finite term is an error.
    pub fn pair_sum(&self, f: impl Fn(usize, usize) -> f64 + Sync) -> Result<f64> {
        self.reduce(f, true)
    }

    /// Like [`Discretization::pair_sum`], rejecting every non-finite term.
    pub fn quadrature_double(&self, f: impl Fn(usize, usize) -> f64 + Sync) -> Result<f64> {
        self.reduce(f, false)
    }

    fn reduce(&self, f: impl Fn(usize, usize) -> f64 + Sync, allow_inf: bool) -> Result<f64> {
        let n = self.grid.len();
        let check = |i: usize, j: usize, v: f64| -> Result<f64> {
            if v.is_finite() || (allow_inf && v == f64::INFINITY) {
                Ok(v)
            } else {
                Err(Error::NonFiniteIntegrand { i, j, value: v })
            }
        };
        let rows: Result<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut terms = Vec::with_capacity(n - i);
                let kii = self.weight(i, i);
                if kii != 0.0 {
                    terms.push(check(i, i, f(i, i))? * kii);
                }
                for j in i + 1..n {
                    let (kij, kji) = (self.weight(i, j), self.weight(j, i));
                    let a = if kij != 0.0 { check(i, j, f(i, j))? * kij } else { 0.0 };
                    let b = if kji != 0.0 { check(j, i, f(j, i))? * kji } else { 0.0 };
                    if kij != 0.0 || kji != 0.0 {
                        terms.push(a + b);
                    }
                }
                Ok(pairwise_sum(&terms))
            })
            .collect();
        Ok(pairwise_sum(&rows?))
    }

    /// `r_i = Σ_j f(i, j) K_ij` for every row, each pairwise summed.
    pub fn row_sums(&self, f: impl Fn(usize, usize) -> f64 + Sync) -> Vec<f64> {
        let n = self.grid.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let terms: Vec<f64> = (0..n)
                    .filter_map(|j| {
                        let k = self.weight(i, j);
                        (k != 0.0).then(|| f(i, j) * k)
                    })
                    .collect();
                pairwise_sum(&terms)
            })
            .collect()
    }
}

/// Tree summation with a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_kernel, DomainSpec, KernelSpec};

    fn disc(n: usize, kernel: KernelSpec) -> Discretization {
        let g = Arc::new(Grid::new(&DomainSpec::unit_interval(n)).unwrap());
        let k = Arc::new(build_kernel(&kernel, 1).unwrap());
        Discretization::new(g, k).unwrap()
    }

    #[test]
    fn product_of_measures() {
        let d = disc(32, KernelSpec::constant_on(1.0));
        assert!((d.quadrature_double(|_, _| 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squared_difference() {
        let d = disc(256, KernelSpec::constant_on(1.0));
        let g = d.grid().clone();
        let q = d.quadrature_double(|i, j| (g.node(i)[0] - g.node(j)[0]).powi(2)).unwrap();
        assert!((q - 1.0 / 6.0).abs() < 2e-5);
    }

    #[test]
    fn strip_area() {
        let d = disc(512, KernelSpec::Indicator { r: 0.25 });
        let q = d.quadrature_double(|_, _| 1.0).unwrap();
        assert!((q - 0.4375).abs() < 5e-3, "{q}");
    }

    #[test]
    fn transpose_is_exact_for_even_kernels() {
        for spec in [KernelSpec::Indicator { r: 0.3 }, KernelSpec::Gaussian { sigma: 0.2, r0: None }] {
            let d = disc(64, spec);
            let g = d.grid().clone();
            let f = |i: usize, j: usize| (3.0 * g.node(i)[0]).sin() * g.node(j)[0].exp() + g.node(i)[0];
            let a = d.quadrature_double(f).unwrap();
            let b = d.quadrature_double(|i, j| f(j, i)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn non_finite_is_reported() {
        let d = disc(8, KernelSpec::constant_on(1.0));
        let r = d.quadrature_double(|i, j| if (i, j) == (2, 5) { f64::NAN } else { 1.0 });
        assert!(matches!(r, Err(Error::NonFiniteIntegrand { i: 2, j: 5, .. })));
        assert_eq!(d.pair_sum(|i, _| if i == 3 { f64::INFINITY } else { 0.0 }).unwrap(), f64::INFINITY);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let d = disc(200, KernelSpec::Gaussian { sigma: 0.3, r0: None });
        let g = d.grid().clone();
        let f = |i: usize, j: usize| (g.node(i)[0] - g.node(j)[0]).abs().powf(2.7);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = one.install(|| d.quadrature_double(f).unwrap());
        let b = many.install(|| d.quadrature_double(f).unwrap());
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let err = |n: usize| {
            let d = disc(n, KernelSpec::constant_on(1.0));
            let g = d.grid().clone();
            (d.quadrature_double(|i, j| (g.node(i)[0] - g.node(j)[0]).powi(2)).unwrap() - 1.0 / 6.0).abs()
        };
        assert!(err(32) / err(64) >= 3.0);
    }
}
