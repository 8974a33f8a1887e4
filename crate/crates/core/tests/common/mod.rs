//! Independent reference computations for the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use orlicz::discretization::{build_kernel, Discretization, DomainSpec, Grid, KernelSpec};
use orlicz::phi::PhiFunction;

pub const SIGMA: f64 = 0.3;

pub fn gaussian(sigma: f64) -> KernelSpec {
    KernelSpec::Gaussian { sigma, r0: None }
}

pub fn unit_disc(cells: usize, kernel: &KernelSpec) -> Discretization {
    let g = Arc::new(Grid::new(&DomainSpec::unit_interval(cells)).unwrap());
    let k = Arc::new(build_kernel(kernel, 1).unwrap());
    Discretization::new(g, k).unwrap()
}

/// Midpoints of `[0, 1]` split into `n` cells.
pub fn midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// Plain double loop `Σ_i Σ_j φ(|u_i - u_j|) exp(-(x_i - x_j)²/(2σ²)) h²`.
pub fn naive_f(phi: &PhiFunction, u: &[f64], sigma: f64) -> f64 {
    let n = u.len();
    let h = 1.0 / n as f64;
    let x = midpoints(n);
    let mut s = 0.0;
    let mut c = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = x[i] - x[j];
            let term = phi.eval((u[i] - u[j]).abs(), &[x[i]], &[x[j]]) * (-d * d / (2.0 * sigma * sigma)).exp() * h * h;
            // compensated summation
            let y = term - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
    }
    s
}

pub fn naive_g(phi: &PhiFunction, u: &[f64], p: f64, sigma: f64) -> f64 {
    let h = 1.0 / u.len() as f64;
    naive_f(phi, u, sigma) + u.iter().map(|v| v.abs().powf(p) * h).sum::<f64>()
}

/// Gaussian elimination with partial pivoting.
pub fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= m * a[k][j];
            }
            b[i] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// `sup_s (s t - φ(s))` by ternary search on a bracket found by doubling.
pub fn brute_conjugate(phi: &PhiFunction, t: f64, x: &[f64], y: &[f64]) -> f64 {
    let f = |s: f64| s * t - phi.eval(s, x, y);
    let mut hi = 1.0;
    while f(2.0 * hi) > f(hi) {
        hi *= 2.0;
    }
    let (mut a, mut b) = (0.0, 2.0 * hi);
    for _ in 0..300 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    f(0.5 * (a + b)).max(0.0)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
