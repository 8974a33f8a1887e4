//! Minimization of `E(u) = F(u) + Σ|u|^p w - Σ g u w` and the dual
//! representation of linear functionals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{pairwise_sum, Discretization, GridFunction, PairFunction};
use crate::error::{Error, Result};
use crate::functionals::{eval_F, eval_pairing_Phi};
use crate::norms::{luxemburg, Modular};
use crate::phi::PhiFunction;

const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Tolerance on `max_i |∂E/∂u_i|`.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub initial_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iters: 5000, grad_tol: 1e-8, armijo_c: 1e-4, backtrack_factor: 0.5, initial_step: 1.0 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOptions(m.into()));
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.initial_step > 0.0) || !(self.grad_tol > 0.0) {
            return bad("initial_step and grad_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub u_star: GridFunction,
    pub energy: f64,
    pub initial_energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Energy after every accepted step.
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// The energy problem on a fixed discretization.
#[derive(Debug, Clone, Copy)]
pub struct Energy<'a> {
    pub disc: &'a Discretization,
    pub phi: &'a PhiFunction,
    pub p_minus: f64,
    pub g: &'a GridFunction,
}

#[inline]
fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn local_derivative(p: f64, u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else if p == 2.0 {
        2.0 * u
    } else {
        p * u.abs().powf(p - 1.0) * sign(u)
    }
}

impl<'a> Energy<'a> {
    pub fn new(disc: &'a Discretization, phi: &'a PhiFunction, p_minus: f64, g: &'a GridFunction) -> Result<Self> {
        if g.len() != disc.len() {
            return Err(Error::SizeMismatch { expected: disc.len(), actual: g.len() });
        }
        Ok(Energy { disc, phi, p_minus, g })
    }

    pub fn value(&self, u: &GridFunction) -> Result<f64> {
        let f = eval_F(self.disc, self.phi, u)?.value();
        let w = self.disc.grid().weights();
        let local: Vec<f64> = u.values().iter().zip(w).map(|(v, w)| v.abs().powf(self.p_minus) * w).collect();
        let linear: Vec<f64> = u.values().iter().zip(self.g.values()).zip(w).map(|((v, g), w)| v * g * w).collect();
        Ok(f + pairwise_sum(&local) - pairwise_sum(&linear))
    }

    /// `E(v) - E(u)`, summed term by term to keep small differences accurate.
    pub fn difference(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        let g = self.disc.grid();
        let (a, b) = (u.values(), v.values());
        let nonlocal = self.disc.pair_sum(|i, j| {
            let (xi, xj) = (g.node(i), g.node(j));
            self.phi.eval((b[i] - b[j]).abs(), xi, xj) - self.phi.eval((a[i] - a[j]).abs(), xi, xj)
        })?;
        let p = self.p_minus;
        let local: Vec<f64> = (0..a.len())
            .map(|i| g.weight(i) * (b[i].abs().powf(p) - a[i].abs().powf(p) - self.g.values()[i] * (b[i] - a[i])))
            .collect();
        Ok(nonlocal + pairwise_sum(&local))
    }

    /// Exact gradient of the discrete energy.
    pub fn gradient(&self, u: &GridFunction) -> Result<GridFunction> {
        let values = self
            .nonlocal_rows(u)
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let w = self.disc.grid().weight(i);
                s + w * (local_derivative(self.p_minus, u.values()[i]) - self.g.values()[i])
            })
            .collect();
        GridFunction::new(u.grid().clone(), values)
    }

    /// `Σ_j sign(Δ_ij) (φ'(|Δ_ij|, x_i, x_j) K_ij + φ'(|Δ_ij|, x_j, x_i) K_ji)`
    fn nonlocal_rows(&self, u: &GridFunction) -> Vec<f64> {
        let disc = self.disc;
        let g = disc.grid();
        let v = u.values();
        let n = v.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = g.node(i);
                let terms: Vec<f64> = (0..n)
                    .filter_map(|j| {
                        let d = v[i] - v[j];
                        let (kij, kji) = (disc.weight(i, j), disc.weight(j, i));
                        if d == 0.0 || (kij == 0.0 && kji == 0.0) {
                            return None;
                        }
                        let xj = g.node(j);
                        let t = d.abs();
                        let mut s = 0.0;
                        if kij != 0.0 {
                            s += self.phi.derivative(t, xi, xj) * kij;
                        }
                        if kji != 0.0 {
                            s += self.phi.derivative(t, xj, xi) * kji;
                        }
                        Some(sign(d) * s)
                    })
                    .collect();
                pairwise_sum(&terms)
            })
            .collect()
    }

    /// The right-hand side `g` for which `u` is the minimizer.
    pub fn manufactured_rhs(
        disc: &Discretization,
        phi: &PhiFunction,
        p_minus: f64,
        u: &GridFunction,
    ) -> Result<GridFunction> {
        let zero = GridFunction::zeros(u.grid());
        let e = Energy::new(disc, phi, p_minus, &zero)?;
        let g = disc.grid();
        let values = e
            .nonlocal_rows(u)
            .into_iter()
            .enumerate()
            .map(|(i, s)| s / g.weight(i) + local_derivative(p_minus, u.values()[i]))
            .collect();
        GridFunction::new(u.grid().clone(), values)
    }
}

pub fn energy(
    disc: &Discretization,
    phi: &PhiFunction,
    p_minus: f64,
    u: &GridFunction,
    g: &GridFunction,
) -> Result<f64> {
    Energy::new(disc, phi, p_minus, g)?.value(u)
}

pub fn energy_gradient(
    disc: &Discretization,
    phi: &PhiFunction,
    p_minus: f64,
    u: &GridFunction,
    g: &GridFunction,
) -> Result<GridFunction> {
    Energy::new(disc, phi, p_minus, g)?.gradient(u)
}

/// `max_i |∂E/∂u_i| / w_i`, the pointwise equation residual.
pub fn el_residual(
    disc: &Discretization,
    phi: &PhiFunction,
    p_minus: f64,
    u: &GridFunction,
    g: &GridFunction,
) -> Result<f64> {
    let grad = energy_gradient(disc, phi, p_minus, u, g)?;
    let w = disc.grid().weights();
    Ok(grad.values().iter().zip(w).fold(0.0, |m, (d, w)| m.max((d / w).abs())))
}

/// Gradient descent with Armijo backtracking. After an accepted step of
/// length `t` the next trial starts at `2t`.
pub fn minimize(
    disc: &Discretization,
    phi: &PhiFunction,
    p_minus: f64,
    g: &GridFunction,
    u0: &GridFunction,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    let e = Energy::new(disc, phi, p_minus, g)?;
    let mut u = u0.clone();
    let initial_energy = e.value(&u)?;
    let mut energy = initial_energy;
    let mut grad = e.gradient(&u)?;
    let mut gnorm = grad.max_abs();
    let mut step = opts.initial_step;
    let mut history = Vec::new();
    let mut iterations = 0;
    while gnorm > opts.grad_tol && iterations < opts.max_iters {
        let g2: f64 = pairwise_sum(&grad.values().iter().map(|d| d * d).collect::<Vec<_>>());
        let mut t = step;
        let mut halvings = 0;
        loop {
            let trial = u.lincomb(1.0, &grad, -t)?;
            let delta = e.difference(&u, &trial)?;
            let sufficient = delta <= -opts.armijo_c * t * g2;
            let (accept, trial_grad) = if sufficient {
                (true, None)
            } else {
                // convex along the line: a negative slope at the trial point
                // certifies decrease even when `delta` is lost in rounding
                let tg = e.gradient(&trial)?;
                let slope: Vec<f64> = tg.values().iter().zip(grad.values()).map(|(a, b)| a * b).collect();
                (pairwise_sum(&slope) > 0.0, Some(tg))
            };
            if accept {
                u = trial;
                energy += delta;
                grad = match trial_grad {
                    Some(tg) => tg,
                    None => e.gradient(&u)?,
                };
                gnorm = grad.max_abs();
                step = 2.0 * t;
                history.push(energy);
                break;
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::LineSearchStalled { iteration: iterations, halvings: MAX_HALVINGS });
            }
            t *= opts.backtrack_factor;
        }
        iterations += 1;
    }
    let energy = e.value(&u)?;
    Ok(SolveResult {
        u_star: u,
        energy,
        initial_energy,
        grad_norm: gnorm,
        iterations,
        converged: gnorm <= opts.grad_tol,
        history,
    })
}

/// `λ Φ(u, ŵ) / Φ(ŵ, ŵ)` with `λ` the norm of `w` and `ŵ = w / λ`.
pub fn dual_apply(disc: &Discretization, phi: &PhiFunction, w: &GridFunction, u: &GridFunction) -> Result<f64> {
    let (lambda, w_hat, denom) = normalized(disc, phi, w)?;
    Ok(lambda * eval_pairing_Phi(disc, phi, u, &w_hat)? / denom)
}

fn normalized(disc: &Discretization, phi: &PhiFunction, w: &GridFunction) -> Result<(f64, GridFunction, f64)> {
    let lambda = luxemburg(disc, phi, Modular::F(w))?.value;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::ZeroDenominator { value: 0.0 });
    }
    let w_hat = w.scale(1.0 / lambda);
    let denom = eval_pairing_Phi(disc, phi, &w_hat, &w_hat)?;
    if !(denom > 0.0) {
        return Err(Error::ZeroDenominator { value: denom });
    }
    Ok((lambda, w_hat, denom))
}

/// Pair kernel `W = (λ / Φ(ŵ, ŵ)) φ'(|Δŵ|) sign(Δŵ)` representing
/// [`dual_apply`] through [`apply_pair_kernel`].
pub fn dual_kernel_representation(disc: &Discretization, phi: &PhiFunction, w: &GridFunction) -> Result<PairFunction> {
    let (lambda, w_hat, denom) = normalized(disc, phi, w)?;
    let scale = lambda / denom;
    let grid = disc.grid().clone();
    let v = w_hat.into_values();
    let phi = phi.clone();
    let n = v.len();
    Ok(PairFunction::lazy(n, move |i, j| {
        let d = v[i] - v[j];
        if d == 0.0 {
            0.0
        } else {
            scale * phi.derivative(d.abs(), grid.node(i), grid.node(j)) * sign(d)
        }
    }))
}

/// `ΣΣ (u_i - u_j) W_ij a_ij w_i w_j`
pub fn apply_pair_kernel(disc: &Discretization, w: &PairFunction, u: &GridFunction) -> Result<f64> {
    if w.n() != disc.len() || u.len() != disc.len() {
        return Err(Error::SizeMismatch { expected: disc.len(), actual: w.n().min(u.len()) });
    }
    let v = u.values();
    disc.quadrature_double(|i, j| (v[i] - v[j]) * w.get(i, j))
}
