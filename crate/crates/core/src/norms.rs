//! Luxemburg norms and the norm-level certificates.

use serde::{Deserialize, Serialize};

use crate::discretization::{Discretization, GridFunction, PairFunction};
use crate::error::{Error, Result};
use crate::functionals::{eval_F, eval_F_power, eval_G, eval_H, eval_H_star};
use crate::phi::PhiFunction;

const ZERO_FLOOR: f64 = 1e-14;
const REL_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 400;

/// Root `λ` of `Ψ(u/λ) = 1` for a modular `Ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// `|Ψ(u/value) - 1|`, zero for the zero norm.
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

impl NormResult {
    fn zero() -> Self {
        NormResult { value: 0.0, residual: 0.0, iterations: 0, bracket: (0.0, 0.0) }
    }
}

/// The modular whose unit level set defines the norm.
#[derive(Debug, Clone, Copy)]
pub enum Modular<'a> {
    F(&'a GridFunction),
    G(&'a GridFunction),
    H(&'a PairFunction),
    HStar(&'a PairFunction),
}

/// Growth window used to seed the bracket: `β⁻¹ min(s^p-, s^p+) Ψ(v) <=
/// Ψ(s v) <= β max(s^p-, s^p+) Ψ(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingHint {
    pub p_minus: f64,
    pub p_plus: f64,
    pub beta: f64,
}

impl ScalingHint {
    pub fn of(phi: &PhiFunction) -> Self {
        let g = phi.growth();
        ScalingHint { p_minus: g.p_minus, p_plus: g.p_plus, beta: g.beta }
    }

    /// Hint for the conjugate modular.
    pub fn conjugate_of(phi: &PhiFunction) -> Self {
        let g = phi.growth();
        let (q_minus, q_plus) = g.conjugate_exponents();
        ScalingHint { p_minus: q_minus, p_plus: q_plus, beta: g.beta }
    }
}

/// Solves `Ψ(u/λ) = 1` by bisection in `λ`, where `eval(s) = Ψ(s u)`.
pub fn luxemburg_root(eval: impl Fn(f64) -> Result<f64>, hint: ScalingHint) -> Result<NormResult> {
    let m = eval(1.0)?;
    if m <= ZERO_FLOOR {
        return Ok(NormResult::zero());
    }
    if m == f64::INFINITY {
        return Ok(NormResult {
            value: f64::INFINITY,
            residual: 0.0,
            iterations: 0,
            bracket: (f64::INFINITY, f64::INFINITY),
        });
    }
    let ScalingHint { p_minus, p_plus, beta } = hint;
    let lo_target = m / beta;
    let hi_target = m * beta;
    let mut lo = if lo_target >= 1.0 { lo_target.powf(1.0 / p_plus) } else { lo_target.powf(1.0 / p_minus) };
    let mut hi = if hi_target >= 1.0 { hi_target.powf(1.0 / p_minus) } else { hi_target.powf(1.0 / p_plus) };
    let at = |lam: f64| eval(1.0 / lam);
    let mut iterations = 0;
    let mut k = 0;
    let mut v_lo = at(lo)?;
    while v_lo < 1.0 {
        hi = hi.min(lo);
        lo *= 0.5;
        v_lo = at(lo)?;
        k += 1;
        if k > MAX_DOUBLINGS {
            return Err(Error::BracketExpansionFailure { doublings: k });
        }
    }
    let mut v_hi = at(hi)?;
    while v_hi > 1.0 {
        lo = lo.max(hi);
        hi *= 2.0;
        v_hi = at(hi)?;
        k += 1;
        if k > MAX_DOUBLINGS {
            return Err(Error::BracketExpansionFailure { doublings: k });
        }
    }
    iterations += k;
    let bracket = (lo, hi);
    let mut best = if (v_lo - 1.0).abs() < (v_hi - 1.0).abs() { (lo, v_lo) } else { (hi, v_hi) };
    for _ in 0..MAX_BISECTIONS {
        if (best.1 - 1.0).abs() <= REL_TOL || hi - lo <= REL_TOL * hi {
            break;
        }
        // geometric steps while the bracket spans more than a factor 2
        let mid = if hi > 2.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let v = at(mid)?;
        iterations += 1;
        if v > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (v - 1.0).abs() < (best.1 - 1.0).abs() || hi - lo <= REL_TOL * hi {
            best = (mid, v);
        }
    }
    let (value, v) = best;
    Ok(NormResult { value, residual: (v - 1.0).abs(), iterations, bracket })
}

/// Luxemburg norm for one of the modulars `F, G, H, H*`.
pub fn luxemburg(disc: &Discretization, phi: &PhiFunction, modular: Modular<'_>) -> Result<NormResult> {
    let p = phi.p_minus();
    match modular {
        Modular::F(u) => luxemburg_root(|s| Ok(eval_F(disc, phi, &u.scale(s))?.value()), ScalingHint::of(phi)),
        Modular::G(u) => luxemburg_root(|s| Ok(eval_G(disc, phi, p, &u.scale(s))?.value()), ScalingHint::of(phi)),
        Modular::H(w) => luxemburg_root(|s| Ok(eval_H(disc, phi, &w.scale(s))?.value()), ScalingHint::of(phi)),
        Modular::HStar(w) => {
            let dense = w.materialize();
            luxemburg_root(|s| Ok(eval_H_star(disc, phi, &dense.scale(s))?.value()), ScalingHint::conjugate_of(phi))
        }
    }
}

/// `|u|` from the `F` modular plus the `L^p-` norm.
pub fn f_norm(disc: &Discretization, phi: &PhiFunction, u: &GridFunction) -> Result<f64> {
    Ok(luxemburg(disc, phi, Modular::F(u))?.value + u.lp_norm(phi.p_minus()))
}

pub fn g_norm(disc: &Discretization, phi: &PhiFunction, u: &GridFunction) -> Result<f64> {
    Ok(luxemburg(disc, phi, Modular::G(u))?.value)
}

pub fn h_norm(disc: &Discretization, phi: &PhiFunction, u: &PairFunction) -> Result<f64> {
    Ok(luxemburg(disc, phi, Modular::H(u))?.value)
}

pub fn h_star_norm(disc: &Discretization, phi: &PhiFunction, w: &PairFunction) -> Result<f64> {
    Ok(luxemburg(disc, phi, Modular::HStar(w))?.value)
}

/// `u = u_perp + mean` with `Σ u_perp w = 0`.
pub fn decompose_mean_zero(u: &GridFunction) -> (GridFunction, f64) {
    let mean = u.integral() / u.grid().total_measure();
    (u.shift(-mean), mean)
}

/// `max ‖u_perp‖_p^p / F_p(u)` over the non-constant samples.
pub fn poincare_certificate(disc: &Discretization, p_minus: f64, samples: &[GridFunction]) -> Result<f64> {
    let mut best: Option<f64> = None;
    for u in samples {
        let (perp, _) = decompose_mean_zero(u);
        let spread = u.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - u.values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if spread <= ZERO_FLOOR * (1.0 + u.max_abs()) {
            continue;
        }
        let fp = eval_F_power(disc, p_minus, u)?.value();
        if fp <= 0.0 {
            continue;
        }
        let ratio = perp.lp_power(p_minus) / fp;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or(Error::DegenerateSample)
}

/// Two-sided bound of the modular by powers of its norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichCertificate {
    pub lambda: f64,
    pub functional: f64,
    pub lower: f64,
    pub upper: f64,
    /// `min(F - lower, upper - F)`; negative on failure.
    pub slack: f64,
    pub pass: bool,
}

/// Checks `β⁻¹ min(λ^p-, λ^p+) <= F(u) <= β max(λ^p-, λ^p+)` with `λ` the
/// norm from the `F` modular and `β, p±` from the integrand metadata.
pub fn verify_sandwich(disc: &Discretization, phi: &PhiFunction, u: &GridFunction) -> Result<SandwichCertificate> {
    let lambda = luxemburg(disc, phi, Modular::F(u))?.value;
    let f = eval_F(disc, phi, u)?.value();
    let g = phi.growth();
    let (a, b) = (lambda.powf(g.p_minus), lambda.powf(g.p_plus));
    let lower = a.min(b) / g.beta;
    let upper = a.max(b) * g.beta;
    let slack = (f - lower).min(upper - f);
    let tol = 1e-8 * f.max(f64::MIN_POSITIVE);
    Ok(SandwichCertificate { lambda, functional: f, lower, upper, slack, pass: slack >= -tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_kernel, DomainSpec, Grid, KernelSpec};
    use crate::phi::{build_phi, PhiExpression};
    use std::sync::Arc;

    fn unit(n: usize, kernel: KernelSpec) -> Discretization {
        let g = Arc::new(Grid::new(&DomainSpec::unit_interval(n)).unwrap());
        let k = Arc::new(build_kernel(&kernel, 1).unwrap());
        Discretization::new(g, k).unwrap()
    }

    fn square() -> PhiFunction {
        build_phi(&PhiExpression::square()).unwrap()
    }

    #[test]
    fn worked_example() {
        let d = unit(1024, KernelSpec::constant_on(1.0));
        let u = GridFunction::from_expr(d.grid(), "x0").unwrap();
        let phi = square();
        let lux = luxemburg(&d, &phi, Modular::F(&u)).unwrap();
        assert!((lux.value - (1.0f64 / 6.0).sqrt()).abs() < 1e-6);
        assert!(lux.residual <= 1e-9);
        assert!((g_norm(&d, &phi, &u).unwrap() - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((f_norm(&d, &phi, &u).unwrap() - 0.985598).abs() < 2e-6);
        let zero = luxemburg(&d, &phi, Modular::F(&GridFunction::zeros(d.grid()))).unwrap();
        assert_eq!((zero.value, zero.iterations), (0.0, 0));
    }

    #[test]
    fn homogeneity() {
        let d = unit(64, KernelSpec::Gaussian { sigma: 0.3, r0: None });
        let phi =
            build_phi(&PhiExpression::sum(vec![PhiExpression::square(), PhiExpression::power(3.0, 0.5)])).unwrap();
        let u = GridFunction::from_expr(d.grid(), "sin(3*x0) + x0^2").unwrap();
        let f = f_norm(&d, &phi, &u).unwrap();
        for s in [0.5, 3.0, -2.0] {
            let fs = f_norm(&d, &phi, &u.scale(s)).unwrap();
            assert!((fs - s.abs() * f).abs() <= 1e-8 * f, "{s}: {fs} vs {}", s.abs() * f);
        }
        assert_eq!(f_norm(&d, &phi, &GridFunction::zeros(d.grid())).unwrap(), 0.0);
    }

    #[test]
    fn pair_norms() {
        let d = unit(32, KernelSpec::constant_on(1.0));
        let phi = square();
        let u = GridFunction::from_expr(d.grid(), "x0^2").unwrap();
        let lux = luxemburg(&d, &phi, Modular::F(&u)).unwrap().value;
        assert_eq!(h_norm(&d, &phi, &PairFunction::difference(&u)).unwrap(), lux);
        let two = PairFunction::lazy(32, |_, _| 2.0);
        assert!((h_star_norm(&d, &phi, &two).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(h_star_norm(&d, &phi, &PairFunction::zeros(32)).unwrap(), 0.0);
    }

    #[test]
    fn mean_zero_split() {
        let d = unit(64, KernelSpec::constant_on(1.0));
        let u = GridFunction::from_expr(d.grid(), "x0").unwrap();
        let (perp, mean) = decompose_mean_zero(&u);
        assert!((mean - 0.5).abs() < 1e-15);
        assert!(perp.integral().abs() < 1e-15);
        let (pc, c) = decompose_mean_zero(&GridFunction::constant(d.grid(), 2.5));
        assert_eq!(c, 2.5);
        assert!(pc.max_abs() == 0.0);
    }

    #[test]
    fn poincare_on_unit_interval() {
        let d = unit(64, KernelSpec::constant_on(1.0));
        let samples: Vec<GridFunction> = ["x0", "sin(9*x0)", "exp(x0) - x0^3"]
            .iter()
            .map(|s| GridFunction::from_expr(d.grid(), s).unwrap())
            .collect();
        assert!((poincare_certificate(&d, 2.0, &samples).unwrap() - 0.5).abs() < 1e-12);
        let flat = vec![GridFunction::constant(d.grid(), 1.0)];
        assert!(matches!(poincare_certificate(&d, 2.0, &flat), Err(Error::DegenerateSample)));
        let narrow = unit(64, KernelSpec::Indicator { r: 0.25 });
        assert!(poincare_certificate(&narrow, 2.0, &samples).unwrap() > 0.5);
    }

    #[test]
    fn sandwich_for_square_is_tight() {
        let d = unit(64, KernelSpec::constant_on(1.0));
        let u = GridFunction::from_expr(d.grid(), "x0").unwrap();
        let c = verify_sandwich(&d, &square(), &u).unwrap();
        assert!(c.pass);
        assert!(c.slack.abs() < 1e-9 * c.functional);
    }
}
