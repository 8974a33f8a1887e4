//! The nonlocal functionals on discrete data.
//!
//! All double integrals are evaluated by [`Discretization::pair_sum`], so a
//! sum over `i, j` of `f(i, j) a(x_i - x_j) w_i w_j` with a fixed reduction
//! order.

use std::fmt;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::discretization::{pairwise_sum, Discretization, GridFunction, PairFunction};
use crate::error::{Error, Result};
use crate::phi::{conjugate, PhiFunction};

/// Value of an extended-real functional, with its named parts.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalValue {
    value: f64,
    terms: Vec<(&'static str, f64)>,
}

impl FunctionalValue {
    pub fn finite(value: f64) -> Self {
        FunctionalValue { value, terms: Vec::new() }
    }

    pub fn infinite() -> Self {
        FunctionalValue { value: f64::INFINITY, terms: Vec::new() }
    }

    fn with_terms(value: f64, terms: Vec<(&'static str, f64)>) -> Self {
        FunctionalValue { value, terms }
    }

    /// The value, `f64::INFINITY` for `+∞`.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }

    pub fn terms(&self) -> &[(&'static str, f64)] {
        &self.terms
    }
}

impl fmt::Display for FunctionalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("+inf")
        } else {
            write!(f, "{}", self.value)
        }
    }
}

impl Serialize for FunctionalValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("+inf")
        } else {
            s.serialize_f64(self.value)
        }
    }
}

fn check_len(disc: &Discretization, n: usize) -> Result<()> {
    if n != disc.len() {
        return Err(Error::SizeMismatch { expected: disc.len(), actual: n });
    }
    Ok(())
}

fn extended(v: f64) -> FunctionalValue {
    if v == f64::INFINITY {
        FunctionalValue::infinite()
    } else {
        FunctionalValue::finite(v)
    }
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

/// `F(u) = ΣΣ φ(|u_i - u_j|, x_i, x_j) a_ij w_i w_j`
#[allow(non_snake_case)]
pub fn eval_F(disc: &Discretization, phi: &PhiFunction, u: &GridFunction) -> Result<FunctionalValue> {
    check_len(disc, u.len())?;
    let g = disc.grid();
    let v = u.values();
    disc.pair_sum(|i, j| phi.eval((v[i] - v[j]).abs(), g.node(i), g.node(j))).map(extended)
}

/// `F(v) - F(u)`, summed pair by pair so that small increments keep their
/// relative accuracy.
#[allow(non_snake_case)]
pub fn eval_F_increment(disc: &Discretization, phi: &PhiFunction, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    check_len(disc, u.len())?;
    check_len(disc, v.len())?;
    let g = disc.grid();
    let (a, b) = (u.values(), v.values());
    disc.quadrature_double(|i, j| {
        let (xi, xj) = (g.node(i), g.node(j));
        phi.eval((b[i] - b[j]).abs(), xi, xj) - phi.eval((a[i] - a[j]).abs(), xi, xj)
    })
}

/// `G(u) = F(u) + Σ |u_i|^p w_i`
#[allow(non_snake_case)]
pub fn eval_G(disc: &Discretization, phi: &PhiFunction, p_minus: f64, u: &GridFunction) -> Result<FunctionalValue> {
    let f = eval_F(disc, phi, u)?;
    let local = u.lp_power(p_minus);
    let total = f.value() + local;
    Ok(FunctionalValue::with_terms(total, vec![("nonlocal", f.value()), ("local", local)]))
}

/// `F_p(u) = ΣΣ |u_i - u_j|^p a_ij w_i w_j`
#[allow(non_snake_case)]
pub fn eval_F_power(disc: &Discretization, p: f64, u: &GridFunction) -> Result<FunctionalValue> {
    if !(p >= 1.0) {
        return Err(Error::InvalidOptions(format!("power exponent must be >= 1, got {p}")));
    }
    check_len(disc, u.len())?;
    let v = u.values();
    let pow = |t: f64| if p == 2.0 { t * t } else { t.powf(p) };
    disc.pair_sum(|i, j| pow((v[i] - v[j]).abs())).map(extended)
}

/// `H(U) = ΣΣ φ(|U_ij|, x_i, x_j) a_ij w_i w_j`
#[allow(non_snake_case)]
pub fn eval_H(disc: &Discretization, phi: &PhiFunction, u: &PairFunction) -> Result<FunctionalValue> {
    check_len(disc, u.n())?;
    let g = disc.grid();
    disc.pair_sum(|i, j| phi.eval(u.get(i, j).abs(), g.node(i), g.node(j))).map(extended)
}

/// `H*(W) = ΣΣ φ*(|W_ij|, x_i, x_j) a_ij w_i w_j`
#[allow(non_snake_case)]
pub fn eval_H_star(disc: &Discretization, phi: &PhiFunction, w: &PairFunction) -> Result<FunctionalValue> {
    check_len(disc, w.n())?;
    let g = disc.grid();
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let v = disc.pair_sum(|i, j| match conjugate(phi, w.get(i, j).abs(), g.node(i), g.node(j)) {
        Ok(c) => c,
        Err(e) => {
            failure.lock().expect("error slot").get_or_insert(e);
            0.0
        }
    })?;
    if let Some(e) = failure.into_inner().expect("error slot") {
        return Err(e);
    }
    Ok(extended(v))
}

/// `Φ(u, w) = ΣΣ (u_i - u_j) φ'(|w_i - w_j|) sign(w_i - w_j) a_ij w_i w_j`;
/// pairs with `w_i = w_j` contribute 0.
#[allow(non_snake_case)]
pub fn eval_pairing_Phi(disc: &Discretization, phi: &PhiFunction, u: &GridFunction, w: &GridFunction) -> Result<f64> {
    check_len(disc, u.len())?;
    check_len(disc, w.len())?;
    let g = disc.grid();
    let (uv, wv) = (u.values(), w.values());
    disc.quadrature_double(|i, j| {
        let dw = wv[i] - wv[j];
        if dw == 0.0 {
            return 0.0;
        }
        (uv[i] - uv[j]) * phi.derivative(dw.abs(), g.node(i), g.node(j)) * sign(dw)
    })
}

/// First variation `ℓ(u, v) = ΣΣ φ'(|u_i - u_j|) sign(u_i - u_j) (v_i - v_j) a_ij w_i w_j`.
pub fn eval_ell(disc: &Discretization, phi: &PhiFunction, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    eval_pairing_Phi(disc, phi, v, u)
}

/// `max_i |Σ_j (W_ij a_ij - W_ji a_ji) w_j|`; zero for members of the
/// subspace of balanced pair functions.
pub fn m_subspace_residual(disc: &Discretization, w: &PairFunction) -> Result<f64> {
    check_len(disc, w.n())?;
    let n = disc.len();
    let g = disc.grid();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let terms: Vec<f64> = (0..n)
                .map(|j| (w.get(i, j) * disc.weight(i, j) - w.get(j, i) * disc.weight(j, i)) / g.weight(i))
                .collect();
            pairwise_sum(&terms).abs()
        })
        .collect();
    if let Some(i) = rows.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteIntegrand { i, j: i, value: rows[i] });
    }
    Ok(rows.into_iter().fold(0.0, f64::max))
}
