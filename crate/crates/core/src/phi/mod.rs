//! Admissible integrands `φ(z, x, y)`.
//!
//! A [`PhiExpression`] is the serializable recipe (a JSON tree of primitive
//! families and combinators); [`build_phi`] turns it into a [`PhiFunction`]
//! with analytic first and second `z`-derivatives and conservative growth
//! metadata propagated through every combinator.
//!
//! Growth metadata (`p_minus`, `p_plus`, `beta`, `c1`, `c2`, `c7`) follows
//! the usual admissibility conditions:
//!
//! * `z ↦ φ/z^p_minus` almost increasing and `z ↦ φ/z^p_plus` almost
//!   decreasing, both with constant `beta`;
//! * `1/c1 <= φ(1, x, y) <= c1`, `φ(0) = 0`, `φ(z) > 0` for `z > 0`;
//! * `0 < z φ'(z) <= c2 φ(z)`;
//! * optionally `φ''(z) >= c7 φ(z) / z²` (sufficient for uniform convexity).

mod conditions;
mod conjugate;
pub mod families;
mod node;
mod sampling;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr, VarKind};

pub use conditions::{
    check_conditions, estimate_growth_constants, ConditionReport, ConvexityEntry, ConvexityRecord, GrowthCheck,
    GrowthEstimate, RangeCheck,
};
pub use conjugate::conjugate;
pub use node::{Jet, Order};
pub use sampling::{PhiDomain, SamplingConfig, SamplingRecord};

use node::PhiNode;

/// A coefficient field `b(x, y)`: a constant or a closed-form expression of
/// the two points, optionally with stated bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Const {
        #[serde(rename = "const")]
        value: f64,
    },
    Expr {
        expr: Expr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<[f64; 2]>,
    },
}

impl FieldSpec {
    pub fn constant(value: f64) -> Self {
        FieldSpec::Const { value }
    }

    pub fn expr(src: &str) -> Result<Self> {
        Ok(FieldSpec::Expr { expr: Expr::parse(src)?, bounds: None })
    }
}

impl From<f64> for FieldSpec {
    fn from(value: f64) -> Self {
        FieldSpec::Const { value }
    }
}

/// Runtime form of a coefficient field.
#[derive(Debug, Clone)]
pub(crate) enum Field {
    Const(f64),
    Expr(Expr),
}

impl Field {
    #[inline]
    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Field::Const(v) => *v,
            Field::Expr(e) => e.eval(&Bindings::points(0.0, x, y)),
        }
    }
}

/// Serializable recipe for an integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiExpression {
    /// `b(x,y) z^p(x,y)`
    Power {
        p: FieldSpec,
        #[serde(default = "one")]
        b: FieldSpec,
    },
    /// `ln^gamma(1 + upsilon z)`; usable only as a multiplier or perturbation.
    Log {
        gamma: FieldSpec,
        upsilon: FieldSpec,
    },
    /// Arbitrary closed form in `z, x0.., y0..`. Acts as an integrand only
    /// when the growth exponents are declared.
    Custom {
        expr: Expr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_minus: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_plus: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
    Sum {
        args: Vec<PhiExpression>,
    },
    Scale {
        args: Vec<PhiExpression>,
        b: FieldSpec,
    },
    Product {
        args: Vec<PhiExpression>,
    },
    /// `args[0](args[1](z))`
    Compose {
        args: Vec<PhiExpression>,
    },
    /// `args[0] + args[1]` with a small, possibly non-convex second term.
    Perturb {
        args: Vec<PhiExpression>,
    },
    /// `args[1] * args[0]` with a slowly growing multiplier `args[1]`.
    PsiMultiply {
        args: Vec<PhiExpression>,
    },
}

fn one() -> FieldSpec {
    FieldSpec::constant(1.0)
}

impl PhiExpression {
    pub fn power(p: impl Into<FieldSpec>, b: impl Into<FieldSpec>) -> Self {
        PhiExpression::Power { p: p.into(), b: b.into() }
    }

    pub fn square() -> Self {
        Self::power(2.0, 1.0)
    }

    pub fn log(gamma: impl Into<FieldSpec>, upsilon: impl Into<FieldSpec>) -> Self {
        PhiExpression::Log { gamma: gamma.into(), upsilon: upsilon.into() }
    }

    pub fn custom(expr: &str) -> Result<Self> {
        Ok(PhiExpression::Custom { expr: Expr::parse(expr)?, p_minus: None, p_plus: None, beta: None })
    }

    pub fn sum(args: Vec<PhiExpression>) -> Self {
        PhiExpression::Sum { args }
    }

    pub fn scale(arg: PhiExpression, b: impl Into<FieldSpec>) -> Self {
        PhiExpression::Scale { args: vec![arg], b: b.into() }
    }

    pub fn product(args: Vec<PhiExpression>) -> Self {
        PhiExpression::Product { args }
    }

    pub fn compose(outer: PhiExpression, inner: PhiExpression) -> Self {
        PhiExpression::Compose { args: vec![outer, inner] }
    }

    pub fn perturb(base: PhiExpression, psi: PhiExpression) -> Self {
        PhiExpression::Perturb { args: vec![base, psi] }
    }

    pub fn psi_multiply(base: PhiExpression, psi: PhiExpression) -> Self {
        PhiExpression::PsiMultiply { args: vec![base, psi] }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("expression serializes")
    }
}

/// Growth constants of an admissible integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub p_minus: f64,
    pub p_plus: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c7: Option<f64>,
}

impl GrowthConstants {
    /// Exponents of the conjugate: `(q_minus, q_plus)`.
    pub fn conjugate_exponents(&self) -> (f64, f64) {
        (self.p_plus / (self.p_plus - 1.0), self.p_minus / (self.p_minus - 1.0))
    }
}

/// Constants certified while building a combinator node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `|psi''| <= c8 φ''`
    Perturbation { c8: f64 },
    /// `psi'' >= -c9 psi'/z - c10 psi/z²`, `psi/z^q` non-increasing
    Multiplier { c9: f64, c10: f64, q: f64 },
}

/// An admissible integrand with evaluators and growth metadata.
#[derive(Debug, Clone)]
pub struct PhiFunction {
    expression: PhiExpression,
    node: Arc<PhiNode>,
    growth: GrowthConstants,
    certificates: Vec<Certificate>,
    domain: PhiDomain,
}

impl PhiFunction {
    /// `φ(z, x, y)`; exactly 0 at `z = 0`.
    #[inline]
    pub fn eval(&self, z: f64, x: &[f64], y: &[f64]) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        self.node.jet(z, x, y, Order::Value).value
    }

    /// `φ'(z, x, y)`; central difference when the analytic value is not
    /// finite. Signals [`Error::NonPositiveDerivative`] when the result is
    /// not positive.
    pub fn eval_prime(&self, z: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        let d = self.derivative(z, x, y);
        if !(d > 0.0) {
            return Err(Error::NonPositiveDerivative { z, value: d });
        }
        Ok(d)
    }

    /// Unchecked `φ'`, used in the hot loops; zero at `z = 0`.
    #[inline]
    pub fn derivative(&self, z: f64, x: &[f64], y: &[f64]) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let d = self.node.jet(z, x, y, Order::First).d1;
        if d.is_finite() {
            d
        } else {
            self.central_difference(z, x, y)
        }
    }

    /// `φ''(z, x, y)` where it is finite.
    pub fn eval_second(&self, z: f64, x: &[f64], y: &[f64]) -> Option<f64> {
        let d2 = self.node.jet(z, x, y, Order::Second).d2;
        d2.is_finite().then_some(d2)
    }

    /// Value with both derivatives.
    pub fn jet(&self, z: f64, x: &[f64], y: &[f64]) -> Jet {
        self.node.jet(z, x, y, Order::Second)
    }

    fn central_difference(&self, z: f64, x: &[f64], y: &[f64]) -> f64 {
        let h = z.max(1.0) * f64::EPSILON.cbrt();
        let f = |t: f64| self.node.jet(t, x, y, Order::Value).value;
        if z > h {
            (f(z + h) - f(z - h)) / (2.0 * h)
        } else {
            (f(z + h) - f(z)) / h
        }
    }

    pub fn growth(&self) -> &GrowthConstants {
        &self.growth
    }

    pub fn p_minus(&self) -> f64 {
        self.growth.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.growth.p_plus
    }

    pub fn beta(&self) -> f64 {
        self.growth.beta
    }

    pub fn certificates(&self) -> &[Certificate] {
        &self.certificates
    }

    pub fn expression(&self) -> &PhiExpression {
        &self.expression
    }

    /// Box the (x, y) samples and field bounds were taken from.
    pub fn domain(&self) -> &PhiDomain {
        &self.domain
    }

    /// Replaces the growth metadata, e.g. with empirical constants.
    pub fn with_growth(&self, growth: GrowthConstants) -> Self {
        PhiFunction { growth, ..self.clone() }
    }

    /// Re-estimates the growth constants on `sampling` and stores them.
    pub fn with_estimated_constants(&self, sampling: &SamplingConfig) -> Result<Self> {
        let est = estimate_growth_constants(self, sampling)?;
        Ok(self.with_growth(est.constants))
    }

    /// Short content hash of the expression tree.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.expression.to_json().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Builds an integrand on the default sampling box `[0, 1]`.
pub fn build_phi(expression: &PhiExpression) -> Result<PhiFunction> {
    build_phi_with(expression, &SamplingConfig::default())
}

/// Builds an integrand, bounding fields and certifying combinators on the
/// samples of `sampling`.
pub fn build_phi_with(expression: &PhiExpression, sampling: &SamplingConfig) -> Result<PhiFunction> {
    let ctx = BuildContext::new(sampling);
    let built = ctx.build(expression)?;
    let growth = built.growth.ok_or_else(|| {
        Error::NotAdmissible("top-level expression is usable only as a multiplier or perturbation".into())
    })?;
    check_exponents(growth.p_minus, growth.p_plus)?;
    Ok(PhiFunction {
        expression: expression.clone(),
        node: Arc::new(built.node),
        growth,
        certificates: built.certificates,
        domain: sampling.domain.clone(),
    })
}

fn check_exponents(p_minus: f64, p_plus: f64) -> Result<()> {
    if p_minus > 1.0 && p_minus <= p_plus && p_plus.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent { p_minus, p_plus })
    }
}

struct Built {
    node: PhiNode,
    growth: Option<GrowthConstants>,
    certificates: Vec<Certificate>,
}

struct BuildContext {
    dim: usize,
    /// (x, y) pairs for field bounds and combinator checks
    points: Vec<(Vec<f64>, Vec<f64>)>,
    /// dense z grid for combinator checks
    z_dense: Vec<f64>,
}

impl BuildContext {
    fn new(sampling: &SamplingConfig) -> Self {
        let mut points = sampling.xy_samples();
        points.extend(sampling.domain.lattice_pairs(5));
        let dense = SamplingConfig { z_points: 256, ..sampling.clone() };
        BuildContext { dim: sampling.domain.dim(), points, z_dense: dense.z_grid() }
    }

    fn field(&self, spec: &FieldSpec) -> Result<(Field, f64, f64)> {
        match spec {
            FieldSpec::Const { value } => Ok((Field::Const(*value), *value, *value)),
            FieldSpec::Expr { expr, bounds } => {
                expr.check_variables(&[VarKind::Points], self.dim)?;
                let field = Field::Expr(expr.clone());
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for (x, y) in &self.points {
                    let v = field.eval(x, y);
                    if !v.is_finite() {
                        return Err(Error::NotAdmissible(format!("field `{expr}` is not finite at {x:?}, {y:?}")));
                    }
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if let Some([blo, bhi]) = bounds {
                    if lo < blo - 1e-12 || hi > bhi + 1e-12 {
                        return Err(Error::NotAdmissible(format!(
                            "field `{expr}` leaves its stated bounds [{blo}, {bhi}] (sampled [{lo}, {hi}])"
                        )));
                    }
                    lo = *blo;
                    hi = *bhi;
                }
                Ok((field, lo, hi))
            }
        }
    }

    fn positive_field(&self, spec: &FieldSpec, what: &str) -> Result<(Field, f64, f64)> {
        let (field, lo, hi) = self.field(spec)?;
        if !(lo > 0.0) {
            return Err(Error::NotAdmissible(format!(
                "{what} must be bounded below by a positive constant, lower bound is {lo}"
            )));
        }
        Ok((field, lo, hi))
    }

    fn admissible(&self, e: &PhiExpression, role: &str) -> Result<(PhiNode, GrowthConstants, Vec<Certificate>)> {
        let built = self.build(e)?;
        let growth =
            built.growth.ok_or_else(|| Error::NotAdmissible(format!("{role} must be an admissible integrand")))?;
        Ok((built.node, growth, built.certificates))
    }

    fn arity(args: &[PhiExpression], kind: &str, n: Option<usize>) -> Result<()> {
        let ok = match n {
            Some(n) => args.len() == n,
            None => !args.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NotAdmissible(format!("`{kind}` got {} arguments", args.len())))
        }
    }

    fn build(&self, e: &PhiExpression) -> Result<Built> {
        match e {
            PhiExpression::Power { p, b } => {
                let (p, pl, ph) = self.field(p)?;
                check_exponents(pl, ph)?;
                let (b, bl, bh) = self.positive_field(b, "power coefficient")?;
                Ok(Built {
                    node: PhiNode::Power { p, b },
                    growth: Some(GrowthConstants {
                        p_minus: pl,
                        p_plus: ph,
                        beta: 1.0,
                        c1: bh.max(1.0 / bl),
                        c2: ph,
                        c7: Some(pl * (pl - 1.0)),
                    }),
                    certificates: vec![],
                })
            }
            PhiExpression::Log { gamma, upsilon } => {
                let (gamma, gl, _) = self.field(gamma)?;
                if gl < 1.0 {
                    return Err(Error::NotAdmissible(format!("log exponent must be >= 1, lower bound is {gl}")));
                }
                let (upsilon, _, _) = self.positive_field(upsilon, "log scale")?;
                Ok(Built { node: PhiNode::Log { gamma, upsilon }, growth: None, certificates: vec![] })
            }
            PhiExpression::Custom { expr, p_minus, p_plus, beta } => {
                expr.check_variables(&[VarKind::Z, VarKind::Points], self.dim)?;
                let d1 = expr.derivative_z();
                let d2 = d1.derivative_z();
                let node = PhiNode::Custom { expr: expr.clone(), d1, d2 };
                let growth = match (p_minus, p_plus) {
                    (Some(pm), Some(pp)) => {
                        check_exponents(*pm, *pp)?;
                        Some(self.declared_growth(&node, *pm, *pp, beta.unwrap_or(1.0)))
                    }
                    (None, None) => None,
                    _ => return Err(Error::NotAdmissible("custom integrand needs both p_minus and p_plus".into())),
                };
                Ok(Built { node, growth, certificates: vec![] })
            }
            PhiExpression::Sum { args } => {
                Self::arity(args, "sum", None)?;
                let mut nodes = Vec::new();
                let mut certs = Vec::new();
                let mut acc: Option<GrowthConstants> = None;
                for a in args {
                    let (node, g, c) = self.admissible(a, "every sum term")?;
                    nodes.push(node);
                    certs.extend(c);
                    acc = Some(match acc {
                        None => g,
                        Some(s) => GrowthConstants {
                            p_minus: s.p_minus.min(g.p_minus),
                            p_plus: s.p_plus.max(g.p_plus),
                            beta: s.beta.max(g.beta),
                            c1: s.c1 + g.c1,
                            c2: s.c2.max(g.c2),
                            c7: s.c7.zip(g.c7).map(|(a, b)| a.min(b)),
                        },
                    });
                }
                Ok(Built { node: PhiNode::Sum(nodes), growth: acc, certificates: certs })
            }
            PhiExpression::Scale { args, b } => {
                Self::arity(args, "scale", Some(1))?;
                let (node, g, certs) = self.admissible(&args[0], "the scaled function")?;
                let (b, bl, bh) = self.positive_field(b, "scale factor")?;
                Ok(Built {
                    node: PhiNode::Scale(Box::new(node), b),
                    growth: Some(GrowthConstants { c1: g.c1 * bh.max(1.0 / bl), ..g }),
                    certificates: certs,
                })
            }
            PhiExpression::Product { args } => {
                Self::arity(args, "product", None)?;
                let mut nodes = Vec::new();
                let mut certs = Vec::new();
                let mut acc: Option<GrowthConstants> = None;
                for a in args {
                    let (node, g, c) = self.admissible(a, "every product factor")?;
                    nodes.push(node);
                    certs.extend(c);
                    acc = Some(match acc {
                        None => g,
                        Some(s) => GrowthConstants {
                            p_minus: s.p_minus + g.p_minus,
                            p_plus: s.p_plus + g.p_plus,
                            beta: s.beta * g.beta,
                            c1: s.c1 * g.c1,
                            c2: s.c2 + g.c2,
                            c7: s.c7.zip(g.c7).map(|(a, b)| a + b),
                        },
                    });
                }
                Ok(Built { node: PhiNode::Product(nodes), growth: acc, certificates: certs })
            }
            PhiExpression::Compose { args } => {
                Self::arity(args, "compose", Some(2))?;
                let (outer, go, mut certs) = self.admissible(&args[0], "the outer function")?;
                let (inner, gi, ci) = self.admissible(&args[1], "the inner function")?;
                certs.extend(ci);
                let growth = GrowthConstants {
                    p_minus: go.p_minus * gi.p_minus,
                    p_plus: go.p_plus * gi.p_plus,
                    beta: go.beta * gi.beta.powf(go.p_plus),
                    c1: go.beta * go.c1 * gi.c1.powf(go.p_plus),
                    c2: go.c2 * gi.c2,
                    c7: go.c7.filter(|_| gi.c7.is_some()),
                };
                Ok(Built {
                    node: PhiNode::Compose { outer: Box::new(outer), inner: Box::new(inner) },
                    growth: Some(growth),
                    certificates: certs,
                })
            }
            PhiExpression::Perturb { args } => {
                Self::arity(args, "perturb", Some(2))?;
                let (base, g, mut certs) = self.admissible(&args[0], "the perturbed function")?;
                let c7 = g.c7.ok_or_else(|| {
                    Error::NotAdmissible("perturbation needs a base with a second-derivative bound".into())
                })?;
                let psi = self.build(&args[1])?;
                certs.extend(psi.certificates.iter().copied());
                let c8 = self.perturbation_constant(&base, &psi.node)?;
                if !(c8 < 1.0) {
                    return Err(Error::PerturbationTooLarge { c8 });
                }
                certs.push(Certificate::Perturbation { c8 });
                let up = (1.0 + c8) / (1.0 - c8);
                let growth = GrowthConstants {
                    beta: g.beta * up,
                    c1: g.c1 * (1.0 + c8).max(1.0 / (1.0 - c8)),
                    c2: g.c2 * up,
                    c7: Some(c7 / up),
                    ..g
                };
                Ok(Built { node: PhiNode::Sum(vec![base, psi.node]), growth: Some(growth), certificates: certs })
            }
            PhiExpression::PsiMultiply { args } => {
                Self::arity(args, "psi_multiply", Some(2))?;
                let (base, g, mut certs) = self.admissible(&args[0], "the multiplied function")?;
                let c7 = g.c7.ok_or_else(|| {
                    Error::NotAdmissible("multiplication needs a base with a second-derivative bound".into())
                })?;
                let psi = self.build(&args[1])?;
                certs.extend(psi.certificates.iter().copied());
                let stats = self.multiplier_stats(&psi.node, c7)?;
                certs.push(Certificate::Multiplier { c9: stats.c9, c10: stats.c10, q: stats.q });
                let growth = GrowthConstants {
                    p_plus: g.p_plus + stats.q,
                    c1: g.c1 * stats.at_one_max.max(1.0 / stats.at_one_min),
                    c2: g.c2 + stats.q,
                    c7: Some(c7 - stats.c10),
                    ..g
                };
                Ok(Built { node: PhiNode::Product(vec![base, psi.node]), growth: Some(growth), certificates: certs })
            }
        }
    }

    /// Growth constants of a custom integrand with declared exponents:
    /// `c1`, `c2`, `c7` are measured on the dense samples.
    fn declared_growth(&self, node: &PhiNode, p_minus: f64, p_plus: f64, beta: f64) -> GrowthConstants {
        let mut c1: f64 = 1.0;
        let mut c2: f64 = 0.0;
        let mut c7 = f64::INFINITY;
        for (x, y) in &self.points {
            let one = node.jet(1.0, x, y, Order::Value).value;
            c1 = c1.max(one).max(1.0 / one);
            for &z in &self.z_dense {
                let j = node.jet(z, x, y, Order::Second);
                c2 = c2.max(z * j.d1 / j.value);
                c7 = c7.min(z * z * j.d2 / j.value);
            }
        }
        GrowthConstants { p_minus, p_plus, beta, c1, c2, c7: (c7 > 0.0 && c7.is_finite()).then_some(c7) }
    }

    /// `sup |psi''| / φ''` on the samples; checks `psi(0) = psi'(0) = 0`.
    fn perturbation_constant(&self, base: &PhiNode, psi: &PhiNode) -> Result<f64> {
        let mut c8: f64 = 0.0;
        for (x, y) in &self.points {
            let at0 = psi.jet(0.0, x, y, Order::First);
            if at0.value.abs() > 1e-12 || at0.d1.abs() > 1e-12 {
                return Err(Error::NotAdmissible(format!(
                    "perturbation must vanish with its derivative at 0, got {} and {}",
                    at0.value, at0.d1
                )));
            }
            for &z in &self.z_dense {
                let phi2 = base.jet(z, x, y, Order::Second).d2;
                let psi2 = psi.jet(z, x, y, Order::Second).d2;
                if !(phi2 > 0.0) || !psi2.is_finite() {
                    return Err(Error::NotAdmissible(format!("second derivatives unusable at z = {z}")));
                }
                c8 = c8.max(psi2.abs() / phi2);
            }
        }
        Ok(c8)
    }

    fn multiplier_stats(&self, psi: &PhiNode, c7: f64) -> Result<MultiplierStats> {
        let mut q: f64 = 0.0;
        let mut c9_free: f64 = 0.0;
        let mut at_one_min = f64::INFINITY;
        let mut at_one_max: f64 = 0.0;
        let mut samples = Vec::new();
        for (x, y) in &self.points {
            let one = psi.jet(1.0, x, y, Order::Value).value;
            at_one_min = at_one_min.min(one);
            at_one_max = at_one_max.max(one);
            if psi.jet(0.0, x, y, Order::Value).value.abs() > 1e-12 {
                return Err(Error::NotAdmissible("multiplier must vanish at 0".into()));
            }
            for &z in &self.z_dense {
                let j = psi.jet(z, x, y, Order::Second);
                if !(j.value > 0.0) || !(j.d1 >= 0.0) || !j.d2.is_finite() {
                    return Err(Error::NotAdmissible(format!(
                        "multiplier must be positive and non-decreasing, at z = {z}: value {}, derivative {}",
                        j.value, j.d1
                    )));
                }
                q = q.max(z * j.d1 / j.value);
                if j.d1 > 0.0 {
                    c9_free = c9_free.max(-z * j.d2 / j.d1);
                }
                samples.push((z, j));
            }
        }
        if !(at_one_min > 0.0) {
            return Err(Error::NotAdmissible("multiplier must be positive at z = 1".into()));
        }
        // Prefer c10 = 0; otherwise fix c9 just under 2 and measure c10.
        let (c9, c10) = if c9_free < 2.0 {
            (c9_free, 0.0)
        } else {
            let c9 = 1.99;
            let c10 = samples.iter().map(|(z, j)| -(z * z * j.d2 + c9 * z * j.d1) / j.value).fold(0.0, f64::max);
            (c9, c10)
        };
        if !(c9 < 2.0) || !(c10 < c7) {
            return Err(Error::MultiplierRejected { c9, c10, c7 });
        }
        Ok(MultiplierStats { q, c9, c10, at_one_min, at_one_max })
    }
}

struct MultiplierStats {
    q: f64,
    c9: f64,
    c10: f64,
    at_one_min: f64,
    at_one_max: f64,
}
