use crate::expr::{Bindings, Expr};

use super::Field;

/// Value and the first two `z`-derivatives of an integrand at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    const ZERO: Jet = Jet { value: 0.0, d1: 0.0, d2: 0.0 };

    fn scale(self, b: f64) -> Jet {
        Jet { value: b * self.value, d1: b * self.d1, d2: b * self.d2 }
    }

    fn add(self, o: Jet) -> Jet {
        Jet { value: self.value + o.value, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }

    fn mul(self, o: Jet) -> Jet {
        Jet {
            value: self.value * o.value,
            d1: self.d1 * o.value + self.value * o.d1,
            d2: self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        }
    }
}

/// How many derivatives a caller needs; lower orders skip work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Value,
    First,
    Second,
}

/// Evaluation tree behind a [`super::PhiFunction`].
#[derive(Debug, Clone)]
pub(crate) enum PhiNode {
    /// `b(x,y) * z^p(x,y)`
    Power {
        p: Field,
        b: Field,
    },
    /// `ln(1 + upsilon(x,y) z)^gamma(x,y)`
    Log {
        gamma: Field,
        upsilon: Field,
    },
    Custom {
        expr: Expr,
        d1: Expr,
        d2: Expr,
    },
    Sum(Vec<PhiNode>),
    Scale(Box<PhiNode>, Field),
    Product(Vec<PhiNode>),
    Compose {
        outer: Box<PhiNode>,
        inner: Box<PhiNode>,
    },
}

impl PhiNode {
    pub(crate) fn jet(&self, z: f64, x: &[f64], y: &[f64], order: Order) -> Jet {
        match self {
            PhiNode::Power { p, b } => {
                let p = p.eval(x, y);
                let b = b.eval(x, y);
                power_jet(z, p, order).scale(b)
            }
            PhiNode::Log { gamma, upsilon } => log_jet(z, gamma.eval(x, y), upsilon.eval(x, y), order),
            PhiNode::Custom { expr, d1, d2 } => {
                let bind = Bindings::points(z, x, y);
                let mut jet = Jet { value: expr.eval(&bind), d1: 0.0, d2: 0.0 };
                if order >= Order::First {
                    jet.d1 = d1.eval(&bind);
                }
                if order >= Order::Second {
                    jet.d2 = d2.eval(&bind);
                }
                jet
            }
            PhiNode::Sum(terms) => terms.iter().fold(Jet::ZERO, |acc, t| acc.add(t.jet(z, x, y, order))),
            PhiNode::Scale(inner, b) => inner.jet(z, x, y, order).scale(b.eval(x, y)),
            PhiNode::Product(factors) => {
                let mut iter = factors.iter();
                let first = iter.next().map(|f| f.jet(z, x, y, order)).unwrap_or(Jet::ZERO);
                iter.fold(first, |acc, f| acc.mul(f.jet(z, x, y, order)))
            }
            PhiNode::Compose { outer, inner } => {
                let g = inner.jet(z, x, y, order);
                let f = outer.jet(g.value, x, y, order);
                Jet { value: f.value, d1: f.d1 * g.d1, d2: f.d2 * g.d1 * g.d1 + f.d1 * g.d2 }
            }
        }
    }
}

fn power_jet(z: f64, p: f64, order: Order) -> Jet {
    if z == 0.0 {
        // p > 1 for admissible powers; the limits are taken from the right
        let d1 = if p > 1.0 {
            0.0
        } else if p == 1.0 {
            1.0
        } else {
            f64::INFINITY
        };
        let d2 = if p > 2.0 || p == 1.0 {
            0.0
        } else if p == 2.0 {
            2.0
        } else {
            f64::INFINITY
        };
        return Jet { value: 0.0, d1, d2 };
    }
    if p == 2.0 {
        return Jet { value: z * z, d1: 2.0 * z, d2: 2.0 };
    }
    let value = z.powf(p);
    let mut jet = Jet { value, d1: 0.0, d2: 0.0 };
    if order >= Order::First {
        jet.d1 = p * value / z;
    }
    if order >= Order::Second {
        jet.d2 = p * (p - 1.0) * value / (z * z);
    }
    jet
}

fn log_jet(z: f64, gamma: f64, upsilon: f64, order: Order) -> Jet {
    let l = (upsilon * z).ln_1p();
    let value = l.powf(gamma);
    let mut jet = Jet { value, d1: 0.0, d2: 0.0 };
    if order == Order::Value {
        return jet;
    }
    let q = upsilon / (1.0 + upsilon * z);
    // gamma L^(gamma-1) with the gamma = 1 case kept finite at z = 0
    let lg1 = if gamma == 1.0 { 1.0 } else { l.powf(gamma - 1.0) };
    jet.d1 = gamma * lg1 * q;
    if order >= Order::Second {
        let curvature = if gamma == 1.0 { 0.0 } else { gamma * (gamma - 1.0) * l.powf(gamma - 2.0) * q * q };
        jet.d2 = curvature - gamma * lg1 * q * q;
    }
    jet
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(node: &PhiNode, z: f64) -> (f64, f64) {
        let h = 1e-5 * z.max(1.0);
        let f = |t: f64| node.jet(t, &[0.3], &[0.6], Order::Value).value;
        let d1 = (f(z + h) - f(z - h)) / (2.0 * h);
        let d2 = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn chain_rules_agree_with_differences() {
        let two = Field::Const(2.0);
        let power = |p: f64| PhiNode::Power { p: Field::Const(p), b: Field::Const(1.0) };
        let nodes = vec![
            power(2.5),
            PhiNode::Log { gamma: Field::Const(1.5), upsilon: two.clone() },
            PhiNode::Sum(vec![power(2.0), power(3.0)]),
            PhiNode::Product(vec![power(2.0), PhiNode::Log { gamma: Field::Const(1.0), upsilon: two.clone() }]),
            PhiNode::Compose { outer: Box::new(power(1.5)), inner: Box::new(power(2.0)) },
            PhiNode::Scale(Box::new(power(3.0)), two),
        ];
        for node in &nodes {
            for &z in &[0.2, 0.9, 1.7, 4.0] {
                let jet = node.jet(z, &[0.3], &[0.6], Order::Second);
                let (d1, d2) = fd(node, z);
                assert!((jet.d1 - d1).abs() <= 1e-7 * (1.0 + d1.abs()), "{node:?} d1 at {z}");
                assert!((jet.d2 - d2).abs() <= 1e-4 * (1.0 + d2.abs()), "{node:?} d2 at {z}");
            }
        }
    }

    #[test]
    fn power_at_zero() {
        let jet = power_jet(0.0, 2.5, Order::Second);
        assert_eq!(jet.value, 0.0);
        assert_eq!(jet.d1, 0.0);
        assert_eq!(jet.d2, 0.0);
    }

    #[test]
    fn log_at_zero_is_finite() {
        let jet = log_jet(0.0, 1.0, 2.0, Order::Second);
        assert_eq!(jet.value, 0.0);
        assert_eq!(jet.d1, 2.0);
        assert_eq!(jet.d2, -4.0);
    }
}
