use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr, VarKind};

/// Convolution weight `a(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `a = 1` on `|z| <= r`, 0 outside.
    Indicator { r: f64 },
    /// `a = exp(-|z|² / (2 σ²))`, lower bound taken on the ball of radius `r0` (default `σ`).
    Gaussian {
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r0: Option<f64>,
    },
    /// `a = exp(-λ |z|)`, lower bound taken on the ball of radius `r0` (default `1/λ`).
    Exp {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r0: Option<f64>,
    },
    /// Closed form in the offset `z0, z1` and its length `r`.
    Expression {
        expr: Expr,
        r0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c0: Option<f64>,
    },
}

impl KernelSpec {
    /// `a ≡ 1` on every pair of a domain with the given diameter.
    pub fn constant_on(diameter: f64) -> Self {
        KernelSpec::Indicator { r: diameter }
    }
}

/// A kernel with its lower bound `a >= c0` on the ball of radius `r0` and
/// its L¹ mass.
#[derive(Debug, Clone)]
pub struct Kernel {
    spec: KernelSpec,
    dim: usize,
    c0: f64,
    r0: f64,
    l1_mass: f64,
}

const BALL_SAMPLES_1D: usize = 401;
const BALL_SAMPLES_2D: usize = 61;

pub fn build_kernel(spec: &KernelSpec, dim: usize) -> Result<Kernel> {
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidKernel(format!("dimension {dim} is not 1 or 2")));
    }
    let positive = |v: f64, what: &str| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidKernel(format!("{what} must be positive and finite, got {v}")))
        }
    };
    let d = dim as f64;
    let (c0, r0, l1) = match spec {
        KernelSpec::Indicator { r } => {
            let r = positive(*r, "indicator radius")?;
            (1.0, r, if dim == 1 { 2.0 * r } else { PI * r * r })
        }
        KernelSpec::Gaussian { sigma, r0 } => {
            let s = positive(*sigma, "gaussian width")?;
            let r0 = positive(r0.unwrap_or(s), "ball radius")?;
            ((-r0 * r0 / (2.0 * s * s)).exp(), r0, (2.0 * PI * s * s).powf(d / 2.0))
        }
        KernelSpec::Exp { lambda, r0 } => {
            let l = positive(*lambda, "exponential rate")?;
            let r0 = positive(r0.unwrap_or(1.0 / l), "ball radius")?;
            ((-l * r0).exp(), r0, if dim == 1 { 2.0 / l } else { 2.0 * PI / (l * l) })
        }
        KernelSpec::Expression { expr, r0, c0 } => {
            expr.check_variables(&[VarKind::Offset], dim)?;
            let r0 = positive(*r0, "ball radius")?;
            (c0.unwrap_or(f64::NAN), r0, f64::NAN)
        }
    };
    let mut kernel = Kernel { spec: spec.clone(), dim, c0, r0, l1_mass: l1 };
    kernel.verify_ball()?;
    if kernel.l1_mass.is_nan() {
        kernel.l1_mass = kernel.midpoint_mass();
        if !kernel.l1_mass.is_finite() {
            return Err(Error::InvalidKernel(format!("L1 mass is {}", kernel.l1_mass)));
        }
    }
    Ok(kernel)
}

impl Kernel {
    /// `a(z)` at the offset `z = x - y`.
    #[inline]
    pub fn eval(&self, offset: &[f64]) -> f64 {
        let r2 = offset.iter().map(|c| c * c).sum::<f64>();
        match &self.spec {
            KernelSpec::Indicator { r } => {
                if r2 <= r * r {
                    1.0
                } else {
                    0.0
                }
            }
            KernelSpec::Gaussian { sigma, .. } => (-r2 / (2.0 * sigma * sigma)).exp(),
            KernelSpec::Exp { lambda, .. } => (-lambda * r2.sqrt()).exp(),
            KernelSpec::Expression { expr, .. } => expr.eval(&Bindings::offset(offset)),
        }
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn l1_mass(&self) -> f64 {
        self.l1_mass
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Offsets sampled in the closed ball of radius `r`.
    fn ball_offsets(&self, r: f64) -> Vec<Vec<f64>> {
        if self.dim == 1 {
            let n = BALL_SAMPLES_1D;
            (0..n).map(|i| vec![-r + 2.0 * r * i as f64 / (n - 1) as f64]).collect()
        } else {
            let n = BALL_SAMPLES_2D;
            let mut out = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let a = -r + 2.0 * r * i as f64 / (n - 1) as f64;
                    let b = -r + 2.0 * r * j as f64 / (n - 1) as f64;
                    if a * a + b * b <= r * r {
                        out.push(vec![a, b]);
                    }
                }
            }
            let rb = r * (1.0 - 1e-12);
            for k in 0..4 * n {
                let t = 2.0 * PI * k as f64 / (4 * n) as f64;
                out.push(vec![rb * t.cos(), rb * t.sin()]);
            }
            out
        }
    }

    /// Checks `a >= c0` on the ball (measuring `c0` when not given) and
    /// `a >= 0` on the surrounding box.
    fn verify_ball(&mut self) -> Result<()> {
        let inside = self.ball_offsets(self.r0);
        let (mut min, mut at) = (f64::INFINITY, vec![0.0; self.dim]);
        for off in &inside {
            let v = self.eval(off);
            if !(v >= min) {
                min = v;
                at = off.clone();
            }
        }
        if self.c0.is_nan() {
            if !(min > 0.0) {
                return Err(Error::KernelLowerBoundViolated { offset: at, value: min, c0: 0.0 });
            }
            self.c0 = min;
        } else if !(min >= self.c0 * (1.0 - 1e-12)) || !(self.c0 > 0.0) {
            return Err(Error::KernelLowerBoundViolated { offset: at, value: min, c0: self.c0 });
        }
        for off in self.ball_offsets(4.0 * self.r0) {
            let v = self.eval(&off);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidKernel(format!("a({off:?}) = {v} is negative or not finite")));
            }
        }
        Ok(())
    }

    /// Midpoint rule on the box of radius `4 r0`.
    fn midpoint_mass(&self) -> f64 {
        let r = 4.0 * self.r0;
        if self.dim == 1 {
            let n = 4000;
            let h = 2.0 * r / n as f64;
            (0..n).map(|i| self.eval(&[-r + (i as f64 + 0.5) * h]).abs()).sum::<f64>() * h
        } else {
            let n = 400;
            let h = 2.0 * r / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.eval(&[-r + (i as f64 + 0.5) * h, -r + (j as f64 + 0.5) * h]).abs();
                }
            }
            s * h * h
        }
    }
}
