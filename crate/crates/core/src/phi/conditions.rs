use serde::{Deserialize, Serialize};

use super::{GrowthConstants, Jet, PhiFunction, SamplingConfig, SamplingRecord};
use crate::error::{Error, Result};

const REL_SLACK: f64 = 1e-9;
const DELTA_FLOOR: f64 = 1e-6;
const MARGIN: f64 = 1.05;

/// Uniform-convexity estimate for one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityEntry {
    pub epsilon: f64,
    /// Worst `1 - 2φ((s+t)/2) / (φ(s)+φ(t))` over pairs with `|s-t| >= ε max(s,t)`.
    pub delta_hat: f64,
    /// `c7 ε² / (2^(p_plus+4) β)` when `c7` is known.
    pub delta_ref: Option<f64>,
    /// `c7 ε² / (β² 2^(p_plus+5))`, the more pessimistic form.
    pub delta_displayed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityRecord {
    pub entries: Vec<ConvexityEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    /// Worst violation ratio of `φ / z^p_minus` increasing.
    pub beta_increasing: f64,
    /// Worst violation ratio of `φ / z^p_plus` decreasing.
    pub beta_decreasing: f64,
    pub beta_hat: f64,
    pub pass_increasing: bool,
    pub pass_decreasing: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeCheck {
    pub min: f64,
    pub max: f64,
    pub pass: bool,
}

/// Sample-based report on the admissibility conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `φ(0) = 0`, `φ > 0` and strictly increasing on the samples.
    pub positivity: bool,
    pub c2_uniform_convexity: ConvexityRecord,
    pub c3_growth: GrowthCheck,
    /// Observed range of `φ(1, x, y)` against `[1/c1, c1]`.
    pub c4_bounds: RangeCheck,
    /// Observed range of `z φ' / φ` against `(0, c2]`.
    pub c5_derivative: RangeCheck,
    /// Observed range of `z² φ'' / φ`; passes when the infimum is positive.
    pub secder_bound: Option<RangeCheck>,
    pub sampling: SamplingRecord,
}

impl ConditionReport {
    pub fn pass(&self) -> bool {
        self.positivity
            && self.c2_uniform_convexity.pass
            && self.c3_growth.pass
            && self.c4_bounds.pass
            && self.c5_derivative.pass
    }
}

/// Empirical growth constants with and without the safety margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub raw: GrowthConstants,
    pub constants: GrowthConstants,
}

struct Scan {
    zs: Vec<f64>,
    /// per (x, y) sample, jets along `zs`
    jets: Vec<Vec<Jet>>,
    at_zero: Vec<f64>,
    at_one: Vec<f64>,
}

fn scan(phi: &PhiFunction, sampling: &SamplingConfig) -> Scan {
    let zs = sampling.z_grid();
    let samples = sampling.xy_samples();
    let mut jets = Vec::with_capacity(samples.len());
    let mut at_zero = Vec::with_capacity(samples.len());
    let mut at_one = Vec::with_capacity(samples.len());
    for (x, y) in &samples {
        at_zero.push(phi.node.jet(0.0, x, y, super::Order::Value).value);
        at_one.push(phi.eval(1.0, x, y));
        jets.push(
            zs.iter()
                .map(|&z| {
                    let mut j = phi.jet(z, x, y);
                    if !j.d1.is_finite() {
                        j.d1 = phi.derivative(z, x, y);
                    }
                    j
                })
                .collect(),
        );
    }
    Scan { zs, jets, at_zero, at_one }
}

struct Raw {
    positivity: bool,
    beta_inc: f64,
    beta_dec: f64,
    one_min: f64,
    one_max: f64,
    c5_min: f64,
    c5_max: f64,
    c7_min: f64,
    c7_max: f64,
    c7_known: bool,
}

fn raw_constants(phi: &PhiFunction, s: &Scan) -> Raw {
    let g = phi.growth();
    let mut raw = Raw {
        positivity: s.at_zero.iter().all(|&v| v == 0.0),
        beta_inc: 1.0,
        beta_dec: 1.0,
        one_min: f64::INFINITY,
        one_max: f64::NEG_INFINITY,
        c5_min: f64::INFINITY,
        c5_max: f64::NEG_INFINITY,
        c7_min: f64::INFINITY,
        c7_max: f64::NEG_INFINITY,
        c7_known: true,
    };
    for (row, &one) in s.jets.iter().zip(&s.at_one) {
        raw.one_min = raw.one_min.min(one);
        raw.one_max = raw.one_max.max(one);
        let mut prefix_max = f64::NEG_INFINITY;
        let mut prefix_min = f64::INFINITY;
        let mut prev = 0.0;
        for (&z, j) in s.zs.iter().zip(row) {
            let v = j.value;
            if !(v > prev) || !v.is_finite() {
                raw.positivity = false;
            }
            prev = v;
            let lower = v / z.powf(g.p_minus);
            let upper = v / z.powf(g.p_plus);
            if prefix_max > lower {
                raw.beta_inc = raw.beta_inc.max(prefix_max / lower);
            }
            if upper > prefix_min {
                raw.beta_dec = raw.beta_dec.max(upper / prefix_min);
            }
            prefix_max = prefix_max.max(lower);
            prefix_min = prefix_min.min(upper);
            let c5 = z * j.d1 / v;
            raw.c5_min = raw.c5_min.min(c5);
            raw.c5_max = raw.c5_max.max(c5);
            if j.d2.is_finite() {
                let c7 = z * z * j.d2 / v;
                raw.c7_min = raw.c7_min.min(c7);
                raw.c7_max = raw.c7_max.max(c7);
            } else {
                raw.c7_known = false;
            }
        }
    }
    for b in [&mut raw.beta_inc, &mut raw.beta_dec] {
        if b.is_nan() {
            *b = f64::INFINITY;
        }
    }
    raw
}

fn convexity(
    phi: &PhiFunction,
    s: &Scan,
    sampling: &SamplingConfig,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> ConvexityRecord {
    let g = phi.growth();
    let mut worst = vec![f64::INFINITY; sampling.epsilons.len()];
    for ((x, y), row) in samples.iter().zip(&s.jets) {
        for (a, ja) in s.zs.iter().zip(row) {
            for (b, jb) in s.zs.iter().zip(row) {
                if b <= a {
                    continue;
                }
                let gap = (b - a) / b;
                let mid = phi.eval(0.5 * (a + b), x, y);
                let delta = 1.0 - 2.0 * mid / (ja.value + jb.value);
                for (k, &eps) in sampling.epsilons.iter().enumerate() {
                    if gap >= eps && delta < worst[k] {
                        worst[k] = delta;
                    }
                }
            }
        }
    }
    let entries: Vec<ConvexityEntry> = sampling
        .epsilons
        .iter()
        .zip(worst)
        .map(|(&eps, delta_hat)| ConvexityEntry {
            epsilon: eps,
            delta_hat,
            delta_ref: g.c7.map(|c7| c7 * eps * eps / (2f64.powf(g.p_plus + 4.0) * g.beta)),
            delta_displayed: g.c7.map(|c7| c7 * eps * eps / (g.beta * g.beta * 2f64.powf(g.p_plus + 5.0))),
        })
        .collect();
    let pass = entries.iter().all(|e| e.delta_hat > DELTA_FLOOR);
    ConvexityRecord { entries, pass }
}

/// Checks positivity, uniform convexity, almost monotonicity, the bounds on
/// `φ(1)`, derivative domination and the second-derivative bound on the
/// samples of `sampling`.
pub fn check_conditions(phi: &PhiFunction, sampling: &SamplingConfig) -> ConditionReport {
    let s = scan(phi, sampling);
    let samples = sampling.xy_samples();
    let raw = raw_constants(phi, &s);
    let g = phi.growth();
    let pass_inc = raw.beta_inc <= g.beta * (1.0 + REL_SLACK);
    let pass_dec = raw.beta_dec <= g.beta * (1.0 + REL_SLACK);
    ConditionReport {
        positivity: raw.positivity,
        c2_uniform_convexity: convexity(phi, &s, sampling, &samples),
        c3_growth: GrowthCheck {
            beta_increasing: raw.beta_inc,
            beta_decreasing: raw.beta_dec,
            beta_hat: raw.beta_inc.max(raw.beta_dec),
            pass_increasing: pass_inc,
            pass_decreasing: pass_dec,
            pass: pass_inc && pass_dec,
        },
        c4_bounds: RangeCheck {
            min: raw.one_min,
            max: raw.one_max,
            pass: raw.one_min * g.c1 >= 1.0 - REL_SLACK && raw.one_max <= g.c1 * (1.0 + REL_SLACK),
        },
        c5_derivative: RangeCheck {
            min: raw.c5_min,
            max: raw.c5_max,
            pass: raw.c5_min > 0.0 && raw.c5_max <= g.c2 * (1.0 + REL_SLACK),
        },
        secder_bound: raw.c7_known.then_some(RangeCheck { min: raw.c7_min, max: raw.c7_max, pass: raw.c7_min > 0.0 }),
        sampling: sampling.record(),
    }
}

/// Tightest `β, c1, c2, c7` on the samples, then inflated by 5%
/// (`c7` deflated). Exponents are kept.
pub fn estimate_growth_constants(phi: &PhiFunction, sampling: &SamplingConfig) -> Result<GrowthEstimate> {
    let s = scan(phi, sampling);
    let raw = raw_constants(phi, &s);
    let fail = |what: String| Err(Error::NotAdmissible(what));
    if !raw.positivity {
        return fail("φ is not positive and strictly increasing on the samples".into());
    }
    if !(raw.one_min > 0.0) {
        return fail(format!("φ(1) reaches {}", raw.one_min));
    }
    if !(raw.c5_min > 0.0) || !raw.c5_max.is_finite() {
        return fail(format!("z φ'/φ ranges over [{}, {}]", raw.c5_min, raw.c5_max));
    }
    let beta = raw.beta_inc.max(raw.beta_dec);
    if !beta.is_finite() {
        return fail("φ / z^p is not almost monotone on the samples".into());
    }
    let g = *phi.growth();
    let c7 = (raw.c7_known && raw.c7_min > 0.0).then_some(raw.c7_min);
    let rawc = GrowthConstants { beta, c1: raw.one_max.max(1.0 / raw.one_min), c2: raw.c5_max, c7, ..g };
    let constants = GrowthConstants {
        beta: rawc.beta * MARGIN,
        c1: rawc.c1 * MARGIN,
        c2: rawc.c2 * MARGIN,
        c7: rawc.c7.map(|c| c / MARGIN),
        ..rawc
    };
    Ok(GrowthEstimate { raw: rawc, constants })
}
