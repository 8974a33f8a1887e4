//! The property suites. Each one draws its random functions from a stream
//! of the scenario seed, so suites are independent of each other.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Problem, Scenario, SuiteConfig, SuiteKind, Tolerances};
use super::density::{density_ladder, mollification_order};
use super::report::{SuiteRecord, Table};
use crate::discretization::{GridFunction, KernelSpec, PairFunction};
use crate::error::Result;
use crate::functionals::{eval_F, eval_F_increment, eval_F_power, eval_ell, m_subspace_residual};
use crate::norms::{
    decompose_mean_zero, f_norm, g_norm, h_norm, h_star_norm, luxemburg, poincare_certificate, verify_sandwich, Modular,
};
use crate::phi::{check_conditions, conjugate, FieldSpec, PhiExpression};
use crate::solver::{apply_pair_kernel, dual_apply, dual_kernel_representation, Energy};

/// Counts checks of `lhs <= rhs` by the normalized slack `(lhs - rhs) / scale`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub checked: usize,
    pub violations: usize,
    pub worst: Option<f64>,
}

impl Tally {
    pub fn check(&mut self, lhs: f64, rhs: f64, scale: f64, tol: f64) {
        let s = (lhs - rhs) / scale;
        self.checked += 1;
        if !(s <= tol) {
            self.violations += 1;
        }
        let s = if s.is_nan() { f64::INFINITY } else { s };
        self.worst = Some(self.worst.map_or(s, |w| w.max(s)));
    }

    pub fn require(&mut self, ok: bool) {
        self.check(if ok { 0.0 } else { 1.0 }, 0.0, 1.0, 0.0);
    }

    pub fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.violations += other.violations;
        self.worst = match (self.worst, other.worst) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }
}

#[derive(Default)]
struct Outcome {
    tally: Tally,
    metrics: BTreeMap<String, f64>,
    table: Option<Table>,
}

impl Outcome {
    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    problem: &'a Problem,
    tol: &'a Tolerances,
    rng: ChaCha8Rng,
}

impl Ctx<'_> {
    /// Fixed functions followed by `family.samples` random draws.
    fn functions(&mut self) -> Vec<GridFunction> {
        let grid = self.problem.disc.grid();
        let mut out = self.problem.functions.clone();
        out.extend(self.scenario.family.sample_many(grid, &mut self.rng, self.scenario.family.samples));
        out
    }

    fn draw(&mut self) -> GridFunction {
        self.scenario.family.sample(self.problem.disc.grid(), &mut self.rng)
    }
}

pub(crate) fn run(kind: SuiteKind, scenario: &Scenario, problem: &Problem, config: &SuiteConfig) -> SuiteRecord {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(kind as u64);
    let mut ctx = Ctx { scenario, problem, tol: &config.tolerances, rng };
    let result = match kind {
        SuiteKind::Young => young(&mut ctx),
        SuiteKind::Hoelder => hoelder(&mut ctx),
        SuiteKind::Sandwich => sandwich(&mut ctx),
        SuiteKind::Equivalence => equivalence(&mut ctx),
        SuiteKind::Convexity => convexity(&mut ctx),
        SuiteKind::Variation => variation(&mut ctx),
        SuiteKind::Poincare => poincare(&mut ctx),
        SuiteKind::Density => density(&mut ctx),
        SuiteKind::Dual => dual(&mut ctx),
        SuiteKind::Conditions => conditions(&mut ctx),
    };
    let mut record = match result {
        Ok(o) => SuiteRecord {
            suite: kind,
            scenario: scenario.id.clone(),
            inequality: kind.inequality().to_string(),
            checked: o.tally.checked,
            violations: o.tally.violations,
            worst_slack: o.tally.worst,
            pass: o.tally.violations == 0,
            error: None,
            metrics: o.metrics,
            table: o.table,
            elapsed: Default::default(),
        },
        Err(e) => SuiteRecord::failed(kind, &scenario.id, &e),
    };
    record.elapsed = start.elapsed();
    record
}

fn young(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let phi = &ctx.problem.phi;
    let zs = ctx.problem.sampling.z_grid();
    let xy = ctx.problem.sampling.xy_samples();
    let c2 = phi.growth().c2;
    let tol = ctx.tol.young;
    let parts = xy
        .par_iter()
        .map(|(x, y)| {
            let (mut yt, mut ct) = (Tally::default(), Tally::default());
            let values: Vec<f64> = zs.iter().map(|&z| phi.eval(z, x, y)).collect();
            for &t in &zs {
                let conj = conjugate(phi, t, x, y)?;
                for (&s, &v) in zs.iter().zip(&values) {
                    yt.check(s * t, conj + v, 1.0 + s * t, tol);
                }
            }
            for (&t, &v) in zs.iter().zip(&values) {
                let d = phi.eval_prime(t, x, y)?;
                let conj = conjugate(phi, d, x, y)?;
                // equality case of Young
                yt.check(t * d, conj + v, 1.0 + t * d, tol);
                ct.check(conj, (c2 - 1.0) * v, 1.0 + t * d, tol);
            }
            Ok((yt, ct))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut yt, mut ct) = (Tally::default(), Tally::default());
    for (a, b) in parts {
        yt.merge(a);
        ct.merge(b);
    }
    let mut o = Outcome::default();
    o.metric("young_checked", yt.checked as f64);
    o.metric("young_worst", yt.worst.unwrap_or(0.0));
    o.metric("conjugate_derivative_worst", ct.worst.unwrap_or(0.0));
    o.tally = yt;
    o.tally.merge(ct);
    Ok(o)
}

fn hoelder(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let (disc, phi) = (&ctx.problem.disc, &ctx.problem.phi);
    let grid = disc.grid().clone();
    let mut o = Outcome::default();
    let mut table = Table::new(&["sample", "lhs", "h_v", "h_star_w", "rhs"]);
    let mut worst_ratio: f64 = 0.0;
    for k in 0..ctx.scenario.family.samples {
        let w = ctx.scenario.family.sample_pair(&grid, &mut ctx.rng);
        let v = ctx.scenario.family.sample_pair(&grid, &mut ctx.rng);
        let lhs = disc.quadrature_double(|i, j| w.get(i, j) * v.get(i, j))?.abs();
        let hv = h_norm(disc, phi, &v)?;
        let hw = h_star_norm(disc, phi, &w)?;
        let rhs = 2.0 * hv * hw;
        o.tally.check(lhs, rhs, 1.0, ctx.tol.hoelder);
        worst_ratio = worst_ratio.max(lhs / rhs);
        table.push(vec![k as f64, lhs, hv, hw, rhs]);
    }
    o.metric("worst_ratio", worst_ratio);
    o.table = Some(table);
    Ok(o)
}

fn sandwich(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.problem;
    let est = p.phi.with_estimated_constants(&p.sampling)?;
    let g = *est.growth();
    let bc = g.beta * g.c1;
    let tol = ctx.tol.sandwich;
    let mut o = Outcome::default();
    let mut pointwise = Tally::default();
    for (x, y) in p.sampling.xy_samples() {
        for z in p.sampling.z_grid() {
            let v = p.phi.eval(z, &x, &y);
            let (a, b) = (z.powf(g.p_minus), z.powf(g.p_plus));
            pointwise.check(a.min(b) / bc, v, v, tol);
            pointwise.check(v, bc * a.max(b), v, tol);
        }
    }
    let mut functional = Tally::default();
    let mut table = Table::new(&["sample", "lambda", "F", "lower", "upper"]);
    for (k, u) in ctx.functions().iter().enumerate() {
        let c = verify_sandwich(&p.disc, &est, u)?;
        if c.functional > 0.0 {
            functional.check(c.lower, c.functional, c.functional, tol);
            functional.check(c.functional, c.upper, c.functional, tol);
        }
        table.push(vec![k as f64, c.lambda, c.functional, c.lower, c.upper]);
    }
    o.metric("beta_hat", g.beta);
    o.metric("c1_hat", g.c1);
    o.metric("pointwise_worst", pointwise.worst.unwrap_or(0.0));
    o.metric("functional_worst", functional.worst.unwrap_or(0.0));
    o.tally = pointwise;
    o.tally.merge(functional);
    o.table = Some(table);
    Ok(o)
}

fn equivalence(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.problem;
    let est = p.phi.with_estimated_constants(&p.sampling)?;
    let factor = p.phi.beta().powf(1.0 / p.phi.p_minus());
    let factor_hat = est.beta().powf(1.0 / est.p_minus());
    let tol = ctx.tol.equivalence;
    let mut o = Outcome::default();
    let mut table = Table::new(&["sample", "half_f", "g", "upper", "upper_hat"]);
    let us = ctx.functions();
    let mut norms = Vec::with_capacity(us.len());
    for (k, u) in us.iter().enumerate() {
        let f = f_norm(&p.disc, &p.phi, u)?;
        let g = g_norm(&p.disc, &p.phi, u)?;
        o.tally.check(0.5 * f, g, 1.0, tol);
        o.tally.check(g, factor * f, 1.0, tol);
        o.tally.check(g, factor_hat * f, 1.0, tol);
        let f2 = f_norm(&p.disc, &p.phi, &u.scale(-2.0))?;
        o.tally.check((f2 - 2.0 * f).abs(), 0.0, (2.0 * f).max(f64::MIN_POSITIVE), tol);
        table.push(vec![k as f64, 0.5 * f, g, factor * f, factor_hat * f]);
        norms.push(f);
    }
    for k in 1..us.len() {
        let f = f_norm(&p.disc, &p.phi, &us[k - 1].add(&us[k])?)?;
        let bound = norms[k - 1] + norms[k];
        o.tally.check(f, bound, bound.max(f64::MIN_POSITIVE), tol);
    }
    if let Some(row) = table.rows.first() {
        o.metric("first_half_f", row[1]);
        o.metric("first_g", row[2]);
        o.metric("first_upper", row[3]);
        o.metric("first_upper_hat", row[4]);
    }
    o.metric("beta_hat", est.beta());
    o.table = Some(table);
    Ok(o)
}

fn convexity(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.problem;
    let mut o = Outcome::default();
    let report = check_conditions(&p.phi, &p.sampling);
    for e in &report.c2_uniform_convexity.entries {
        o.tally.check(ctx.tol.convexity, e.delta_hat, 1.0, 0.0);
        o.metric(&format!("delta_hat[{}]", e.epsilon), e.delta_hat);
    }
    let zero = GridFunction::zeros(p.disc.grid());
    let energy = Energy::new(&p.disc, &p.phi, p.phi.p_minus(), &zero)?;
    let us = ctx.functions();
    let tol = ctx.tol.midpoint;
    for pair in us.windows(2) {
        let (eu, ev) = (energy.value(&pair[0])?, energy.value(&pair[1])?);
        let mid = energy.value(&pair[0].lincomb(0.5, &pair[1], 0.5)?)?;
        o.tally.check(mid, 0.5 * (eu + ev), 1.0 + eu.abs() + ev.abs(), tol);
    }
    for u in &us {
        let mut prev: Option<f64> = None;
        for lambda in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let f = eval_F(&p.disc, &p.phi, &u.scale(1.0 / lambda))?.value();
            if let Some(prev) = prev {
                o.tally.check(f, prev, 1.0 + prev, tol);
            }
            prev = Some(f);
        }
    }
    Ok(o)
}

/// `φ = b(x, y) z²`, for which the first-order remainder is exactly `t² F(v)`.
fn is_quadratic(e: &PhiExpression) -> bool {
    matches!(e, PhiExpression::Power { p: FieldSpec::Const { value }, .. } if *value == 2.0)
}

const QUADRATIC_STEPS: [f64; 3] = [0.5, 0.1, 0.01];
const REMAINDER_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
const FD_STEP: f64 = 1e-5;
const FD_COORDINATES: usize = 32;

fn variation(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.problem;
    let (disc, phi) = (&p.disc, &p.phi);
    let quadratic = is_quadratic(phi.expression());
    let mut o = Outcome::default();
    let mut rem = Tally::default();
    let mut table = Table::new(&["sample", "t", "remainder", "reference"]);
    let samples = ctx.scenario.family.samples;
    for k in 0..samples {
        let u = if k < p.functions.len() { p.functions[k].clone() } else { ctx.draw() };
        let v = ctx.draw();
        let ell = eval_ell(disc, phi, &u, &v)?;
        let remainder =
            |t: f64| -> Result<f64> { Ok(eval_F_increment(disc, phi, &u, &u.lincomb(1.0, &v, t)?)? - t * ell) };
        if quadratic {
            let fv = eval_F(disc, phi, &v)?.value();
            for t in QUADRATIC_STEPS {
                let r = remainder(t)?;
                rem.check((r - t * t * fv).abs(), 0.0, t * t * fv, ctx.tol.variation);
                table.push(vec![k as f64, t, r, t * t * fv]);
            }
        } else {
            for t in REMAINDER_STEPS {
                let (r1, r2) = (remainder(t)? / t, remainder(0.5 * t)? / (0.5 * t));
                rem.check(ctx.tol.variation_ratio, r1 / r2, 1.0, 0.0);
                table.push(vec![k as f64, t, r1, r2]);
            }
        }
    }
    let mut grad = Tally::default();
    let n = disc.len();
    let stride = n.div_ceil(FD_COORDINATES).max(1);
    for _ in 0..samples {
        let g = ctx.draw();
        let u = ctx.draw();
        let e = Energy::new(disc, phi, phi.p_minus(), &g)?;
        let exact = e.gradient(&u)?;
        let scale = exact.max_abs().max(f64::MIN_POSITIVE);
        let mut err: f64 = 0.0;
        for i in (0..n).step_by(stride) {
            let h = FD_STEP * (1.0 + u.values()[i].abs());
            let bump = |s: f64| {
                let mut w = u.values().to_vec();
                w[i] += s;
                GridFunction::new(u.grid().clone(), w)
            };
            let fd = (e.difference(&u, &bump(h)?)? - e.difference(&u, &bump(-h)?)?) / (2.0 * h);
            err = err.max((exact.values()[i] - fd).abs());
        }
        grad.check(err, 0.0, scale, ctx.tol.gradient);
    }
    o.metric("remainder_worst", rem.worst.unwrap_or(0.0));
    o.metric("gradient_worst", grad.worst.unwrap_or(0.0));
    o.metric("quadratic", if quadratic { 1.0 } else { 0.0 });
    o.tally = rem;
    o.tally.merge(grad);
    o.table = Some(table);
    Ok(o)
}

fn poincare(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.problem;
    let grid = p.disc.grid();
    let constant = matches!(p.disc.kernel().spec(), KernelSpec::Indicator { r } if *r >= grid.diameter());
    let expected = 1.0 / (2.0 * grid.total_measure());
    let mut o = Outcome::default();
    let us = ctx.functions();
    let mut table = Table::new(&["sample", "ratio"]);
    for (k, u) in us.iter().enumerate() {
        let fp = eval_F_power(&p.disc, 2.0, u)?.value();
        if !(fp > 0.0) {
            continue;
        }
        let (perp, _) = decompose_mean_zero(u);
        let ratio = perp.lp_power(2.0) / fp;
        if constant {
            o.tally.check((ratio - expected).abs(), 0.0, 1.0, ctx.tol.poincare);
        }
        table.push(vec![k as f64, ratio]);
    }
    let cert = poincare_certificate(&p.disc, p.phi.p_minus(), &us)?;
    o.tally.require(cert.is_finite() && cert > 0.0);
    o.metric("certificate", cert);
    o.metric("constant_kernel", if constant { 1.0 } else { 0.0 });
    if constant {
        o.metric("expected", expected);
    }
    o.table = Some(table);
    Ok(o)
}

fn density(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let spec = &ctx.scenario.density;
    let refined;
    let p = match &spec.domain {
        Some(d) => {
            refined = ctx.scenario.build_on(d)?;
            &refined
        }
        None => ctx.problem,
    };
    let mut o = Outcome::default();
    let mut table = Table::new(&["ladder", "eps", "value"]);
    let u = GridFunction::from_expr(p.disc.grid(), &spec.target)?;
    let rungs = density_ladder(&p.disc, &p.phi, &u, &spec.ladder, spec.center.as_deref())?;
    for w in rungs.windows(2) {
        o.tally.check(w[1].gap, w[0].gap, 1.0, ctx.tol.density);
    }
    let (first, last) = (rungs[0].gap, rungs[rungs.len() - 1].gap);
    let ratio = if first > 0.0 { last / first } else { 0.0 };
    o.tally.check(ratio, ctx.tol.density_ratio, 1.0, 0.0);
    for r in &rungs {
        table.push(vec![0.0, r.eps, r.gap]);
    }
    o.metric("first_gap", first);
    o.metric("last_gap", last);
    o.metric("ratio", ratio);
    if let Some(src) = &spec.smooth_target {
        let smooth = GridFunction::from_expr(p.disc.grid(), src)?;
        let (rungs, order) = mollification_order(&p.disc, &p.phi, &smooth, &spec.smooth_ladder)?;
        o.tally.check(ctx.tol.mollify_order, order, 1.0, 0.0);
        for r in &rungs {
            table.push(vec![1.0, r.eps, r.gap]);
        }
        o.metric("mollify_order", order);
    }
    o.table = Some(table);
    Ok(o)
}

const DUAL_TARGETS: usize = 3;

fn dual(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.problem;
    let (disc, phi) = (&p.disc, &p.phi);
    let n = disc.len();
    let mut o = Outcome::default();
    let (mut norm, mut repr, mut inv) = (Tally::default(), Tally::default(), Tally::default());
    let us = ctx.functions();
    for _ in 0..DUAL_TARGETS {
        let w = ctx.draw();
        let lambda = luxemburg(disc, phi, Modular::F(&w))?.value;
        let self_value = dual_apply(disc, phi, &w, &w)?;
        norm.check((self_value - lambda * lambda).abs(), 0.0, 1.0, ctx.tol.dual_norm);
        let kernel = dual_kernel_representation(disc, phi, &w)?.materialize();
        let s = ctx.draw().into_values();
        let balanced = PairFunction::dense(n, (0..n * n).map(|k| s[k / n] * s[k % n]).collect())?;
        inv.check(m_subspace_residual(disc, &balanced)?, 0.0, 1.0, ctx.tol.dual_invariance);
        let shifted = kernel.add(&balanced)?;
        for u in &us {
            let a = dual_apply(disc, phi, &w, u)?;
            let b = apply_pair_kernel(disc, &kernel, u)?;
            repr.check((a - b).abs(), 0.0, a.abs().max(1.0), ctx.tol.dual_representation);
            let c = apply_pair_kernel(disc, &shifted, u)?;
            inv.check((c - b).abs(), 0.0, 1.0, ctx.tol.dual_invariance);
        }
    }
    o.metric("norm_worst", norm.worst.unwrap_or(0.0));
    o.metric("representation_worst", repr.worst.unwrap_or(0.0));
    o.metric("invariance_worst", inv.worst.unwrap_or(0.0));
    o.tally = norm;
    o.tally.merge(repr);
    o.tally.merge(inv);
    Ok(o)
}

fn conditions(ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.problem;
    let r = check_conditions(&p.phi, &p.sampling);
    let g = p.phi.growth();
    let mut o = Outcome::default();
    o.tally.require(r.positivity);
    o.tally.require(r.c2_uniform_convexity.pass);
    o.tally.check(r.c3_growth.beta_hat, g.beta, g.beta, 1e-9);
    o.tally.require(r.c4_bounds.pass);
    o.tally.require(r.c5_derivative.pass);
    o.metric("beta_hat", r.c3_growth.beta_hat);
    o.metric("phi_one_min", r.c4_bounds.min);
    o.metric("phi_one_max", r.c4_bounds.max);
    o.metric("c5_max", r.c5_derivative.max);
    o.metric("c2", g.c2);
    if let Some(s) = &r.secder_bound {
        o.metric("secder_min", s.min);
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_counts_nan_as_violation() {
        let mut t = Tally::default();
        t.check(1.0, 2.0, 1.0, 0.0);
        t.check(f64::NAN, 0.0, 1.0, 0.0);
        assert_eq!((t.checked, t.violations), (2, 1));
        assert_eq!(t.worst, Some(f64::INFINITY));
        let mut u = Tally::default();
        u.require(true);
        u.merge(t);
        assert_eq!(u.checked, 3);
    }

    #[test]
    fn quadratic_detection() {
        assert!(is_quadratic(&PhiExpression::square()));
        assert!(is_quadratic(&PhiExpression::power(2.0, FieldSpec::expr("1 + x0").unwrap())));
        assert!(!is_quadratic(&PhiExpression::power(2.5, 1.0)));
    }
}
