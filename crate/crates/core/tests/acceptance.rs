//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line.

#![allow(clippy::approx_constant, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orlicz::discretization::{DomainSpec, GridFunction};
use orlicz::functionals::eval_F;
use orlicz::harness::{run_density, run_suite, Report, Scenario, SuiteConfig, SuiteKind, TrigFamily};
use orlicz::norms::{decompose_mean_zero, f_norm, g_norm, luxemburg, Modular};
use orlicz::phi::families::Family;
use orlicz::phi::{build_phi, build_phi_with, estimate_growth_constants, PhiExpression, PhiFunction, SamplingConfig};
use orlicz::solver::{energy_gradient, minimize, Energy, SolverOptions};

use common::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn family_phi(family: Family, rng: &mut ChaCha8Rng) -> PhiFunction {
    build_phi_with(&family.sample(rng), &SamplingConfig::default()).expect("family member builds")
}

fn family_scenario(family: Family, seed: u64, cells: usize, samples: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Scenario::square_benchmark(cells);
    s.id = family.name().into();
    s.phi = family.sample(&mut rng);
    s.kernel = gaussian(SIGMA);
    s.functions.clear();
    s.family = TrigFamily { samples, ..TrigFamily::default() };
    s.seed = seed;
    s.density.domain = None;
    s
}

fn family_config(suites: &[SuiteKind], cells: usize, samples: &[usize]) -> SuiteConfig {
    let scenarios = Family::ALL
        .iter()
        .zip(samples)
        .enumerate()
        .map(|(k, (&f, &n))| family_scenario(f, 500 + k as u64, cells, n))
        .collect();
    SuiteConfig { scenarios, suites: suites.to_vec(), ..SuiteConfig::default() }
}

/// Zero violations and no errors in every record.
fn clean(report: &Report) -> (bool, usize, f64) {
    let pass = report.records.iter().all(|r| r.pass && r.error.is_none() && r.violations == 0);
    let checked = report.records.iter().map(|r| r.checked).sum();
    let worst = report.records.iter().filter_map(|r| r.worst_slack).fold(f64::NEG_INFINITY, f64::max);
    (pass, checked, worst)
}

fn errors(report: &Report) -> String {
    report
        .records
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!(" [{} {}: {}]", r.suite, r.scenario, r.error.as_deref().unwrap_or("violations")))
        .collect()
}

fn c1_benchmark() -> Verdict {
    let start = Instant::now();
    let disc = unit_disc(256, &orlicz::discretization::KernelSpec::constant_on(1.0));
    let phi = build_phi(&PhiExpression::square()).unwrap();
    let u = GridFunction::from_expr(disc.grid(), "x0").unwrap();
    let f = eval_F(&disc, &phi, &u).unwrap().value();
    let lux = luxemburg(&disc, &phi, Modular::F(&u)).unwrap().value;
    let g = g_norm(&disc, &phi, &u).unwrap();
    let fn_ = f_norm(&disc, &phi, &u).unwrap();
    let secs = start.elapsed().as_secs_f64();
    // ∫∫(x-y)² = 1/6, G(x) = 1/6 + 1/3
    let ok = (f - 1.0 / 6.0).abs() <= 2e-5
        && (lux - (1.0f64 / 6.0).sqrt()).abs() <= 1e-5
        && (lux - 0.408248).abs() <= 1e-5
        && (g - 0.707107).abs() <= 1e-5
        && (fn_ - 0.985598).abs() <= 2e-5
        && secs < 1.0;
    verdict(ok, format!("F={f:.8} lux={lux:.8} g={g:.8} f={fn_:.8} in {secs:.3}s"))
}

fn random_instances(count: usize, cells: usize) -> Vec<(Family, PhiFunction, GridFunction)> {
    let disc = unit_disc(cells, &gaussian(SIGMA));
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let fam = TrigFamily::default();
    (0..count)
        .map(|k| {
            let family = Family::ALL[k % 4];
            let phi = family_phi(family, &mut rng);
            let u = fam.sample(disc.grid(), &mut rng);
            (family, phi, u)
        })
        .collect()
}

fn c2_root() -> Verdict {
    let start = Instant::now();
    let cells = 48;
    let disc = unit_disc(cells, &gaussian(SIGMA));
    let mut worst: f64 = 0.0;
    for (_, phi, u) in random_instances(50, cells) {
        let lam = luxemburg(&disc, &phi, Modular::F(&u)).unwrap().value;
        let v: Vec<f64> = u.values().iter().map(|x| x / lam).collect();
        worst = worst.max((naive_f(&phi, &v, SIGMA) - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst <= 1e-8 && secs < 30.0, format!("50 instances, max |F(u/λ)-1| = {worst:.2e} in {secs:.1}s"))
}

fn c3_equivalence() -> Verdict {
    let cells = 48;
    let disc = unit_disc(cells, &gaussian(SIGMA));
    let mut violations = 0;
    let mut root_err: f64 = 0.0;
    for (_, phi, u) in random_instances(50, cells) {
        let beta_hat = estimate_growth_constants(&phi, &SamplingConfig::default()).unwrap().constants.beta;
        let f = f_norm(&disc, &phi, &u).unwrap();
        let g = g_norm(&disc, &phi, &u).unwrap();
        let v: Vec<f64> = u.values().iter().map(|x| x / g).collect();
        root_err = root_err.max((naive_g(&phi, &v, phi.p_minus(), SIGMA) - 1.0).abs());
        if !(0.5 * f <= g) || !(g <= beta_hat.powf(1.0 / phi.p_minus()) * f + 1e-8) {
            violations += 1;
        }
    }
    verdict(
        violations == 0 && root_err <= 1e-8,
        format!("50 instances, {violations} violations, G root error {root_err:.1e}"),
    )
}

fn c4_young() -> Verdict {
    let report = run_suite(&family_config(&[SuiteKind::Young], 16, &[1; 4])).unwrap();
    let (pass, checked, worst) = clean(&report);
    let per_family = report.records.iter().all(|r| r.checked >= 64 * 128 * 64);
    // spot check the conjugate against a ternary-search oracle
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut conj_err: f64 = 0.0;
    for family in Family::ALL {
        let phi = family_phi(family, &mut rng);
        for (x, y) in SamplingConfig::default().xy_samples().iter().take(8) {
            for t in [1e-3, 0.1, 1.0, 7.0, 300.0] {
                let a = orlicz::phi::conjugate(&phi, t, x, y).unwrap();
                let b = brute_conjugate(&phi, t, x, y);
                conj_err = conj_err.max((a - b).abs() / (1.0 + b.abs()));
            }
        }
    }
    verdict(
        pass && per_family && conj_err <= 1e-9,
        format!(
            "{checked} checks over 4 families, worst slack {worst:.2e}, conjugate vs oracle {conj_err:.1e}{}",
            errors(&report)
        ),
    )
}

fn c5_sandwich() -> Verdict {
    let report = run_suite(&family_config(&[SuiteKind::Sandwich], 48, &[12; 4])).unwrap();
    let (pass, checked, worst) = clean(&report);
    verdict(pass, format!("{checked} checks, worst slack {worst:.3}{}", errors(&report)))
}

fn c6_hoelder() -> Verdict {
    let report = run_suite(&family_config(&[SuiteKind::Hoelder], 16, &[7, 6, 6, 6])).unwrap();
    let (pass, checked, _) = clean(&report);
    let ratio = report.records.iter().map(|r| r.metrics["worst_ratio"]).fold(0.0, f64::max);
    verdict(pass && checked == 25, format!("{checked} pair instances, worst lhs/rhs {ratio:.3}{}", errors(&report)))
}

fn c7_variation() -> Verdict {
    let mut cfg = family_config(&[SuiteKind::Variation], 32, &[5; 4]);
    let mut sq = Scenario::square_benchmark(64);
    sq.family.samples = 5;
    cfg.scenarios.push(sq);
    let report = run_suite(&cfg).unwrap();
    let (pass, _, _) = clean(&report);
    let quad = report.record(SuiteKind::Variation, "square").map_or(f64::NAN, |r| r.metrics["remainder_worst"]);
    verdict(
        pass,
        format!(
            "square remainder vs t²F(v) rel {quad:.1e}; other families ratio >= 1.8 per halving{}",
            errors(&report)
        ),
    )
}

fn c8_gradient() -> Verdict {
    let report = run_suite(&family_config(&[SuiteKind::Variation], 32, &[20; 4])).unwrap();
    let (pass, _, _) = clean(&report);
    let grad_worst = report.records.iter().map(|r| r.metrics["gradient_worst"]).fold(0.0, f64::max);
    // dense linear solve of the quadratic problem on 32 cells
    let n = 32;
    let disc = unit_disc(n, &gaussian(SIGMA));
    let phi = build_phi(&PhiExpression::square()).unwrap();
    let x = midpoints(n);
    let h = 1.0 / n as f64;
    let k = |i: usize, j: usize| (-(x[i] - x[j]).powi(2) / (2.0 * SIGMA * SIGMA)).exp() * h * h;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 2.0 * h;
        for j in 0..n {
            if j != i {
                let c = 2.0 * (k(i, j) + k(j, i));
                a[i][i] += c;
                a[i][j] -= c;
            }
        }
    }
    let g = GridFunction::from_expr(disc.grid(), "cos(3*x0) + x0").unwrap();
    let b: Vec<f64> = g.values().iter().map(|v| v * h).collect();
    let exact = lu_solve(a.clone(), b.clone());
    let res = minimize(&disc, &phi, 2.0, &g, &GridFunction::zeros(disc.grid()), &SolverOptions::default()).unwrap();
    let solve_err = max_abs_diff(res.u_star.values(), &exact);
    let probe = GridFunction::from_expr(disc.grid(), "sin(5*x0)").unwrap();
    let grad = energy_gradient(&disc, &phi, 2.0, &probe, &g).unwrap();
    let lin: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * probe.values()[j]).sum::<f64>() - b[i]).collect();
    let grad_vs_matrix = max_abs_diff(grad.values(), &lin);
    verdict(
        pass && grad_worst <= 1e-5 && solve_err <= 1e-6 && grad_vs_matrix <= 1e-12,
        format!(
            "80 instances, max rel err {grad_worst:.1e}; quadratic minimizer vs LU {solve_err:.1e}, gradient vs matrix {grad_vs_matrix:.1e}{}",
            errors(&report)
        ),
    )
}

fn c9_minimizer() -> Verdict {
    let cells = 32;
    let disc = unit_disc(cells, &gaussian(SIGMA));
    let fam = TrigFamily::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = SolverOptions { max_iters: 200_000, ..Default::default() };
    let mut lines = Vec::new();
    let mut ok = true;
    for family in Family::ALL {
        let start = Instant::now();
        let phi = family_phi(family, &mut rng);
        let p = phi.p_minus();
        let g = fam.sample(disc.grid(), &mut rng);
        let a = minimize(&disc, &phi, p, &g, &fam.sample(disc.grid(), &mut rng), &opts);
        let b = minimize(&disc, &phi, p, &g, &fam.sample(disc.grid(), &mut rng), &opts);
        let truth = fam.sample(disc.grid(), &mut rng);
        let rhs = Energy::manufactured_rhs(&disc, &phi, p, &truth).unwrap();
        let m = minimize(&disc, &phi, p, &rhs, &GridFunction::zeros(disc.grid()), &opts);
        let secs = start.elapsed().as_secs_f64();
        match (a, b, m) {
            (Ok(a), Ok(b), Ok(m)) => {
                let starts = max_abs_diff(a.u_star.values(), b.u_star.values());
                let recovery = max_abs_diff(m.u_star.values(), truth.values());
                ok &= starts <= 1e-6 && recovery <= 1e-5 && secs < 60.0;
                lines.push(format!(
                    "{}: starts {starts:.1e}, recovery {recovery:.1e}, {} iterations, {secs:.1}s",
                    family.name(),
                    a.iterations + b.iterations + m.iterations
                ));
            }
            (a, b, m) => {
                ok = false;
                let e = [a.err(), b.err(), m.err()].into_iter().flatten().next().unwrap();
                lines.push(format!("{}: {e}", family.name()));
            }
        }
    }
    verdict(ok, lines.join("; "))
}

fn c10_poincare() -> Verdict {
    let mut s = Scenario::square_benchmark(64);
    s.family.samples = 20;
    let cfg = SuiteConfig { scenarios: vec![s], suites: vec![SuiteKind::Poincare], ..SuiteConfig::default() };
    let report = run_suite(&cfg).unwrap();
    let (pass, checked, worst) = clean(&report);
    // direct ratio with both sums written out
    let n = 64;
    let h = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let disc = unit_disc(n, &orlicz::discretization::KernelSpec::constant_on(1.0));
    let mut direct: f64 = 0.0;
    for _ in 0..20 {
        let u = TrigFamily::default().sample(disc.grid(), &mut rng);
        let v = u.values();
        let (perp, _) = decompose_mean_zero(&u);
        let num: f64 = perp.values().iter().map(|x| x * x * h).sum();
        let den: f64 = v.iter().flat_map(|a| v.iter().map(move |b| (a - b) * (a - b) * h * h)).sum();
        direct = direct.max((num / den - 0.5).abs());
    }
    verdict(
        pass && direct <= 1e-10,
        format!("{checked} checks, worst |ratio - 0.5| {worst:.1e}, direct {direct:.1e}{}", errors(&report)),
    )
}

fn c11_dual() -> Verdict {
    let report = run_suite(&family_config(&[SuiteKind::Dual], 32, &[20; 4])).unwrap();
    let (pass, checked, _) = clean(&report);
    let get = |k: &str| report.records.iter().map(|r| r.metrics[k]).fold(0.0, f64::max);
    verdict(
        pass,
        format!(
            "{checked} checks; |φ_w(w) - |w|²| {:.1e}, kernel vs pairing {:.1e}, balanced shift {:.1e}{}",
            get("norm_worst"),
            get("representation_worst"),
            get("invariance_worst"),
            errors(&report)
        ),
    )
}

fn c12_density() -> Verdict {
    let cfg = SuiteConfig { scenarios: vec![Scenario::square_benchmark(64)], ..SuiteConfig::default() };
    let report = run_density(&cfg).unwrap();
    let r = &report.records[0];
    // the four-rung ladder only has to decrease
    let mut short = Scenario::square_benchmark(64);
    short.density.ladder = vec![0.2, 0.1, 0.05, 0.025];
    let p = short.build_on(short.density.domain.as_ref().unwrap()).unwrap();
    let u = GridFunction::from_expr(p.disc.grid(), &short.density.target).unwrap();
    let rungs = orlicz::harness::density_ladder(&p.disc, &p.phi, &u, &short.density.ladder, None).unwrap();
    let strictly = rungs.windows(2).all(|w| w[1].gap < w[0].gap);
    verdict(
        r.pass && strictly,
        format!(
            "6 rungs ratio {:.4}, mollification order {:.3}; 4 rungs strictly decreasing {strictly} (ratio {:.3}){}",
            r.metrics.get("ratio").copied().unwrap_or(f64::NAN),
            r.metrics.get("mollify_order").copied().unwrap_or(f64::NAN),
            rungs[3].gap / rungs[0].gap,
            errors(&report)
        ),
    )
}

fn c13_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut scenarios = vec![Scenario::square_benchmark(24)];
    for (k, f) in Family::ALL.into_iter().enumerate() {
        let mut s = family_scenario(f, 900 + k as u64, 12, 3);
        s.density.smooth_target = None;
        s.density.domain = Some(DomainSpec::unit_interval(128));
        scenarios.push(s);
    }
    let cfg = SuiteConfig { scenarios, ..SuiteConfig::default() };
    let path = dir.path().join("suite.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let mut outputs = Vec::new();
    for (run, threads) in [1, 8, 1, 8].into_iter().enumerate() {
        let out = dir.path().join(format!("run{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_orlicz"))
            .args(["suite", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .args(["--threads", &threads.to_string()])
            .output()
            .unwrap();
        outputs.push((status.status.code(), std::fs::read(out.join("report.json")).unwrap_or_default()));
    }
    let same = outputs.iter().all(|o| o.1 == outputs[0].1) && !outputs[0].1.is_empty();
    let failing = Report::from_json(std::str::from_utf8(&outputs[0].1).unwrap_or_default())
        .map(|r| errors(&r))
        .unwrap_or_else(|e| format!(" [unreadable report: {e}]"));
    verdict(
        same,
        format!(
            "4 runs (threads 1, 8, 1, 8), {} bytes each, identical {same}, exit {:?}{failing}",
            outputs[0].1.len(),
            outputs[0].0
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("analytic benchmark", c1_benchmark),
        ("luxemburg root property", c2_root),
        ("norm equivalence", c3_equivalence),
        ("young and conjugate derivative", c4_young),
        ("growth and functional sandwich", c5_sandwich),
        ("hoelder", c6_hoelder),
        ("first variation", c7_variation),
        ("gradient check", c8_gradient),
        ("minimizer uniqueness", c9_minimizer),
        ("poincare identity", c10_poincare),
        ("dual representation", c11_dual),
        ("density ladder", c12_density),
        ("determinism", c13_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = f();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name} ({:.1}s): {}", k + 1, start.elapsed().as_secs_f64(), v.detail);
        failed += usize::from(!v.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
