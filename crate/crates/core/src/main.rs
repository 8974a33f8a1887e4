use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use orlicz::discretization::{GridFunction, KernelSpec, PairFunction};
use orlicz::functionals::{eval_F, eval_F_power, eval_G, eval_ell, eval_pairing_Phi, FunctionalValue};
use orlicz::harness::{
    emit_report, run_density, run_suite, to_json, Format, Problem, ProblemConfig, Report, SuiteConfig,
};
use orlicz::norms::{
    f_norm, g_norm, h_norm, h_star_norm, luxemburg, verify_sandwich, Modular, NormResult, SandwichCertificate,
};
use orlicz::phi::{check_conditions, estimate_growth_constants, ConditionReport, GrowthConstants, GrowthEstimate};
use orlicz::solver::{apply_pair_kernel, dual_apply, dual_kernel_representation, el_residual, minimize, SolveResult};
use orlicz::Error;

#[derive(Parser)]
#[command(name = "orlicz", version, about = "Nonlocal Orlicz functionals, norms, minimizers and property suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seeds of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "ORLICZ_THREADS")]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct NormArgs {
    #[command(flatten)]
    common: Common,
    /// Restricts the report to one norm; `h` and `hstar` act on `u(x) - u(y)`.
    #[arg(long, value_enum)]
    functional: Option<NormKind>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum NormKind {
    F,
    G,
    H,
    Hstar,
    #[value(name = "lux-F")]
    LuxF,
    #[value(name = "lux-G")]
    LuxG,
}

#[derive(Subcommand)]
enum Command {
    /// F, G, F_p and the pairings of one function.
    Eval(Common),
    /// Luxemburg norms and the sandwich certificate.
    Norm(NormArgs),
    /// Minimizes the energy.
    Minimize(Common),
    /// Dual functional generated by `w`, applied to `u`.
    Dual(Common),
    /// Admissibility conditions and empirical growth constants.
    PhiCheck(Common),
    /// Runs the property suites.
    Suite(Common),
    /// Runs the density ladders.
    Density(Common),
}

enum Failure {
    Config(Error),
    Compute(Error),
    Io(Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Compute(_) => 1,
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn error(&self) -> &Error {
        match self {
            Failure::Config(e) | Failure::Compute(e) | Failure::Io(e) => e,
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Eval(c)
        | Command::Minimize(c)
        | Command::Dual(c)
        | Command::PhiCheck(c)
        | Command::Suite(c)
        | Command::Density(c) => c.clone(),
        Command::Norm(n) => n.common.clone(),
    };
    let pool = match common.threads {
        Some(0) => {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        n => rayon::ThreadPoolBuilder::new().num_threads(n.unwrap_or(0)).build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Eval(c) => eval(c),
        Command::Norm(n) => norm(n),
        Command::Minimize(c) => solve(c),
        Command::Dual(c) => dual(c),
        Command::PhiCheck(c) => phi_check(c),
        Command::Suite(c) => suite(c, false),
        Command::Density(c) => suite(c, true),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.error());
            ExitCode::from(f.code())
        }
    }
}

fn problem(c: &Common) -> Result<(ProblemConfig, Problem), Failure> {
    let path = c.config.as_ref().ok_or_else(|| Failure::Config(Error::Config("--config is required".into())))?;
    let mut cfg = ProblemConfig::from_path(path).map_err(Failure::Config)?;
    if let Some(seed) = c.seed {
        let s = cfg.sampling.take().unwrap_or_default();
        cfg.sampling = Some(s.with_seed(seed));
    }
    let built = cfg.scenario().build().map_err(Failure::Config)?;
    Ok((cfg, built))
}

fn function(cfg: &ProblemConfig, p: &Problem, which: &str) -> Result<GridFunction, Failure> {
    cfg.function(p.disc.grid(), which).map_err(Failure::Config)
}

fn optional(cfg: &ProblemConfig, p: &Problem, which: &str, present: bool) -> Result<Option<GridFunction>, Failure> {
    if present {
        function(cfg, p, which).map(Some)
    } else {
        Ok(None)
    }
}

fn write(dir: &Path, value: &impl Serialize) -> Result<(), Failure> {
    std::fs::create_dir_all(dir.join("tables")).map_err(|e| Failure::Io(e.into()))?;
    let text = to_json(value).map_err(Failure::Io)?;
    std::fs::write(dir.join("report.json"), text).map_err(|e| Failure::Io(e.into()))
}

#[derive(Serialize)]
struct Header {
    command: &'static str,
    phi_hash: String,
    nodes: usize,
    kernel: KernelSpec,
    growth: GrowthConstants,
}

impl Header {
    fn new(command: &'static str, p: &Problem) -> Self {
        Header {
            command,
            phi_hash: p.phi.hash(),
            nodes: p.disc.len(),
            kernel: p.disc.kernel().spec().clone(),
            growth: *p.phi.growth(),
        }
    }
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct EvalOutput {
    #[serde(flatten)]
    header: Header,
    F: FunctionalValue,
    G: FunctionalValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    F_p: Option<FunctionalValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ell: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<f64>,
}

fn eval(c: &Common) -> Outcome {
    let (cfg, p) = problem(c)?;
    let u = function(&cfg, &p, "u")?;
    let w = optional(&cfg, &p, "w", cfg.w.is_some())?;
    let pm = cfg.p_minus.unwrap_or(p.phi.p_minus());
    let run = || -> orlicz::Result<EvalOutput> {
        Ok(EvalOutput {
            header: Header::new("eval", &p),
            F: eval_F(&p.disc, &p.phi, &u)?,
            G: eval_G(&p.disc, &p.phi, pm, &u)?,
            F_p: cfg.p.map(|q| eval_F_power(&p.disc, q, &u)).transpose()?,
            ell: w.as_ref().map(|w| eval_ell(&p.disc, &p.phi, &u, w)).transpose()?,
            pairing: w.as_ref().map(|w| eval_pairing_Phi(&p.disc, &p.phi, &u, w)).transpose()?,
        })
    };
    let out = run().map_err(Failure::Compute)?;
    write(&c.out, &out)?;
    Ok(true)
}

#[derive(Serialize)]
struct NormOutput {
    #[serde(flatten)]
    header: Header,
    #[serde(skip_serializing_if = "Option::is_none")]
    luxemburg_f: Option<NormResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    luxemburg_g: Option<NormResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h_star_norm: Option<f64>,
    sandwich: SandwichCertificate,
}

fn norm(args: &NormArgs) -> Outcome {
    let c = &args.common;
    let (cfg, p) = problem(c)?;
    let u = function(&cfg, &p, "u")?;
    let want = |k: NormKind| args.functional.is_none_or(|f| f == k);
    let run = || -> orlicz::Result<NormOutput> {
        let du = PairFunction::difference(&u);
        Ok(NormOutput {
            header: Header::new("norm", &p),
            luxemburg_f: want(NormKind::LuxF).then(|| luxemburg(&p.disc, &p.phi, Modular::F(&u))).transpose()?,
            luxemburg_g: want(NormKind::LuxG).then(|| luxemburg(&p.disc, &p.phi, Modular::G(&u))).transpose()?,
            f_norm: want(NormKind::F).then(|| f_norm(&p.disc, &p.phi, &u)).transpose()?,
            g_norm: want(NormKind::G).then(|| g_norm(&p.disc, &p.phi, &u)).transpose()?,
            h_norm: want(NormKind::H).then(|| h_norm(&p.disc, &p.phi, &du)).transpose()?,
            h_star_norm: want(NormKind::Hstar).then(|| h_star_norm(&p.disc, &p.phi, &du)).transpose()?,
            sandwich: verify_sandwich(&p.disc, &p.phi, &u)?,
        })
    };
    let out = run().map_err(Failure::Compute)?;
    write(&c.out, &out)?;
    Ok(out.sandwich.pass)
}

#[derive(Serialize)]
struct MinimizeOutput {
    #[serde(flatten)]
    header: Header,
    p_minus: f64,
    #[serde(flatten)]
    result: SolveResult,
    el_residual: f64,
}

fn solve(c: &Common) -> Outcome {
    let (cfg, p) = problem(c)?;
    let g = function(&cfg, &p, "g")?;
    let u0 = function(&cfg, &p, "u0")?;
    let pm = cfg.p_minus.unwrap_or(p.phi.p_minus());
    let result = minimize(&p.disc, &p.phi, pm, &g, &u0, &cfg.solver).map_err(Failure::Compute)?;
    let residual = el_residual(&p.disc, &p.phi, pm, &result.u_star, &g).map_err(Failure::Compute)?;
    let converged = result.converged;
    let u_star = result.u_star.clone();
    let out = MinimizeOutput { header: Header::new("minimize", &p), p_minus: pm, result, el_residual: residual };
    write(&c.out, &out)?;
    u_star.write_csv(c.out.join("tables").join("u_star.csv")).map_err(Failure::Io)?;
    Ok(converged)
}

#[derive(Serialize)]
struct DualOutput {
    #[serde(flatten)]
    header: Header,
    norm_w: f64,
    self_value: f64,
    value: f64,
    kernel_value: f64,
}

fn dual(c: &Common) -> Outcome {
    let (cfg, p) = problem(c)?;
    let w = function(&cfg, &p, "w")?;
    let u = function(&cfg, &p, "u")?;
    let run = || -> orlicz::Result<(DualOutput, PairFunction)> {
        let kernel = dual_kernel_representation(&p.disc, &p.phi, &w)?.materialize();
        let out = DualOutput {
            header: Header::new("dual", &p),
            norm_w: luxemburg(&p.disc, &p.phi, Modular::F(&w))?.value,
            self_value: dual_apply(&p.disc, &p.phi, &w, &w)?,
            value: dual_apply(&p.disc, &p.phi, &w, &u)?,
            kernel_value: apply_pair_kernel(&p.disc, &kernel, &u)?,
        };
        Ok((out, kernel))
    };
    let (out, kernel) = run().map_err(Failure::Compute)?;
    write(&c.out, &out)?;
    kernel.write_csv(c.out.join("tables").join("dual_kernel.csv")).map_err(Failure::Io)?;
    Ok(true)
}

#[derive(Serialize)]
struct PhiCheckOutput {
    #[serde(flatten)]
    header: Header,
    pass: bool,
    conditions: ConditionReport,
    estimate: Option<GrowthEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate_error: Option<String>,
}

fn phi_check(c: &Common) -> Outcome {
    let (_, p) = problem(c)?;
    let conditions = check_conditions(&p.phi, &p.sampling);
    let (estimate, estimate_error) = match estimate_growth_constants(&p.phi, &p.sampling) {
        Ok(e) => (Some(e), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let pass = conditions.pass();
    let out = PhiCheckOutput { header: Header::new("phi-check", &p), pass, conditions, estimate, estimate_error };
    write(&c.out, &out)?;
    Ok(pass)
}

fn suite(c: &Common, density: bool) -> Outcome {
    let mut cfg = match &c.config {
        Some(path) => SuiteConfig::from_path(path).map_err(Failure::Config)?,
        None => SuiteConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.reseed(seed);
    }
    let report: Report = if density { run_density(&cfg) } else { run_suite(&cfg) }.map_err(Failure::Config)?;
    emit_report(&report, &c.out, &[Format::Json, Format::Csv, Format::Markdown]).map_err(Failure::Io)?;
    for r in &report.records {
        let status = match (&r.error, r.pass) {
            (Some(e), _) => format!("ERROR {e}"),
            (None, true) => "pass".into(),
            (None, false) => "FAIL".into(),
        };
        println!("{:<12} {:<24} {:>8} checks  {}", r.suite.name(), r.scenario, r.checked, status);
    }
    Ok(report.pass)
}
