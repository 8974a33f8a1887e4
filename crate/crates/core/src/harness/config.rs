use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::random::TrigFamily;
use crate::discretization::{build_kernel, Discretization, DomainSpec, Grid, GridFunction, KernelSpec};
use crate::error::{Error, Result};
use crate::phi::{build_phi_with, PhiExpression, PhiFunction, SamplingConfig};
use crate::solver::SolverOptions;

/// The property suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Young,
    Hoelder,
    Sandwich,
    Equivalence,
    Convexity,
    Variation,
    Poincare,
    Density,
    Dual,
    Conditions,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 10] = [
        SuiteKind::Young,
        SuiteKind::Hoelder,
        SuiteKind::Sandwich,
        SuiteKind::Equivalence,
        SuiteKind::Convexity,
        SuiteKind::Variation,
        SuiteKind::Poincare,
        SuiteKind::Density,
        SuiteKind::Dual,
        SuiteKind::Conditions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Young => "young",
            SuiteKind::Hoelder => "hoelder",
            SuiteKind::Sandwich => "sandwich",
            SuiteKind::Equivalence => "equivalence",
            SuiteKind::Convexity => "convexity",
            SuiteKind::Variation => "variation",
            SuiteKind::Poincare => "poincare",
            SuiteKind::Density => "density",
            SuiteKind::Dual => "dual",
            SuiteKind::Conditions => "conditions",
        }
    }

    /// The inequality a suite checks.
    pub fn inequality(self) -> &'static str {
        match self {
            SuiteKind::Young => "s t <= φ(s) + φ*(t); φ*(φ'(t)) <= (c2 - 1) φ(t)",
            SuiteKind::Hoelder => "|∫∫ W V a| <= 2 h(V) h*(W)",
            SuiteKind::Sandwich => "(β c1)⁻¹ min(z^p-, z^p+) <= φ <= β c1 max(z^p-, z^p+); β⁻¹ min(λ^p-, λ^p+) <= F(u) <= β max(λ^p-, λ^p+)",
            SuiteKind::Equivalence => "f(u)/2 <= g(u) <= β^(1/p-) f(u); |su| = |s| |u|; |u+v| <= |u| + |v|",
            SuiteKind::Convexity => "δ(ε) > 0; E((u+v)/2) <= (E(u)+E(v))/2; F(u/λ) non-increasing in λ",
            SuiteKind::Variation => "F(u+tv) - F(u) - t ℓ(u,v) = o(t); exact discrete gradient",
            SuiteKind::Poincare => "‖u - ⟨u⟩‖_p^p <= C F_p(u); C = 1/(2|Ω|) for p = 2 and a ≡ 1",
            SuiteKind::Density => "F(u - u_ε) non-increasing and -> 0 along truncation, cutoff and mollification",
            SuiteKind::Dual => "φ_w(w) = |w|²; |w| Φ(u, ŵ)/Φ(ŵ, ŵ) = ∫∫ (u(x) - u(y)) W a; invariance under balanced W",
            SuiteKind::Conditions => "positivity, uniform convexity, almost monotonicity, bounds on φ(1), z φ' <= c2 φ",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Target function and ladder of the density experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensitySpec {
    pub target: String,
    /// Rungs `ε_k`; each uses `n = 1/ε`, cutoff `ε`, support radius `1/ε`
    /// and mollifier width `ε`.
    pub ladder: Vec<f64>,
    /// Center of the support-truncation ball; the origin by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// Smooth compactly supported function for the mollification order
    /// check; `null` disables it.
    pub smooth_target: Option<String>,
    pub smooth_ladder: Vec<f64>,
    /// Finer grid for the ladder; the scenario domain when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec {
            target: "x0*step(x0 - 0.25)*step(0.75 - x0)".into(),
            ladder: (0..6).map(|k| 0.2 / f64::powi(2.0, k)).collect(),
            center: None,
            smooth_target: Some("step(x0 - 0.25)*step(0.75 - x0)*sin(2*pi*(x0 - 0.25))^4".into()),
            smooth_ladder: vec![0.2, 0.1, 0.05, 0.025],
            domain: None,
        }
    }
}

/// Per-suite tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative slack `tol (1 + s t)` in the conjugate inequalities.
    pub young: f64,
    pub hoelder: f64,
    /// Relative slack of the sandwich bounds.
    pub sandwich: f64,
    pub equivalence: f64,
    /// Floor for the uniform-convexity modulus.
    pub convexity: f64,
    /// Relative slack of midpoint convexity and monotonicity checks.
    pub midpoint: f64,
    /// Relative gap for the quadratic remainder identity.
    pub variation: f64,
    /// Minimal decrease factor of `remainder / t` between rungs.
    pub variation_ratio: f64,
    /// Relative gap of the gradient against central differences.
    pub gradient: f64,
    pub poincare: f64,
    pub density: f64,
    /// Final over initial gap of the density ladder.
    pub density_ratio: f64,
    /// Smallest fitted order of the mollification gap.
    pub mollify_order: f64,
    pub dual_norm: f64,
    pub dual_representation: f64,
    pub dual_invariance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            young: 1e-8,
            hoelder: 1e-8,
            sandwich: 1e-8,
            equivalence: 1e-8,
            convexity: 1e-6,
            midpoint: 1e-12,
            variation: 1e-8,
            variation_ratio: 1.8,
            gradient: 1e-5,
            poincare: 1e-10,
            density: 1e-10,
            density_ratio: 0.05,
            mollify_order: 1.8,
            dual_norm: 1e-5,
            dual_representation: 1e-8,
            dual_invariance: 1e-9,
        }
    }
}

/// One domain, kernel and integrand with its random function family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub domain: DomainSpec,
    pub kernel: KernelSpec,
    pub phi: PhiExpression,
    #[serde(default)]
    pub family: TrigFamily,
    /// Fixed functions checked before the random draws.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub density: DensitySpec,
    #[serde(default)]
    pub sampling: Option<SamplingConfig>,
}

impl Scenario {
    /// `[0,1]`, `a ≡ 1`, `φ = z²` with `u = x` as the first function.
    pub fn square_benchmark(cells: usize) -> Self {
        Scenario {
            id: "square".into(),
            domain: DomainSpec::unit_interval(cells),
            kernel: KernelSpec::constant_on(1.0),
            phi: PhiExpression::square(),
            family: TrigFamily::default(),
            functions: vec!["x0".into()],
            seed: 1,
            density: DensitySpec { domain: Some(DomainSpec::unit_interval(1024)), ..DensitySpec::default() },
            sampling: None,
        }
    }

    pub fn build(&self) -> Result<Problem> {
        self.build_on(&self.domain)
    }

    /// Builds the kernel and integrand of the scenario on another domain.
    pub fn build_on(&self, domain: &DomainSpec) -> Result<Problem> {
        let grid = Arc::new(Grid::new(domain)?);
        let kernel = Arc::new(build_kernel(&self.kernel, grid.dim())?);
        let disc = Discretization::new(grid.clone(), kernel)?;
        let mut sampling = self.sampling.clone().unwrap_or_default();
        sampling.domain = grid.bounding_box();
        let phi = build_phi_with(&self.phi, &sampling)?;
        let functions = self.functions.iter().map(|s| GridFunction::from_expr(&grid, s)).collect::<Result<Vec<_>>>()?;
        Ok(Problem { disc, phi, sampling, functions })
    }
}

/// A built scenario.
#[derive(Debug, Clone)]
pub struct Problem {
    pub disc: Discretization,
    pub phi: PhiFunction,
    pub sampling: SamplingConfig,
    pub functions: Vec<GridFunction>,
}

/// Input of `run_suite` and `run_density`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub scenarios: Vec<Scenario>,
    #[serde(default = "all_suites")]
    pub suites: Vec<SuiteKind>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solver: SolverOptions,
}

fn all_suites() -> Vec<SuiteKind> {
    SuiteKind::ALL.to_vec()
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            scenarios: vec![Scenario::square_benchmark(64)],
            suites: all_suites(),
            tolerances: Tolerances::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl SuiteConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Rejects duplicate scenario ids.
    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<&str> = self.scenarios.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate scenario id `{}`", w[0])));
        }
        self.solver.validate()
    }

    /// Overrides every scenario seed with `seed + index`.
    pub fn reseed(&mut self, seed: u64) {
        for (k, s) in self.scenarios.iter_mut().enumerate() {
            s.seed = seed.wrapping_add(k as u64);
        }
    }
}

/// Single-problem input of the `eval`, `norm`, `minimize`, `dual` and
/// `phi-check` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub domain: DomainSpec,
    pub kernel: KernelSpec,
    pub phi: PhiExpression,
    /// Main argument `u` as an expression in `x0, x1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<String>,
    /// Second argument: `v` for `ℓ`, `w` for pairings and the dual.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<String>,
    /// Right-hand side of the energy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// Starting point of the solver; zero by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<String>,
    /// Exponent of the local term; the integrand's `p_minus` by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_minus: Option<f64>,
    /// Exponent for `F_p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingConfig>,
}

impl ProblemConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            id: "problem".into(),
            domain: self.domain.clone(),
            kernel: self.kernel.clone(),
            phi: self.phi.clone(),
            family: TrigFamily::default(),
            functions: Vec::new(),
            seed: 0,
            density: DensitySpec::default(),
            sampling: self.sampling.clone(),
        }
    }

    pub fn function(&self, grid: &Arc<Grid>, which: &str) -> Result<GridFunction> {
        let src = match which {
            "u" => self.u.as_deref(),
            "w" => self.w.as_deref(),
            "g" => self.g.as_deref(),
            "u0" => self.u0.as_deref(),
            _ => None,
        };
        match src {
            Some(s) => GridFunction::from_expr(grid, s),
            None if which == "u0" || which == "g" => Ok(GridFunction::zeros(grid)),
            None => Err(Error::Config(format!("missing `{which}`"))),
        }
    }
}
