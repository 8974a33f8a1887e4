use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid expression `{input}`: {reason}")]
    InvalidExpression { input: String, reason: String },

    #[error("invalid growth exponents: need 1 < p_minus <= p_plus, got p_minus = {p_minus}, p_plus = {p_plus}")]
    InvalidExponent { p_minus: f64, p_plus: f64 },

    #[error("perturbation too large: empirical c8 = {c8} (must be < 1)")]
    PerturbationTooLarge { c8: f64 },

    #[error(
        "multiplier fails its second-derivative estimate: c9 = {c9} (must be < 2), c10 = {c10} (must be < c7 = {c7})"
    )]
    MultiplierRejected { c9: f64, c10: f64, c7: f64 },

    #[error("function is not admissible: {0}")]
    NotAdmissible(String),

    #[error("non-positive derivative {value} at z = {z}")]
    NonPositiveDerivative { z: f64, value: f64 },

    #[error("conjugate solver could not bracket the maximizer for t = {t}")]
    ConjugateBracketFailure { t: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("boxes {first} and {second} overlap")]
    OverlappingBoxes { first: usize, second: usize },

    #[error("grid has {nodes} nodes, {pairs} node pairs exceeds the limit {limit}")]
    TooManyPairs { nodes: usize, pairs: u64, limit: u64 },

    #[error("components {first} and {second} are {gap} apart, not closer than the kernel ball diameter {diameter}")]
    ComponentGapTooLarge { first: usize, second: usize, gap: f64, diameter: f64 },

    #[error("kernel value {value} at offset {offset:?} is below the lower bound c0 = {c0} inside the ball")]
    KernelLowerBoundViolated { offset: Vec<f64>, value: f64, c0: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("non-finite integrand {value} at node pair ({i}, {j})")]
    NonFiniteIntegrand { i: usize, j: usize, value: f64 },

    #[error("mollifier width {eps} exceeds half the component width {half_width}")]
    MollifierTooWide { eps: f64, half_width: f64 },

    #[error("Luxemburg bracket could not be expanded after {doublings} doublings")]
    BracketExpansionFailure { doublings: usize },

    #[error("all samples are constant")]
    DegenerateSample,

    #[error("line search stalled after {halvings} halvings at iteration {iteration}")]
    LineSearchStalled { iteration: usize, halvings: usize },

    #[error("zero denominator: pairing of the normalized element with itself is {value}")]
    ZeroDenominator { value: f64 },

    #[error("ladder has {rungs} rungs, at least 3 are required")]
    LadderTooShort { rungs: usize },

    #[error("size mismatch: expected {expected} values, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
