use thiserror::Error;

use crate::engine::EvaluationTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate quadruple: two points coincide")]
    DegenerateQuadruple,
    #[error("degenerate triple: two points coincide")]
    DegenerateTriple,
    #[error("degenerate box: {0}")]
    DegenerateBox(String),
    #[error("non-positive mass: cross-ratio {0} is not > 1")]
    NonPositiveMass(f64),
    #[error("argument outside domain: {0}")]
    OutOfDomain(String),
    #[error("distance {rho} is not below the admissible radius {radius}")]
    RadiusExceeded { rho: f64, radius: f64 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("operation not supported for family {0}")]
    UnsupportedFamily(&'static str),
    #[error("sampled Beltrami norm {0} is not < 1")]
    NormOverflow(f64),
    #[error("cusped norm {0} is not < 1/2")]
    NormTooLarge(f64),
    #[error("derivative vanishes at {0}")]
    DerivativeVanishes(String),
    #[error("iteration diverged after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("partition level {0} exceeds the maximum")]
    LevelTooDeep(u32),
    #[error("branch violation at level {level}, cell ({i},{j}): cr = {re}+{im}i")]
    BranchViolation {
        level: u32,
        i: usize,
        j: usize,
        re: f64,
        im: f64,
    },
    #[error("deformation left the admissible neighborhood: {0}")]
    OutsideNeighborhood(String),
    #[error("tolerance not reached after {} levels", .0.partial_sums.len())]
    ToleranceNotReached(Box<EvaluationTrace>),
    #[error("quadrature budget exceeded (estimated error {0:e})")]
    QuadratureBudgetExceeded(f64),
    #[error("need at least {needed} levels, trace has {got}")]
    InsufficientLevels { needed: usize, got: usize },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
