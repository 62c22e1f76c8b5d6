use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported fractional order {0} (expected 0 < alpha <= 2)")]
    UnsupportedOrder(f64),

    #[error("step count must be at least 1")]
    ZeroSteps,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid partition plan: {0}")]
    InvalidPlan(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite state at step {step} (component {component}); last valid step is {last_valid}")]
    NonFinite {
        step: usize,
        last_valid: usize,
        component: usize,
    },

    #[error("syntax error in expression {expr} at position {position}: {message}")]
    Syntax {
        expr: usize,
        position: usize,
        message: String,
    },

    #[error("unknown identifier `{name}` in expression {expr} at position {position}")]
    UnknownIdentifier {
        expr: usize,
        position: usize,
        name: String,
    },

    #[error("function `{name}` takes {expected} argument(s), got {found} (expression {expr})")]
    Arity {
        expr: usize,
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("degenerate LCR parameters: 1 + sigma*b = 0, equilibria E+/E- do not exist")]
    DegenerateEquilibrium,

    #[error("argument {z} outside the series-safe range |z| <= 5")]
    SeriesRange { z: f64 },

    #[error("strobe period {period} is shorter than two steps (h = {step})")]
    UnresolvableStrobe { period: f64, step: f64 },

    #[error("repeated solve with N = {n_steps}, P = {workers} produced different output")]
    Nondeterministic { n_steps: usize, workers: usize },

    #[error("timing table has no single-worker baseline for N = {0}")]
    MissingBaseline(usize),

    #[error("precision `{requested}` is not available on this host; use `{fallback}`")]
    UnsupportedPrecision {
        requested: &'static str,
        fallback: &'static str,
    },

    #[error("sweep failed at f = {f}: {source}")]
    Sweep {
        f: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
