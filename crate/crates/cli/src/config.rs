//! Run configuration: a TOML file with one section per subcommand, plus
//! command-line overrides.
//!
//! ```toml
//! [system]
//! preset = "lcr"          # "lcr", "linear", or omit and give `expressions`
//! f = 0.085
//! orders = [0.9, 0.9]
//! initial = [0.1, 0.1]
//!
//! [run]
//! horizon = 2000.0
//! steps = 200000
//! workers = 4
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use caputo_core::precision::Precision;
use caputo_core::systems::{equilibria, parse_rhs, LcrParams, LcrSystem, LinearSystem, RhsExpr};
use caputo_core::{PartitionMode, PartitionPlan, Problem, Real, VectorField};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub bench: BenchSection,
    #[serde(default)]
    pub bifurcate: BifurcateSection,
    #[serde(default)]
    pub precision: PrecisionSection,
}

/// Initial data of one component: a value, or `[y(0), y'(0)]` for orders above one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialValue {
    Value(f64),
    Derivatives(Vec<f64>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub preset: Option<String>,
    pub expressions: Option<Vec<String>>,
    pub orders: Option<Vec<f64>>,
    pub initial: Option<Vec<InitialValue>>,
    pub lambda: Option<f64>,
    pub sigma: Option<f64>,
    pub f: Option<f64>,
    pub omega: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub horizon: Option<f64>,
    pub steps: Option<usize>,
    pub precision: Option<String>,
    pub workers: Option<usize>,
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
    pub stride: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub steps: Option<Vec<usize>>,
    pub min_order: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub steps: Option<Vec<usize>>,
    pub workers: Option<Vec<usize>>,
    pub repeats: Option<usize>,
    pub warmup: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcateSection {
    pub f_start: Option<f64>,
    pub f_end: Option<f64>,
    pub f_count: Option<usize>,
    pub transient_frac: Option<f64>,
    pub seeds: Option<Vec<[f64; 2]>>,
    pub theta: Option<f64>,
    pub stats_out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionSection {
    pub widths: Option<[String; 2]>,
    pub threshold: Option<f64>,
}

/// Values given on the command line; each one replaces the file value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub system: Option<String>,
    pub workers: Option<usize>,
    pub steps: Option<usize>,
    pub horizon: Option<f64>,
    pub mode: Option<String>,
    pub precision: Option<String>,
    pub out: Option<PathBuf>,
    pub stride: Option<usize>,
    pub f_start: Option<f64>,
    pub f_end: Option<f64>,
    pub f_count: Option<usize>,
    pub transient_frac: Option<f64>,
    pub seeds: Option<Vec<[f64; 2]>>,
}

pub const DEFAULT_LCR_F: f64 = 0.1;
pub const DEFAULT_TRANSIENT_FRAC: f64 = 0.5;
pub const DEFAULT_THETA: f64 = 0.3;
pub const DEFAULT_VERIFY_STEPS: [usize; 4] = [1 << 10, 1 << 11, 1 << 12, 1 << 13];

/// One-line description of a TOML error, with its line number.
fn describe(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {}", e.message().trim_end())
        }
        None => e.message().trim_end().to_string(),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Validation(format!("config {}", describe(text, &e))))
}

/// Reads `path` (if any) and applies `overrides` on top.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{} {}", p.display(), describe(&text, &e))))?
        }
        None => RunConfig::default(),
    };
    config.apply(overrides);
    Ok(config)
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        fn set<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
            if value.is_some() {
                slot.clone_from(value);
            }
        }
        set(&mut self.system.preset, &o.system);
        set(&mut self.run.workers, &o.workers);
        set(&mut self.run.steps, &o.steps);
        set(&mut self.run.horizon, &o.horizon);
        set(&mut self.run.mode, &o.mode);
        set(&mut self.run.precision, &o.precision);
        set(&mut self.run.out, &o.out);
        set(&mut self.run.stride, &o.stride);
        set(&mut self.bifurcate.f_start, &o.f_start);
        set(&mut self.bifurcate.f_end, &o.f_end);
        set(&mut self.bifurcate.f_count, &o.f_count);
        set(&mut self.bifurcate.transient_frac, &o.transient_frac);
        set(&mut self.bifurcate.seeds, &o.seeds);
    }

    /// The configuration as TOML, for the log.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("<unprintable config: {e}>"))
    }

    pub fn horizon(&self) -> Result<f64, CliError> {
        let t = self.run.horizon.ok_or_else(|| missing("run.horizon", Some("--horizon")))?;
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid("run.horizon", format!("must be positive, got {t}")));
        }
        Ok(t)
    }

    pub fn steps(&self) -> Result<usize, CliError> {
        match self.run.steps {
            None => Err(missing("run.steps", Some("--steps"))),
            Some(0) => Err(invalid("run.steps", "must be at least 1")),
            Some(n) => Ok(n),
        }
    }

    pub fn stride(&self) -> Result<usize, CliError> {
        match self.run.stride.unwrap_or(1) {
            0 => Err(invalid("run.stride", "must be at least 1")),
            k => Ok(k),
        }
    }

    pub fn mode(&self) -> Result<PartitionMode, CliError> {
        match &self.run.mode {
            None => Ok(PartitionMode::default()),
            Some(m) => m.parse().map_err(|e| invalid("run.mode", e)),
        }
    }

    pub fn plan(&self) -> Result<PartitionPlan, CliError> {
        self.plan_with(self.run.workers.unwrap_or(1))
    }

    pub fn plan_with(&self, workers: usize) -> Result<PartitionPlan, CliError> {
        PartitionPlan::new(workers, self.mode()?).map_err(|e| invalid("run.workers", e))
    }

    pub fn precision(&self) -> Result<Precision, CliError> {
        let p: Precision = match &self.run.precision {
            None => Precision::F64,
            Some(s) => s.parse().map_err(|e| invalid("run.precision", e))?,
        };
        p.ensure_supported().map_err(|e| invalid("run.precision", e))?;
        Ok(p)
    }

    pub fn widths(&self) -> Result<(Precision, Precision), CliError> {
        let parse = |s: &str| -> Result<Precision, CliError> {
            let p: Precision = s.parse().map_err(|e| invalid("precision.widths", e))?;
            p.ensure_supported().map_err(|e| invalid("precision.widths", e))?;
            Ok(p)
        };
        match &self.precision.widths {
            None => Ok((Precision::F64, Precision::DoubleDouble)),
            Some([a, b]) => Ok((parse(a)?, parse(b)?)),
        }
    }

    fn preset(&self) -> Result<Preset, CliError> {
        match (self.system.preset.as_deref(), &self.system.expressions) {
            (Some(_), Some(_)) => Err(invalid("system", "give either `preset` or `expressions`, not both")),
            (None, Some(_)) => Ok(Preset::Expressions),
            (None, None) | (Some("lcr"), None) => Ok(Preset::Lcr),
            (Some("linear"), None) => Ok(Preset::Linear),
            (Some(other), None) => Err(invalid(
                "system.preset",
                format!("unknown preset `{other}` (expected lcr or linear)"),
            )),
        }
    }

    /// Circuit parameters: the reference circuit with any per-field overrides.
    pub fn lcr_params(&self) -> LcrParams {
        let s = &self.system;
        let mut p = LcrParams::reference(s.f.unwrap_or(DEFAULT_LCR_F));
        p.sigma = s.sigma.unwrap_or(p.sigma);
        p.omega = s.omega.unwrap_or(p.omega);
        p.a = s.a.unwrap_or(p.a);
        p.b = s.b.unwrap_or(p.b);
        p
    }

    fn orders_and_init(&self, dim: usize, default_orders: &[f64], default_init: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>), CliError> {
        let orders = match &self.system.orders {
            Some(o) if o.len() == dim => o.clone(),
            Some(o) if o.len() == 1 => vec![o[0]; dim],
            Some(o) => {
                return Err(invalid(
                    "system.orders",
                    format!("expected {dim} order(s), got {}", o.len()),
                ))
            }
            None if !default_orders.is_empty() => default_orders.to_vec(),
            None => return Err(missing("system.orders", None)),
        };
        let init: Vec<Vec<f64>> = match &self.system.initial {
            Some(v) if v.len() == dim => v
                .iter()
                .map(|iv| match iv {
                    InitialValue::Value(x) => vec![*x],
                    InitialValue::Derivatives(d) => d.clone(),
                })
                .collect(),
            Some(v) => {
                return Err(invalid(
                    "system.initial",
                    format!("expected {dim} entries, got {}", v.len()),
                ))
            }
            None if !default_init.is_empty() => default_init.iter().map(|&x| vec![x]).collect(),
            None => return Err(missing("system.initial", None)),
        };
        Ok((orders, init))
    }

    /// The configured system as a solvable problem.
    pub fn problem(&self) -> Result<Problem<Field>, CliError> {
        let (field, orders, init) = match self.preset()? {
            Preset::Lcr => {
                let (o, i) = self.orders_and_init(2, &[0.9, 0.9], &[0.1, 0.1])?;
                (Field::Lcr(LcrSystem::new(self.lcr_params())), o, i)
            }
            Preset::Linear => {
                let (o, i) = self.orders_and_init(1, &[0.9], &[1.0])?;
                (Field::Linear(LinearSystem::new(self.system.lambda.unwrap_or(-1.0))), o, i)
            }
            Preset::Expressions => {
                let exprs = self.system.expressions.as_deref().unwrap_or_default();
                let rhs = parse_rhs(exprs).map_err(|e| invalid("system.expressions", e))?;
                let (o, i) = self.orders_and_init(exprs.len(), &[], &[])?;
                (Field::Expr(rhs), o, i)
            }
        };
        Problem::new(field, orders, init, self.horizon()?, self.steps()?).map_err(|e| invalid("system", e))
    }

    /// The configured circuit; fails for other systems.
    pub fn lcr_problem(&self) -> Result<Problem<LcrSystem>, CliError> {
        if self.preset()? != Preset::Lcr {
            return Err(invalid("system.preset", "bifurcate needs the lcr preset"));
        }
        let problem = self.problem()?;
        Ok(problem.with_rhs(LcrSystem::new(self.lcr_params())))
    }

    /// Strictly increasing forcing amplitudes for a sweep.
    pub fn f_values(&self) -> Result<Vec<f64>, CliError> {
        let b = &self.bifurcate;
        let start = b.f_start.unwrap_or(0.0);
        let end = b.f_end.unwrap_or(0.2);
        let count = b.f_count.unwrap_or(21);
        if count == 0 {
            return Err(invalid("bifurcate.f_count", "must be at least 1"));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        if !(end > start) {
            return Err(invalid("bifurcate.f_end", "must exceed f_start when f_count > 1"));
        }
        Ok((0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect())
    }

    pub fn transient_steps(&self, steps: usize) -> Result<usize, CliError> {
        let frac = self.bifurcate.transient_frac.unwrap_or(DEFAULT_TRANSIENT_FRAC);
        if !(0.0..1.0).contains(&frac) {
            return Err(invalid("bifurcate.transient_frac", format!("must be in [0, 1), got {frac}")));
        }
        Ok((frac * steps as f64).floor() as usize)
    }

    /// Sweep seeds; by default one point just off each of E+ and E-.
    pub fn seeds(&self) -> Result<Vec<[f64; 2]>, CliError> {
        if let Some(s) = &self.bifurcate.seeds {
            return Ok(s.clone());
        }
        let mut params = self.lcr_params();
        params.f = 0.0;
        let e = equilibria(&params).map_err(|e| invalid("system", e))?;
        Ok(vec![
            [e.e_plus[0] + 0.01, e.e_plus[1] + 0.01],
            [e.e_minus[0] - 0.01, e.e_minus[1] - 0.01],
        ])
    }

    pub fn theta(&self) -> Result<f64, CliError> {
        let t = self.bifurcate.theta.unwrap_or(DEFAULT_THETA);
        if !(t > 0.0) {
            return Err(invalid("bifurcate.theta", "must be positive"));
        }
        Ok(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Preset {
    Lcr,
    Linear,
    Expressions,
}

/// Any of the systems the command line can build.
#[derive(Clone, Debug)]
pub enum Field {
    Linear(LinearSystem),
    Lcr(LcrSystem),
    Expr(RhsExpr),
}

impl<S: Real> VectorField<S> for Field {
    fn dim(&self) -> usize {
        match self {
            Field::Linear(f) => VectorField::<S>::dim(f),
            Field::Lcr(f) => VectorField::<S>::dim(f),
            Field::Expr(f) => VectorField::<S>::dim(f),
        }
    }

    fn eval(&self, t: S, y: &[S], dy: &mut [S]) {
        match self {
            Field::Linear(f) => f.eval(t, y, dy),
            Field::Lcr(f) => f.eval(t, y, dy),
            Field::Expr(f) => f.eval(t, y, dy),
        }
    }
}

/// Parses `x,y;x,y;...`.
pub fn parse_seeds(text: &str) -> Result<Vec<[f64; 2]>, String> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [x, y] => Ok([
                    x.parse().map_err(|_| format!("bad seed coordinate `{x}`"))?,
                    y.parse().map_err(|_| format!("bad seed coordinate `{y}`"))?,
                ]),
                _ => Err(format!("seed `{pair}` must be `x,y`")),
            }
        })
        .collect()
}

fn missing(field: &str, flag: Option<&str>) -> CliError {
    let hint = match flag {
        Some(f) => format!("set it in the config file or pass {f}"),
        None => "set it in the config file".to_string(),
    };
    CliError::Validation(format!("missing required field `{field}` ({hint})"))
}

fn invalid(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("invalid `{field}`: {message}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcr_preset_parameters() {
        let cfg = parse_config("[system]\npreset = \"lcr\"\n").unwrap();
        let p = cfg.lcr_params();
        assert_eq!((p.sigma, p.omega, p.a, p.b), (1.015, 0.55, -1.02, -0.58));
    }

    #[test]
    fn initial_value_forms() {
        let cfg = parse_config(
            "[system]\nexpressions = [\"-y1\"]\norders = [1.5]\ninitial = [[1.0, 0.0]]\n[run]\nhorizon = 1.0\nsteps = 10\n",
        )
        .unwrap();
        let problem = cfg.problem().unwrap();
        assert_eq!(problem.init(), &[vec![1.0, 0.0]]);
    }

    #[test]
    fn seeds_text() {
        assert_eq!(parse_seeds("1,2; -0.5, 3").unwrap(), vec![[1.0, 2.0], [-0.5, 3.0]]);
        assert!(parse_seeds("1,2,3").is_err());
        assert!(parse_seeds("a,1").is_err());
    }

    #[test]
    fn f_grid() {
        let mut cfg = RunConfig::default();
        cfg.bifurcate.f_start = Some(0.0);
        cfg.bifurcate.f_end = Some(0.2);
        cfg.bifurcate.f_count = Some(5);
        let f = cfg.f_values().unwrap();
        assert_eq!(f.len(), 5);
        assert_eq!(f[4], 0.2);
        assert!(f.windows(2).all(|w| w[0] < w[1]));
    }
}
