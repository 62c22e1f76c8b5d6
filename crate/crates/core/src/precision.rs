//! Running one problem at two floating-point widths and measuring how far
//! the trajectories drift apart.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::dd::DoubleDouble;
use crate::engine::{solve_parallel, PartitionPlan};
use crate::error::{Error, Result};
use crate::problem::{Problem, Trajectory, VectorField};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    F32,
    F64,
    /// x87-style 80-bit hardware floats. Rust has no such type, so this
    /// always reports [`Precision::DoubleDouble`] as the fallback.
    HardwareExtended,
    /// Software double-double, about 31 significant digits.
    DoubleDouble,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
            Precision::HardwareExtended => "hardware-extended",
            Precision::DoubleDouble => "extended",
        }
    }

    /// Approximate significant decimal digits.
    pub fn digits(self) -> u32 {
        match self {
            Precision::F32 => 7,
            Precision::F64 => 15,
            Precision::HardwareExtended => 18,
            Precision::DoubleDouble => 31,
        }
    }

    pub fn ensure_supported(self) -> Result<()> {
        match self {
            Precision::HardwareExtended => Err(Error::UnsupportedPrecision {
                requested: Precision::HardwareExtended.name(),
                fallback: Precision::DoubleDouble.name(),
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Precision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" | "single" => Ok(Precision::F32),
            "f64" | "double" => Ok(Precision::F64),
            "extended" | "dd" | "double-double" => Ok(Precision::DoubleDouble),
            "hardware-extended" | "f80" | "x87" => Ok(Precision::HardwareExtended),
            other => Err(Error::InvalidArgument(format!(
                "unknown precision `{other}` (expected f32, f64 or extended)"
            ))),
        }
    }
}

/// A field usable at every supported width.
pub trait AnyWidthField: VectorField<f32> + VectorField<f64> + VectorField<DoubleDouble> {}

impl<F> AnyWidthField for F where F: VectorField<f32> + VectorField<f64> + VectorField<DoubleDouble> {}

fn timed<S: Real, F: VectorField<S>>(problem: &Problem<F>, plan: &PartitionPlan) -> Result<(Trajectory<f64>, Duration)> {
    let start = Instant::now();
    let traj = solve_parallel::<S, F>(problem, plan)?;
    let elapsed = start.elapsed();
    Ok((traj.to_f64(), elapsed))
}

/// Solves at `precision` and returns the trajectory rounded to `f64`.
pub fn solve_at<F: AnyWidthField>(
    problem: &Problem<F>,
    plan: &PartitionPlan,
    precision: Precision,
) -> Result<(Trajectory<f64>, Duration)> {
    precision.ensure_supported()?;
    match precision {
        Precision::F32 => timed::<f32, F>(problem, plan),
        Precision::F64 => timed::<f64, F>(problem, plan),
        Precision::DoubleDouble => timed::<DoubleDouble, F>(problem, plan),
        Precision::HardwareExtended => unreachable!("rejected by ensure_supported"),
    }
}

#[derive(Clone, Debug)]
pub struct DivergenceReport {
    pub widths: (Precision, Precision),
    pub times: Vec<f64>,
    /// Largest componentwise difference at each step.
    pub per_step: Vec<f64>,
    /// Running maximum of `per_step`.
    pub cumulative_max: Vec<f64>,
    pub threshold: Option<f64>,
    /// First step whose divergence exceeds `threshold`.
    pub first_exceedance: Option<usize>,
    pub wall: (Duration, Duration),
}

impl DivergenceReport {
    pub fn from_trajectories(
        a: &Trajectory<f64>,
        b: &Trajectory<f64>,
        widths: (Precision, Precision),
        wall: (Duration, Duration),
        threshold: Option<f64>,
    ) -> Self {
        assert_eq!(a.len(), b.len(), "trajectories cover different grids");
        let per_step: Vec<f64> = (0..a.len())
            .map(|n| {
                a.state(n)
                    .iter()
                    .zip(b.state(n))
                    .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
                    .fold(0.0, f64::max)
            })
            .collect();
        let mut running = 0.0f64;
        let cumulative_max = per_step
            .iter()
            .map(|&d| {
                // NaN counts as unbounded divergence.
                running = if d.is_nan() { f64::INFINITY } else { running.max(d) };
                running
            })
            .collect();
        let first_exceedance = threshold.and_then(|th| per_step.iter().position(|&d| !(d <= th)));
        Self {
            widths,
            times: a.times().to_vec(),
            per_step,
            cumulative_max,
            threshold,
            first_exceedance,
            wall,
        }
    }

    pub fn max_divergence(&self) -> f64 {
        self.cumulative_max.last().copied().unwrap_or(0.0)
    }

    /// Wall time of the second width over the first.
    pub fn time_ratio(&self) -> f64 {
        self.wall.1.as_secs_f64() / self.wall.0.as_secs_f64()
    }
}

/// Solves `problem` once at each width (same plan, same algorithm) and
/// compares the results step by step.
pub fn run_dual_precision<F: AnyWidthField>(
    problem: &Problem<F>,
    plan: &PartitionPlan,
    widths: (Precision, Precision),
    threshold: Option<f64>,
) -> Result<DivergenceReport> {
    widths.0.ensure_supported()?;
    widths.1.ensure_supported()?;
    let (a, ta) = solve_at(problem, plan, widths.0)?;
    let (b, tb) = solve_at(problem, plan, widths.1)?;
    Ok(DivergenceReport::from_trajectories(&a, &b, widths, (ta, tb), threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::LinearSystem;

    fn linear(steps: usize) -> Problem<LinearSystem> {
        Problem::with_initial_state(LinearSystem::new(-1.0), vec![0.9], &[1.0], 1.0, steps).unwrap()
    }

    #[test]
    fn identical_widths_do_not_diverge() {
        let plan = PartitionPlan::single();
        for p in [Precision::F64, Precision::DoubleDouble] {
            let report = run_dual_precision(&linear(200), &plan, (p, p), Some(0.0)).unwrap();
            assert!(report.per_step.iter().all(|&d| d == 0.0));
            assert_eq!(report.first_exceedance, None);
        }
    }

    #[test]
    fn cumulative_max_is_monotone() {
        let plan = PartitionPlan::single();
        let report = run_dual_precision(&linear(500), &plan, (Precision::F32, Precision::F64), Some(1e-9)).unwrap();
        assert!(report.cumulative_max.windows(2).all(|w| w[0] <= w[1]));
        assert!(report.max_divergence() > 0.0 && report.max_divergence() < 1e-4);
        assert!(report.first_exceedance.is_some());
        assert_eq!(report.times.len(), 501);
    }

    #[test]
    fn hardware_extended_names_fallback() {
        let plan = PartitionPlan::single();
        match run_dual_precision(&linear(10), &plan, (Precision::F64, Precision::HardwareExtended), None) {
            Err(Error::UnsupportedPrecision { fallback, .. }) => assert_eq!(fallback, "extended"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_names() {
        assert_eq!("extended".parse::<Precision>().unwrap(), Precision::DoubleDouble);
        assert_eq!("f64".parse::<Precision>().unwrap(), Precision::F64);
        assert!("f128".parse::<Precision>().is_err());
    }
}
