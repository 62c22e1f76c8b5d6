//! Subcommand implementations behind the `caputo` binary.

pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use caputo_core::analysis::{mittag_leffler, sweep_bifurcation, BifurcationTable};
use caputo_core::bench::{speedup_report, time_solve, BenchOptions, TimingTable};
use caputo_core::output::{write_divergence, write_stats, write_strobe, write_timing, write_trajectory};
use caputo_core::precision::{run_dual_precision, solve_at, Precision};
use caputo_core::systems::LinearSystem;
use caputo_core::{DoubleDouble, Error, PartitionPlan, Problem, Real, VectorField};
use log::{info, warn};

pub use config::{load_config, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn is_runtime(e: &Error) -> bool {
    match e {
        Error::NonFinite { .. } | Error::Io { .. } | Error::Nondeterministic { .. } => true,
        Error::Sweep { source, .. } => is_runtime(source),
        _ => false,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if is_runtime(&e) {
            CliError::Runtime(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn io_error(path: Option<&Path>, e: io::Error) -> CliError {
    match path {
        Some(p) => CliError::Runtime(format!("{}: {e}", p.display())),
        None => CliError::Runtime(format!("stdout: {e}")),
    }
}

/// Writes to `path`, or to standard output when there is none.
fn emit<F>(path: Option<&Path>, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_error(Some(p), e))?;
            let mut w = BufWriter::new(file);
            body(&mut w).and_then(|_| w.flush()).map_err(|e| io_error(Some(p), e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w).and_then(|_| w.flush()).map_err(|e| io_error(None, e))
        }
    }
}

fn log_config(name: &str, config: &RunConfig) {
    info!("{name}: resolved configuration\n{}", config.to_toml().trim_end());
}

pub fn solve(config: &RunConfig) -> Result<(), CliError> {
    log_config("solve", config);
    let problem = config.problem()?;
    let plan = config.plan()?;
    let precision = config.precision()?;
    let stride = config.stride()?;
    let (traj, elapsed) = solve_at(&problem, &plan, precision)?;
    info!(
        "solved N = {} (h = {:.3e}) at {precision} with {} worker(s) in {:.3}s; final state {:?}",
        problem.steps(),
        problem.step_size(),
        plan.workers(),
        elapsed.as_secs_f64(),
        traj.last_state()
    );
    emit(config.run.out.as_deref(), |w| write_trajectory(w, &traj, stride))
}

/// Observed order as the least-squares slope of ln(error) against ln(N).
pub fn observed_order(steps: &[usize], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = steps.iter().zip(errors).map(|(&n, &e)| ((n as f64).ln(), e.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -num / den
}

pub fn verify(config: &RunConfig) -> Result<(), CliError> {
    log_config("verify", config);
    let v = &config.verify;
    let alpha = v.alpha.unwrap_or(0.9);
    let lambda = v.lambda.unwrap_or(-1.0);
    let horizon = config.run.horizon.unwrap_or(1.0);
    let min_order = v.min_order.unwrap_or(1.5);
    let steps = v.steps.clone().unwrap_or_else(|| config::DEFAULT_VERIFY_STEPS.to_vec());
    if steps.len() < 2 {
        return Err(CliError::Validation("invalid `verify.steps`: need at least two step counts".into()));
    }
    let plan = config.plan()?;
    let precision = config.precision()?;
    let exact = mittag_leffler(alpha, lambda * horizon.powf(alpha), 1e-20)?;
    let mut errors: Vec<f64> = Vec::with_capacity(steps.len());
    let mut out = String::from("n_steps,error,order\n");
    for (i, &n) in steps.iter().enumerate() {
        let problem = Problem::with_initial_state(LinearSystem::new(lambda), vec![alpha], &[1.0], horizon, n)?;
        let (traj, _) = solve_at(&problem, &plan, precision)?;
        let err = (traj.last_state()[0] - exact).abs();
        let local = if i == 0 {
            String::new()
        } else {
            format!("{:.4}", (errors[i - 1] / err).ln() / (n as f64 / steps[i - 1] as f64).ln())
        };
        out.push_str(&format!("{n},{err:.6e},{local}\n"));
        errors.push(err);
    }
    let order = observed_order(&steps, &errors);
    emit(config.run.out.as_deref(), |w| w.write_all(out.as_bytes()))?;
    info!("E_{alpha}({}) = {exact:.17}; observed order {order:.4}", lambda * horizon.powf(alpha));
    println!("observed order {order:.4}");
    if !(order >= min_order) {
        return Err(CliError::Runtime(format!(
            "observed order {order:.4} is below the required {min_order}"
        )));
    }
    Ok(())
}

fn bench_at<S: Real, F: VectorField<S> + Clone>(
    problem: &Problem<F>,
    steps: &[usize],
    workers: &[usize],
    options: &BenchOptions,
) -> Result<TimingTable, CliError> {
    let mut table = TimingTable::default();
    for &n in steps {
        let cell = problem.clone().with_steps(n)?;
        let rows = time_solve::<S, F>(&cell, workers, options)?;
        for r in &rows.rows {
            info!("N = {} P = {}: median {:.4}s min {:.4}s", r.n_steps, r.workers, r.seconds_median, r.seconds_min);
        }
        table.extend(rows);
    }
    Ok(table)
}

pub fn bench(config: &RunConfig) -> Result<(), CliError> {
    log_config("bench", config);
    let problem = config.problem()?;
    let b = &config.bench;
    let steps = b.steps.clone().unwrap_or_else(|| vec![problem.steps()]);
    let workers = b
        .workers
        .clone()
        .unwrap_or_else(|| vec![config.run.workers.unwrap_or(1)]);
    if steps.contains(&0) {
        return Err(CliError::Validation("invalid `bench.steps`: step counts must be at least 1".into()));
    }
    let options = BenchOptions {
        repeats: b.repeats.unwrap_or(3),
        warmup: b.warmup.unwrap_or(true),
        mode: config.mode()?,
    };
    if options.repeats == 0 {
        return Err(CliError::Validation("invalid `bench.repeats`: must be at least 1".into()));
    }
    for &p in &workers {
        config.plan_with(p)?;
    }
    let table = match config.precision()? {
        Precision::F32 => bench_at::<f32, _>(&problem, &steps, &workers, &options)?,
        Precision::F64 => bench_at::<f64, _>(&problem, &steps, &workers, &options)?,
        _ => bench_at::<DoubleDouble, _>(&problem, &steps, &workers, &options)?,
    };
    match speedup_report(&table) {
        Ok(rows) => {
            for r in rows {
                info!("N = {} P = {}: speedup {:.2}, efficiency {:.2}", r.n_steps, r.workers, r.speedup, r.efficiency);
            }
        }
        Err(e) => warn!("no speedup report: {e}"),
    }
    emit(config.run.out.as_deref(), |w| write_timing(w, &table))
}

fn stats_path(config: &RunConfig) -> Option<PathBuf> {
    if let Some(p) = &config.bifurcate.stats_out {
        return Some(p.clone());
    }
    let out = config.run.out.as_ref()?;
    let stem = out.file_stem()?.to_string_lossy();
    Some(out.with_file_name(format!("{stem}_stats.csv")))
}

pub fn bifurcate(config: &RunConfig) -> Result<(), CliError> {
    log_config("bifurcate", config);
    let base = config.lcr_problem()?;
    let f_values = config.f_values()?;
    let transient = config.transient_steps(base.steps())?;
    let plan: PartitionPlan = config.plan()?;
    let seeds = config.seeds()?;
    let theta = config.theta()?;
    let start = Instant::now();
    let table: BifurcationTable = match config.precision()? {
        Precision::F32 => sweep_bifurcation::<f32>(&base, &f_values, transient, &plan, &seeds)?,
        Precision::F64 => sweep_bifurcation::<f64>(&base, &f_values, transient, &plan, &seeds)?,
        _ => sweep_bifurcation::<DoubleDouble>(&base, &f_values, transient, &plan, &seeds)?,
    };
    let stats = table.stats(theta);
    for (f, s) in &stats {
        info!(
            "f = {f:.5}: {} cluster(s), x in [{:.4}, {:.4}], spans both signs: {}",
            s.cluster_count(),
            s.lower[0],
            s.upper[0],
            s.spans_both_signs()
        );
    }
    info!("sweep of {} amplitude(s) took {:.1}s", f_values.len(), start.elapsed().as_secs_f64());
    emit(config.run.out.as_deref(), |w| write_strobe(w, &table))?;
    match stats_path(config) {
        Some(p) => emit(Some(&p), |w| write_stats(w, &stats)),
        None => {
            let mut buf = Vec::new();
            write_stats(&mut buf, &stats).map_err(|e| io_error(None, e))?;
            info!("statistics\n{}", String::from_utf8_lossy(&buf).trim_end());
            Ok(())
        }
    }
}

pub fn precision(config: &RunConfig) -> Result<(), CliError> {
    log_config("precision", config);
    let problem = config.problem()?;
    let plan = config.plan()?;
    let widths = config.widths()?;
    let stride = config.stride()?;
    let threshold = config.precision.threshold.unwrap_or(1e-6);
    let report = run_dual_precision(&problem, &plan, widths, Some(threshold))?;
    info!(
        "{} vs {}: max divergence {:.3e}, first step above {threshold:e}: {}, wall {:.3}s vs {:.3}s",
        widths.0,
        widths.1,
        report.max_divergence(),
        report.first_exceedance.map_or_else(|| "none".to_string(), |s| s.to_string()),
        report.wall.0.as_secs_f64(),
        report.wall.1.as_secs_f64()
    );
    emit(config.run.out.as_deref(), |w| write_divergence(w, &report, stride))
}
