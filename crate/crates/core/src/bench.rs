//! Wall-clock timing of solves and speedup reports.

use std::time::Instant;

use crate::engine::{solve_parallel, PartitionMode, PartitionPlan};
use crate::error::{Error, Result};
use crate::problem::{Problem, Trajectory, VectorField};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchOptions {
    pub repeats: usize,
    /// Run each cell once before timing it.
    pub warmup: bool,
    pub mode: PartitionMode,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            repeats: 3,
            warmup: true,
            mode: PartitionMode::Balanced,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub n_steps: usize,
    pub workers: usize,
    pub mode: PartitionMode,
    pub seconds_median: f64,
    pub seconds_min: f64,
    pub repeats: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
}

impl TimingTable {
    pub fn extend(&mut self, other: TimingTable) {
        self.rows.extend(other.rows);
    }

    pub fn get(&self, n_steps: usize, workers: usize) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.n_steps == n_steps && r.workers == workers)
    }
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}

fn same_output<S: Real>(a: &Trajectory<S>, b: &Trajectory<S>) -> bool {
    a.len() == b.len() && a.states().zip(b.states()).all(|(x, y)| x == y)
}

/// One row per worker count: median and minimum wall time of `repeats`
/// solves of `problem`. Every repeat of a cell must reproduce the same
/// trajectory.
pub fn time_solve<S: Real, F: VectorField<S>>(
    problem: &Problem<F>,
    worker_counts: &[usize],
    options: &BenchOptions,
) -> Result<TimingTable> {
    if options.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let mut table = TimingTable::default();
    for &workers in worker_counts {
        let plan = PartitionPlan::new(workers, options.mode)?;
        if options.warmup {
            solve_parallel::<S, F>(problem, &plan)?;
        }
        let mut seconds = Vec::with_capacity(options.repeats);
        let mut reference: Option<Trajectory<S>> = None;
        for _ in 0..options.repeats {
            let start = Instant::now();
            let traj = solve_parallel::<S, F>(problem, &plan)?;
            seconds.push(start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE));
            match &reference {
                None => reference = Some(traj),
                Some(first) if !same_output(first, &traj) => {
                    return Err(Error::Nondeterministic {
                        n_steps: problem.steps(),
                        workers,
                    })
                }
                Some(_) => {}
            }
        }
        seconds.sort_by(f64::total_cmp);
        table.rows.push(TimingRow {
            n_steps: problem.steps(),
            workers,
            mode: options.mode,
            seconds_median: median(&seconds),
            seconds_min: seconds[0],
            repeats: options.repeats,
        });
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupRow {
    pub n_steps: usize,
    pub workers: usize,
    pub mode: PartitionMode,
    pub speedup: f64,
    pub efficiency: f64,
}

/// `speedup = time(1) / time(P)` and `efficiency = speedup / P`, using
/// medians and the single-worker row with the same `N` as baseline.
pub fn speedup_report(table: &TimingTable) -> Result<Vec<SpeedupRow>> {
    table
        .rows
        .iter()
        .map(|row| {
            let base = table
                .rows
                .iter()
                .find(|r| r.n_steps == row.n_steps && r.workers == 1 && r.mode == row.mode)
                .or_else(|| table.rows.iter().find(|r| r.n_steps == row.n_steps && r.workers == 1))
                .ok_or(Error::MissingBaseline(row.n_steps))?;
            let speedup = base.seconds_median / row.seconds_median;
            Ok(SpeedupRow {
                n_steps: row.n_steps,
                workers: row.workers,
                mode: row.mode,
                speedup,
                efficiency: speedup / row.workers as f64,
            })
        })
        .collect()
}

/// `time(2N) / time(N)` at one worker, when both rows are present.
pub fn doubling_ratio(table: &TimingTable, n_steps: usize) -> Option<f64> {
    let base = table.get(n_steps, 1)?;
    let doubled = table.get(2 * n_steps, 1)?;
    Some(doubled.seconds_median / base.seconds_median)
}
