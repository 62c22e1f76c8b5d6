//! Worker-partitioned history sums with a deterministic all-reduce.
//!
//! Every worker owns a chunk of the history index range at each step and
//! computes its predictor/corrector partial sums against the shared,
//! read-only history. After a barrier the controlling thread (rank 0)
//! folds the partials in rank order, applies predictor and corrector, and
//! appends the new `f_{n+1}`; a second barrier releases the next step.
//! There is no master/worker messaging: all ranks compute, and the single
//! append between barriers is the only write to shared state.

mod barrier;
pub mod partition;
pub mod sums;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, RwLock};
use std::thread;

use self::barrier::SpinBarrier;
pub use self::partition::{PartitionMode, PartitionPlan};
use self::sums::{partial_sums_into, reduce_into};
pub use self::sums::{partial_sums, reduce_all, PartialSums};
use crate::error::Result;
use crate::problem::{History, Problem, Trajectory, VectorField};
use crate::scalar::Real;
use crate::solver::{Recorder, SolveOptions, StepOutput, Stepper};

pub fn solve_parallel<S: Real, F: VectorField<S>>(
    problem: &Problem<F>,
    plan: &PartitionPlan,
) -> Result<Trajectory<S>> {
    solve_parallel_with(problem, plan, &SolveOptions::default())
}

pub fn solve_parallel_with<S: Real, F: VectorField<S>>(
    problem: &Problem<F>,
    plan: &PartitionPlan,
    options: &SolveOptions,
) -> Result<Trajectory<S>> {
    let stepper = Stepper::<S, F>::new(problem)?;
    let (y0, f0) = stepper.initial()?;
    let dim = stepper.dim;
    let steps = stepper.steps;
    let workers = plan.workers();

    let mut history = History::new(dim, steps + 1);
    history.push(&f0);
    let history = RwLock::new(history);
    let slots: Vec<Mutex<PartialSums<S>>> = (0..workers)
        .map(|_| Mutex::new(PartialSums::zeros(dim)))
        .collect();
    let barrier = SpinBarrier::new(workers);
    let stop = AtomicBool::new(false);

    let compute_chunk = |rank: usize, n: usize| {
        let history = history.read().expect("history lock poisoned");
        let mut slot = slots[rank].lock().expect("partial-sum slot poisoned");
        partial_sums_into(plan.chunk(rank, n, steps), n, &history, &stepper.weights, &mut slot);
    };

    let mut recorder = Recorder::new(dim, steps, &y0, options.keep_predictor);
    let mut totals = PartialSums::zeros(dim);
    let mut out = StepOutput::new(dim);

    let outcome = thread::scope(|scope| {
        for rank in 1..workers {
            let compute_chunk = &compute_chunk;
            let barrier = &barrier;
            let stop = &stop;
            scope.spawn(move || {
                for n in 0..steps {
                    compute_chunk(rank, n);
                    barrier.wait();
                    barrier.wait();
                    if stop.load(Ordering::Acquire) {
                        break;
                    }
                }
            });
        }

        for n in 0..steps {
            compute_chunk(0, n);
            barrier.wait();

            let guards: Vec<_> = slots
                .iter()
                .map(|s| s.lock().expect("partial-sum slot poisoned"))
                .collect();
            reduce_into(guards.iter().map(|g| &**g), &mut totals);
            drop(guards);

            let step = stepper.advance(n, &totals, &mut out);
            match step {
                Ok(()) => {
                    recorder.record(&out);
                    history
                        .write()
                        .expect("history lock poisoned")
                        .push(&out.f_state);
                    barrier.wait();
                }
                Err(e) => {
                    stop.store(true, Ordering::Release);
                    barrier.wait();
                    return Err(e);
                }
            }
        }
        Ok(())
    });
    outcome?;

    let history = history.into_inner().expect("history lock poisoned");
    Ok(recorder.finish(&stepper, &history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::problem::FnField;
    use crate::solver::solve_sequential;

    fn damped() -> Problem<FnField<impl Fn(f64, &[f64], &mut [f64]) + Sync + Clone>> {
        let rhs = FnField::new(2, |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1] - 0.3 * y[0];
            dy[1] = -y[0] + 0.2 * t.sin();
        });
        Problem::with_initial_state(rhs, vec![0.8, 0.95], &[1.0, 0.0], 10.0, 600).unwrap()
    }

    #[test]
    fn single_worker_is_bitwise_sequential() {
        let p = damped();
        let seq = solve_sequential::<f64, _>(&p).unwrap();
        for mode in [PartitionMode::Balanced, PartitionMode::StaticBlock] {
            let par = solve_parallel::<f64, _>(&p, &PartitionPlan::new(1, mode).unwrap()).unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn workers_agree_with_sequential() {
        let p = damped();
        let seq = solve_sequential::<f64, _>(&p).unwrap();
        for workers in [2, 3, 5] {
            for mode in [PartitionMode::Balanced, PartitionMode::StaticBlock] {
                let plan = PartitionPlan::new(workers, mode).unwrap();
                let par = solve_parallel::<f64, _>(&p, &plan).unwrap();
                assert!(seq.max_abs_diff(&par) <= 1e-12, "P={workers} {mode:?}");
                let again = solve_parallel::<f64, _>(&p, &plan).unwrap();
                assert_eq!(par, again);
            }
        }
    }

    #[test]
    fn non_finite_stops_all_workers() {
        let rhs = FnField::new(1, |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0] * y[0]);
        let p = Problem::with_initial_state(rhs, vec![1.0], &[1.0], 5.0, 2000).unwrap();
        let seq = solve_sequential::<f64, _>(&p).unwrap_err();
        let par = solve_parallel::<f64, _>(&p, &PartitionPlan::balanced(3).unwrap()).unwrap_err();
        match (seq, par) {
            (Error::NonFinite { step: a, .. }, Error::NonFinite { step: b, .. }) => {
                assert!(a.abs_diff(b) <= 1)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
