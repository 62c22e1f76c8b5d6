//! Sequential fractional Adams-Bashforth-Moulton scheme.
//!
//! Each step forms the predictor
//! `y^P_{n+1} = T(t_{n+1}) + h^α Σ_{k=0}^{n} b_{n−k} f_k`
//! and one corrector pass
//! `y_{n+1} = T(t_{n+1}) + h^α (c_n f_0 + Σ_{k=1}^{n} a_{n−k} f_k + f(t_{n+1}, y^P_{n+1}) / Γ(α+2))`,
//! where `T` is the Taylor polynomial of the initial data. The full history
//! sum makes a solve `O(N^2)`.

use crate::engine::sums::{partial_sums, partial_sums_into, PartialSums};
use crate::error::{Error, Result};
use crate::problem::{grid_time, History, Problem, Trajectory, VectorField};
use crate::scalar::Real;
use crate::weights::{ComponentWeights, WeightTable};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Keep `y^P_n` in the returned trajectory.
    pub keep_predictor: bool,
}

/// `Σ_{k<⌈α⌉} t^k / k! · y_0^{(k)}`.
pub fn taylor_term<S: Real>(t: S, init: &[S], alpha: f64) -> S {
    debug_assert_eq!(init.len(), alpha.ceil() as usize);
    let mut acc = S::zero();
    let mut power = S::one();
    for (k, &y) in init.iter().enumerate() {
        if k > 0 {
            power = power * t / S::from_usize(k);
        }
        acc = acc + power * y;
    }
    acc
}

#[inline]
fn predictor_from_sum<S: Real>(taylor: S, h_pow: S, sp: S) -> S {
    taylor + h_pow * sp
}

#[inline]
fn corrector_from_sum<S: Real>(taylor: S, h_pow: S, sc: S, f_pred: S, table: &WeightTable<S>) -> S {
    taylor + h_pow * (sc + f_pred * table.inv_gamma_a2())
}

fn step_powers<S: Real>(h: S, weights: &ComponentWeights<S>) -> Vec<S> {
    weights
        .iter()
        .map(|t| h.powf(S::from_f64(t.alpha())))
        .collect()
}

/// Predictor `y^P_{n+1}` for every component from `f_0..f_n`.
pub fn predictor_step<S: Real>(
    n: usize,
    history: &History<S>,
    weights: &ComponentWeights<S>,
    h: S,
    taylor: &[S],
) -> Vec<S> {
    let sums = partial_sums(0..n + 1, n, history, weights);
    let h_pow = step_powers(h, weights);
    (0..weights.dim())
        .map(|i| predictor_from_sum(taylor[i], h_pow[i], sums.sp[i]))
        .collect()
}

/// Corrected `y_{n+1}` given the predictor; evaluates `rhs` once at `(t_next, predicted)`.
#[allow(clippy::too_many_arguments)]
pub fn corrector_step<S: Real, F: VectorField<S>>(
    n: usize,
    history: &History<S>,
    predicted: &[S],
    weights: &ComponentWeights<S>,
    h: S,
    taylor: &[S],
    rhs: &F,
    t_next: S,
) -> Vec<S> {
    let sums = partial_sums(0..n + 1, n, history, weights);
    let h_pow = step_powers(h, weights);
    let mut f_pred = vec![S::zero(); weights.dim()];
    rhs.eval(t_next, predicted, &mut f_pred);
    (0..weights.dim())
        .map(|i| corrector_from_sum(taylor[i], h_pow[i], sums.sc[i], f_pred[i], weights.component(i)))
        .collect()
}

/// Per-solve state shared by the sequential and parallel engines, so that a
/// single-worker parallel run reproduces the sequential one bit for bit.
pub(crate) struct Stepper<'a, S, F> {
    rhs: &'a F,
    pub(crate) weights: ComponentWeights<S>,
    orders: Vec<f64>,
    init: Vec<Vec<S>>,
    h_pow: Vec<S>,
    horizon: S,
    steps_s: S,
    pub(crate) steps: usize,
    pub(crate) dim: usize,
}

/// Output buffers of one step.
pub(crate) struct StepOutput<S> {
    pub(crate) taylor: Vec<S>,
    pub(crate) predicted: Vec<S>,
    pub(crate) f_predicted: Vec<S>,
    pub(crate) state: Vec<S>,
    pub(crate) f_state: Vec<S>,
}

impl<S: Real> StepOutput<S> {
    pub(crate) fn new(dim: usize) -> Self {
        let z = vec![S::zero(); dim];
        Self {
            taylor: z.clone(),
            predicted: z.clone(),
            f_predicted: z.clone(),
            state: z.clone(),
            f_state: z,
        }
    }
}

impl<'a, S: Real, F: VectorField<S>> Stepper<'a, S, F> {
    pub(crate) fn new(problem: &'a Problem<F>) -> Result<Self> {
        problem.check_field::<S>()?;
        let steps = problem.steps();
        let weights = ComponentWeights::build(problem.orders(), steps)?;
        let horizon = S::from_f64(problem.horizon());
        let steps_s = S::from_usize(steps);
        let h = horizon / steps_s;
        let h_pow = step_powers(h, &weights);
        let init = problem
            .init()
            .iter()
            .map(|v| v.iter().map(|&x| S::from_f64(x)).collect())
            .collect();
        Ok(Self {
            rhs: problem.rhs(),
            weights,
            orders: problem.orders().to_vec(),
            init,
            h_pow,
            horizon,
            steps_s,
            steps,
            dim: problem.dim(),
        })
    }

    pub(crate) fn time(&self, n: usize) -> S {
        grid_time(n, self.horizon, self.steps_s)
    }

    /// `(y_0, f_0)`.
    pub(crate) fn initial(&self) -> Result<(Vec<S>, Vec<S>)> {
        let y0: Vec<S> = self.init.iter().map(|v| v[0]).collect();
        let mut f0 = vec![S::zero(); self.dim];
        self.rhs.eval(self.time(0), &y0, &mut f0);
        if let Some(i) = y0.iter().chain(&f0).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: 0,
                last_valid: 0,
                component: i % self.dim,
            });
        }
        Ok((y0, f0))
    }

    /// Predictor and corrector for `y_{n+1}` from the reduced history sums.
    pub(crate) fn advance(&self, n: usize, totals: &PartialSums<S>, out: &mut StepOutput<S>) -> Result<()> {
        let t_next = self.time(n + 1);
        for i in 0..self.dim {
            out.taylor[i] = taylor_term(t_next, &self.init[i], self.orders[i]);
            out.predicted[i] = predictor_from_sum(out.taylor[i], self.h_pow[i], totals.sp[i]);
        }
        self.rhs.eval(t_next, &out.predicted, &mut out.f_predicted);
        for i in 0..self.dim {
            out.state[i] = corrector_from_sum(
                out.taylor[i],
                self.h_pow[i],
                totals.sc[i],
                out.f_predicted[i],
                self.weights.component(i),
            );
        }
        self.rhs.eval(t_next, &out.state, &mut out.f_state);
        if let Some(i) = out
            .state
            .iter()
            .chain(&out.f_state)
            .position(|v| !v.is_finite())
        {
            return Err(Error::NonFinite {
                step: n + 1,
                last_valid: n,
                component: i % self.dim,
            });
        }
        Ok(())
    }
}

/// Collects per-step results into a [`Trajectory`].
pub(crate) struct Recorder<S> {
    dim: usize,
    states: Vec<S>,
    predicted: Option<Vec<S>>,
}

impl<S: Real> Recorder<S> {
    pub(crate) fn new(dim: usize, steps: usize, y0: &[S], keep_predictor: bool) -> Self {
        let mut states = Vec::with_capacity((steps + 1) * dim);
        states.extend_from_slice(y0);
        let predicted = keep_predictor.then(|| {
            let mut p = Vec::with_capacity((steps + 1) * dim);
            p.extend_from_slice(y0);
            p
        });
        Self {
            dim,
            states,
            predicted,
        }
    }

    pub(crate) fn record(&mut self, out: &StepOutput<S>) {
        self.states.extend_from_slice(&out.state);
        if let Some(p) = self.predicted.as_mut() {
            p.extend_from_slice(&out.predicted);
        }
    }

    pub(crate) fn finish<F: VectorField<S>>(self, stepper: &Stepper<'_, S, F>, history: &History<S>) -> Trajectory<S> {
        let times = (0..=stepper.steps).map(|n| stepper.time(n)).collect();
        Trajectory::from_parts(self.dim, times, self.states, history.rows(), self.predicted)
    }
}

pub fn solve_sequential<S: Real, F: VectorField<S>>(problem: &Problem<F>) -> Result<Trajectory<S>> {
    solve_sequential_with(problem, &SolveOptions::default())
}

pub fn solve_sequential_with<S: Real, F: VectorField<S>>(
    problem: &Problem<F>,
    options: &SolveOptions,
) -> Result<Trajectory<S>> {
    let stepper = Stepper::<S, F>::new(problem)?;
    let (y0, f0) = stepper.initial()?;
    let mut history = History::new(stepper.dim, stepper.steps + 1);
    history.push(&f0);
    let mut recorder = Recorder::new(stepper.dim, stepper.steps, &y0, options.keep_predictor);
    let mut totals = PartialSums::zeros(stepper.dim);
    let mut out = StepOutput::new(stepper.dim);
    for n in 0..stepper.steps {
        partial_sums_into(0..n + 1, n, &history, &stepper.weights, &mut totals);
        stepper.advance(n, &totals, &mut out)?;
        recorder.record(&out);
        history.push(&out.f_state);
    }
    Ok(recorder.finish(&stepper, &history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FnField;

    #[test]
    fn taylor_polynomial() {
        assert_eq!(taylor_term(0.7, &[3.0], 0.9), 3.0);
        assert_eq!(taylor_term(0.0, &[3.0, 5.0], 1.5), 3.0);
        assert_eq!(taylor_term(0.5, &[1.0, 2.0], 2.0), 2.0);
    }

    #[test]
    fn predictor_with_zero_history_is_taylor() {
        let w = ComponentWeights::<f64>::build(&[0.9], 10).unwrap();
        let h = History::from_rows(1, &[[0.0], [0.0], [0.0]]);
        assert_eq!(predictor_step(2, &h, &w, 0.1, &[4.0]), vec![4.0]);
    }

    #[test]
    fn order_one_predictor_is_forward_euler() {
        let w = ComponentWeights::<f64>::build(&[1.0], 10).unwrap();
        let h = History::from_rows(1, &[[2.5]]);
        let y = predictor_step(0, &h, &w, 0.1, &[1.0]);
        assert!((y[0] - (1.0 + 0.1 * 2.5)).abs() < 1e-15);
    }

    #[test]
    fn predictor_matches_three_term_sum() {
        let alpha = 0.9;
        let g = statrs::function::gamma::gamma(alpha + 1.0);
        let b = |j: f64| ((j + 1.0).powf(alpha) - j.powf(alpha)) / g;
        let w = ComponentWeights::<f64>::build(&[alpha], 10).unwrap();
        let f = [1.0, 0.5, 0.25];
        let h = History::from_rows(1, &[[f[0]], [f[1]], [f[2]]]);
        let step = 0.1f64;
        let expected = 2.0 + step.powf(alpha) * (b(2.0) * f[0] + b(1.0) * f[1] + b(0.0) * f[2]);
        let y = predictor_step(2, &h, &w, step, &[2.0]);
        assert!((y[0] - expected).abs() < 1e-13, "{} vs {expected}", y[0]);
    }

    #[test]
    fn order_one_corrector_is_heun() {
        let w = ComponentWeights::<f64>::build(&[1.0], 10).unwrap();
        let rhs = FnField::new(1, |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = t - y[0]);
        let (y0, h) = (1.0, 0.1);
        let f0 = 0.0 - y0;
        let hist = History::from_rows(1, &[[f0]]);
        let pred = predictor_step(0, &hist, &w, h, &[y0]);
        let y1 = corrector_step(0, &hist, &pred, &w, h, &[y0], &rhs, h);
        let heun = y0 + h * (0.5 * f0 + 0.5 * (h - pred[0]));
        assert!((y1[0] - heun).abs() < 1e-15);
    }

    #[test]
    fn zero_rhs_is_constant() {
        let rhs = FnField::new(1, |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 0.0);
        let p = Problem::with_initial_state(rhs, vec![0.9], &[3.0], 2.0, 50).unwrap();
        let traj = solve_sequential::<f64, _>(&p).unwrap();
        assert_eq!(traj.len(), 51);
        assert!(traj.states().all(|s| s[0] == 3.0));
    }

    #[test]
    fn reports_last_valid_step_on_blow_up() {
        // D y = y^3 from y0 = 1 blows up at t = 1/2.
        let rhs = FnField::new(1, |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0] * y[0]);
        let p = Problem::with_initial_state(rhs, vec![1.0], &[1.0], 5.0, 2000).unwrap();
        match solve_sequential::<f64, _>(&p) {
            Err(Error::NonFinite { step, last_valid, component }) => {
                assert_eq!(step, last_valid + 1);
                assert_eq!(component, 0);
                assert!(step > 10);
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn rhs_dimension_must_match() {
        let rhs = FnField::new(2, |_t: f64, _y: &[f64], dy: &mut [f64]| dy.fill(0.0));
        let p = Problem::with_initial_state(rhs, vec![0.9], &[3.0], 2.0, 5).unwrap();
        assert!(matches!(
            solve_sequential::<f64, _>(&p),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn stored_rhs_values_match_states() {
        let rhs = FnField::new(1, |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = t.cos() - 0.5 * y[0]);
        let p = Problem::with_initial_state(&rhs, vec![0.7], &[1.0], 3.0, 100).unwrap();
        let traj = solve_sequential_with::<f64, _>(&p, &SolveOptions { keep_predictor: true }).unwrap();
        for n in 0..traj.len() {
            let mut dy = [0.0];
            rhs.eval(traj.time(n), traj.state(n), &mut dy);
            assert_eq!(dy[0], traj.rhs_value(n)[0]);
        }
        assert!(traj.predicted(5).is_some());
        assert_eq!(traj.time(100), 3.0);
    }
}
