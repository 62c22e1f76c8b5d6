//! Problem definition and solution storage.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::weights::{check_order, initial_terms};

/// Right-hand side `f(t, y)` of a fractional system.
///
/// Implementations must be pure; the parallel engine evaluates them from
/// the controlling thread only, but sweeps may share one across threads.
pub trait VectorField<S>: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: S, y: &[S], dy: &mut [S]);
}

impl<S, F: VectorField<S> + ?Sized> VectorField<S> for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: S, y: &[S], dy: &mut [S]) {
        (**self).eval(t, y, dy)
    }
}

/// Closure-backed vector field, handy for one-off systems and tests.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<S, F> VectorField<S> for FnField<F>
where
    F: Fn(S, &[S], &mut [S]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: S, y: &[S], dy: &mut [S]) {
        (self.f)(t, y, dy)
    }
}

/// A fractional initial value problem `D^{α_i} y_i = f_i(t, y)` on `[0, T]`.
///
/// Numeric data is held as `f64`; the solver converts it into whatever
/// scalar type it runs in, so the same problem can be solved at several
/// precisions.
#[derive(Clone, Debug)]
pub struct Problem<F> {
    rhs: F,
    orders: Vec<f64>,
    init: Vec<Vec<f64>>,
    horizon: f64,
    steps: usize,
}

impl<F> Problem<F> {
    /// `init[i]` lists `y_i(0), y_i'(0), …`, exactly `⌈α_i⌉` values.
    pub fn new(
        rhs: F,
        orders: Vec<f64>,
        init: Vec<Vec<f64>>,
        horizon: f64,
        steps: usize,
    ) -> Result<Self> {
        let problem = Self {
            rhs,
            orders,
            init,
            horizon,
            steps,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Convenience constructor for orders in `(0, 1]`, one initial value each.
    pub fn with_initial_state(
        rhs: F,
        orders: Vec<f64>,
        y0: &[f64],
        horizon: f64,
        steps: usize,
    ) -> Result<Self> {
        let init = y0.iter().map(|&v| vec![v]).collect();
        Self::new(rhs, orders, init, horizon, steps)
    }

    fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::InvalidProblem("system needs at least one component".into()));
        }
        if self.init.len() != self.orders.len() {
            return Err(Error::InvalidProblem(format!(
                "{} orders but {} initial-value lists",
                self.orders.len(),
                self.init.len()
            )));
        }
        for (i, (&alpha, init)) in self.orders.iter().zip(&self.init).enumerate() {
            check_order(alpha)?;
            let needed = initial_terms(alpha);
            if init.len() != needed {
                return Err(Error::InvalidProblem(format!(
                    "component {} has order {alpha} and needs {needed} initial value(s), got {}",
                    i + 1,
                    init.len()
                )));
            }
            if init.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidProblem(format!(
                    "component {} has a non-finite initial value",
                    i + 1
                )));
            }
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.steps == 0 {
            return Err(Error::ZeroSteps);
        }
        Ok(())
    }

    pub fn rhs(&self) -> &F {
        &self.rhs
    }

    pub fn dim(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn init(&self) -> &[Vec<f64>] {
        &self.init
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_size(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        self.steps = steps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        self.horizon = horizon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_initial_values(mut self, init: Vec<Vec<f64>>) -> Result<Self> {
        self.init = init;
        self.validate()?;
        Ok(self)
    }

    /// Same numeric data with a different right-hand side.
    pub fn with_rhs<G>(self, rhs: G) -> Problem<G> {
        Problem {
            rhs,
            orders: self.orders,
            init: self.init,
            horizon: self.horizon,
            steps: self.steps,
        }
    }

    pub(crate) fn check_field<S>(&self) -> Result<()>
    where
        F: VectorField<S>,
    {
        if self.rhs.dim() != self.dim() {
            return Err(Error::InvalidProblem(format!(
                "right-hand side has dimension {} but the problem has {} components",
                self.rhs.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Grid `t_n = n·T/N`, shared by both engines.
#[inline]
pub(crate) fn grid_time<S: Real>(n: usize, horizon: S, steps: S) -> S {
    S::from_usize(n) * horizon / steps
}

/// Solution on the uniform grid, stored row-major (`(N+1) × d`).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    dim: usize,
    times: Vec<S>,
    states: Vec<S>,
    rhs_values: Vec<S>,
    predicted: Option<Vec<S>>,
}

impl<S: Copy> Trajectory<S> {
    pub(crate) fn from_parts(
        dim: usize,
        times: Vec<S>,
        states: Vec<S>,
        rhs_values: Vec<S>,
        predicted: Option<Vec<S>>,
    ) -> Self {
        debug_assert_eq!(times.len() * dim, states.len());
        debug_assert_eq!(states.len(), rhs_values.len());
        Self {
            dim,
            times,
            states,
            rhs_values,
            predicted,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored grid points, `N + 1`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn time(&self, n: usize) -> S {
        self.times[n]
    }

    pub fn state(&self, n: usize) -> &[S] {
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    pub fn rhs_value(&self, n: usize) -> &[S] {
        &self.rhs_values[n * self.dim..(n + 1) * self.dim]
    }

    /// `y^P_n` for `n >= 1` when the solve kept predictor states.
    pub fn predicted(&self, n: usize) -> Option<&[S]> {
        self.predicted
            .as_ref()
            .map(|p| &p[n * self.dim..(n + 1) * self.dim])
    }

    pub fn last_state(&self) -> &[S] {
        self.state(self.len() - 1)
    }

    pub fn states(&self) -> impl Iterator<Item = &[S]> + '_ {
        self.states.chunks_exact(self.dim)
    }

    /// Component `i` over all grid points.
    pub fn component(&self, i: usize) -> impl Iterator<Item = S> + '_ {
        self.states.iter().skip(i).step_by(self.dim).copied()
    }
}

impl<S: Real> Trajectory<S> {
    pub fn to_f64(&self) -> Trajectory<f64> {
        let conv = |v: &Vec<S>| v.iter().map(|x| x.to_f64()).collect::<Vec<_>>();
        Trajectory {
            dim: self.dim,
            times: conv(&self.times),
            states: conv(&self.states),
            rhs_values: conv(&self.rhs_values),
            predicted: self.predicted.as_ref().map(conv),
        }
    }

    pub fn step_size(&self) -> f64 {
        if self.len() < 2 {
            0.0
        } else {
            self.times[1].to_f64() - self.times[0].to_f64()
        }
    }

    /// Largest absolute componentwise difference to another trajectory.
    pub fn max_abs_diff(&self, other: &Trajectory<S>) -> f64 {
        assert_eq!(self.states.len(), other.states.len());
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (*a - *b).abs().to_f64())
            .fold(0.0, f64::max)
    }
}

/// Per-component history of `f_k`, column-major so the history sums read
/// contiguous memory.
#[derive(Clone, Debug)]
pub struct History<S> {
    columns: Vec<Vec<S>>,
}

impl<S: Copy> History<S> {
    pub fn new(dim: usize, capacity: usize) -> Self {
        Self {
            columns: (0..dim).map(|_| Vec::with_capacity(capacity)).collect(),
        }
    }

    /// Builds a history from rows `f_0, f_1, …`.
    pub fn from_rows<R: AsRef<[S]>>(dim: usize, rows: &[R]) -> Self {
        let mut h = Self::new(dim, rows.len());
        for r in rows {
            h.push(r.as_ref());
        }
        h
    }

    pub fn push(&mut self, row: &[S]) {
        debug_assert_eq!(row.len(), self.columns.len());
        for (col, &v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, i: usize) -> &[S] {
        &self.columns[i]
    }

    pub(crate) fn rows(&self) -> Vec<S> {
        let n = self.len();
        let d = self.dim();
        let mut out = Vec::with_capacity(n * d);
        for k in 0..n {
            for col in &self.columns {
                out.push(col[k]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_field() -> FnField<impl Fn(f64, &[f64], &mut [f64]) + Sync> {
        FnField::new(2, |_t: f64, _y: &[f64], dy: &mut [f64]| dy.fill(0.0))
    }

    #[test]
    fn validates_initial_value_counts() {
        let ok = Problem::new(zero_field(), vec![0.9, 1.5], vec![vec![1.0], vec![0.0, 1.0]], 1.0, 10);
        assert!(ok.is_ok());
        let bad = Problem::new(zero_field(), vec![0.9, 1.5], vec![vec![1.0], vec![0.0]], 1.0, 10);
        assert!(matches!(bad, Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn validates_horizon_and_steps() {
        let p = Problem::with_initial_state(zero_field(), vec![0.5, 0.5], &[0.0, 0.0], 0.0, 10);
        assert!(p.is_err());
        let p = Problem::with_initial_state(zero_field(), vec![0.5, 0.5], &[0.0, 0.0], 1.0, 0);
        assert!(matches!(p, Err(Error::ZeroSteps)));
        let p = Problem::with_initial_state(zero_field(), vec![0.0, 0.5], &[0.0, 0.0], 1.0, 3);
        assert!(matches!(p, Err(Error::UnsupportedOrder(_))));
    }

    #[test]
    fn grid_is_exact_multiple() {
        let t: f64 = grid_time(3, 1.0, 10.0);
        assert_eq!(t, 0.3);
        assert_eq!(grid_time::<f64>(10, 7.0, 10.0), 7.0);
    }

    #[test]
    fn history_rows_round_trip() {
        let rows = vec![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let h = History::from_rows(2, &rows);
        assert_eq!(h.len(), 3);
        assert_eq!(h.column(1), &[2.0, 4.0, 6.0]);
        assert_eq!(h.rows(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }
}
