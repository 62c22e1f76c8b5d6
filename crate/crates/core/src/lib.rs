//! Parallel solver for Caputo fractional-order systems.
//!
//! The fractional Adams-Bashforth-Moulton predictor-corrector scheme is
//! implemented once, generically over the scalar type ([`Real`]), and run
//! either sequentially ([`solve_sequential`]) or with the history sums
//! split across workers and combined by a rank-ordered all-reduce
//! ([`solve_parallel`]). Around the solver sit the built-in systems
//! (a linear test equation, the forced series LCR circuit, and a small
//! expression language), a dual-precision comparison, dynamics analysis
//! (Mittag-Leffler reference, strobing, bifurcation sweeps) and a timing
//! harness.
//!
//! ```
//! use caputo_core::{solve_sequential, systems::LinearSystem, Problem};
//!
//! let problem = Problem::with_initial_state(LinearSystem::new(-1.0), vec![0.9], &[1.0], 1.0, 256)?;
//! let traj = solve_sequential::<f64, _>(&problem)?;
//! assert!((traj.last_state()[0] - 0.37607).abs() < 1e-3);
//! # Ok::<(), caputo_core::Error>(())
//! ```

pub mod analysis;
pub mod bench;
pub mod dd;
pub mod engine;
mod error;
pub mod output;
pub mod precision;
mod problem;
pub mod scalar;
pub mod solver;
pub mod special;
pub mod systems;
pub mod weights;

pub use dd::DoubleDouble;
pub use engine::{solve_parallel, solve_parallel_with, PartitionMode, PartitionPlan};
pub use error::{Error, Result};
pub use problem::{FnField, History, Problem, Trajectory, VectorField};
pub use scalar::{Element, Real};
pub use solver::{solve_sequential, solve_sequential_with, SolveOptions};
pub use weights::{build_weights, ComponentWeights, WeightTable};

/// Software extended precision (about 31 significant digits).
pub type Extended = DoubleDouble;
/// Exact rational scalar for reduction checks.
pub type Exact = num_rational::Ratio<i128>;

pub type Trajectory64 = Trajectory<f64>;
pub type TrajectoryExt = Trajectory<Extended>;
pub type WeightTable64 = WeightTable<f64>;
pub type WeightTableExt = WeightTable<Extended>;
