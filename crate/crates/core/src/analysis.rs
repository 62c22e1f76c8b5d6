//! Dynamics post-processing: Mittag-Leffler reference values, strobing,
//! bifurcation sweeps and attractor statistics.

use crate::dd::DoubleDouble;
use crate::engine::{solve_parallel, PartitionPlan};
use crate::error::{Error, Result};
use crate::problem::{Problem, Trajectory};
use crate::scalar::Real;
use crate::special::ln_gamma;
use crate::systems::LcrSystem;

/// Largest |z| accepted by [`mittag_leffler`]; beyond it the alternating
/// series loses too many digits to cancellation.
pub const SERIES_LIMIT: f64 = 5.0;

const MAX_TERMS: usize = 1_000_000;

/// `E_α(z) = Σ z^k / Γ(αk + 1)`, summed until a term drops below `tol`
/// once the terms have started to shrink. Terms and sum are carried in
/// double-double, so cancellation for negative `z` costs no `f64` digits.
pub fn mittag_leffler(alpha: f64, z: f64, tol: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::UnsupportedOrder(alpha));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(z.abs() <= SERIES_LIMIT) {
        return Err(Error::SeriesRange { z });
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let a = DoubleDouble::from_f64(alpha);
    let ln_z = DoubleDouble::from_f64(z.abs()).ln();
    let mut sum = DoubleDouble::ONE;
    let mut prev = 1.0f64;
    for k in 1..MAX_TERMS {
        let kk = DoubleDouble::from_f64(k as f64);
        let mag = (kk * ln_z - ln_gamma(a * kk + DoubleDouble::ONE)).exp();
        if z < 0.0 && k % 2 == 1 {
            sum -= mag;
        } else {
            sum += mag;
        }
        let m = mag.to_f64();
        if m < tol && m <= prev {
            return Ok(sum.to_f64());
        }
        prev = m;
    }
    Err(Error::InvalidArgument(format!(
        "Mittag-Leffler series did not reach tolerance {tol} within {MAX_TERMS} terms"
    )))
}

/// Samples of a trajectory at `t = phase + k·period`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrobeSet {
    pub phase: f64,
    pub period: f64,
    /// Strobe counter `k` of each sample.
    pub ks: Vec<usize>,
    /// Grid time actually sampled.
    pub times: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
}

impl StrobeSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Strobes this set again. The set is treated as a grid with spacing
    /// `self.period`, so resampling with the same period returns it unchanged.
    pub fn restrobe(&self, period: f64) -> Result<StrobeSet> {
        if !(period > 0.0 && period >= self.period * (1.0 - 1e-12)) {
            return Err(Error::UnresolvableStrobe {
                period,
                step: self.period,
            });
        }
        let mut out = StrobeSet {
            phase: self.phase,
            period,
            ks: Vec::new(),
            times: Vec::new(),
            samples: Vec::new(),
        };
        let Some(&first) = self.ks.first() else {
            return Ok(out);
        };
        let last = *self.ks.last().unwrap();
        let mut j = 0usize;
        loop {
            let target = first as f64 + j as f64 * period / self.period;
            let k = target.round() as usize;
            if k > last {
                break;
            }
            if let Ok(idx) = self.ks.binary_search(&k) {
                out.ks.push(j);
                out.times.push(self.times[idx]);
                out.samples.push(self.samples[idx].clone());
            }
            j += 1;
        }
        Ok(out)
    }
}

fn nearest_index(t: f64, h: f64, last: usize) -> usize {
    ((t / h).round() as usize).min(last)
}

/// Nearest-grid-point samples for every `k` with `phase + k·period <= T`.
pub fn strobe<S: Real>(traj: &Trajectory<S>, period: f64, phase: f64) -> Result<StrobeSet> {
    strobe_after(traj, period, phase, 0)
}

/// Like [`strobe`], dropping samples whose grid index is below `skip`.
pub fn strobe_after<S: Real>(traj: &Trajectory<S>, period: f64, phase: f64, skip: usize) -> Result<StrobeSet> {
    let h = traj.step_size();
    if !(phase >= 0.0 && phase.is_finite()) {
        return Err(Error::InvalidArgument(format!("strobe phase must be >= 0, got {phase}")));
    }
    if !(period.is_finite() && period >= 2.0 * h && period > 0.0) {
        return Err(Error::UnresolvableStrobe { period, step: h });
    }
    let last = traj.steps();
    let horizon = traj.time(last).to_f64();
    let mut set = StrobeSet {
        phase,
        period,
        ks: Vec::new(),
        times: Vec::new(),
        samples: Vec::new(),
    };
    let mut k = 0usize;
    loop {
        let t = phase + k as f64 * period;
        if t > horizon + 0.5 * h {
            break;
        }
        let idx = nearest_index(t, h, last);
        if idx >= skip {
            set.ks.push(k);
            set.times.push(traj.time(idx).to_f64());
            set.samples.push(traj.state(idx).iter().map(|v| v.to_f64()).collect());
        }
        k += 1;
    }
    Ok(set)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BifurcationRow {
    pub f: f64,
    /// Index into the seed list the row was started from.
    pub seed: usize,
    pub transient: usize,
    pub strobe: StrobeSet,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BifurcationTable {
    pub rows: Vec<BifurcationRow>,
}

impl BifurcationTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct forcing amplitudes, in table order.
    pub fn f_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for row in &self.rows {
            if out.last() != Some(&row.f) {
                out.push(row.f);
            }
        }
        out
    }

    /// All samples for amplitude `f`, pooled over seeds.
    pub fn samples_for(&self, f: f64) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .filter(|r| r.f == f)
            .flat_map(|r| r.strobe.samples.iter().cloned())
            .collect()
    }

    /// Statistics of the pooled samples for each `f`.
    pub fn stats(&self, theta: f64) -> Vec<(f64, AttractorStats)> {
        self.f_values()
            .into_iter()
            .filter_map(|f| attractor_stats(&self.samples_for(f), theta).map(|s| (f, s)))
            .collect()
    }
}

/// Solves the circuit at each `f` (from each seed), drops the first
/// `transient` steps and strobes at the forcing period.
///
/// With no seeds the initial state of `base` is used.
pub fn sweep_bifurcation<S: Real>(
    base: &Problem<LcrSystem>,
    f_values: &[f64],
    transient: usize,
    plan: &PartitionPlan,
    seeds: &[[f64; 2]],
) -> Result<BifurcationTable> {
    if f_values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("f values must be strictly increasing".into()));
    }
    if transient >= base.steps() {
        return Err(Error::InvalidArgument(format!(
            "transient ({transient} steps) must be shorter than the run ({} steps)",
            base.steps()
        )));
    }
    let seed_inits: Vec<Vec<Vec<f64>>> = if seeds.is_empty() {
        vec![base.init().to_vec()]
    } else {
        seeds.iter().map(|s| vec![vec![s[0]], vec![s[1]]]).collect()
    };
    let mut table = BifurcationTable::default();
    for &f in f_values {
        let annotate = |source: Error| Error::Sweep {
            f,
            source: Box::new(source),
        };
        let mut params = base.rhs().params;
        params.f = f;
        let period = params.forcing_period();
        for (seed, init) in seed_inits.iter().enumerate() {
            let problem = base
                .clone()
                .with_rhs(LcrSystem::new(params))
                .with_initial_values(init.clone())
                .map_err(annotate)?;
            let traj = solve_parallel::<S, _>(&problem, plan).map_err(annotate)?;
            let strobe = strobe_after(&traj, period, 0.0, transient).map_err(annotate)?;
            table.rows.push(BifurcationRow {
                f,
                seed,
                transient,
                strobe,
            });
        }
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSummary {
    pub size: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ClusterSummary {
    /// Whether the first component takes both signs inside the cluster.
    pub fn spans_both_signs(&self) -> bool {
        self.lower[0] < 0.0 && self.upper[0] > 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttractorStats {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Single-linkage clusters, largest first.
    pub clusters: Vec<ClusterSummary>,
}

impl AttractorStats {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn spans_both_signs(&self) -> bool {
        self.lower[0] < 0.0 && self.upper[0] > 0.0
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn bounding_box<'a>(points: impl Iterator<Item = &'a Vec<f64>>, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lower = vec![f64::INFINITY; dim];
    let mut upper = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for i in 0..dim {
            lower[i] = lower[i].min(p[i]);
            upper[i] = upper[i].max(p[i]);
        }
    }
    (lower, upper)
}

/// Bounding box, single-linkage clusters at Euclidean distance `theta`, and
/// sign span of the first component. `None` for an empty sample set.
pub fn attractor_stats(samples: &[Vec<f64>], theta: f64) -> Option<AttractorStats> {
    let dim = samples.first()?.len();
    let n = samples.len();
    let theta2 = theta * theta;
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = samples[i].iter().zip(&samples[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= theta2 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        members[r].push(i);
    }
    let mut clusters: Vec<ClusterSummary> = members
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|m| {
            let (lower, upper) = bounding_box(m.iter().map(|&i| &samples[i]), dim);
            ClusterSummary {
                size: m.len(),
                lower,
                upper,
            }
        })
        .collect();
    clusters.sort_by_key(|c| std::cmp::Reverse(c.size));
    let (lower, upper) = bounding_box(samples.iter(), dim);
    Some(AttractorStats { lower, upper, clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FnField;
    use crate::solver::solve_sequential;

    #[test]
    fn mittag_leffler_reference_values() {
        assert_eq!(mittag_leffler(0.7, 0.0, 1e-12).unwrap(), 1.0);
        assert!((mittag_leffler(1.0, 1.0, 1e-18).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let v = mittag_leffler(0.9, -1.0, 1e-12).unwrap();
        assert!((v - 0.376_066_021_424_641_9).abs() < 1e-12, "{v}");
        let v = mittag_leffler(0.9, -1.0, 1e-20).unwrap();
        assert!((v - 0.376_066_021_424_641_9).abs() < 1e-16, "{v}");
        // E_{1/2}(−1/2) = exp(1/4) erfc(1/2)
        let half = mittag_leffler(0.5, -0.5, 1e-20).unwrap();
        let expect = 0.615_690_344_192_925_9;
        assert!((half - expect).abs() < 1e-16, "{half} vs {expect}");
    }

    #[test]
    fn mittag_leffler_matches_exp_at_order_one() {
        for i in 0..=60 {
            let z = -3.0 + 0.1 * i as f64;
            let v = mittag_leffler(1.0, z, 1e-16).unwrap();
            assert!((v - z.exp()).abs() < 1e-10, "z = {z}");
        }
    }

    #[test]
    fn mittag_leffler_rejects_bad_input() {
        assert!(matches!(mittag_leffler(0.9, -5.5, 1e-12), Err(Error::SeriesRange { .. })));
        assert!(matches!(mittag_leffler(1.5, 1.0, 1e-12), Err(Error::UnsupportedOrder(_))));
        assert!(mittag_leffler(0.9, 1.0, 0.0).is_err());
    }

    fn synthetic(steps: usize, horizon: f64, omega: f64) -> Trajectory<f64> {
        let field = FnField::new(1, |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 0.0);
        let problem = Problem::with_initial_state(field, vec![1.0], &[0.0], horizon, steps).unwrap();
        let traj = solve_sequential::<f64, _>(&problem).unwrap();
        let states: Vec<f64> = traj.times().iter().map(|&t| (omega * t).sin()).collect();
        Trajectory::from_parts(1, traj.times().to_vec(), states, vec![0.0; steps + 1], None)
    }

    #[test]
    fn strobe_constant_and_exact_multiple() {
        let field = FnField::new(2, |_t: f64, _y: &[f64], dy: &mut [f64]| dy.fill(0.0));
        let problem = Problem::with_initial_state(field, vec![0.8, 0.8], &[1.5, -2.0], 10.0, 100).unwrap();
        let traj = solve_sequential::<f64, _>(&problem).unwrap();
        let set = strobe(&traj, 1.0, 0.0).unwrap();
        assert_eq!(set.len(), 11);
        assert!(set.samples.iter().all(|s| s == &vec![1.5, -2.0]));

        let sine = synthetic(100, 10.0, 1.0);
        let set = strobe(&sine, 0.3, 0.0).unwrap();
        for (k, t) in set.ks.iter().zip(&set.times) {
            assert!((t - sine.time(3 * k)).abs() < 1e-12);
        }
        assert!(matches!(strobe(&sine, 0.15, 0.0), Err(Error::UnresolvableStrobe { .. })));
    }

    #[test]
    fn strobe_of_periodic_signal() {
        let omega = 0.55;
        let period = std::f64::consts::TAU / omega;
        let traj = synthetic(20_000, 200.0, omega);
        let h = traj.step_size();
        let set = strobe(&traj, period, 0.0).unwrap();
        assert_eq!(set.len(), (200.0 / period) as usize + 1);
        for s in &set.samples {
            assert!(s[0].abs() <= omega * h / 2.0 + 1e-12, "{}", s[0]);
        }
        let again = set.restrobe(period).unwrap();
        assert_eq!(again, set);
        let twice = set.restrobe(2.0 * period).unwrap();
        assert_eq!(twice.len(), set.len().div_ceil(2));
    }

    #[test]
    fn stats_examples() {
        let one = attractor_stats(&[vec![0.5, -1.0]], 0.3).unwrap();
        assert_eq!(one.cluster_count(), 1);
        assert_eq!(one.lower, one.upper);
        assert!(!one.spans_both_signs());

        let two = attractor_stats(&[vec![0.0, 0.0], vec![0.0, 0.31]], 0.3).unwrap();
        assert_eq!(two.cluster_count(), 2);

        let chain: Vec<Vec<f64>> = (0..10).map(|i| vec![-1.0 + 0.25 * i as f64, 0.0]).collect();
        let linked = attractor_stats(&chain, 0.3).unwrap();
        assert_eq!(linked.cluster_count(), 1);
        assert!(linked.spans_both_signs());

        let sym = attractor_stats(&[vec![1.0, 2.0], vec![-1.0, -2.0], vec![0.3, -0.1], vec![-0.3, 0.1]], 0.3).unwrap();
        assert_eq!(sym.lower, vec![-1.0, -2.0]);
        assert_eq!(sym.upper, vec![1.0, 2.0]);
        assert!(attractor_stats(&[], 0.3).is_none());
    }

    #[test]
    fn empty_sweep() {
        let base = Problem::with_initial_state(
            LcrSystem::new(crate::systems::LcrParams::reference(0.0)),
            vec![0.9, 0.9],
            &[0.1, 0.1],
            10.0,
            100,
        )
        .unwrap();
        let plan = PartitionPlan::single();
        let table = sweep_bifurcation::<f64>(&base, &[], 10, &plan, &[]).unwrap();
        assert!(table.is_empty());
        assert!(sweep_bifurcation::<f64>(&base, &[0.2, 0.1], 10, &plan, &[]).is_err());
        assert!(sweep_bifurcation::<f64>(&base, &[0.1], 100, &plan, &[]).is_err());
    }

    #[test]
    fn single_f_row_is_strobe_of_solution() {
        let params = crate::systems::LcrParams::reference(0.1);
        let base = Problem::with_initial_state(LcrSystem::new(params), vec![0.9, 0.9], &[0.2, 0.1], 60.0, 600).unwrap();
        let plan = PartitionPlan::single();
        let table = sweep_bifurcation::<f64>(&base, &[0.1], 300, &plan, &[]).unwrap();
        let traj = solve_sequential::<f64, _>(&base).unwrap();
        let direct = strobe_after(&traj, params.forcing_period(), 0.0, 300).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].strobe, direct);
        assert_eq!(table.f_values(), vec![0.1]);
    }
}
