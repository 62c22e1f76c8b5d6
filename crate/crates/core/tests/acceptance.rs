//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any criterion fails. Pass criterion names (`A1`, `A4`, ...)
//! as arguments to run a subset.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use caputo_core::analysis::{attractor_stats, mittag_leffler, sweep_bifurcation};
use caputo_core::bench::{doubling_ratio, speedup_report, time_solve, BenchOptions};
use caputo_core::output::{write_divergence, write_file, write_stats, write_strobe, write_trajectory_csv};
use caputo_core::precision::{run_dual_precision, Precision};
use caputo_core::systems::{equilibria, LcrParams, LcrSystem, LinearSystem};
use caputo_core::{solve_parallel, solve_sequential, PartitionMode, PartitionPlan, Problem};

enum Outcome {
    Pass(String),
    Fail(String),
    NotEvaluated(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn lcr(f: f64, horizon: f64, steps: usize, init: [f64; 2]) -> Problem<LcrSystem> {
    Problem::with_initial_state(LcrSystem::new(LcrParams::reference(f)), vec![0.9, 0.9], &init, horizon, steps)
        .expect("valid LCR problem")
}

/// Starting points just off E+ and E-.
fn seeds() -> [[f64; 2]; 2] {
    let e = equilibria(&LcrParams::reference(0.0)).expect("non-degenerate parameters");
    [
        [e.e_plus[0] + 0.01, e.e_plus[1] + 0.01],
        [e.e_minus[0] - 0.01, e.e_minus[1] - 0.01],
    ]
}

fn cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn a1() -> Outcome {
    let start = Instant::now();
    let exact = mittag_leffler(0.9, -1.0, 1e-20).unwrap();
    let mut points = Vec::new();
    for k in 10..=13 {
        let n = 1usize << k;
        let problem = Problem::with_initial_state(LinearSystem::new(-1.0), vec![0.9], &[1.0], 1.0, n).unwrap();
        let traj = solve_sequential::<f64, _>(&problem).unwrap();
        points.push(((n as f64).ln(), (traj.last_state()[0] - exact).abs()));
    }
    let decreasing = points.windows(2).all(|w| w[1].1 < w[0].1);
    // Least-squares slope of ln(error) against ln(N).
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1.ln()));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = points.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let order = -num / den;
    let secs = start.elapsed().as_secs_f64();
    let errs: Vec<String> = points.iter().map(|p| format!("{:.3e}", p.1)).collect();
    verdict(
        decreasing && (order - 1.9).abs() <= 0.2 && secs < 10.0,
        format!("order {order:.3} (want 1.9 +/- 0.2), errors [{}], {secs:.1}s", errs.join(", ")),
    )
}

fn a2() -> Outcome {
    let start = Instant::now();
    let problem = lcr(0.1, 100.0, 10_000, [0.1, 0.1]);
    let seq = solve_sequential::<f64, _>(&problem).unwrap();
    let one = solve_parallel::<f64, _>(&problem, &PartitionPlan::single()).unwrap();
    let bitwise = seq
        .states()
        .zip(one.states())
        .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    let mut worst = 0.0f64;
    for mode in [PartitionMode::Balanced, PartitionMode::StaticBlock] {
        for p in [2, 4, 8] {
            let par = solve_parallel::<f64, _>(&problem, &PartitionPlan::new(p, mode).unwrap()).unwrap();
            worst = worst.max(par.max_abs_diff(&seq));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        bitwise && worst <= 1e-10 && secs < 30.0,
        format!(
            "P=1 bitwise {bitwise}, max |parallel - sequential| over P in {{2,4,8}} = {worst:.2e} (<= 1e-10), {secs:.1}s"
        ),
    )
}

fn a3() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let plan4 = PartitionPlan::balanced(4).unwrap();
    let produce = |tag: &str| -> Vec<Vec<u8>> {
        let traj_path = dir.path().join(format!("traj-{tag}.csv"));
        let problem = lcr(0.1, 50.0, 5_000, [0.1, 0.1]);
        let traj = solve_parallel::<f64, _>(&problem, &plan4).unwrap();
        write_trajectory_csv(&traj, &traj_path, 7).unwrap();

        let base = lcr(0.125, 300.0, 3_000, [0.1, 0.1]);
        let table = sweep_bifurcation::<f64>(&base, &[0.085, 0.125], 1_500, &plan4, &seeds()).unwrap();
        let strobe_path = dir.path().join(format!("strobe-{tag}.csv"));
        write_file(&strobe_path, |w| write_strobe(w, &table)).unwrap();
        let stats_path = dir.path().join(format!("stats-{tag}.csv"));
        write_file(&stats_path, |w| write_stats(w, &table.stats(0.3))).unwrap();

        let linear = Problem::with_initial_state(LinearSystem::new(-1.0), vec![0.9], &[1.0], 1.0, 2_000).unwrap();
        let report =
            run_dual_precision(&linear, &plan4, (Precision::F64, Precision::DoubleDouble), Some(1e-6)).unwrap();
        let div_path = dir.path().join(format!("divergence-{tag}.csv"));
        write_file(&div_path, |w| write_divergence(w, &report, 1)).unwrap();

        [traj_path, strobe_path, stats_path, div_path]
            .iter()
            .map(|p| fs::read(p).unwrap())
            .collect()
    };
    let first = produce("a");
    let second = produce("b");
    let identical = first == second;
    let bytes: usize = first.iter().map(Vec::len).sum();
    verdict(
        identical,
        format!(
            "trajectory, strobe, stats and divergence CSVs from two runs at P=4 byte-identical: {identical} ({bytes} bytes)"
        ),
    )
}

fn a4() -> Outcome {
    let start = Instant::now();
    let n = 200_000;
    let horizon = 2_000.0;
    // Short solve to settle caches and clocks before the timed cells.
    let warm = lcr(0.1, horizon / 20.0, n / 20, [0.1, 0.1]);
    solve_sequential::<f64, _>(&warm).unwrap();

    let options = BenchOptions {
        repeats: 1,
        warmup: false,
        mode: PartitionMode::Balanced,
    };
    let mut table = time_solve::<f64, _>(&lcr(0.1, horizon, n, [0.1, 0.1]), &[1, 4], &options).unwrap();
    table.extend(time_solve::<f64, _>(&lcr(0.1, 2.0 * horizon, 2 * n, [0.1, 0.1]), &[1], &options).unwrap());
    let ratio = doubling_ratio(&table, n).unwrap();
    let speedup = speedup_report(&table)
        .unwrap()
        .into_iter()
        .find(|r| r.n_steps == n && r.workers == 4)
        .unwrap()
        .speedup;
    let secs = start.elapsed().as_secs_f64();
    let ratio_ok = (3.2..=4.8).contains(&ratio) && secs < 900.0;
    let timings = format!(
        "t(N)={:.1}s t(2N)={:.1}s t(N,P=4)={:.1}s",
        table.get(n, 1).unwrap().seconds_median,
        table.get(2 * n, 1).unwrap().seconds_median,
        table.get(n, 4).unwrap().seconds_median
    );
    let ratio_text = format!(
        "time(2N)/time(N) = {ratio:.2} (want [3.2, 4.8]) {}",
        if ratio_ok { "ok" } else { "FAILED" }
    );
    let host = cores();
    if host < 4 {
        let detail = format!(
            "speedup(4) = {speedup:.2} needs a >= 4-core host to be meaningful (this host: {host}); \
             {ratio_text}; {timings}; {secs:.0}s"
        );
        return if ratio_ok {
            Outcome::NotEvaluated(detail)
        } else {
            Outcome::Fail(detail)
        };
    }
    verdict(
        ratio_ok && speedup >= 2.0,
        format!("speedup(4) = {speedup:.2} (want >= 2.0); {ratio_text}; {timings}; {secs:.0}s"),
    )
}

fn a5() -> Outcome {
    let start = Instant::now();
    let plan = PartitionPlan::balanced(cores().min(4)).unwrap();
    let widths = (Precision::F64, Precision::DoubleDouble);
    let linear = Problem::with_initial_state(LinearSystem::new(-1.0), vec![0.9], &[1.0], 1.0, 300_000).unwrap();
    let lin = run_dual_precision(&linear, &plan, widths, Some(1e-6)).unwrap();
    let circuit = lcr(0.085, 3_000.0, 300_000, seeds()[0]);
    let cir = run_dual_precision(&circuit, &plan, widths, Some(1e-4)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let faster = lin.wall.0 <= lin.wall.1 && cir.wall.0 <= cir.wall.1;
    verdict(
        lin.max_divergence() <= 1e-6 && cir.max_divergence() <= 1e-4 && faster && secs < 1200.0,
        format!(
            "linear divergence {:.2e} (<= 1e-6), LCR f=0.085 divergence {:.2e} (<= 1e-4), \
             extended/f64 time {:.1}x and {:.1}x, {secs:.0}s",
            lin.max_divergence(),
            cir.max_divergence(),
            lin.time_ratio(),
            cir.time_ratio()
        ),
    )
}

fn a6() -> Outcome {
    let start = Instant::now();
    let (n, horizon, theta) = (200_000, 2_000.0, 0.3);
    let transient = n / 2;
    let plan = PartitionPlan::balanced(cores().min(4)).unwrap();
    let e = equilibria(&LcrParams::reference(0.0)).unwrap();
    let seeds = seeds();

    let mut drift = 0.0f64;
    for (seed, target) in seeds.iter().zip([e.e_plus, e.e_minus]) {
        let traj = solve_parallel::<f64, _>(&lcr(0.0, horizon, n, *seed), &plan).unwrap();
        for step in transient..=n {
            let s = traj.state(step);
            drift = drift.max((s[0] - target[0]).hypot(s[1] - target[1]));
        }
    }
    let stable = drift <= 1e-2;

    let base = lcr(0.085, horizon, n, seeds[0]);
    let table = sweep_bifurcation::<f64>(&base, &[0.085, 0.125], transient, &plan, &seeds).unwrap();
    let pair = attractor_stats(&table.samples_for(0.085), theta).unwrap();
    let scroll = attractor_stats(&table.samples_for(0.125), theta).unwrap();
    let two_separate = pair.cluster_count() == 2 && pair.clusters.iter().all(|c| !c.spans_both_signs());
    let double_scroll = scroll.cluster_count() == 1 && scroll.spans_both_signs();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        stable && two_separate && double_scroll && secs < 600.0,
        format!(
            "(i) max post-transient distance to E+/- {drift:.1e} (<= 1e-2); \
             (ii) f=0.085: {} clusters, sign-spanning {:?}; \
             (iii) f=0.125: {} cluster(s), spans both signs {}; {secs:.0}s",
            pair.cluster_count(),
            pair.clusters.iter().map(|c| c.spans_both_signs()).collect::<Vec<_>>(),
            scroll.cluster_count(),
            scroll.spans_both_signs()
        ),
    )
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 6] = [("A1", a1), ("A2", a2), ("A3", a3), ("A4", a4), ("A5", a5), ("A6", a6)];
    let mut failed = 0;
    for (name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name == f) {
            continue;
        }
        match check() {
            Outcome::Pass(d) => println!("{name} PASS: {d}"),
            Outcome::NotEvaluated(d) => println!("{name} NOT EVALUATED: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("{name} FAIL: {d}");
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
