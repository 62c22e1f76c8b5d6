//! CSV writers. Reals are written with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::analysis::{AttractorStats, BifurcationTable};
use crate::bench::TimingTable;
use crate::error::{Error, Result};
use crate::precision::DivergenceReport;
use crate::problem::Trajectory;
use crate::scalar::Real;

pub const TIMING_HEADER: &str = "n_steps,workers,mode,seconds_median,seconds_min,repeats";
pub const STROBE_HEADER: &str = "f,seed,k,x,y";
pub const STATS_HEADER: &str = "f,clusters,xmin,xmax,ymin,ymax,spans_both_signs";
pub const DIVERGENCE_HEADER: &str = "step,t,divergence,cumulative_max";

struct Real17(f64);

impl std::fmt::Display for Real17 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

pub fn trajectory_header(dim: usize) -> String {
    let mut h = String::from("step,t");
    for i in 1..=dim {
        h.push_str(&format!(",y{i}"));
    }
    h
}

/// Steps `0, stride, 2·stride, …` up to `N`.
pub fn write_trajectory<S: Real, W: Write>(mut w: W, traj: &Trajectory<S>, stride: usize) -> io::Result<()> {
    assert!(stride >= 1, "stride must be at least 1");
    writeln!(w, "{}", trajectory_header(traj.dim()))?;
    for n in (0..traj.len()).step_by(stride) {
        write!(w, "{n},{}", Real17(traj.time(n).to_f64()))?;
        for v in traj.state(n) {
            write!(w, ",{}", Real17(v.to_f64()))?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn write_strobe<W: Write>(mut w: W, table: &BifurcationTable) -> io::Result<()> {
    writeln!(w, "{STROBE_HEADER}")?;
    for row in &table.rows {
        for (k, s) in row.strobe.ks.iter().zip(&row.strobe.samples) {
            writeln!(w, "{},{},{k},{},{}", Real17(row.f), row.seed, Real17(s[0]), Real17(s[1]))?;
        }
    }
    w.flush()
}

pub fn write_stats<W: Write>(mut w: W, stats: &[(f64, AttractorStats)]) -> io::Result<()> {
    writeln!(w, "{STATS_HEADER}")?;
    for (f, s) in stats {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            Real17(*f),
            s.cluster_count(),
            Real17(s.lower[0]),
            Real17(s.upper[0]),
            Real17(s.lower[1]),
            Real17(s.upper[1]),
            s.spans_both_signs()
        )?;
    }
    w.flush()
}

pub fn write_timing<W: Write>(mut w: W, table: &TimingTable) -> io::Result<()> {
    writeln!(w, "{TIMING_HEADER}")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.n_steps,
            r.workers,
            r.mode,
            Real17(r.seconds_median),
            Real17(r.seconds_min),
            r.repeats
        )?;
    }
    w.flush()
}

pub fn write_divergence<W: Write>(mut w: W, report: &DivergenceReport, stride: usize) -> io::Result<()> {
    assert!(stride >= 1, "stride must be at least 1");
    writeln!(w, "{DIVERGENCE_HEADER}")?;
    for n in (0..report.per_step.len()).step_by(stride) {
        writeln!(
            w,
            "{n},{},{},{}",
            Real17(report.times[n]),
            Real17(report.per_step[n]),
            Real17(report.cumulative_max[n])
        )?;
    }
    w.flush()
}

/// Creates `path` and hands a buffered writer to `body`; I/O errors carry the path.
pub fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn write_trajectory_csv<S: Real>(traj: &Trajectory<S>, path: &Path, stride: usize) -> Result<()> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be at least 1".into()));
    }
    write_file(path, |w| write_trajectory(w, traj, stride))
}
