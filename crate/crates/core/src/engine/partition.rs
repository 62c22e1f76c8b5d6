use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PartitionMode {
    /// At step `n`, `[0, n]` is cut into `P` chunks whose sizes differ by at most one.
    #[default]
    Balanced,
    /// Fixed blocks `[N_P·p, N_P·(p+1))` with `N_P = N / P`, clamped to `k <= n`.
    /// The last worker also takes the `N mod P` tail.
    StaticBlock,
}

impl fmt::Display for PartitionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionMode::Balanced => "balanced",
            PartitionMode::StaticBlock => "static",
        })
    }
}

impl FromStr for PartitionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(Self::Balanced),
            "static" | "static_block" => Ok(Self::StaticBlock),
            other => Err(Error::InvalidPlan(format!(
                "unknown partition mode `{other}` (expected balanced or static)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionPlan {
    workers: usize,
    mode: PartitionMode,
}

impl PartitionPlan {
    pub fn new(workers: usize, mode: PartitionMode) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidPlan("worker count must be at least 1".into()));
        }
        Ok(Self { workers, mode })
    }

    pub fn balanced(workers: usize) -> Result<Self> {
        Self::new(workers, PartitionMode::Balanced)
    }

    pub fn single() -> Self {
        Self {
            workers: 1,
            mode: PartitionMode::Balanced,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    /// History range of worker `rank` at step `n` of an `steps`-step solve.
    /// Always a subrange of `[0, n]`.
    pub fn chunk(&self, rank: usize, n: usize, steps: usize) -> Range<usize> {
        debug_assert!(rank < self.workers);
        let p = self.workers;
        let len = n + 1;
        let (lo, hi) = match self.mode {
            PartitionMode::Balanced => (rank * len / p, (rank + 1) * len / p),
            PartitionMode::StaticBlock => {
                let block = steps / p;
                let hi = if rank + 1 == p {
                    steps.max(len)
                } else {
                    block * (rank + 1)
                };
                (block * rank, hi)
            }
        };
        lo.min(len)..hi.min(len)
    }

    pub fn chunks(&self, n: usize, steps: usize) -> Vec<Range<usize>> {
        (0..self.workers).map(|r| self.chunk(r, n, steps)).collect()
    }
}
