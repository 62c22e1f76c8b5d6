use std::ops::Range;

use crate::problem::History;
use crate::scalar::Element;
use crate::weights::ComponentWeights;

/// Per-component history sums over one chunk.
///
/// `sp` holds `Σ b_{n−k} f_k`; `sc` holds `Σ a_{n−k} f_k` over `k >= 1`
/// plus `c_n f_0` when the chunk contains `k = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSums<S> {
    pub sp: Vec<S>,
    pub sc: Vec<S>,
}

impl<S: Element> PartialSums<S> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            sp: vec![S::zero(); dim],
            sc: vec![S::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sp.len()
    }
}

/// History sums at step `n` over the indices `chunk ∩ [0, n]`.
pub fn partial_sums<S: Element>(
    chunk: Range<usize>,
    n: usize,
    history: &History<S>,
    weights: &ComponentWeights<S>,
) -> PartialSums<S> {
    let mut out = PartialSums::zeros(history.dim());
    partial_sums_into(chunk, n, history, weights, &mut out);
    out
}

pub(crate) fn partial_sums_into<S: Element>(
    chunk: Range<usize>,
    n: usize,
    history: &History<S>,
    weights: &ComponentWeights<S>,
    out: &mut PartialSums<S>,
) {
    debug_assert!(history.len() > n);
    let lo = chunk.start.min(n + 1);
    let hi = chunk.end.min(n + 1);
    for (i, table) in weights.iter().enumerate() {
        if lo >= hi {
            out.sp[i] = S::zero();
            out.sc[i] = S::zero();
            continue;
        }
        let f = history.column(i);
        let start = if lo == 0 { 1 } else { lo };
        let (bw, aw) = table.windows(n, start, hi);
        let (p, c) = S::dot_pair(bw, aw, &f[start..hi]);
        if lo == 0 {
            out.sp[i] = table.b(n) * f[0] + p;
            out.sc[i] = table.c(n) * f[0] + c;
        } else {
            out.sp[i] = p;
            out.sc[i] = c;
        }
    }
}

/// Rank-ordered all-reduce: `((p_0 + p_1) + p_2) + …`.
pub fn reduce_all<S: Element>(partials: &[PartialSums<S>]) -> PartialSums<S> {
    let mut out = partials
        .first()
        .cloned()
        .expect("reduce_all needs at least one participant");
    reduce_into(partials.iter(), &mut out);
    out
}

pub(crate) fn reduce_into<'a, S: Element>(
    mut partials: impl Iterator<Item = &'a PartialSums<S>>,
    out: &mut PartialSums<S>,
) {
    let first = partials.next().expect("at least one participant");
    out.sp.copy_from_slice(&first.sp);
    out.sc.copy_from_slice(&first.sc);
    for p in partials {
        for (acc, v) in out.sp.iter_mut().zip(&p.sp) {
            *acc = *acc + *v;
        }
        for (acc, v) in out.sc.iter_mut().zip(&p.sc) {
            *acc = *acc + *v;
        }
    }
}
