//! Scalar abstractions.
//!
//! [`Element`] is the ring-like surface the history-sum kernels need; it is
//! implemented for `f32`, `f64`, [`DoubleDouble`] and exact rationals.
//! [`Real`] adds the transcendental functions the solver and the built-in
//! systems use, and is implemented for the three floating types.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{Float, One, Zero};

use crate::dd::{self, DoubleDouble};

const LANES: usize = 8;

pub trait Element:
    Copy
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Fused pair of dot products `(Σ wp[i] f[i], Σ wc[i] f[i])`.
    ///
    /// The three slices have equal length. Implementations must be
    /// deterministic: the same inputs always give the same bits.
    fn dot_pair(wp: &[Self], wc: &[Self], f: &[Self]) -> (Self, Self) {
        lanes_dot_pair(wp, wc, f)
    }
}

/// Fixed-lane accumulation; lane `i` sums the terms with index `≡ i (mod LANES)`
/// and the lanes are folded left to right at the end.
#[inline(always)]
fn lanes_dot_pair<T: Element>(wp: &[T], wc: &[T], f: &[T]) -> (T, T) {
    debug_assert!(wp.len() == f.len() && wc.len() == f.len());
    let mut sp = [T::zero(); LANES];
    let mut sc = [T::zero(); LANES];
    let blocks = f.len() / LANES * LANES;
    for ((p, c), v) in wp[..blocks]
        .chunks_exact(LANES)
        .zip(wc[..blocks].chunks_exact(LANES))
        .zip(f[..blocks].chunks_exact(LANES))
    {
        for l in 0..LANES {
            sp[l] = sp[l] + p[l] * v[l];
            sc[l] = sc[l] + c[l] * v[l];
        }
    }
    for (l, i) in (blocks..f.len()).enumerate() {
        sp[l] = sp[l] + wp[i] * f[i];
        sc[l] = sc[l] + wc[i] * f[i];
    }
    fold_lanes(sp, sc)
}

#[inline(always)]
fn fold_lanes<T: Element>(sp: [T; LANES], sc: [T; LANES]) -> (T, T) {
    let mut p = sp[0];
    let mut c = sc[0];
    for l in 1..LANES {
        p = p + sp[l];
        c = c + sc[l];
    }
    (p, c)
}

#[inline(always)]
fn lanes_dot_pair_fma(wp: &[f64], wc: &[f64], f: &[f64]) -> (f64, f64) {
    let mut sp = [0.0; LANES];
    let mut sc = [0.0; LANES];
    let blocks = f.len() / LANES * LANES;
    for ((p, c), v) in wp[..blocks]
        .chunks_exact(LANES)
        .zip(wc[..blocks].chunks_exact(LANES))
        .zip(f[..blocks].chunks_exact(LANES))
    {
        for l in 0..LANES {
            sp[l] = p[l].mul_add(v[l], sp[l]);
            sc[l] = c[l].mul_add(v[l], sc[l]);
        }
    }
    for (l, i) in (blocks..f.len()).enumerate() {
        sp[l] = wp[i].mul_add(f[i], sp[l]);
        sc[l] = wc[i].mul_add(f[i], sc[l]);
    }
    fold_lanes(sp, sc)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn dot_pair_f64_avx2(wp: &[f64], wc: &[f64], f: &[f64]) -> (f64, f64) {
    lanes_dot_pair_fma(wp, wc, f)
}

#[cfg(target_arch = "x86_64")]
fn has_avx2_fma() -> bool {
    is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma")
}

impl Element for f64 {
    fn dot_pair(wp: &[f64], wc: &[f64], f: &[f64]) -> (f64, f64) {
        #[cfg(target_arch = "x86_64")]
        if has_avx2_fma() {
            // SAFETY: the required CPU features were detected at runtime.
            return unsafe { dot_pair_f64_avx2(wp, wc, f) };
        }
        if cfg!(target_feature = "fma") {
            lanes_dot_pair_fma(wp, wc, f)
        } else {
            lanes_dot_pair(wp, wc, f)
        }
    }
}

impl Element for f32 {}

/// Per-lane compensated accumulator: running sum plus an error term.
#[derive(Clone, Copy)]
struct Compensated {
    sum: f64,
    err: f64,
}

impl Compensated {
    const ZERO: Self = Self { sum: 0.0, err: 0.0 };

    #[inline(always)]
    fn push(&mut self, w: DoubleDouble, v: DoubleDouble, fused: bool) {
        let (p, e) = if fused {
            let p = w.hi() * v.hi();
            (p, w.hi().mul_add(v.hi(), -p))
        } else {
            dd::two_prod_dekker(w.hi(), v.hi())
        };
        let (s, t) = dd::two_sum(self.sum, p);
        self.sum = s;
        self.err += t + (e + (w.hi() * v.lo() + w.lo() * v.hi()));
    }

    fn finish(self) -> DoubleDouble {
        DoubleDouble::new(self.sum, self.err)
    }
}

#[inline(always)]
fn dd_dot_pair<const FUSED: bool>(
    wp: &[DoubleDouble],
    wc: &[DoubleDouble],
    f: &[DoubleDouble],
) -> (DoubleDouble, DoubleDouble) {
    const DD_LANES: usize = 4;
    let mut sp = [Compensated::ZERO; DD_LANES];
    let mut sc = [Compensated::ZERO; DD_LANES];
    let blocks = f.len() / DD_LANES * DD_LANES;
    for ((p, c), v) in wp[..blocks]
        .chunks_exact(DD_LANES)
        .zip(wc[..blocks].chunks_exact(DD_LANES))
        .zip(f[..blocks].chunks_exact(DD_LANES))
    {
        for l in 0..DD_LANES {
            sp[l].push(p[l], v[l], FUSED);
            sc[l].push(c[l], v[l], FUSED);
        }
    }
    for (l, i) in (blocks..f.len()).enumerate() {
        sp[l].push(wp[i], f[i], FUSED);
        sc[l].push(wc[i], f[i], FUSED);
    }
    let mut p = sp[0].finish();
    let mut c = sc[0].finish();
    for l in 1..DD_LANES {
        p += sp[l].finish();
        c += sc[l].finish();
    }
    (p, c)
}

/// Same accumulation as [`Compensated`], four lanes per register and two
/// registers per sum. Pairs of `DoubleDouble` are split into hi/lo vectors
/// with unpack, which permutes lanes identically for weights and values.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn dot_pair_dd_avx2(
    wp: &[DoubleDouble],
    wc: &[DoubleDouble],
    f: &[DoubleDouble],
) -> (DoubleDouble, DoubleDouble) {
    use std::arch::x86_64::*;

    #[derive(Clone, Copy)]
    struct Acc {
        sum: __m256d,
        err: __m256d,
    }

    #[inline(always)]
    unsafe fn load(ptr: *const DoubleDouble) -> (__m256d, __m256d) {
        let p = ptr as *const f64;
        let a = _mm256_loadu_pd(p);
        let b = _mm256_loadu_pd(p.add(4));
        (_mm256_unpacklo_pd(a, b), _mm256_unpackhi_pd(a, b))
    }

    #[inline(always)]
    unsafe fn push(acc: &mut Acc, wh: __m256d, wl: __m256d, vh: __m256d, vl: __m256d) {
        let p = _mm256_mul_pd(wh, vh);
        let e = _mm256_fmsub_pd(wh, vh, p);
        let s = _mm256_add_pd(acc.sum, p);
        let bb = _mm256_sub_pd(s, acc.sum);
        let t = _mm256_add_pd(_mm256_sub_pd(acc.sum, _mm256_sub_pd(s, bb)), _mm256_sub_pd(p, bb));
        let cross = _mm256_add_pd(_mm256_mul_pd(wh, vl), _mm256_mul_pd(wl, vh));
        acc.sum = s;
        acc.err = _mm256_add_pd(acc.err, _mm256_add_pd(t, _mm256_add_pd(e, cross)));
    }

    unsafe fn lanes(acc: Acc) -> [Compensated; 4] {
        let mut sum = [0.0f64; 4];
        let mut err = [0.0f64; 4];
        _mm256_storeu_pd(sum.as_mut_ptr(), acc.sum);
        _mm256_storeu_pd(err.as_mut_ptr(), acc.err);
        std::array::from_fn(|l| Compensated { sum: sum[l], err: err[l] })
    }

    const STEP: usize = 8;
    let n = f.len();
    debug_assert!(wp.len() == n && wc.len() == n);
    let zero = Acc {
        sum: _mm256_setzero_pd(),
        err: _mm256_setzero_pd(),
    };
    let (mut p0, mut p1, mut c0, mut c1) = (zero, zero, zero, zero);
    let blocks = n / STEP * STEP;
    let (pp, cp, fp) = (wp.as_ptr(), wc.as_ptr(), f.as_ptr());
    let mut i = 0;
    while i < blocks {
        let (fh0, fl0) = load(fp.add(i));
        let (fh1, fl1) = load(fp.add(i + 4));
        let (ph0, pl0) = load(pp.add(i));
        let (ph1, pl1) = load(pp.add(i + 4));
        let (ch0, cl0) = load(cp.add(i));
        let (ch1, cl1) = load(cp.add(i + 4));
        push(&mut p0, ph0, pl0, fh0, fl0);
        push(&mut p1, ph1, pl1, fh1, fl1);
        push(&mut c0, ch0, cl0, fh0, fl0);
        push(&mut c1, ch1, cl1, fh1, fl1);
        i += STEP;
    }
    let mut sp = lanes(p0);
    let mut sc = lanes(c0);
    let (sp1, sc1) = (lanes(p1), lanes(c1));
    for (l, k) in (blocks..n).enumerate() {
        sp[l % 4].push(wp[k], f[k], true);
        sc[l % 4].push(wc[k], f[k], true);
    }
    let mut p = sp[0].finish();
    let mut c = sc[0].finish();
    for l in 1..4 {
        p += sp[l].finish();
        c += sc[l].finish();
    }
    for l in 0..4 {
        p += sp1[l].finish();
        c += sc1[l].finish();
    }
    (p, c)
}

impl Element for DoubleDouble {
    fn dot_pair(wp: &[Self], wc: &[Self], f: &[Self]) -> (Self, Self) {
        #[cfg(target_arch = "x86_64")]
        if has_avx2_fma() {
            // SAFETY: the required CPU features were detected at runtime.
            return unsafe { dot_pair_dd_avx2(wp, wc, f) };
        }
        dd_dot_pair::<false>(wp, wc, f)
    }
}

impl Element for Ratio<i64> {}
impl Element for Ratio<i128> {}

/// Floating scalar with the transcendental surface the solver needs.
pub trait Real: Element {
    /// Short name used in reports and logs.
    const NAME: &'static str;
    /// Unit roundoff of the type.
    fn epsilon() -> f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn from_wide(x: DoubleDouble) -> Self;
    fn to_wide(self) -> DoubleDouble;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powf(self, y: Self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn is_finite(self) -> bool;

    fn pi() -> Self;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

macro_rules! impl_real_float {
    ($t:ty, $name:literal) => {
        impl Real for $t {
            const NAME: &'static str = $name;
            fn epsilon() -> f64 {
                <$t as Float>::epsilon() as f64 / 2.0
            }
            #[inline]
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn from_wide(x: DoubleDouble) -> Self {
                x.to_f64() as $t
            }
            #[inline]
            fn to_wide(self) -> DoubleDouble {
                DoubleDouble::from_f64(self as f64)
            }
            #[inline]
            fn abs(self) -> Self {
                Float::abs(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                Float::sqrt(self)
            }
            #[inline]
            fn exp(self) -> Self {
                Float::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                Float::ln(self)
            }
            #[inline]
            fn sin(self) -> Self {
                Float::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                Float::cos(self)
            }
            #[inline]
            fn powf(self, y: Self) -> Self {
                Float::powf(self, y)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                Float::powi(self, n)
            }
            #[inline]
            fn is_finite(self) -> bool {
                Float::is_finite(self)
            }
            fn pi() -> Self {
                <$t as num_traits::FloatConst>::PI()
            }
        }
    };
}

impl_real_float!(f32, "f32");
impl_real_float!(f64, "f64");

impl Real for DoubleDouble {
    const NAME: &'static str = "double-double";
    fn epsilon() -> f64 {
        DoubleDouble::EPSILON / 2.0
    }
    #[inline]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    #[inline]
    fn from_wide(x: DoubleDouble) -> Self {
        x
    }
    #[inline]
    fn to_wide(self) -> DoubleDouble {
        self
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    fn sin(self) -> Self {
        DoubleDouble::sin(self)
    }
    fn cos(self) -> Self {
        DoubleDouble::cos(self)
    }
    fn powf(self, y: Self) -> Self {
        DoubleDouble::powf(self, y)
    }
    fn powi(self, n: i32) -> Self {
        DoubleDouble::powi(self, n)
    }
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
    fn pi() -> Self {
        DoubleDouble::PI
    }
}
