//! Predictor and corrector coefficient sequences.
//!
//! For an order `α` and `n >= 0`:
//!
//! ```text
//! b_n = ((n+1)^α − n^α) / Γ(α+1)
//! a_n = ((n+2)^{α+1} − 2(n+1)^{α+1} + n^{α+1}) / Γ(α+2)
//! c_n = (n^{α+1} − (n−α)(n+1)^α) / Γ(α+2)
//! ```
//!
//! The powers are formed in double-double and narrowed afterwards, so the
//! second difference in `a_n` keeps its digits for large `n`.

use std::sync::Arc;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::scalar::{Element, Real};
use crate::special::gamma;

/// Coefficients for one fractional order, indices `0..=count+1`.
///
/// `b` and `a` are stored reversed so that the history sum
/// `Σ_k w_{n−k} f_k` walks both operands in ascending memory order.
#[derive(Clone, Debug)]
pub struct WeightTable<T> {
    alpha: f64,
    b_rev: Vec<T>,
    a_rev: Vec<T>,
    c: Vec<T>,
    inv_gamma_a1: T,
    inv_gamma_a2: T,
}

pub fn check_order(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(alpha))
    }
}

/// Number of initial derivatives an order needs, `⌈α⌉`.
pub fn initial_terms(alpha: f64) -> usize {
    alpha.ceil() as usize
}

pub fn build_weights<S: Real>(alpha: f64, count: usize) -> Result<WeightTable<S>> {
    check_order(alpha)?;
    if count == 0 {
        return Err(Error::ZeroSteps);
    }
    let len = count + 2;
    let a = DoubleDouble::from_f64(alpha);
    let a1 = a + DoubleDouble::ONE;
    let inv_g1 = DoubleDouble::ONE / gamma(a1);
    let inv_g2 = DoubleDouble::ONE / gamma(a1 + DoubleDouble::ONE);

    // m^α and m^{α+1} for m = 0..=len+1
    let pow_a: Vec<DoubleDouble> = (0..len + 2)
        .map(|m| DoubleDouble::from_f64(m as f64).powf(a))
        .collect();
    let pow_a1: Vec<DoubleDouble> = pow_a
        .iter()
        .enumerate()
        .map(|(m, &p)| p * DoubleDouble::from_f64(m as f64))
        .collect();

    let two = DoubleDouble::from_f64(2.0);
    let mut b = Vec::with_capacity(len);
    let mut acorr = Vec::with_capacity(len);
    let mut c = Vec::with_capacity(len);
    for n in 0..len {
        b.push(S::from_wide((pow_a[n + 1] - pow_a[n]) * inv_g1));
        acorr.push(S::from_wide(
            (pow_a1[n + 2] - two * pow_a1[n + 1] + pow_a1[n]) * inv_g2,
        ));
        let shift = DoubleDouble::from_f64(n as f64) - a;
        c.push(S::from_wide((pow_a1[n] - shift * pow_a[n + 1]) * inv_g2));
    }
    b.reverse();
    acorr.reverse();
    Ok(WeightTable {
        alpha,
        b_rev: b,
        a_rev: acorr,
        c,
        inv_gamma_a1: S::from_wide(inv_g1),
        inv_gamma_a2: S::from_wide(inv_g2),
    })
}

impl<T: Element> WeightTable<T> {
    /// Assembles a table from forward sequences; used for exact-arithmetic
    /// checks where the coefficients are supplied directly.
    pub fn from_sequences(
        alpha: f64,
        b: Vec<T>,
        a: Vec<T>,
        c: Vec<T>,
        inv_gamma_a1: T,
        inv_gamma_a2: T,
    ) -> Result<Self> {
        if b.is_empty() || b.len() != a.len() || b.len() != c.len() {
            return Err(Error::InvalidArgument(
                "weight sequences must be non-empty and of equal length".into(),
            ));
        }
        let mut b = b;
        let mut a = a;
        b.reverse();
        a.reverse();
        Ok(Self {
            alpha,
            b_rev: b,
            a_rev: a,
            c,
            inv_gamma_a1,
            inv_gamma_a2,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of stored indices (`count + 2` for [`build_weights`]).
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    #[inline]
    pub fn b(&self, n: usize) -> T {
        self.b_rev[self.len() - 1 - n]
    }

    #[inline]
    pub fn a(&self, n: usize) -> T {
        self.a_rev[self.len() - 1 - n]
    }

    #[inline]
    pub fn c(&self, n: usize) -> T {
        self.c[n]
    }

    pub fn inv_gamma_a1(&self) -> T {
        self.inv_gamma_a1
    }

    pub fn inv_gamma_a2(&self) -> T {
        self.inv_gamma_a2
    }

    /// `(b_{n−k}, a_{n−k})` for `k` in `lo..hi`, ascending in `k`.
    #[inline]
    pub(crate) fn windows(&self, n: usize, lo: usize, hi: usize) -> (&[T], &[T]) {
        debug_assert!(lo <= hi && hi <= n + 1 && n < self.len());
        let base = self.len() - 1 - n;
        (&self.b_rev[base + lo..base + hi], &self.a_rev[base + lo..base + hi])
    }
}

/// One table per system component, shared between components of equal order.
#[derive(Clone, Debug)]
pub struct ComponentWeights<T> {
    tables: Vec<Arc<WeightTable<T>>>,
}

impl<S: Real> ComponentWeights<S> {
    pub fn build(orders: &[f64], count: usize) -> Result<Self> {
        let mut built: Vec<Arc<WeightTable<S>>> = Vec::new();
        let mut tables = Vec::with_capacity(orders.len());
        for &alpha in orders {
            let table = match built.iter().find(|t| t.alpha().to_bits() == alpha.to_bits()) {
                Some(t) => Arc::clone(t),
                None => {
                    let t = Arc::new(build_weights(alpha, count)?);
                    built.push(Arc::clone(&t));
                    t
                }
            };
            tables.push(table);
        }
        Ok(Self { tables })
    }
}

impl<T> ComponentWeights<T> {
    pub fn from_tables(tables: Vec<WeightTable<T>>) -> Self {
        Self {
            tables: tables.into_iter().map(Arc::new).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.tables.len()
    }

    pub fn component(&self, i: usize) -> &WeightTable<T> {
        &self.tables[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &WeightTable<T>> + '_ {
        self.tables.iter().map(|t| &**t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_reduces_to_trapezoid() {
        let w = build_weights::<f64>(1.0, 50).unwrap();
        for n in 0..w.len() {
            assert_eq!(w.b(n), 1.0, "b_{n}");
            assert_eq!(w.a(n), 1.0, "a_{n}");
            assert_eq!(w.c(n), 0.5, "c_{n}");
        }
    }

    #[test]
    fn half_order_reference_values() {
        // Closed forms: Γ(1.5) = √π/2, Γ(2.5) = 3√π/4.
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let g15 = sqrt_pi / 2.0;
        let g25 = 0.75 * sqrt_pi;
        let w = build_weights::<f64>(0.5, 4).unwrap();
        assert!((w.b(0) - 1.0 / g15).abs() < 1e-14);
        assert!((w.b(1) - (2f64.sqrt() - 1.0) / g15).abs() < 1e-14);
        assert!((w.a(0) - (2f64.powf(1.5) - 2.0) / g25).abs() < 1e-14);
        assert!((w.c(1) - (1.0 - 0.5 * 2f64.sqrt()) / g25).abs() < 1e-14);
        // six-digit values from a 50-digit evaluation
        assert!((w.b(0) - std::f64::consts::FRAC_2_SQRT_PI).abs() < 5e-7);
        assert!((w.b(1) - 0.467390).abs() < 5e-7);
        assert!((w.a(0) - 0.623187).abs() < 5e-7);
        assert!((w.c(1) - 0.220330).abs() < 5e-7);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_weights::<f64>(0.0, 10),
            Err(Error::UnsupportedOrder(_))
        ));
        assert!(matches!(
            build_weights::<f64>(2.5, 10),
            Err(Error::UnsupportedOrder(_))
        ));
        assert!(matches!(
            build_weights::<f64>(f64::NAN, 10),
            Err(Error::UnsupportedOrder(_))
        ));
        assert!(matches!(build_weights::<f64>(0.5, 0), Err(Error::ZeroSteps)));
        assert!(build_weights::<f64>(2.0, 1).is_ok());
    }

    #[test]
    fn weights_are_positive() {
        for &alpha in &[0.1, 0.3, 0.9, 1.0, 1.5, 2.0] {
            let w = build_weights::<f64>(alpha, 2000).unwrap();
            for n in 0..w.len() {
                assert!(w.b(n) > 0.0 && w.a(n) > 0.0 && w.c(n) > 0.0, "alpha {alpha} n {n}");
            }
        }
    }

    #[test]
    fn windows_walk_history_forward() {
        let w = build_weights::<f64>(0.7, 10).unwrap();
        let (bw, aw) = w.windows(5, 2, 6);
        for (i, k) in (2..6).enumerate() {
            assert_eq!(bw[i], w.b(5 - k));
            assert_eq!(aw[i], w.a(5 - k));
        }
    }

    #[test]
    fn equal_orders_share_a_table() {
        let w = ComponentWeights::<f64>::build(&[0.9, 0.9, 0.5], 20).unwrap();
        assert!(std::ptr::eq(w.component(0), w.component(1)));
        assert!(!std::ptr::eq(w.component(0), w.component(2)));
    }

    #[test]
    fn extended_weights_carry_more_digits() {
        let wd = build_weights::<DoubleDouble>(0.9, 1000).unwrap();
        let w = build_weights::<f64>(0.9, 1000).unwrap();
        for n in [0, 1, 10, 999] {
            assert_eq!(wd.a(n).to_f64(), w.a(n));
            assert!(wd.a(n).lo() != 0.0 || n == 0);
        }
    }
}
