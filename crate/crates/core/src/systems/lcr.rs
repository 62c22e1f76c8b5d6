//! Forced series LCR circuit with a piecewise-linear resistor:
//!
//! ```text
//! D^{α1} x = y − g(x)
//! D^{α2} y = −σ y − x + f sin(ω t)
//! ```

use crate::error::{Error, Result};
use crate::problem::VectorField;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LcrParams {
    pub sigma: f64,
    pub f: f64,
    pub omega: f64,
    pub a: f64,
    pub b: f64,
}

impl LcrParams {
    pub const SIGMA: f64 = 1.015;
    pub const OMEGA: f64 = 0.55;
    pub const A: f64 = -1.02;
    pub const B: f64 = -0.58;

    /// Reference circuit (σ = 1.015, ω = 0.55, a = −1.02, b = −0.58) at forcing `f`.
    pub fn reference(f: f64) -> Self {
        Self {
            sigma: Self::SIGMA,
            f,
            omega: Self::OMEGA,
            a: Self::A,
            b: Self::B,
        }
    }

    /// Forcing period `2π/ω`.
    pub fn forcing_period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }
}

/// Piecewise-linear characteristic. At `x = ±1` the outer branch is used;
/// both adjacent formulas agree there.
#[inline]
pub fn g_piecewise<S: Real>(x: S, a: S, b: S) -> S {
    let one = S::one();
    if x <= -one {
        b * x - a + b
    } else if x >= one {
        b * x + a - b
    } else {
        a * x
    }
}

pub fn lcr_rhs<S: Real>(t: S, state: [S; 2], params: &LcrParams) -> [S; 2] {
    let [x, y] = state;
    let sigma = S::from_f64(params.sigma);
    let a = S::from_f64(params.a);
    let b = S::from_f64(params.b);
    let forcing = S::from_f64(params.f) * (S::from_f64(params.omega) * t).sin();
    [y - g_piecewise(x, a, b), -sigma * y - x + forcing]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LcrSystem {
    pub params: LcrParams,
}

impl LcrSystem {
    pub fn new(params: LcrParams) -> Self {
        Self { params }
    }
}

impl<S: Real> VectorField<S> for LcrSystem {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, t: S, y: &[S], dy: &mut [S]) {
        let [dx, dv] = lcr_rhs(t, [y[0], y[1]], &self.params);
        dy[0] = dx;
        dy[1] = dv;
    }
}

/// Equilibria of the unforced circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilibriumSet {
    pub e0: [f64; 2],
    pub e_plus: [f64; 2],
    pub e_minus: [f64; 2],
}

/// `E_0 = (0, 0)` and `E_± = ±(σ(a−b), b−a) / (1 + σb)`.
pub fn equilibria(params: &LcrParams) -> Result<EquilibriumSet> {
    let denom = 1.0 + params.sigma * params.b;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateEquilibrium);
    }
    let x = params.sigma * (params.a - params.b) / denom;
    let y = (params.b - params.a) / denom;
    Ok(EquilibriumSet {
        e0: [0.0, 0.0],
        e_plus: [x, y],
        e_minus: [-x, -y],
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    const A: f64 = LcrParams::A;
    const B: f64 = LcrParams::B;

    #[test]
    fn piecewise_values() {
        assert_eq!(g_piecewise(0.0, A, B), 0.0);
        assert_eq!(g_piecewise(1.0, A, B), -1.02);
        // b·(−2) − a + b = 1.16 + 1.02 − 0.58
        assert!((g_piecewise(-2.0, A, B) - 1.60).abs() < 1e-15);
        assert!((g_piecewise(0.5, A, B) + 0.51).abs() < 1e-15);
    }

    #[test]
    fn rhs_examples() {
        let p = LcrParams::reference(0.1);
        assert_eq!(lcr_rhs(0.0, [0.0, 0.0], &p), [0.0, 0.0]);
        let t = std::f64::consts::FRAC_PI_2 / p.omega;
        let [dx, dy] = lcr_rhs(t, [0.0, 0.0], &p);
        assert_eq!(dx, 0.0);
        assert!((dy - 0.1).abs() < 1e-15);
    }

    #[test]
    fn reference_equilibria() {
        let p = LcrParams::reference(0.0);
        let e = equilibria(&p).unwrap();
        assert_eq!(e.e0, [0.0, 0.0]);
        // σ(a−b)/(1+σb) = −0.4466/0.4113, (b−a)/(1+σb) = 0.44/0.4113
        assert!((e.e_plus[0] + 1.085_825).abs() < 1e-5, "{:?}", e.e_plus);
        assert!((e.e_plus[1] - 1.069_779).abs() < 1e-5, "{:?}", e.e_plus);
        assert_eq!(e.e_minus, [-e.e_plus[0], -e.e_plus[1]]);
        for pt in [e.e_plus, e.e_minus, e.e0] {
            assert!((g_piecewise(pt[0], A, B) - pt[1]).abs() < 1e-12);
            assert!((pt[0] + p.sigma * pt[1]).abs() < 1e-12);
            let d = lcr_rhs(0.0, pt, &p);
            assert!(d[0].abs() < 1e-12 && d[1].abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_denominator() {
        let p = LcrParams { sigma: 2.0, f: 0.0, omega: 1.0, a: -1.0, b: -0.5 };
        assert!(matches!(equilibria(&p), Err(Error::DegenerateEquilibrium)));
    }

    proptest! {
        #[test]
        fn g_is_odd_and_continuous(x in -10.0f64..10.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            prop_assert_eq!(g_piecewise(-x, a, b), -g_piecewise(x, a, b));
            for edge in [-1.0f64, 1.0] {
                let outer = b * edge + edge.signum() * (a - b);
                prop_assert!((a * edge - outer).abs() <= 1e-15 * (1.0 + a.abs() + b.abs()));
            }
        }

        #[test]
        fn forcing_symmetry(t in 0.0f64..100.0, x in -3.0f64..3.0, y in -3.0f64..3.0, f in 0.0f64..0.3) {
            let p = LcrParams::reference(f);
            let shifted = lcr_rhs(t + std::f64::consts::PI / p.omega, [-x, -y], &p);
            let base = lcr_rhs(t, [x, y], &p);
            prop_assert!((shifted[0] + base[0]).abs() < 1e-12);
            prop_assert!((shifted[1] + base[1]).abs() < 1e-12);
        }
    }
}
