//! Gamma function for any [`Real`] scalar.
//!
//! The argument is shifted upward by the recurrence `Γ(x) = Γ(x+m) / (x(x+1)…(x+m-1))`
//! until it exceeds [`SHIFT_TARGET`], where the Stirling series with 14
//! Bernoulli terms is accurate beyond double-double precision.

use crate::scalar::Real;

const SHIFT_TARGET: f64 = 20.0;

/// `(numerator, denominator)` of B_2, B_4, …, B_28.
const BERNOULLI: [(f64, f64); 14] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
    (-23749461029.0, 870.0),
];

/// Stirling series for ln Γ(z), valid for z ≥ SHIFT_TARGET.
fn stirling_ln_gamma<S: Real>(z: S) -> S {
    let half = S::from_f64(0.5);
    let ln_two_pi = (S::pi() + S::pi()).ln();
    let mut acc = (z - half) * z.ln() - z + half * ln_two_pi;
    let inv = S::one() / z;
    let inv2 = inv * inv;
    let mut power = inv;
    for (k, &(num, den)) in BERNOULLI.iter().enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        let coeff = S::from_f64(num) / S::from_f64(den * two_k * (two_k - 1.0));
        acc = acc + coeff * power;
        power = power * inv2;
    }
    acc
}

/// Natural log of Γ(x) for x > 0.
pub fn ln_gamma<S: Real>(x: S) -> S {
    assert!(x > S::zero(), "ln_gamma needs a positive argument");
    let target = S::from_f64(SHIFT_TARGET);
    let mut z = x;
    let mut product = S::one();
    while z < target {
        product = product * z;
        z = z + S::one();
    }
    stirling_ln_gamma(z) - product.ln()
}

/// Γ(x) for x > 0.
pub fn gamma<S: Real>(x: S) -> S {
    assert!(x > S::zero(), "gamma needs a positive argument");
    let target = S::from_f64(SHIFT_TARGET);
    let mut z = x;
    let mut product = S::one();
    while z < target {
        product = product * z;
        z = z + S::one();
    }
    stirling_ln_gamma(z).exp() / product
}
