use crate::problem::VectorField;
use crate::scalar::Real;

pub fn linear_rhs<S: Real>(_t: S, y: S, lambda: S) -> S {
    lambda * y
}

/// `D^α y_i = λ y_i` for each component; with `y(0) = 1` the exact solution
/// is the Mittag-Leffler function `E_α(λ t^α)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSystem {
    pub lambda: f64,
    pub dim: usize,
}

impl LinearSystem {
    pub fn new(lambda: f64) -> Self {
        Self { lambda, dim: 1 }
    }
}

impl<S: Real> VectorField<S> for LinearSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: S, y: &[S], dy: &mut [S]) {
        let lambda = S::from_f64(self.lambda);
        for (d, &v) in dy.iter_mut().zip(y) {
            *d = linear_rhs(t, v, lambda);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_state() {
        assert_eq!(linear_rhs(0.0, 1.0, -1.0), -1.0);
        assert_eq!(linear_rhs(3.0, 42.0, 0.0), 0.0);
        assert_eq!(linear_rhs(0.0, 0.5, 2.0), 1.0);
        let mut dy = [0.0; 2];
        LinearSystem { lambda: 2.0, dim: 2 }.eval(0.0, &[1.0, -3.0], &mut dy);
        assert_eq!(dy, [2.0, -6.0]);
    }
}
