//! Polynomial occupation functionals for user-defined statistics.

use ephkin_core::PairFunctions;

/// `Σ c_k x^k` with coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Polynomial { coefficients }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
    }
}

/// An `(up, down)` pair of polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialPair {
    pub up: Polynomial,
    pub down: Polynomial,
}

impl PairFunctions for PolynomialPair {
    fn up(&self, x: f64) -> f64 {
        self.up.eval(x)
    }

    fn down(&self, x: f64) -> f64 {
        self.down.eval(x)
    }
}
