use crate::problems::Problem;
use crate::space::Space;
use crate::Result;

/// `f(x) = (1 − x₁)² + 100(x₂ − x₁²)²`, minimizer `(1, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rosenbrock;

impl Rosenbrock {
    pub fn new() -> Self {
        Rosenbrock
    }

    pub const START: [f64; 2] = [-1.2, 1.0];
    pub const MINIMIZER: [f64; 2] = [1.0, 1.0];
}

impl Problem for Rosenbrock {
    fn space(&self) -> Space {
        Space::euclidean(2)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.space().check(x)?;
        let (a, b) = (1.0 - x[0], x[1] - x[0] * x[0]);
        Ok(a * a + 100.0 * b * b)
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.space().check(x)?;
        let (a, b) = (1.0 - x[0], x[1] - x[0] * x[0]);
        let f = a * a + 100.0 * b * b;
        Ok((f, vec![-2.0 * a - 400.0 * x[0] * b, 200.0 * b]))
    }
}
