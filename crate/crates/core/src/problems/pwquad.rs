use crate::problems::Problem;
use crate::space::Space;
use crate::{Error, Result};

const BLOCK: [f64; 3] = [1.0, -1.0, 0.0];
const SOLUTION_BLOCK: [f64; 3] = [0.01, -1.0, 0.0];

/// Strongly convex piecewise quadratic
/// `f(x) = ½‖x − b‖² + (99/2) Σ max{0, xᵢ}²` on `ℝ³ᴺ`, with `b` repeating
/// `(1, −1, 0)`. `C¹` with a 100-Lipschitz gradient, not twice differentiable
/// at its minimizer `(0.01, −1, 0, …)`.
#[derive(Debug, Clone)]
pub struct PwQuad {
    b: Vec<f64>,
}

impl PwQuad {
    pub fn new(blocks: usize) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::InvalidParameter("need at least one block".into()));
        }
        Ok(PwQuad {
            b: BLOCK.iter().copied().cycle().take(3 * blocks).collect(),
        })
    }

    /// Accepts a dimension; it must be a positive multiple of three.
    pub fn with_dim(d: usize) -> Result<Self> {
        if d == 0 || !d.is_multiple_of(3) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be a positive multiple of 3, got {d}"
            )));
        }
        Self::new(d / 3)
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn minimizer(&self) -> Vec<f64> {
        SOLUTION_BLOCK.iter().copied().cycle().take(self.b.len()).collect()
    }

    pub fn min_value(&self) -> f64 {
        // Per block: ½(0.99² + 0 + 0) + 49.5·0.01²
        let blocks = (self.b.len() / 3) as f64;
        blocks * (0.5 * 0.99f64.powi(2) + 49.5 * 0.01f64.powi(2))
    }
}

impl Problem for PwQuad {
    fn space(&self) -> Space {
        Space::euclidean(self.b.len())
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.space().check(x)?;
        Ok(x
            .iter()
            .zip(&self.b)
            .map(|(&xi, &bi)| 0.5 * (xi - bi).powi(2) + 49.5 * xi.max(0.0).powi(2))
            .sum())
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let f = self.value(x)?;
        let g = x
            .iter()
            .zip(&self.b)
            .map(|(&xi, &bi)| xi - bi + 99.0 * xi.max(0.0))
            .collect();
        Ok((f, g))
    }
}
