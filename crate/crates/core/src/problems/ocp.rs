use std::f64::consts::PI;

use super::multigrid::{apply_laplacian, Multigrid};
use crate::problems::Problem;
use crate::space::Space;
use crate::{Error, Result};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX: usize = 50;

const LINEAR_RTOL: f64 = 1e-14;
const LINEAR_MAX_ITER: usize = 200;
// Once the Newton correction is this small relative to the state, the
// residual sits at its rounding floor (it grows like h⁻² · eps on fine grids).
const STEP_FLOOR: f64 = 1e-10;
const MAX_HALVINGS: usize = 40;

/// Discretization data for `min ½‖y − y_d‖² + ν/2 ‖u‖²` subject to
/// `−Δy + exp(y) = u` on the unit square with homogeneous Dirichlet data.
///
/// Vectors live on the `(M−1)²` interior nodes, ordered row-major in
/// `(x₁, x₂)`: node `(i₁h, i₂h)` has index `(i₁−1)(M−1) + (i₂−1)`.
#[derive(Debug, Clone)]
pub struct OcpGrid {
    pub m: usize,
    pub nu: f64,
    pub y_d: Vec<f64>,
    pub newton_tol: f64,
    pub newton_max: usize,
}

impl OcpGrid {
    /// `M = 2ʲ`, `ν = 10⁻³`, `y_d = sin(2πx₁)cos(2πx₂)`.
    pub fn standard(j: u32) -> Result<Self> {
        if !(1..=14).contains(&j) {
            return Err(Error::InvalidParameter(format!("mesh level j must be in 1..=14, got {j}")));
        }
        let m = 1usize << j;
        let y_d = (0..(m - 1) * (m - 1))
            .map(|k| {
                let (x1, x2) = node(m, k);
                (2.0 * PI * x1).sin() * (2.0 * PI * x2).cos()
            })
            .collect();
        Self::new(m, 1e-3, y_d)
    }

    pub fn new(m: usize, nu: f64, y_d: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::GridTooSmall(m));
        }
        if !m.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("M must be a power of two, got {m}")));
        }
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
        }
        let grid = OcpGrid {
            m,
            nu,
            y_d,
            newton_tol: NEWTON_TOL,
            newton_max: NEWTON_MAX,
        };
        grid.space().check(&grid.y_d)?;
        Ok(grid)
    }

    pub fn space(&self) -> Space {
        Space::grid(self.m).expect("validated in constructor")
    }

    pub fn dim(&self) -> usize {
        (self.m - 1) * (self.m - 1)
    }

    /// Coordinates of interior node `k`.
    pub fn node(&self, k: usize) -> (f64, f64) {
        node(self.m, k)
    }

    /// `A y + exp(y)`.
    pub fn state_operator(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        apply_laplacian(self.m, y, &mut out);
        for (o, yi) in out.iter_mut().zip(y) {
            *o += yi.exp();
        }
        out
    }

    fn residual(&self, y: &[f64], u: &[f64]) -> (Vec<f64>, f64) {
        let mut r = self.state_operator(y);
        for (ri, ui) in r.iter_mut().zip(u) {
            *ri -= ui;
        }
        let norm = self.space().norm_unchecked(&r);
        (r, norm)
    }

    /// Grid `L²` norm of `A y + exp(y) − u`.
    pub fn state_residual(&self, y: &[f64], u: &[f64]) -> Result<f64> {
        let space = self.space();
        space.check(y)?;
        space.check(u)?;
        Ok(self.residual(y, u).1)
    }

    /// Damped Newton from `y = 0`.
    pub fn state_solve(&self, u: &[f64]) -> Result<Vec<f64>> {
        let space = self.space();
        space.check(u)?;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("control".into()));
        }
        let mut y = vec![0.0; u.len()];
        let (mut r, mut res) = self.residual(&y, u);
        for _ in 0..self.newton_max {
            if res <= self.newton_tol {
                return Ok(y);
            }
            let c: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = Multigrid::new(self.m, c).solve(&rhs, LINEAR_RTOL, LINEAR_MAX_ITER)?;
            let small = space.norm_unchecked(&delta) <= STEP_FLOOR * (1.0 + space.norm_unchecked(&y));

            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let trial: Vec<f64> = y.iter().zip(&delta).map(|(a, d)| a + t * d).collect();
                let (tr, tres) = self.residual(&trial, u);
                if tres.is_finite() && tres < res {
                    accepted = Some((trial, tr, tres));
                    break;
                }
                t *= 0.5;
            }
            match accepted {
                Some((ny, nr, nres)) => {
                    y = ny;
                    r = nr;
                    res = nres;
                }
                None if small => return Ok(y),
                None => {
                    return Err(Error::StateSolve {
                        iterations: self.newton_max,
                        residual: res,
                    })
                }
            }
            if small && t == 1.0 {
                return Ok(y);
            }
        }
        if res <= self.newton_tol {
            return Ok(y);
        }
        Err(Error::StateSolve {
            iterations: self.newton_max,
            residual: res,
        })
    }

    /// Solves `(A + diag(exp(y))) p = y − y_d`.
    pub fn adjoint_solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.space().check(y)?;
        let c: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        let rhs: Vec<f64> = y.iter().zip(&self.y_d).map(|(a, b)| a - b).collect();
        Multigrid::new(self.m, c).solve(&rhs, LINEAR_RTOL, LINEAR_MAX_ITER)
    }

    /// `½‖y − y_d‖² + ν/2 ‖u‖²`, summed with compensation: near a solution the
    /// line searches compare values that differ in the last few digits.
    pub fn objective(&self, y: &[f64], u: &[f64]) -> f64 {
        let terms = y
            .iter()
            .zip(&self.y_d)
            .map(|(a, b)| (a - b) * (a - b))
            .chain(u.iter().map(|v| self.nu * v * v));
        0.5 * self.space().weight() * neumaier_sum(terms)
    }

    /// Reduced objective and its gradient `νu + p` together with the state.
    pub fn eval_with_state(&self, u: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let y = self.state_solve(u)?;
        let f = self.objective(&y, u);
        let p = self.adjoint_solve(&y)?;
        let grad = u.iter().zip(&p).map(|(ui, pi)| self.nu * ui + pi).collect();
        Ok((f, grad, y))
    }
}

fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let next = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - next) + t } else { (t - next) + sum };
        sum = next;
    }
    sum + comp
}

fn node(m: usize, k: usize) -> (f64, f64) {
    let n = m - 1;
    let h = 1.0 / m as f64;
    ((k / n + 1) as f64 * h, (k % n + 1) as f64 * h)
}

/// Reduced optimal-control objective `u ↦ f(y_u, u)`.
#[derive(Debug, Clone)]
pub struct Ocp {
    pub grid: OcpGrid,
}

impl Ocp {
    pub fn new(grid: OcpGrid) -> Self {
        Ocp { grid }
    }

    pub fn standard(j: u32) -> Result<Self> {
        Ok(Ocp::new(OcpGrid::standard(j)?))
    }
}

impl Problem for Ocp {
    fn space(&self) -> Space {
        self.grid.space()
    }

    fn value(&self, u: &[f64]) -> Result<f64> {
        let y = self.grid.state_solve(u)?;
        Ok(self.grid.objective(&y, u))
    }

    fn value_grad(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.grid.eval_with_state(u).map(|(f, g, _)| (f, g))
    }
}
