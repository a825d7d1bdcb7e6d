//! Objective functions.

mod multigrid;
mod ocp;
mod pwquad;
mod rosenbrock;

pub use ocp::{Ocp, OcpGrid, NEWTON_MAX, NEWTON_TOL};
pub use pwquad::PwQuad;
pub use rosenbrock::Rosenbrock;

use crate::space::{axpy, Space};
use crate::Result;

/// A differentiable objective on a [`Space`]. The gradient is the Riesz
/// representative: `f'(x)v = ⟨∇f(x), v⟩` in the space's inner product.
///
/// Evaluations must be pure so that independent runs can share a problem.
pub trait Problem {
    fn space(&self) -> Space;

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.value_grad(x).map(|(f, _)| f)
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl<P: Problem + ?Sized> Problem for &P {
    fn space(&self) -> Space {
        (**self).space()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        (**self).value_grad(x)
    }
}

/// Wraps a closure `x ↦ (f(x), ∇f(x))`.
pub struct FnProblem<F> {
    space: Space,
    f: F,
}

impl<F> FnProblem<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    pub fn new(space: Space, f: F) -> Self {
        FnProblem { space, f }
    }
}

impl<F> Problem for FnProblem<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    fn space(&self) -> Space {
        self.space
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.space.check(x)?;
        Ok((self.f)(x))
    }
}

/// Largest relative mismatch between the central difference
/// `(f(x+tv) − f(x−tv))/2t` and `⟨∇f(x), v⟩` over `directions`.
pub fn fd_gradient_check<P: Problem + ?Sized>(problem: &P, x: &[f64], directions: &[Vec<f64>], t: f64) -> Result<f64> {
    let space = problem.space();
    let (_, g) = problem.value_grad(x)?;
    let mut worst = 0.0f64;
    for v in directions {
        let analytic = space.inner(&g, v)?;
        let mut xp = x.to_vec();
        axpy(t, v, &mut xp);
        let mut xm = x.to_vec();
        axpy(-t, v, &mut xm);
        let fd = (problem.value(&xp)? - problem.value(&xm)?) / (2.0 * t);
        let denom = analytic.abs().max(f64::MIN_POSITIVE);
        worst = worst.max((fd - analytic).abs() / denom);
    }
    Ok(worst)
}
