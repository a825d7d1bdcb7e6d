//! Search directions `d = −H∇f` and dense reference operators.
//!
//! [`two_loop`] is the matrix-free product used by the solver. [`dense_h`] and
//! [`dense_b`] materialize the inverse and direct BFGS recursions so that small
//! instances can be cross-checked and their operator norms audited.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::secant_store::SecantPair;
use crate::space::{axpy, Space};
use crate::{Error, Result};

/// Largest dimension for which dense operators are materialized.
pub const DENSE_DIM_LIMIT: usize = 2000;

fn check_pairs(pairs: &[&SecantPair]) -> Result<()> {
    for p in pairs {
        if !(p.sy > 0.0) {
            return Err(Error::Contract(format!(
                "pair {} has nonpositive curvature sᵀy = {:e}",
                p.index, p.sy
            )));
        }
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Contract(format!("seed scaling must be positive, got {gamma}")));
    }
    Ok(())
}

/// `d = −H g` for the operator obtained from the seed `γI` and `pairs`
/// (oldest first, the newest pair applied outermost).
pub fn two_loop(space: &Space, pairs: &[&SecantPair], gamma: f64, grad: &[f64]) -> Result<Vec<f64>> {
    space.check(grad)?;
    check_gamma(gamma)?;
    check_pairs(pairs)?;
    for p in pairs {
        space.check(&p.s)?;
        space.check(&p.y)?;
    }

    let mut q = grad.to_vec();
    let mut alphas = vec![0.0; pairs.len()];
    for (i, p) in pairs.iter().enumerate().rev() {
        let a = space.inner_unchecked(&p.s, &q) / p.sy;
        axpy(-a, &p.y, &mut q);
        alphas[i] = a;
    }
    for v in q.iter_mut() {
        *v *= gamma;
    }
    for (p, a) in pairs.iter().zip(&alphas) {
        let b = space.inner_unchecked(&p.y, &q) / p.sy;
        axpy(a - b, &p.s, &mut q);
    }
    for v in q.iter_mut() {
        *v = -*v;
    }
    Ok(q)
}

/// An explicit operator on a [`Space`], stored as its coordinate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub space: Space,
    pub matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(v)).as_slice().to_vec()
    }

    /// `max |⟨Mu, v⟩ − ⟨u, Mv⟩|` relative to `‖M‖_F ‖u‖ ‖v‖` over the given probes.
    pub fn self_adjoint_defect(&self, probes: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        let scale = self.matrix.norm();
        probes
            .iter()
            .map(|(u, v)| {
                let lhs = self.space.inner_unchecked(&self.apply(u), v);
                let rhs = self.space.inner_unchecked(u, &self.apply(v));
                let denom = scale * self.space.norm_unchecked(u) * self.space.norm_unchecked(v);
                if denom > 0.0 {
                    (lhs - rhs).abs() / denom
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }

    /// Extreme eigenvalues of the (self-adjoint) operator.
    ///
    /// The weight is uniform, so self-adjointness in the weighted product is
    /// plain symmetry of the coordinate matrix and the induced operator norm is
    /// its spectral norm.
    pub fn extreme_eigenvalues(&self) -> (f64, f64) {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// `(‖M‖, ‖M⁻¹‖)`; the second entry is `+∞` unless `M` is positive definite.
    pub fn norms(&self) -> (f64, f64) {
        let (lo, hi) = self.extreme_eigenvalues();
        let norm = hi.abs().max(lo.abs());
        let inv = if lo > 0.0 { 1.0 / lo } else { f64::INFINITY };
        (norm, inv)
    }
}

fn dense_guard(space: &Space, dim: usize) -> Result<()> {
    if dim != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: dim,
        });
    }
    if dim > DENSE_DIM_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: DENSE_DIM_LIMIT,
        });
    }
    Ok(())
}

/// Matrix of `v ↦ a⟨b, v⟩`.
fn weighted_outer(space: &Space, a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let a = DVector::from_column_slice(a);
    let b = DVector::from_column_slice(b);
    (a * b.transpose()) * space.weight()
}

/// Inverse update recursion `H⁽ʲ⁺¹⁾ = Vⱼ* H⁽ʲ⁾ Vⱼ + ρⱼ sⱼ⟨sⱼ, ·⟩` with
/// `Vⱼ = I − ρⱼ yⱼ⟨sⱼ, ·⟩`, starting from `H⁽⁰⁾ = γI`.
pub fn dense_h(space: &Space, pairs: &[&SecantPair], gamma: f64, dim: usize) -> Result<DenseOperator> {
    dense_guard(space, dim)?;
    check_gamma(gamma)?;
    check_pairs(pairs)?;
    let eye = DMatrix::<f64>::identity(dim, dim);
    let mut h = &eye * gamma;
    for p in pairs {
        let rho = 1.0 / p.sy;
        let v = &eye - weighted_outer(space, &p.y, &p.s) * rho;
        let v_adj = &eye - weighted_outer(space, &p.s, &p.y) * rho;
        h = v_adj * h * v + weighted_outer(space, &p.s, &p.s) * rho;
    }
    Ok(DenseOperator {
        space: *space,
        matrix: h,
    })
}

/// Direct update recursion
/// `B⁽ʲ⁺¹⁾ = B⁽ʲ⁾ − Bsⱼ⟨Bsⱼ, ·⟩/⟨Bsⱼ, sⱼ⟩ + yⱼ⟨yⱼ, ·⟩/⟨yⱼ, sⱼ⟩`, `B⁽⁰⁾ = γ⁻¹I`.
pub fn dense_b(space: &Space, pairs: &[&SecantPair], gamma: f64, dim: usize) -> Result<DenseOperator> {
    dense_guard(space, dim)?;
    check_gamma(gamma)?;
    check_pairs(pairs)?;
    let mut b = DMatrix::<f64>::identity(dim, dim) / gamma;
    for p in pairs {
        let bs = (&b * DVector::from_column_slice(&p.s)).as_slice().to_vec();
        let sbs = space.inner_unchecked(&bs, &p.s);
        if !(sbs > 0.0) {
            return Err(Error::Contract(format!(
                "⟨Bs, s⟩ = {sbs:e} for pair {}: operator lost positive definiteness",
                p.index
            )));
        }
        b = b - weighted_outer(space, &bs, &bs) / sbs + weighted_outer(space, &p.y, &p.y) / p.sy;
    }
    Ok(DenseOperator {
        space: *space,
        matrix: b,
    })
}

/// Relative slack allowed when comparing computed norms against bounds.
const BOUND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub h_norm: f64,
    pub hinv_norm: f64,
    /// `‖(H⁽⁰⁾)⁻¹‖ + Mκ₂`
    pub hinv_bound: f64,
    /// `5ᴹ max{1, ‖H⁽⁰⁾‖} max{1, κ₁ᴹ, (κ₁κ₂)ᴹ}`
    pub h_bound: f64,
    pub hinv_ok: bool,
    pub h_ok: bool,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.hinv_ok && self.h_ok
    }
}

fn within(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + BOUND_SLACK)
}

/// Audits `H` (built from `n_pairs` pairs and seed `γI`) against the generic
/// update bounds, where `κ₁`, `κ₂` bound `‖s‖²/sᵀy` and `‖y‖²/sᵀy` for every pair.
pub fn check_bounds(h: &DenseOperator, gamma: f64, kappa1: f64, kappa2: f64, n_pairs: usize) -> BoundReport {
    let (h_norm, hinv_norm) = h.norms();
    let mm = n_pairs as i32;
    let hinv_bound = 1.0 / gamma + n_pairs as f64 * kappa2;
    let h_bound = 5f64.powi(mm) * gamma.max(1.0) * 1f64.max(kappa1.powi(mm)).max((kappa1 * kappa2).powi(mm));
    BoundReport {
        h_norm,
        hinv_norm,
        hinv_bound,
        h_bound,
        hinv_ok: within(hinv_norm, hinv_bound),
        h_ok: within(h_norm, h_bound),
    }
}

/// Bounds in terms of the cautious threshold alone:
/// `‖H⁻¹‖ ≤ (m+1)/ω` and `‖H‖ ≤ 5ᵐ max{1, ω^{−(2m+1)}}`.
pub fn check_cautious_bounds(h_norm: f64, hinv_norm: f64, omega: f64, m: usize) -> BoundReport {
    let hinv_bound = (m as f64 + 1.0) / omega;
    let h_bound = 5f64.powi(m as i32) * 1f64.max(omega.powi(-(2 * m as i32 + 1)));
    BoundReport {
        h_norm,
        hinv_norm,
        hinv_bound,
        h_bound,
        hinv_ok: within(hinv_norm, hinv_bound),
        h_ok: within(h_norm, h_bound),
    }
}

/// `κ₁ = max ‖s‖²/sᵀy`, `κ₂ = max ‖y‖²/sᵀy` over `pairs` (zero for no pairs).
pub fn curvature_constants(pairs: &[&SecantPair]) -> (f64, f64) {
    pairs.iter().fold((0.0f64, 0.0f64), |(k1, k2), p| {
        (k1.max(p.ss / p.sy), k2.max(p.yy / p.sy))
    })
}
