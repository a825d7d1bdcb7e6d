//! Bounded secant-pair storage and the cautious quantities derived from it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::space::Space;
use crate::{Error, Result};

/// `q(s, y) = min{sᵀy/‖s‖², sᵀy/‖y‖²}` for nonzero `s`, `y`; `0` otherwise.
/// Negative when the pair carries negative curvature.
pub fn q_metric(space: &Space, s: &[f64], y: &[f64]) -> Result<f64> {
    let sy = space.inner(s, y)?;
    let ss = space.inner(s, s)?;
    let yy = space.inner(y, y)?;
    Ok(q_from_products(sy, ss, yy))
}

fn q_from_products(sy: f64, ss: f64, yy: f64) -> f64 {
    if ss > 0.0 && yy > 0.0 {
        (sy / ss).min(sy / yy)
    } else {
        0.0
    }
}

/// Cautious threshold `ω = min{c₀, c₁‖∇f‖^{c₂}}`.
pub fn omega(grad_norm: f64, params: &CautiousParams) -> Result<f64> {
    if !(grad_norm > 0.0) || !grad_norm.is_finite() {
        return Err(Error::Contract(format!(
            "omega requires a positive finite gradient norm, got {grad_norm}"
        )));
    }
    Ok(params.c0.min(params.c1 * grad_norm.powf(params.c2)))
}

/// Barzilai–Borwein scalars `(γ⁻, γ⁺) = (sᵀy/‖y‖², ‖s‖²/sᵀy)`.
pub fn bb_scalars(space: &Space, s: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let sy = space.inner(s, y)?;
    if !(sy > 0.0) {
        return Err(Error::Contract(format!(
            "Barzilai-Borwein scalars need sᵀy > 0, got {sy:e}"
        )));
    }
    let ss = space.inner(s, s)?;
    let yy = space.inner(y, y)?;
    Ok((sy / yy, ss / sy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecantPair {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub sy: f64,
    pub ss: f64,
    pub yy: f64,
    /// Cached at push time; `s` and `y` never change afterwards.
    pub q: f64,
    /// Iteration that produced the pair.
    pub index: usize,
}

impl SecantPair {
    pub fn new(space: &Space, s: Vec<f64>, y: Vec<f64>, index: usize) -> Result<Self> {
        let sy = space.inner(&s, &y)?;
        let ss = space.inner(&s, &s)?;
        let yy = space.inner(&y, &y)?;
        Ok(SecantPair {
            q: q_from_products(sy, ss, yy),
            s,
            y,
            sy,
            ss,
            yy,
            index,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CautiousParams {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub m: usize,
}

impl CautiousParams {
    /// `c₀ = 1e-4`, `c₁ = 1`, `c₂ = 1/(2m+3)`.
    pub fn defaults(m: usize) -> Self {
        CautiousParams {
            c0: 1e-4,
            c1: 1.0,
            c2: 1.0 / (2 * m + 3) as f64,
            m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0 && self.c0 <= 1.0) {
            return Err(Error::InvalidParameter(format!("c0 must lie in (0, 1], got {}", self.c0)));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(Error::InvalidParameter(format!("c1 must be positive, got {}", self.c1)));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(Error::InvalidParameter(format!("c2 must be positive, got {}", self.c2)));
        }
        Ok(())
    }

    /// Whether `c₂` is small enough for the linear-rate guarantee:
    /// `c₂ < 1/(2m+1)` with Armijo backtracking, `c₂ < 1/(2m+2)` with Wolfe searches.
    pub fn satisfies_rate_condition(&self, armijo: bool) -> bool {
        let denom = if armijo { 2 * self.m + 1 } else { 2 * self.m + 2 };
        self.c2 < 1.0 / denom as f64
    }
}

/// FIFO of at most `m` secant pairs plus the BB scalars of the latest step.
#[derive(Debug, Clone, PartialEq)]
pub struct Storage {
    pairs: VecDeque<SecantPair>,
    capacity: usize,
    gamma_minus: f64,
    gamma_plus: f64,
}

/// Scalar-only view of a [`Storage`] for traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageSnapshot {
    pub capacity: usize,
    pub gamma_minus: f64,
    /// `None` stands for `+∞`.
    pub gamma_plus: Option<f64>,
    pub pairs: Vec<PairScalars>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScalars {
    pub index: usize,
    pub sy: f64,
    pub ss: f64,
    pub yy: f64,
    pub q: f64,
}

impl Storage {
    pub fn new(capacity: usize) -> Self {
        Storage {
            pairs: VecDeque::with_capacity(capacity + 1),
            capacity,
            gamma_minus: 0.0,
            gamma_plus: f64::INFINITY,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Oldest first.
    pub fn pairs(&self) -> impl ExactSizeIterator<Item = &SecantPair> + '_ {
        self.pairs.iter()
    }

    pub fn gamma_bounds(&self) -> (f64, f64) {
        (self.gamma_minus, self.gamma_plus)
    }

    /// True before the first stored pair and after a skipped update.
    pub fn gamma_bounds_degenerate(&self) -> bool {
        self.gamma_minus == 0.0 && self.gamma_plus == f64::INFINITY
    }

    /// Stores `(s, y)` if `sᵀy > 0`, evicting the oldest pair on overflow.
    /// A rejected pair leaves the list untouched and resets `(γ⁻, γ⁺)` to `(0, ∞)`.
    pub fn push_pair(&mut self, space: &Space, s: Vec<f64>, y: Vec<f64>, index: usize) -> Result<bool> {
        let pair = SecantPair::new(space, s, y, index)?;
        if !(pair.sy > 0.0) {
            self.gamma_minus = 0.0;
            self.gamma_plus = f64::INFINITY;
            return Ok(false);
        }
        if let Some(last) = self.pairs.back() {
            if last.index >= index {
                return Err(Error::Contract(format!(
                    "pair indices must increase: {} after {}",
                    index, last.index
                )));
            }
        }
        self.gamma_minus = pair.sy / pair.yy;
        self.gamma_plus = pair.ss / pair.sy;
        self.pairs.push_back(pair);
        if self.pairs.len() > self.capacity {
            self.pairs.pop_front();
        }
        Ok(true)
    }

    /// Stored pairs with `q ≥ ω`, oldest first.
    pub fn active_pairs(&self, omega: f64) -> Vec<&SecantPair> {
        self.pairs.iter().filter(|p| p.q >= omega).collect()
    }

    pub fn all_pairs(&self) -> Vec<&SecantPair> {
        self.pairs.iter().collect()
    }

    /// Seed scaling for the cautious method. The target is `γ⁻`, or `fallback`
    /// when the bounds are degenerate; it is clamped into
    /// `[γ⁻, γ⁺] ∩ [ω, 1/ω]` when that is nonempty and into `[ω, 1/ω]` otherwise.
    pub fn choose_gamma(&self, omega: f64, fallback: f64) -> f64 {
        let (lo_w, hi_w) = (omega, 1.0 / omega);
        if self.gamma_bounds_degenerate() {
            return fallback.clamp(lo_w, hi_w);
        }
        let lo = self.gamma_minus.max(lo_w);
        let hi = self.gamma_plus.min(hi_w);
        if lo <= hi {
            self.gamma_minus.clamp(lo, hi)
        } else {
            self.gamma_minus.clamp(lo_w, hi_w)
        }
    }

    /// Seed scaling without the `[ω, 1/ω]` safeguard: `γ⁻`, or `fallback`
    /// when the bounds are degenerate.
    pub fn choose_gamma_classical(&self, fallback: f64) -> f64 {
        if self.gamma_bounds_degenerate() {
            fallback
        } else {
            self.gamma_minus
        }
    }

    pub fn snapshot(&self) -> StorageSnapshot {
        StorageSnapshot {
            capacity: self.capacity,
            gamma_minus: self.gamma_minus,
            gamma_plus: self.gamma_plus.is_finite().then_some(self.gamma_plus),
            pairs: self
                .pairs
                .iter()
                .map(|p| PairScalars {
                    index: p.index,
                    sy: p.sy,
                    ss: p.ss,
                    yy: p.yy,
                    q: p.q,
                })
                .collect(),
        }
    }
}
