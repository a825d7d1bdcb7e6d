//! Convergence-rate statistics computed from solver traces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::solver::SolveReport;
use crate::space::{sub, Space};
use crate::{Error, Result};

/// Largest quotients `e_k / e_{k−1}` over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QFactor {
    /// Over all `1 ≤ k ≤ K`.
    pub all: f64,
    /// Over `k ∈ {K−2, K−1, K}`.
    pub last3: f64,
    /// Quotients skipped because `e_{k−1} = 0`.
    pub skipped: usize,
}

/// `NaN` entries mean no quotient was defined.
pub fn q_factor(errors: &[f64]) -> QFactor {
    let mut all = f64::NAN;
    let mut last3 = f64::NAN;
    let mut skipped = 0;
    let k_max = errors.len().saturating_sub(1);
    for k in 1..errors.len() {
        if errors[k - 1] == 0.0 {
            skipped += 1;
            continue;
        }
        let q = errors[k] / errors[k - 1];
        all = if all.is_nan() { q } else { all.max(q) };
        if k + 2 >= k_max {
            last3 = if last3.is_nan() { q } else { last3.max(q) };
        }
    }
    QFactor { all, last3, skipped }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LStep {
    pub holds: bool,
    pub kappa: f64,
}

/// `κ_l = max_{k ≥ k_start} e_{k+l}/e_k`; the sequence is `l`-step q-linearly
/// convergent from `k_start` on iff `κ_l < 1`.
pub fn lstep_qlinear(errors: &[f64], l: usize, k_start: usize) -> Result<LStep> {
    if l == 0 {
        return Err(Error::InvalidParameter("l must be at least 1".into()));
    }
    if errors.len() < k_start + l + 1 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} terms for l = {l} from k = {k_start}, got {}",
            k_start + l + 1,
            errors.len()
        )));
    }
    let mut kappa = f64::NEG_INFINITY;
    for k in k_start..errors.len() - l {
        if !(errors[k] > 0.0) {
            return Err(Error::InvalidParameter(format!("error e_{k} = {} is not positive", errors[k])));
        }
        kappa = kappa.max(errors[k + l] / errors[k]);
    }
    Ok(LStep {
        holds: kappa < 1.0,
        kappa,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub qf: QFactor,
    /// `NaN` when the report carries no iterates.
    pub qx: QFactor,
    pub qg: QFactor,
    /// `l ↦ l`-step test on `‖x_k − x*‖` (falls back to `f_k − f*` without iterates).
    pub lstep_table: BTreeMap<usize, LStep>,
}

/// Distances `‖x_k − x*‖` for the recorded iterates.
pub fn x_errors(report: &SolveReport, x_star: &[f64], space: &Space) -> Option<Vec<f64>> {
    report
        .iterates
        .as_ref()
        .map(|it| it.iter().map(|x| space.norm_unchecked(&sub(x, x_star))).collect())
}

pub fn q_factors(report: &SolveReport, f_star: f64, x_star: &[f64], space: &Space) -> Result<RateReport> {
    space.check(x_star)?;
    let fe: Vec<f64> = report.f_values().iter().map(|f| f - f_star).collect();
    let ge = report.grad_norms();
    let xe = x_errors(report, x_star, space);
    let nan = QFactor {
        all: f64::NAN,
        last3: f64::NAN,
        skipped: 0,
    };
    let seq = xe.as_deref().unwrap_or(&fe);
    let positive = seq.iter().take_while(|e| **e > 0.0).count();
    let mut lstep_table = BTreeMap::new();
    for l in 1..=5 {
        if let Ok(r) = lstep_qlinear(&seq[..positive], l, 0) {
            lstep_table.insert(l, r);
        }
    }
    Ok(RateReport {
        qf: q_factor(&fe),
        qx: xe.as_deref().map(q_factor).unwrap_or(nan),
        qg: q_factor(&ge),
        lstep_table,
    })
}

/// Constants of a strongly convex neighbourhood of the solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub mu: f64,
    pub lipschitz: f64,
    /// Armijo constant of the run.
    pub sigma: f64,
}

impl RateConstants {
    pub fn new(mu: f64, lipschitz: f64, sigma: f64) -> Result<Self> {
        if !(mu > 0.0 && lipschitz >= mu) {
            return Err(Error::InvalidParameter(format!("need L ≥ μ > 0, got μ = {mu}, L = {lipschitz}")));
        }
        Ok(RateConstants { mu, lipschitz, sigma })
    }

    pub fn kappa(&self) -> f64 {
        self.lipschitz / self.mu
    }

    /// `ν = 1 − 2σαμ/‖H⁻¹‖`.
    pub fn nu(&self, alpha: f64, hinv_norm: f64) -> f64 {
        1.0 - 2.0 * self.sigma * alpha * self.mu / hinv_norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub l: usize,
    pub x_holds: Option<bool>,
    pub g_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuReport {
    pub nu: Vec<f64>,
    /// `sup_{k ≥ k1} ν_k`
    pub nu_sup: f64,
    /// Iterations `k ≥ k1` checked against `f_{k+1} − f* ≤ ν_k (f_k − f*)`.
    pub checked: usize,
    pub violations: Vec<usize>,
    pub envelopes: Vec<Envelope>,
}

impl NuReport {
    pub fn fraction_holding(&self) -> f64 {
        if self.checked == 0 {
            return 1.0;
        }
        1.0 - self.violations.len() as f64 / self.checked as f64
    }
}

/// Rounding slack for comparisons of objective gaps near `f*`.
fn f_slack(f_star: f64) -> f64 {
    16.0 * f64::EPSILON * f_star.abs().max(1.0)
}

/// Per-iteration contraction factors and the linear-rate inequalities they
/// imply. `‖H_k⁻¹‖` is taken from the trace, so the run needs oracle checks.
pub fn nu_check(
    report: &SolveReport,
    constants: &RateConstants,
    f_star: f64,
    x_star: Option<(&[f64], &Space)>,
    k1: usize,
) -> Result<NuReport> {
    let mut nu = Vec::with_capacity(report.trace.len());
    for r in &report.trace {
        let hinv = r
            .hinv_norm
            .ok_or_else(|| Error::InvalidParameter(format!("iteration {} has no operator norms", r.k)))?;
        nu.push(constants.nu(r.alpha, hinv));
    }
    let f = report.f_values();
    let slack = f_slack(f_star);
    let mut violations = Vec::new();
    let mut checked = 0;
    for k in k1..report.trace.len() {
        checked += 1;
        if f[k + 1] - f_star > nu[k] * (f[k] - f_star) + slack {
            violations.push(k);
        }
    }
    let nu_sup = nu.iter().skip(k1).copied().fold(f64::NEG_INFINITY, f64::max);

    let kappa = constants.kappa();
    let g = report.grad_norms();
    let xe = match x_star {
        Some((xs, space)) => x_errors(report, xs, space),
        None => None,
    };
    let envelope_holds = |e: &[f64], factor: f64, l: usize| {
        (k1..e.len().saturating_sub(l)).all(|k| e[k + l] <= factor * e[k] * (1.0 + 1e-12) + 1e-300)
    };
    let envelopes = (1..=5)
        .map(|l| {
            let nl = nu_sup.powi(l as i32);
            Envelope {
                l,
                x_holds: xe.as_deref().map(|e| envelope_holds(e, (kappa * nl).sqrt(), l)),
                g_holds: envelope_holds(&g, kappa * nl.sqrt(), l),
            }
        })
        .collect();
    Ok(NuReport {
        nu,
        nu_sup,
        checked,
        violations,
        envelopes,
    })
}
