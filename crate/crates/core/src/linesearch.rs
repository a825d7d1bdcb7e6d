//! Step-size rules.
//!
//! Every search works on a one-dimensional restriction `φ(α) = f(x + αd)`
//! supplied through [`LineFunction`] and returns a [`LineSearchOutcome`] whose
//! [`Certificate`] names the conditions the accepted step satisfies. The
//! conditions are re-checked by direct evaluation before a step is returned.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{Error, Result};

/// One-dimensional restriction of the objective along a search direction.
pub trait LineFunction {
    fn value(&mut self, alpha: f64) -> Result<f64>;
    /// `(φ(α), φ'(α))`
    fn value_slope(&mut self, alpha: f64) -> Result<(f64, f64)>;
}

/// Adapts a closure returning `(φ(α), φ'(α))`.
pub struct ScalarLine<F>(pub F);

impl<F: FnMut(f64) -> (f64, f64)> LineFunction for ScalarLine<F> {
    fn value(&mut self, alpha: f64) -> Result<f64> {
        Ok((self.0)(alpha).0)
    }

    fn value_slope(&mut self, alpha: f64) -> Result<(f64, f64)> {
        Ok((self.0)(alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineSearchKind {
    /// Backtracking on the sufficient-decrease condition.
    Armijo,
    /// Weak Wolfe–Powell conditions by bracketing and bisection.
    Wolfe,
    /// Moré–Thuente search for the strong Wolfe–Powell conditions.
    MoreThuente,
    /// Nonmonotone Armijo backtracking against the recent maximum.
    Gll,
}

impl LineSearchKind {
    pub fn label(&self) -> &'static str {
        match self {
            LineSearchKind::Armijo => "armijo",
            LineSearchKind::Wolfe => "wolfe",
            LineSearchKind::MoreThuente => "mt",
            LineSearchKind::Gll => "gll",
        }
    }

    pub fn long_name(&self) -> &'static str {
        match self {
            LineSearchKind::Armijo => "Armijo",
            LineSearchKind::Wolfe => "Wolfe-Powell",
            LineSearchKind::MoreThuente => "More-Thuente",
            LineSearchKind::Gll => "GLL nonmonotone",
        }
    }

    /// Searches that enforce a curvature condition.
    pub fn enforces_curvature(&self) -> bool {
        matches!(self, LineSearchKind::Wolfe | LineSearchKind::MoreThuente)
    }
}

impl fmt::Display for LineSearchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LineSearchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "armijo" => Ok(LineSearchKind::Armijo),
            "wolfe" => Ok(LineSearchKind::Wolfe),
            "mt" | "more-thuente" | "morethuente" => Ok(LineSearchKind::MoreThuente),
            "gll" => Ok(LineSearchKind::Gll),
            other => Err(Error::InvalidParameter(format!("unknown line search '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchParams {
    /// Sufficient-decrease constant.
    pub sigma: f64,
    /// Curvature constant.
    pub eta: f64,
    /// Backtracking contraction window `[β₁α, β₂α]`.
    pub beta1: f64,
    pub beta2: f64,
    pub maxfev: usize,
    pub stpmin: f64,
    pub stpmax: f64,
    pub xtol: f64,
    pub gll_memory: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        LineSearchParams {
            sigma: 1e-4,
            eta: 0.9,
            beta1: 0.5,
            beta2: 0.5,
            maxfev: 20,
            stpmin: 0.0,
            stpmax: 1000.0,
            xtol: 1e-7,
            gll_memory: 10,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self, kind: LineSearchKind) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad(format!("sigma must lie in (0, 1), got {}", self.sigma));
        }
        if kind.enforces_curvature() && !(self.eta > self.sigma && self.eta < 1.0) {
            return bad(format!("eta must lie in (sigma, 1), got {}", self.eta));
        }
        if !(self.beta1 > 0.0 && self.beta1 <= self.beta2 && self.beta2 < 1.0) {
            return bad(format!(
                "need 0 < beta1 <= beta2 < 1, got [{}, {}]",
                self.beta1, self.beta2
            ));
        }
        if self.maxfev == 0 {
            return bad("maxfev must be positive".into());
        }
        if !(self.stpmin >= 0.0 && self.stpmin <= 1.0 && self.stpmax >= 1.0) {
            return bad(format!(
                "need 0 <= stpmin <= 1 <= stpmax, got [{}, {}]",
                self.stpmin, self.stpmax
            ));
        }
        if kind == LineSearchKind::Gll && self.gll_memory == 0 {
            return bad("gll memory must be at least 1".into());
        }
        Ok(())
    }
}

/// Conditions verified at the accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    /// `φ(α) ≤ reference + ασφ'(0)`; the reference is `φ(0)` for monotone
    /// backtracking and the recent maximum for the nonmonotone variant.
    Armijo { reference: f64 },
    /// Sufficient decrease and `φ'(α) ≥ ηφ'(0)`.
    WeakWolfe,
    /// Sufficient decrease and `|φ'(α)| ≤ η|φ'(0)|`.
    StrongWolfe,
}

impl Certificate {
    /// Exact re-check of the certified inequalities.
    pub fn verify(&self, phi0: f64, dphi0: f64, alpha: f64, phi: f64, slope: Option<f64>, params: &LineSearchParams) -> bool {
        let decrease = |reference: f64| phi <= reference + alpha * params.sigma * dphi0;
        match *self {
            Certificate::Armijo { reference } => decrease(reference),
            Certificate::WeakWolfe => {
                decrease(phi0) && slope.is_some_and(|s| s >= params.eta * dphi0)
            }
            Certificate::StrongWolfe => {
                decrease(phi0) && slope.is_some_and(|s| s.abs() <= params.eta * dphi0.abs())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    pub phi: f64,
    /// `φ'(α)` when the search evaluated it at the accepted step.
    pub slope: Option<f64>,
    pub n_feval: usize,
    pub n_geval: usize,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LineSearchError {
    #[error("direction is not a descent direction (φ'(0) = {0:e})")]
    NotDescent(f64),
    #[error("{evaluations} evaluations without an acceptable step (trials: {trials:?})")]
    MaxFev { evaluations: usize, trials: Vec<(f64, f64)> },
    #[error("step expansion exceeded stpmax = {0}")]
    StepTooLarge(f64),
    #[error("step reached stpmax = {0} without meeting the conditions")]
    AtStpMax(f64),
    #[error("step reached stpmin = {0} without meeting the conditions")]
    AtStpMin(f64),
    #[error("uncertainty interval fell below xtol at step {0:e}")]
    IntervalTooSmall(f64),
    #[error("rounding errors prevent further progress at step {0:e}")]
    Rounding(f64),
    #[error("gll history is empty")]
    EmptyHistory,
}

fn require_descent(dphi0: f64) -> Result<()> {
    if !(dphi0 < 0.0) {
        return Err(LineSearchError::NotDescent(dphi0).into());
    }
    Ok(())
}

fn checked(outcome: LineSearchOutcome, phi0: f64, dphi0: f64, params: &LineSearchParams) -> LineSearchOutcome {
    debug_assert!(outcome.certificate.verify(
        phi0,
        dphi0,
        outcome.alpha,
        outcome.phi,
        outcome.slope,
        params
    ));
    outcome
}

fn backtrack(f: &mut dyn LineFunction, reference: f64, phi0: f64, dphi0: f64, params: &LineSearchParams) -> Result<LineSearchOutcome> {
    require_descent(dphi0)?;
    let mut alpha = 1.0;
    let mut trials = Vec::new();
    for n in 1..=params.maxfev {
        let phi = f.value(alpha)?;
        trials.push((alpha, phi));
        if phi <= reference + alpha * params.sigma * dphi0 {
            return Ok(checked(
                LineSearchOutcome {
                    alpha,
                    phi,
                    slope: None,
                    n_feval: n,
                    n_geval: 0,
                    certificate: Certificate::Armijo { reference },
                },
                phi0,
                dphi0,
                params,
            ));
        }
        alpha = contract(alpha, phi, phi0, dphi0, params);
    }
    Err(LineSearchError::MaxFev {
        evaluations: params.maxfev,
        trials,
    }
    .into())
}

/// Next backtracking trial inside `[β₁α, β₂α]`: the fixed factor when the
/// window is a point, otherwise the minimizer of the quadratic through
/// `φ(0)`, `φ'(0)` and `φ(α)`, clamped into the window.
fn contract(alpha: f64, phi: f64, phi0: f64, dphi0: f64, params: &LineSearchParams) -> f64 {
    let (lo, hi) = (params.beta1 * alpha, params.beta2 * alpha);
    if params.beta1 == params.beta2 {
        return lo;
    }
    let curv = phi - phi0 - dphi0 * alpha;
    let trial = if curv > 0.0 && curv.is_finite() {
        -dphi0 * alpha * alpha / (2.0 * curv)
    } else {
        lo
    };
    trial.clamp(lo, hi)
}

/// Armijo backtracking starting from `α = 1`.
pub fn armijo_backtrack(f: &mut dyn LineFunction, phi0: f64, dphi0: f64, params: &LineSearchParams) -> Result<LineSearchOutcome> {
    backtrack(f, phi0, phi0, dphi0, params)
}

/// Nonmonotone backtracking: accepts `φ(α) ≤ max(history) + ασφ'(0)`.
pub fn gll_nonmonotone(f: &mut dyn LineFunction, phi0: f64, dphi0: f64, history: &[f64], params: &LineSearchParams) -> Result<LineSearchOutcome> {
    let reference = history
        .iter()
        .copied()
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or(LineSearchError::EmptyHistory)?;
    backtrack(f, reference, phi0, dphi0, params)
}

/// Weak Wolfe–Powell search: doubles `α` until the curvature condition holds
/// or sufficient decrease fails, then bisects the bracket.
pub fn wolfe_weak(f: &mut dyn LineFunction, phi0: f64, dphi0: f64, params: &LineSearchParams) -> Result<LineSearchOutcome> {
    require_descent(dphi0)?;
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut alpha = 1.0;
    let mut trials = Vec::new();
    for n in 1..=params.maxfev {
        let (phi, slope) = f.value_slope(alpha)?;
        trials.push((alpha, phi));
        if !(phi <= phi0 + alpha * params.sigma * dphi0) {
            hi = alpha;
        } else if !(slope >= params.eta * dphi0) {
            lo = alpha;
        } else {
            return Ok(checked(
                LineSearchOutcome {
                    alpha,
                    phi,
                    slope: Some(slope),
                    n_feval: n,
                    n_geval: n,
                    certificate: Certificate::WeakWolfe,
                },
                phi0,
                dphi0,
                params,
            ));
        }
        alpha = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * alpha };
        if alpha > params.stpmax {
            return Err(LineSearchError::StepTooLarge(params.stpmax).into());
        }
    }
    Err(LineSearchError::MaxFev {
        evaluations: params.maxfev,
        trials,
    }
    .into())
}

/// Safeguarded step of the Moré–Thuente search: updates the interval of
/// uncertainty `[stx, sty]` with the trial `stp` and returns the next trial.
#[derive(Debug, Clone, Copy)]
struct Endpoint {
    st: f64,
    f: f64,
    d: f64,
}

/// Returns `false` when the inputs are inconsistent (no update performed).
fn cstep(x: &mut Endpoint, y: &mut Endpoint, stp: &mut f64, fp: f64, dp: f64, brackt: &mut bool, stpmin: f64, stpmax: f64) -> bool {
    let (stx, fx, dx) = (x.st, x.f, x.d);
    let (sty, fy, dy) = (y.st, y.f, y.d);
    if (*brackt && (*stp <= stx.min(sty) || *stp >= stx.max(sty))) || dx * (*stp - stx) >= 0.0 || stpmax < stpmin {
        return false;
    }
    let sgnd = dp * (dx / dx.abs());
    let bound;
    let mut stpf;

    if fp > fx {
        // Higher function value: the minimum is bracketed.
        bound = true;
        let theta = 3.0 * (fx - fp) / (*stp - stx) + dx + dp;
        let s = theta.abs().max(dx.abs()).max(dp.abs());
        let mut gamma = s * ((theta / s).powi(2) - (dx / s) * (dp / s)).sqrt();
        if *stp < stx {
            gamma = -gamma;
        }
        let p = (gamma - dx) + theta;
        let q = ((gamma - dx) + gamma) + dp;
        let r = p / q;
        let stpc = stx + r * (*stp - stx);
        let stpq = stx + ((dx / ((fx - fp) / (*stp - stx) + dx)) / 2.0) * (*stp - stx);
        stpf = if (stpc - stx).abs() < (stpq - stx).abs() {
            stpc
        } else {
            stpc + (stpq - stpc) / 2.0
        };
        *brackt = true;
    } else if sgnd < 0.0 {
        // Derivatives of opposite sign: the minimum is bracketed.
        bound = false;
        let theta = 3.0 * (fx - fp) / (*stp - stx) + dx + dp;
        let s = theta.abs().max(dx.abs()).max(dp.abs());
        let mut gamma = s * ((theta / s).powi(2) - (dx / s) * (dp / s)).sqrt();
        if *stp > stx {
            gamma = -gamma;
        }
        let p = (gamma - dp) + theta;
        let q = ((gamma - dp) + gamma) + dx;
        let r = p / q;
        let stpc = *stp + r * (stx - *stp);
        let stpq = *stp + (dp / (dp - dx)) * (stx - *stp);
        stpf = if (stpc - *stp).abs() > (stpq - *stp).abs() { stpc } else { stpq };
        *brackt = true;
    } else if dp.abs() < dx.abs() {
        // Same sign, derivative magnitude decreases.
        bound = true;
        let theta = 3.0 * (fx - fp) / (*stp - stx) + dx + dp;
        let s = theta.abs().max(dx.abs()).max(dp.abs());
        let mut gamma = s * ((theta / s).powi(2) - (dx / s) * (dp / s)).max(0.0).sqrt();
        if *stp > stx {
            gamma = -gamma;
        }
        let p = (gamma - dp) + theta;
        let q = (gamma + (dx - dp)) + gamma;
        let r = p / q;
        let stpc = if r < 0.0 && gamma != 0.0 {
            *stp + r * (stx - *stp)
        } else if *stp > stx {
            stpmax
        } else {
            stpmin
        };
        let stpq = *stp + (dp / (dp - dx)) * (stx - *stp);
        stpf = if *brackt {
            if (*stp - stpc).abs() < (*stp - stpq).abs() { stpc } else { stpq }
        } else if (*stp - stpc).abs() > (*stp - stpq).abs() {
            stpc
        } else {
            stpq
        };
    } else {
        // Same sign, derivative magnitude does not decrease.
        bound = false;
        stpf = if *brackt {
            let theta = 3.0 * (fp - fy) / (sty - *stp) + dy + dp;
            let s = theta.abs().max(dy.abs()).max(dp.abs());
            let mut gamma = s * ((theta / s).powi(2) - (dy / s) * (dp / s)).sqrt();
            if *stp > sty {
                gamma = -gamma;
            }
            let p = (gamma - dp) + theta;
            let q = ((gamma - dp) + gamma) + dy;
            let r = p / q;
            *stp + r * (sty - *stp)
        } else if *stp > stx {
            stpmax
        } else {
            stpmin
        };
    }

    if fp > fx {
        *y = Endpoint { st: *stp, f: fp, d: dp };
    } else {
        if sgnd < 0.0 {
            *y = *x;
        }
        *x = Endpoint { st: *stp, f: fp, d: dp };
    }

    stpf = stpf.min(stpmax).max(stpmin);
    *stp = stpf;
    if *brackt && bound {
        let mid = x.st + 0.66 * (y.st - x.st);
        *stp = if y.st > x.st { mid.min(*stp) } else { mid.max(*stp) };
    }
    true
}

/// Moré–Thuente line search for the strong Wolfe–Powell conditions,
/// starting from `α = 1` with sufficient-decrease constant `σ` and curvature
/// constant `η`.
pub fn more_thuente(f: &mut dyn LineFunction, phi0: f64, dphi0: f64, params: &LineSearchParams) -> Result<LineSearchOutcome> {
    const XTRAPF: f64 = 4.0;
    require_descent(dphi0)?;
    let (ftol, gtol, xtol) = (params.sigma, params.eta, params.xtol);
    let (stpmin, stpmax, maxfev) = (params.stpmin, params.stpmax, params.maxfev);

    let mut stp = 1.0f64;
    let mut brackt = false;
    let mut stage1 = true;
    let mut consistent = true;
    let mut nfev = 0usize;
    let dgtest = ftol * dphi0;
    let mut width = stpmax - stpmin;
    let mut width1 = 2.0 * width;
    let mut x = Endpoint { st: 0.0, f: phi0, d: dphi0 };
    let mut y = x;
    let mut trials = Vec::new();

    loop {
        let (stmin, stmax) = if brackt {
            (x.st.min(y.st), x.st.max(y.st))
        } else {
            (x.st, stp + XTRAPF * (stp - x.st))
        };
        stp = stp.max(stpmin).min(stpmax);
        // Fall back to the best step so far when no further progress is possible.
        if (brackt && (stp <= stmin || stp >= stmax))
            || nfev + 1 >= maxfev
            || !consistent
            || (brackt && stmax - stmin <= xtol * stmax)
        {
            stp = x.st;
        }

        let (fv, dg) = f.value_slope(stp)?;
        nfev += 1;
        trials.push((stp, fv));
        let ftest1 = phi0 + stp * dgtest;

        if fv <= ftest1 && dg.abs() <= gtol * (-dphi0) {
            return Ok(checked(
                LineSearchOutcome {
                    alpha: stp,
                    phi: fv,
                    slope: Some(dg),
                    n_feval: nfev,
                    n_geval: nfev,
                    certificate: Certificate::StrongWolfe,
                },
                phi0,
                dphi0,
                params,
            ));
        }
        if brackt && stmax - stmin <= xtol * stmax {
            return Err(LineSearchError::IntervalTooSmall(stp).into());
        }
        if nfev >= maxfev {
            return Err(LineSearchError::MaxFev {
                evaluations: nfev,
                trials,
            }
            .into());
        }
        if stp == stpmin && (fv > ftest1 || dg >= dgtest) {
            return Err(LineSearchError::AtStpMin(stpmin).into());
        }
        if stp == stpmax && fv <= ftest1 && dg <= dgtest {
            return Err(LineSearchError::AtStpMax(stpmax).into());
        }
        if (brackt && (stp <= stmin || stp >= stmax)) || !consistent || !fv.is_finite() {
            return Err(LineSearchError::Rounding(stp).into());
        }

        if stage1 && fv <= ftest1 && dg >= ftol.min(gtol) * dphi0 {
            stage1 = false;
        }

        if stage1 && fv <= x.f && fv > ftest1 {
            // Work with the modified function ψ(α) = φ(α) − φ(0) − ασφ'(0).
            let mut xm = Endpoint { st: x.st, f: x.f - x.st * dgtest, d: x.d - dgtest };
            let mut ym = Endpoint { st: y.st, f: y.f - y.st * dgtest, d: y.d - dgtest };
            let fm = fv - stp * dgtest;
            let dgm = dg - dgtest;
            consistent = cstep(&mut xm, &mut ym, &mut stp, fm, dgm, &mut brackt, stmin, stmax);
            x = Endpoint { st: xm.st, f: xm.f + xm.st * dgtest, d: xm.d + dgtest };
            y = Endpoint { st: ym.st, f: ym.f + ym.st * dgtest, d: ym.d + dgtest };
        } else {
            consistent = cstep(&mut x, &mut y, &mut stp, fv, dg, &mut brackt, stmin, stmax);
        }

        if brackt {
            if (y.st - x.st).abs() >= 0.66 * width1 {
                stp = x.st + 0.5 * (y.st - x.st);
            }
            width1 = width;
            width = (y.st - x.st).abs();
        }
    }
}

/// Dispatches to the configured search. `history` is only consulted by the
/// nonmonotone rule.
pub fn search(kind: LineSearchKind, f: &mut dyn LineFunction, phi0: f64, dphi0: f64, history: &[f64], params: &LineSearchParams) -> Result<LineSearchOutcome> {
    match kind {
        LineSearchKind::Armijo => armijo_backtrack(f, phi0, dphi0, params),
        LineSearchKind::Wolfe => wolfe_weak(f, phi0, dphi0, params),
        LineSearchKind::MoreThuente => more_thuente(f, phi0, dphi0, params),
        LineSearchKind::Gll => gll_nonmonotone(f, phi0, dphi0, history, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(phi: impl Fn(f64) -> f64 + 'static, dphi: impl Fn(f64) -> f64 + 'static) -> ScalarLine<impl FnMut(f64) -> (f64, f64)> {
        ScalarLine(move |a| (phi(a), dphi(a)))
    }

    #[test]
    fn armijo_full_step() {
        let p = LineSearchParams::default();
        let mut f = line(|a| (1.0 - a).powi(2), |a| -2.0 * (1.0 - a));
        let out = armijo_backtrack(&mut f, 1.0, -2.0, &p).unwrap();
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.n_feval, 1);
    }

    #[test]
    fn armijo_ladder() {
        // φ(α) = 1 − α + 10α²: the trial ladder 1, 1/2, 1/4, 1/8 fails the
        // decrease test (φ = 10, 3, 1.375, 1.03125 against ≈1) and 1/16 passes
        // (0.9765625 ≤ 1 − 6.25e-6).
        let p = LineSearchParams::default();
        let mut f = line(|a| 1.0 - a + 10.0 * a * a, |a| -1.0 + 20.0 * a);
        let out = armijo_backtrack(&mut f, 1.0, -1.0, &p).unwrap();
        assert_eq!(out.alpha, 0.0625);
        assert_eq!(out.n_feval, 5);
    }

    #[test]
    fn rejects_ascent_direction() {
        let p = LineSearchParams::default();
        let mut f = line(|a| a, |_| 1.0);
        for kind in [LineSearchKind::Armijo, LineSearchKind::Wolfe, LineSearchKind::MoreThuente, LineSearchKind::Gll] {
            let err = search(kind, &mut f, 0.0, 1.0, &[0.0], &p).unwrap_err();
            assert!(matches!(err, Error::LineSearch(LineSearchError::NotDescent(_))));
            let err = search(kind, &mut f, 0.0, 0.0, &[0.0], &p).unwrap_err();
            assert!(matches!(err, Error::LineSearch(LineSearchError::NotDescent(_))));
        }
    }

    #[test]
    fn armijo_exhausts_maxfev() {
        let p = LineSearchParams { maxfev: 5, ..Default::default() };
        let mut f = line(|a| 1.0 + a, |_| 1.0);
        let err = armijo_backtrack(&mut f, 1.0, -1.0, &p).unwrap_err();
        match err {
            Error::LineSearch(LineSearchError::MaxFev { evaluations, trials }) => {
                assert_eq!(evaluations, 5);
                assert_eq!(trials.len(), 5);
                assert_eq!(trials[4].0, 0.0625);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn interpolating_contraction_stays_in_window() {
        let p = LineSearchParams { beta1: 0.1, beta2: 0.5, ..Default::default() };
        let mut f = line(|a| 1.0 - a + 10.0 * a * a, |a| -1.0 + 20.0 * a);
        let mut seen = Vec::new();
        let mut rec = ScalarLine(|a: f64| {
            seen.push(a);
            f.value_slope(a).unwrap()
        });
        let out = armijo_backtrack(&mut rec, 1.0, -1.0, &p).unwrap();
        for w in seen.windows(2) {
            let ratio = w[1] / w[0];
            assert!((0.1..=0.5).contains(&ratio), "{ratio}");
        }
        assert!(out.phi <= 1.0 - 1e-4 * out.alpha);
    }

    #[test]
    fn gll_accepts_nonmonotone_step() {
        let p = LineSearchParams::default();
        let mut f = line(|_| 4.0, |_| 0.0);
        let out = gll_nonmonotone(&mut f, 1.0, -1.0, &[1.0, 5.0], &p).unwrap();
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.certificate, Certificate::Armijo { reference: 5.0 });

        let mut f = line(|a| 1.0 - a + 10.0 * a * a, |a| -1.0 + 20.0 * a);
        let out = gll_nonmonotone(&mut f, 1.0, -1.0, &[1.0], &p).unwrap();
        assert_eq!(out.alpha, 0.0625);
        assert!(gll_nonmonotone(&mut f, 1.0, -1.0, &[], &p).is_err());
    }

    #[test]
    fn weak_wolfe_cases() {
        let p = LineSearchParams::default();
        let mut f = line(|a| (1.0 - a).powi(2), |a| -2.0 * (1.0 - a));
        let out = wolfe_weak(&mut f, 1.0, -2.0, &p).unwrap();
        assert_eq!(out.alpha, 1.0);

        let mut f = line(|a| -a, |_| -1.0);
        let err = wolfe_weak(&mut f, 0.0, -1.0, &p).unwrap_err();
        assert!(matches!(err, Error::LineSearch(LineSearchError::StepTooLarge(_))));

        let mut f = line(|a| a.powi(4) / 4.0 - a, |a| a.powi(3) - 1.0);
        let out = wolfe_weak(&mut f, 0.0, -1.0, &p).unwrap();
        let phi = out.alpha.powi(4) / 4.0 - out.alpha;
        let dphi = out.alpha.powi(3) - 1.0;
        assert!(phi <= -1e-4 * out.alpha);
        assert!(dphi >= -0.9);
    }

    #[test]
    fn more_thuente_exact_minimizer() {
        let p = LineSearchParams::default();
        let mut f = line(|a| 0.5 * (a - 1.0).powi(2), |a| a - 1.0);
        let out = more_thuente(&mut f, 0.5, -1.0, &p).unwrap();
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.slope, Some(0.0));
        assert!(out.certificate.verify(0.5, -1.0, out.alpha, out.phi, out.slope, &p));
    }

    #[test]
    fn more_thuente_extrapolates_by_four() {
        // Weak curvature: |φ'| > η|φ'(0)| until α = 341, so the trials grow
        // as 1, 5, 21, 85, 341.
        let p = LineSearchParams::default();
        let mut seen = Vec::new();
        let mut f = ScalarLine(|a: f64| {
            seen.push(a);
            (-a + a * a / 2000.0, -1.0 + a / 1000.0)
        });
        let phi0 = 0.0;
        let out = more_thuente(&mut f, phi0, -1.0, &p).unwrap();
        assert_eq!(&seen[..5], &[1.0, 5.0, 21.0, 85.0, 341.0]);
        assert!(out.certificate.verify(phi0, -1.0, out.alpha, out.phi, out.slope, &p));
    }

    #[test]
    fn more_thuente_respects_stpmax() {
        let p = LineSearchParams::default();
        let mut f = line(|a| -a, |_| -1.0);
        let err = more_thuente(&mut f, 0.0, -1.0, &p).unwrap_err();
        assert!(matches!(err, Error::LineSearch(LineSearchError::AtStpMax(s)) if s == 1000.0));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("mt".parse::<LineSearchKind>().unwrap(), LineSearchKind::MoreThuente);
        assert_eq!("Armijo".parse::<LineSearchKind>().unwrap(), LineSearchKind::Armijo);
        assert!("hz".parse::<LineSearchKind>().is_err());
    }

    #[test]
    fn parameter_validation() {
        let p = LineSearchParams::default();
        assert!(p.validate(LineSearchKind::MoreThuente).is_ok());
        let bad = LineSearchParams { eta: 1e-5, ..p };
        assert!(bad.validate(LineSearchKind::Wolfe).is_err());
        assert!(bad.validate(LineSearchKind::Armijo).is_ok());
        assert!(LineSearchParams { beta1: 0.6, beta2: 0.5, ..p }.validate(LineSearchKind::Armijo).is_err());
        assert!(LineSearchParams { gll_memory: 0, ..p }.validate(LineSearchKind::Gll).is_err());
    }
}
