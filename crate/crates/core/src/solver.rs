//! The outer iteration.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::direction::{check_cautious_bounds, dense_h, two_loop};
use crate::linesearch::{search, LineFunction, LineSearchKind, LineSearchParams};
use crate::problems::Problem;
use crate::secant_store::{omega, CautiousParams, Storage};
use crate::space::{axpy, sub, Space};
use crate::{Error, Result};

/// Seed scaling used when no curvature information is available: at the
/// start and after a skipped update.
pub const RESTART_GAMMA: f64 = 1.0;

/// Largest dimension for which the dense operator audit runs.
pub const AUDIT_DIM_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Pairs filtered by `q ≥ ω`, seed scaling confined to `[ω, 1/ω]`.
    Cautious,
    /// Every stored pair, unrestricted seed scaling.
    Classical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: Mode,
    pub cautious: CautiousParams,
    pub linesearch: LineSearchKind,
    pub ls_params: LineSearchParams,
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Materialize `H` each iteration (when `dim ≤ AUDIT_DIM_LIMIT`) and
    /// record its norms together with the cautious bound check.
    pub oracle_checks: bool,
    pub record_iterates: bool,
}

impl SolverConfig {
    /// Default constants with memory `m`, Armijo backtracking and `tol = 1e-9`.
    pub fn defaults(m: usize) -> Self {
        SolverConfig {
            mode: Mode::Cautious,
            cautious: CautiousParams::defaults(m),
            linesearch: LineSearchKind::Armijo,
            ls_params: LineSearchParams::default(),
            grad_tol: 1e-9,
            max_iter: 50_000,
            oracle_checks: false,
            record_iterates: false,
        }
    }

    pub fn with_linesearch(mut self, kind: LineSearchKind) -> Self {
        self.linesearch = kind;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.grad_tol = tol;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_oracle_checks(mut self, on: bool) -> Self {
        self.oracle_checks = on;
        self
    }

    pub fn with_iterates(mut self, on: bool) -> Self {
        self.record_iterates = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.cautious.validate()?;
        self.ls_params.validate(self.linesearch)?;
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    LinesearchFailure,
    Nonfinite,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::LinesearchFailure => "linesearch_failure",
            Status::Nonfinite => "nonfinite",
        })
    }
}

/// One pass of the loop body, describing the step from `x_k` to `x_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `f(x_k)`
    pub f: f64,
    /// `‖∇f(x_k)‖`
    pub grad_norm: f64,
    pub omega: f64,
    pub gamma: f64,
    pub n_active: usize,
    /// Pairs in storage when the direction was formed.
    pub n_stored: usize,
    pub alpha: f64,
    pub pair_stored: bool,
    pub n_feval_ls: usize,
    pub n_geval_ls: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hinv_norm: Option<f64>,
    /// Outcome of `‖H⁻¹‖ ≤ (m+1)/ω` and `‖H‖ ≤ 5ᵐ max{1, ω^{−(2m+1)}}`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bounds_ok: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub iterations: usize,
    /// Objective evaluations made by the line searches.
    pub f_evals: usize,
    /// Gradient evaluations, including the one at `x₀`.
    pub g_evals: usize,
    pub pairs_stored: usize,
    pub full_steps: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl Counters {
    pub fn from_trace(trace: &[IterationRecord]) -> Self {
        let mut c = Counters {
            iterations: trace.len(),
            f_evals: 0,
            g_evals: 1,
            pairs_stored: 0,
            full_steps: 0,
            alpha_min: f64::NAN,
            alpha_max: f64::NAN,
        };
        for r in trace {
            c.f_evals += r.n_feval_ls;
            c.g_evals += r.n_geval_ls;
            c.pairs_stored += r.pair_stored as usize;
            c.full_steps += (r.alpha == 1.0) as usize;
            c.alpha_min = if c.alpha_min.is_nan() { r.alpha } else { c.alpha_min.min(r.alpha) };
            c.alpha_max = if c.alpha_max.is_nan() { r.alpha } else { c.alpha_max.max(r.alpha) };
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: Status,
    /// Set when the run stopped because of a line-search failure or a
    /// non-finite value.
    pub message: Option<String>,
    pub x_final: Vec<f64>,
    pub f_final: f64,
    pub grad_norm_final: f64,
    pub trace: Vec<IterationRecord>,
    /// `x₀, …, x_K` when requested.
    pub iterates: Option<Vec<Vec<f64>>>,
    pub counters: Counters,
}

impl SolveReport {
    /// `f(x₀), …, f(x_K)`.
    pub fn f_values(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.f).chain(std::iter::once(self.f_final)).collect()
    }

    /// `‖∇f(x₀)‖, …, ‖∇f(x_K)‖`.
    pub fn grad_norms(&self) -> Vec<f64> {
        self.trace
            .iter()
            .map(|r| r.grad_norm)
            .chain(std::iter::once(self.grad_norm_final))
            .collect()
    }
}

/// Result of [`Solver::step`].
#[derive(Debug, Clone, PartialEq)]
pub enum StepEvent {
    Iterated(IterationRecord),
    Stopped(Status),
}

/// Line restriction `α ↦ f(x + αd)` remembering the last evaluated gradient.
struct Line<'a, P: ?Sized> {
    problem: &'a P,
    space: Space,
    x: &'a [f64],
    d: &'a [f64],
    n_f: usize,
    n_g: usize,
    cached: Option<(f64, Vec<f64>, f64, Vec<f64>)>,
}

impl<P: Problem + ?Sized> Line<'_, P> {
    fn point(&self, alpha: f64) -> Vec<f64> {
        let mut p = self.x.to_vec();
        axpy(alpha, self.d, &mut p);
        p
    }

    /// `(x + αd, f, ∇f)` at an accepted step, reusing the last evaluation when possible.
    fn finish(mut self, alpha: f64, phi: f64) -> Result<(Vec<f64>, f64, Vec<f64>, usize, usize)> {
        if let Some((a, p, f, g)) = self.cached.take() {
            if a == alpha {
                return Ok((p, f, g, self.n_f, self.n_g));
            }
        }
        let p = self.point(alpha);
        let (_, g) = self.problem.value_grad(&p)?;
        self.n_g += 1;
        Ok((p, phi, g, self.n_f, self.n_g))
    }
}

impl<P: Problem + ?Sized> LineFunction for Line<'_, P> {
    fn value(&mut self, alpha: f64) -> Result<f64> {
        self.n_f += 1;
        self.problem.value(&self.point(alpha))
    }

    fn value_slope(&mut self, alpha: f64) -> Result<(f64, f64)> {
        self.n_f += 1;
        self.n_g += 1;
        let p = self.point(alpha);
        let (f, g) = self.problem.value_grad(&p)?;
        let slope = self.space.inner_unchecked(&g, self.d);
        self.cached = Some((alpha, p, f, g));
        Ok((f, slope))
    }
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Iteration state; [`minimize`] drives it to completion.
pub struct Solver<'a, P: ?Sized> {
    problem: &'a P,
    space: Space,
    config: SolverConfig,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    grad_norm: f64,
    storage: Storage,
    k: usize,
    history: VecDeque<f64>,
    trace: Vec<IterationRecord>,
    iterates: Option<Vec<Vec<f64>>>,
    message: Option<String>,
    done: Option<Status>,
}

impl<'a, P: Problem + ?Sized> Solver<'a, P> {
    pub fn new(problem: &'a P, x0: &[f64], config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let space = problem.space();
        space.check(x0)?;
        let (f, g) = problem.value_grad(x0)?;
        let grad_norm = space.norm_unchecked(&g);
        let mut solver = Solver {
            problem,
            space,
            config: config.clone(),
            x: x0.to_vec(),
            f,
            g,
            grad_norm,
            storage: Storage::new(config.cautious.m),
            k: 0,
            history: VecDeque::from([f]),
            trace: Vec::new(),
            iterates: config.record_iterates.then(|| vec![x0.to_vec()]),
            message: None,
            done: None,
        };
        if !(f.is_finite() && finite(&solver.g)) {
            solver.message = Some("f or gradient at x0 is not finite".into());
            solver.done = Some(Status::Nonfinite);
        }
        Ok(solver)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn trace(&self) -> &[IterationRecord] {
        &self.trace
    }

    fn stop(&mut self, status: Status, message: Option<String>) -> StepEvent {
        self.done = Some(status);
        self.message = message;
        StepEvent::Stopped(status)
    }

    /// Performs one iteration, or reports why none can be taken.
    pub fn step(&mut self) -> Result<StepEvent> {
        if let Some(status) = self.done {
            return Ok(StepEvent::Stopped(status));
        }
        if self.grad_norm <= self.config.grad_tol {
            return Ok(self.stop(Status::Converged, None));
        }
        if self.k >= self.config.max_iter {
            return Ok(self.stop(Status::MaxIter, None));
        }
        let space = self.space;
        let cp = self.config.cautious;
        let w = omega(self.grad_norm, &cp)?;
        let (pairs, gamma) = match self.config.mode {
            Mode::Cautious => (self.storage.active_pairs(w), self.storage.choose_gamma(w, RESTART_GAMMA)),
            Mode::Classical => (self.storage.all_pairs(), self.storage.choose_gamma_classical(RESTART_GAMMA)),
        };
        let n_active = pairs.len();
        let n_stored = self.storage.len();
        let d = two_loop(&space, &pairs, gamma, &self.g)?;

        let (mut h_norm, mut hinv_norm, mut bounds_ok) = (None, None, None);
        if self.config.oracle_checks && space.dim() <= AUDIT_DIM_LIMIT {
            let h = dense_h(&space, &pairs, gamma, space.dim())?;
            let (hn, hin) = h.norms();
            h_norm = Some(hn);
            hinv_norm = Some(hin);
            if self.config.mode == Mode::Cautious {
                bounds_ok = Some(check_cautious_bounds(hn, hin, w, cp.m).passed());
            }
        }
        drop(pairs);

        let dphi0 = space.inner_unchecked(&self.g, &d);
        let history: Vec<f64> = self.history.iter().copied().collect();
        let mut line = Line {
            problem: self.problem,
            space,
            x: &self.x,
            d: &d,
            n_f: 0,
            n_g: 0,
            cached: None,
        };
        let outcome = match search(self.config.linesearch, &mut line, self.f, dphi0, &history, &self.config.ls_params) {
            Ok(o) => o,
            Err(Error::LineSearch(e)) => return Ok(self.stop(Status::LinesearchFailure, Some(e.to_string()))),
            Err(e) => return Err(e),
        };
        let (x_new, f_new, g_new, n_f, n_g) = line.finish(outcome.alpha, outcome.phi)?;
        if !(f_new.is_finite() && finite(&g_new) && finite(&x_new)) {
            return Ok(self.stop(Status::Nonfinite, Some(format!("non-finite value at iteration {}", self.k))));
        }

        let s = sub(&x_new, &self.x);
        let y = sub(&g_new, &self.g);
        let pair_stored = self.storage.push_pair(&space, s, y, self.k)?;

        let record = IterationRecord {
            k: self.k,
            f: self.f,
            grad_norm: self.grad_norm,
            omega: w,
            gamma,
            n_active,
            n_stored,
            alpha: outcome.alpha,
            pair_stored,
            n_feval_ls: n_f,
            n_geval_ls: n_g,
            h_norm,
            hinv_norm,
            bounds_ok,
        };
        self.trace.push(record.clone());

        self.grad_norm = space.norm_unchecked(&g_new);
        self.x = x_new;
        self.f = f_new;
        self.g = g_new;
        self.k += 1;
        self.history.push_back(f_new);
        while self.history.len() > self.config.ls_params.gll_memory {
            self.history.pop_front();
        }
        if let Some(it) = self.iterates.as_mut() {
            it.push(self.x.clone());
        }
        Ok(StepEvent::Iterated(record))
    }

    pub fn into_report(self) -> SolveReport {
        let counters = Counters::from_trace(&self.trace);
        SolveReport {
            status: self.done.unwrap_or(Status::MaxIter),
            message: self.message,
            x_final: self.x,
            f_final: self.f,
            grad_norm_final: self.grad_norm,
            trace: self.trace,
            iterates: self.iterates,
            counters,
        }
    }
}

/// Runs the method from `x0` until convergence or failure.
pub fn minimize<P: Problem + ?Sized>(problem: &P, x0: &[f64], config: &SolverConfig) -> Result<SolveReport> {
    let mut solver = Solver::new(problem, x0, config)?;
    while let StepEvent::Iterated(_) = solver.step()? {}
    Ok(solver.into_report())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceComparison {
    Identical,
    /// First iteration whose `γ`, `α` or active-pair count differs (or the
    /// common length when only the run lengths or final iterates differ).
    DivergesAt(usize),
}

/// Exact comparison of the quantities that determine the iterates.
pub fn compare_traces(a: &SolveReport, b: &SolveReport) -> TraceComparison {
    let same = |u: f64, v: f64| u.to_bits() == v.to_bits();
    for (i, (ra, rb)) in a.trace.iter().zip(&b.trace).enumerate() {
        if !same(ra.gamma, rb.gamma) || !same(ra.alpha, rb.alpha) || ra.n_active != rb.n_active {
            return TraceComparison::DivergesAt(i);
        }
    }
    let common = a.trace.len().min(b.trace.len());
    let x_same = a.x_final.len() == b.x_final.len() && a.x_final.iter().zip(&b.x_final).all(|(u, v)| same(*u, *v));
    if a.trace.len() != b.trace.len() || !x_same {
        return TraceComparison::DivergesAt(common);
    }
    TraceComparison::Identical
}
