//! Browser demo: Rosenbrock paths, optimal-control fields and random starts
//! on the piecewise quadratic.
//!
//! The work is done by plain functions returning serializable results; the
//! `wasm_bindgen` exports wrap them and hand JSON strings to the page.

use lbfgsm::harness::{random_start_study, ProblemSpec, RunConfig, RunSettings};
use lbfgsm::problems::{Ocp, Rosenbrock};
use lbfgsm::{minimize, LineSearchKind, Problem, SolverConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Finest mesh offered in the browser.
pub const MAX_DEMO_LEVEL: u32 = 7;
pub const MAX_DEMO_RUNS: usize = 2000;
pub const MAX_DEMO_BLOCKS: usize = 1000;

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub status: String,
    pub iterations: usize,
    pub f_evals: usize,
    pub pairs_stored: usize,
    pub f_final: f64,
    pub grad_norm_final: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Path {
    pub summary: RunSummary,
    pub points: Vec<[f64; 2]>,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fields {
    pub summary: RunSummary,
    /// Interior nodes per direction; each field is row-major `n × n`.
    pub n: usize,
    pub y_d: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RandomStarts {
    pub runs: usize,
    pub successes: usize,
    pub mean_iterations: f64,
}

fn summary(r: &lbfgsm::SolveReport) -> RunSummary {
    RunSummary {
        status: r.status.to_string(),
        iterations: r.counters.iterations,
        f_evals: r.counters.f_evals,
        pairs_stored: r.counters.pairs_stored,
        f_final: r.f_final,
        grad_norm_final: r.grad_norm_final,
    }
}

fn parse_ls(ls: &str) -> lbfgsm::Result<LineSearchKind> {
    ls.parse()
}

/// Iterates of one run from `(x1, x2)`.
pub fn rosenbrock_path(m: usize, ls: &str, x1: f64, x2: f64) -> lbfgsm::Result<Path> {
    let cfg = SolverConfig::defaults(m).with_linesearch(parse_ls(ls)?).with_iterates(true);
    let r = minimize(&Rosenbrock, &[x1, x2], &cfg)?;
    let points = r.iterates.as_deref().unwrap_or_default().iter().map(|x| [x[0], x[1]]).collect();
    Ok(Path {
        summary: summary(&r),
        points,
        alphas: r.trace.iter().map(|t| t.alpha).collect(),
    })
}

/// Target, state and control of the optimal-control problem on `M = 2ʲ`.
pub fn ocp_fields(j: u32, m: usize, ls: &str) -> lbfgsm::Result<Fields> {
    if !(2..=MAX_DEMO_LEVEL).contains(&j) {
        return Err(lbfgsm::Error::InvalidParameter(format!(
            "mesh level must be in 2..={MAX_DEMO_LEVEL}, got {j}"
        )));
    }
    let spec = ProblemSpec::Ocp { j };
    let kind = parse_ls(ls)?;
    let cfg = RunSettings::default().solver_config(&spec, m, kind);
    let ocp = Ocp::standard(j)?;
    let u0 = vec![0.0; ocp.space().dim()];
    let r = minimize(&ocp, &u0, &cfg)?;
    let y = ocp.grid.state_solve(&r.x_final)?;
    Ok(Fields {
        summary: summary(&r),
        n: ocp.grid.m - 1,
        y_d: ocp.grid.y_d.clone(),
        y,
        u: r.x_final,
    })
}

/// Success rate and mean iteration count from standard-normal starts.
pub fn pwquad_random_starts(blocks: usize, m: usize, ls: &str, runs: usize, seed: u64) -> lbfgsm::Result<RandomStarts> {
    if blocks > MAX_DEMO_BLOCKS || runs > MAX_DEMO_RUNS {
        return Err(lbfgsm::Error::InvalidParameter(format!(
            "demo limits: at most {MAX_DEMO_BLOCKS} blocks and {MAX_DEMO_RUNS} runs"
        )));
    }
    let config = RunConfig { m, ls: parse_ls(ls)? };
    let spec = ProblemSpec::PwQuad { blocks };
    let rows = random_start_study(&spec, &[config], runs, seed, &RunSettings::default())?;
    let row = &rows[0];
    Ok(RandomStarts {
        runs: row.runs,
        successes: row.successes,
        mean_iterations: row.mean_iterations,
    })
}

fn to_json<T: Serialize>(r: lbfgsm::Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

#[wasm_bindgen(js_name = rosenbrockPath)]
pub fn rosenbrock_path_json(m: usize, ls: &str, x1: f64, x2: f64) -> String {
    to_json(rosenbrock_path(m, ls, x1, x2))
}

#[wasm_bindgen(js_name = ocpFields)]
pub fn ocp_fields_json(j: u32, m: usize, ls: &str) -> String {
    to_json(ocp_fields(j, m, ls))
}

#[wasm_bindgen(js_name = pwquadRandomStarts)]
pub fn pwquad_random_starts_json(blocks: usize, m: usize, ls: &str, runs: usize, seed: u32) -> String {
    to_json(pwquad_random_starts(blocks, m, ls, runs, u64::from(seed)))
}
