//! Experiment drivers behind the `lbfgsm` binary: single runs, the table
//! suites, the mesh study and the random-start study, plus their CSV/JSONL
//! writers. Everything runs sequentially so output is reproducible.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{q_factors, QFactor, RateReport};
use crate::linesearch::LineSearchKind;
use crate::problems::{Ocp, Problem, PwQuad, Rosenbrock};
use crate::solver::{minimize, Counters, Mode, SolveReport, SolverConfig, Status};
use crate::{Error, Result};

/// Tolerance of the reference runs standing in for an unknown minimizer.
pub const REFERENCE_TOL: f64 = 1e-12;
/// Armijo constant used with Moré–Thuente on the control problem; `1e-4`
/// occasionally makes that search fail there.
pub const OCP_MT_SIGMA: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemSpec {
    Rosenbrock,
    /// `3·blocks` variables.
    PwQuad { blocks: usize },
    /// Grid `M = 2ʲ`.
    Ocp { j: u32 },
}

impl ProblemSpec {
    pub fn build(&self) -> Result<BuiltProblem> {
        Ok(match *self {
            ProblemSpec::Rosenbrock => BuiltProblem::Rosenbrock(Rosenbrock),
            ProblemSpec::PwQuad { blocks } => BuiltProblem::PwQuad(PwQuad::new(blocks)?),
            ProblemSpec::Ocp { j } => BuiltProblem::Ocp(Ocp::standard(j)?),
        })
    }

    pub fn default_tol(&self) -> f64 {
        match self {
            ProblemSpec::PwQuad { .. } => 1e-5,
            _ => 1e-9,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Rosenbrock => "rosenbrock",
            ProblemSpec::PwQuad { .. } => "pwquad",
            ProblemSpec::Ocp { .. } => "ocp",
        }
    }
}

#[derive(Debug, Clone)]
pub enum BuiltProblem {
    Rosenbrock(Rosenbrock),
    PwQuad(PwQuad),
    Ocp(Ocp),
}

impl BuiltProblem {
    pub fn as_dyn(&self) -> &dyn Problem {
        match self {
            BuiltProblem::Rosenbrock(p) => p,
            BuiltProblem::PwQuad(p) => p,
            BuiltProblem::Ocp(p) => p,
        }
    }

    /// `(−1.2, 1)`, `b`, and `u = 0` respectively.
    pub fn start(&self) -> Vec<f64> {
        match self {
            BuiltProblem::Rosenbrock(_) => Rosenbrock::START.to_vec(),
            BuiltProblem::PwQuad(p) => p.b().to_vec(),
            BuiltProblem::Ocp(p) => vec![0.0; p.grid.dim()],
        }
    }
}

/// Minimizer and optimal value used for rate statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub x_star: Vec<f64>,
    pub f_star: f64,
}

/// Reference solutions, computed once per problem instance.
#[derive(Debug, Default)]
pub struct ReferenceCache {
    ocp: BTreeMap<u32, Reference>,
}

impl ReferenceCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, spec: &ProblemSpec, built: &BuiltProblem) -> Result<Reference> {
        match (spec, built) {
            (_, BuiltProblem::Rosenbrock(_)) => Ok(Reference {
                x_star: Rosenbrock::MINIMIZER.to_vec(),
                f_star: 0.0,
            }),
            (_, BuiltProblem::PwQuad(p)) => {
                let x_star = p.minimizer();
                let f_star = p.value(&x_star)?;
                Ok(Reference { x_star, f_star })
            }
            (ProblemSpec::Ocp { j }, BuiltProblem::Ocp(p)) => {
                if let Some(r) = self.ocp.get(j) {
                    return Ok(r.clone());
                }
                let r = ocp_reference(p)?;
                self.ocp.insert(*j, r.clone());
                Ok(r)
            }
            _ => Err(Error::InvalidParameter("problem spec does not match instance".into())),
        }
    }
}

/// Tight run from `u = 0`. At fine meshes the gradient can stall slightly
/// above the tolerance because of the inner Newton accuracy; the last
/// iterate is used as long as it got within a factor 100 of it.
fn ocp_reference(p: &Ocp) -> Result<Reference> {
    let config = SolverConfig::defaults(10).with_tol(REFERENCE_TOL);
    let report = minimize(p, &vec![0.0; p.grid.dim()], &config)?;
    if report.status != Status::Converged && report.grad_norm_final > 100.0 * REFERENCE_TOL {
        return Err(Error::InvalidParameter(format!(
            "reference run ended with {} at ‖∇f‖ = {:e}",
            report.status, report.grad_norm_final
        )));
    }
    Ok(Reference {
        f_star: report.f_final,
        x_star: report.x_final,
    })
}

/// Overrides applied on top of the default constants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSettings {
    pub tol: Option<f64>,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub sigma: Option<f64>,
    pub eta: Option<f64>,
    pub beta: Option<f64>,
    pub gll_memory: Option<usize>,
    pub max_iter: Option<usize>,
    pub classic: bool,
    pub oracle_checks: bool,
}

impl RunSettings {
    pub fn solver_config(&self, spec: &ProblemSpec, m: usize, kind: LineSearchKind) -> SolverConfig {
        let mut c = SolverConfig::defaults(m)
            .with_linesearch(kind)
            .with_tol(self.tol.unwrap_or(spec.default_tol()))
            .with_mode(if self.classic { Mode::Classical } else { Mode::Cautious })
            .with_oracle_checks(self.oracle_checks);
        if let Some(v) = self.c0 {
            c.cautious.c0 = v;
        }
        if let Some(v) = self.c1 {
            c.cautious.c1 = v;
        }
        if let Some(v) = self.c2 {
            c.cautious.c2 = v;
        }
        if matches!(spec, ProblemSpec::Ocp { .. }) && kind == LineSearchKind::MoreThuente {
            c.ls_params.sigma = OCP_MT_SIGMA;
        }
        if let Some(v) = self.sigma {
            c.ls_params.sigma = v;
        }
        if let Some(v) = self.eta {
            c.ls_params.eta = v;
        }
        if let Some(v) = self.beta {
            c.ls_params.beta1 = v;
            c.ls_params.beta2 = v;
        }
        if let Some(v) = self.gll_memory {
            c.ls_params.gll_memory = v;
        }
        if let Some(v) = self.max_iter {
            c.max_iter = v;
        }
        c
    }
}

/// One solver configuration of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub m: usize,
    pub ls: LineSearchKind,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub configs: Vec<RunConfig>,
    pub settings: RunSettings,
}

fn grid_configs(ms: &[usize], kinds: &[LineSearchKind]) -> Vec<RunConfig> {
    ms.iter()
        .flat_map(|&m| kinds.iter().map(move |&ls| RunConfig { m, ls }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TablePreset {
    T2,
    T3,
    T4,
    T5,
}

impl std::str::FromStr for TablePreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t2" => Ok(TablePreset::T2),
            "t3" => Ok(TablePreset::T3),
            "t4" => Ok(TablePreset::T4),
            "t5" => Ok(TablePreset::T5),
            _ => Err(Error::InvalidParameter(format!("unknown table {s:?} (expected t2, t3, t4 or t5)"))),
        }
    }
}

impl TablePreset {
    /// Rosenbrock with `m = 0..4`; the piecewise quadratic with `N = 100`;
    /// the control problem on `j = 6`; the mesh study configurations.
    pub fn spec(&self) -> ExperimentSpec {
        use LineSearchKind::*;
        let (problem, configs) = match self {
            TablePreset::T2 => (ProblemSpec::Rosenbrock, grid_configs(&[0, 1, 2, 3, 4], &[Armijo, MoreThuente])),
            TablePreset::T3 => (ProblemSpec::PwQuad { blocks: 100 }, grid_configs(&[0, 5, 10], &[Armijo, Wolfe])),
            TablePreset::T4 => (ProblemSpec::Ocp { j: 6 }, grid_configs(&[0, 5, 10], &[Armijo, MoreThuente])),
            TablePreset::T5 => (ProblemSpec::Ocp { j: 4 }, grid_configs(&[0, 5, 10], &[Armijo, MoreThuente])),
        };
        ExperimentSpec {
            problem,
            configs,
            settings: RunSettings::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub config: RunConfig,
    pub status: Status,
    pub counters: Counters,
    pub rates: Option<RateReport>,
    pub report: SolveReport,
}

pub const TABLE_HEADER: &str = "ls,m,status,#it,#f,#P,alpha=1,alpha_max,alpha_min,Qf/Qf3,Qx/Qx3,Qg/Qg3";

/// Decimal point, no grouping, scientific notation below `1e-3`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn fmt_q(q: &QFactor) -> String {
    format!("{}/{}", fmt_num(q.all), fmt_num(q.last3))
}

impl TableRow {
    pub fn csv(&self) -> String {
        let c = &self.counters;
        let (qf, qx, qg) = match &self.rates {
            Some(r) => (fmt_q(&r.qf), fmt_q(&r.qx), fmt_q(&r.qg)),
            None => ("".into(), "".into(), "".into()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.config.ls.label(),
            self.config.m,
            self.status,
            c.iterations,
            c.f_evals,
            c.pairs_stored,
            c.full_steps,
            fmt_num(c.alpha_max),
            fmt_num(c.alpha_min),
            qf,
            qx,
            qg
        )
    }
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

/// Runs one configuration and attaches rate statistics against `reference`.
pub fn run_config(
    built: &BuiltProblem,
    spec: &ProblemSpec,
    config: RunConfig,
    settings: &RunSettings,
    x0: &[f64],
    reference: Option<&Reference>,
) -> Result<TableRow> {
    let sc = settings.solver_config(spec, config.m, config.ls).with_iterates(reference.is_some());
    let problem = built.as_dyn();
    let report = minimize(problem, x0, &sc)?;
    let rates = match reference {
        Some(r) => Some(q_factors(&report, r.f_star, &r.x_star, &problem.space())?),
        None => None,
    };
    Ok(TableRow {
        config,
        status: report.status,
        counters: report.counters,
        rates,
        report,
    })
}

pub fn run_table(spec: &ExperimentSpec, cache: &mut ReferenceCache) -> Result<Vec<TableRow>> {
    if spec.configs.is_empty() {
        return Ok(Vec::new());
    }
    let built = spec.problem.build()?;
    let reference = cache.get(&spec.problem, &built)?;
    let x0 = built.start();
    spec.configs
        .iter()
        .map(|&c| run_config(&built, &spec.problem, c, &spec.settings, &x0, Some(&reference)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct MeshCell {
    pub status: Status,
    pub counters: Counters,
}

#[derive(Debug, Clone)]
pub struct MeshRow {
    pub config: RunConfig,
    pub cells: Vec<Option<MeshCell>>,
}

#[derive(Debug, Clone)]
pub struct MeshTable {
    pub js: Vec<u32>,
    pub rows: Vec<MeshRow>,
}

impl MeshTable {
    pub fn csv(&self) -> String {
        let mut out = String::from("ls,m");
        for j in &self.js {
            let _ = write!(out, ",j={j}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{}", row.config.ls.label(), row.config.m);
            for cell in &row.cells {
                match cell {
                    Some(c) if c.status == Status::Converged => {
                        let _ = write!(out, ",{}", c.counters.iterations);
                    }
                    Some(c) => {
                        let _ = write!(out, ",{}", c.status);
                    }
                    None => out.push_str(",error"),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub const DEFAULT_MESH_LEVELS: [u32; 4] = [4, 5, 6, 7];

/// Iteration counts of every configuration on every mesh `M = 2ʲ`.
pub fn mesh_study(configs: &[RunConfig], js: &[u32], settings: &RunSettings) -> Result<MeshTable> {
    for &j in js {
        if !(4..=11).contains(&j) {
            return Err(Error::InvalidParameter(format!("mesh level {j} outside 4..=11")));
        }
    }
    let mut rows: Vec<MeshRow> = configs
        .iter()
        .map(|&config| MeshRow {
            config,
            cells: Vec::new(),
        })
        .collect();
    for &j in js {
        let spec = ProblemSpec::Ocp { j };
        let built = spec.build()?;
        let x0 = built.start();
        for row in rows.iter_mut() {
            let cell = run_config(&built, &spec, row.config, settings, &x0, None)
                .ok()
                .map(|r| MeshCell {
                    status: r.status,
                    counters: r.counters,
                });
            row.cells.push(cell);
        }
    }
    Ok(MeshTable { js: js.to_vec(), rows })
}

/// Standard normal samples from a seeded ChaCha stream via Box–Muller.
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `(0, 1]`.
    fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = (-2.0 * self.uniform().ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * self.uniform();
        self.spare = Some(r * t.sin());
        r * t.cos()
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomStartRow {
    pub config: RunConfig,
    pub runs: usize,
    pub successes: usize,
    pub mean_iterations: f64,
}

impl RandomStartRow {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.runs as f64
    }
}

pub const RANDOM_START_HEADER: &str = "ls,m,runs,successes,success_rate,mean_it";

pub fn random_start_csv(rows: &[RandomStartRow]) -> String {
    let mut out = String::from(RANDOM_START_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.1}",
            r.config.ls.label(),
            r.config.m,
            r.runs,
            r.successes,
            fmt_num(r.success_rate()),
            r.mean_iterations
        );
    }
    out
}

/// Runs every configuration from the same `n_runs` standard-normal starting
/// points. A run counts as a success when it reaches the gradient tolerance.
pub fn random_start_study(
    spec: &ProblemSpec,
    configs: &[RunConfig],
    n_runs: usize,
    seed: u64,
    settings: &RunSettings,
) -> Result<Vec<RandomStartRow>> {
    if n_runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    let built = spec.build()?;
    let dim = built.as_dyn().space().dim();
    let mut normals = NormalStream::new(seed);
    let starts: Vec<Vec<f64>> = (0..n_runs).map(|_| normals.vector(dim)).collect();
    configs
        .iter()
        .map(|&config| {
            let sc = settings.solver_config(spec, config.m, config.ls);
            let mut successes = 0;
            let mut total = 0usize;
            for x0 in &starts {
                if let Ok(r) = minimize(built.as_dyn(), x0, &sc) {
                    if r.status == Status::Converged {
                        successes += 1;
                        total += r.counters.iterations;
                    }
                }
            }
            Ok(RandomStartRow {
                config,
                runs: n_runs,
                successes,
                mean_iterations: if successes > 0 { total as f64 / successes as f64 } else { f64::NAN },
            })
        })
        .collect()
}

/// One JSON object per iteration.
pub fn write_trace_jsonl(report: &SolveReport, mut w: impl Write) -> Result<()> {
    for r in &report.trace {
        let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// `x1,x2,value` for every interior node.
pub fn grid_csv(ocp: &Ocp, values: &[f64]) -> String {
    let mut out = String::from("x1,x2,value\n");
    for (k, v) in values.iter().enumerate() {
        let (x1, x2) = ocp.grid.node(k);
        let _ = writeln!(out, "{x1},{x2},{v:e}");
    }
    out
}

/// Writes `y_d.csv`, `y.csv` and `u.csv` for the control `u` into `dir`.
pub fn dump_grids(dir: &Path, ocp: &Ocp, u: &[f64]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let y = ocp.grid.state_solve(u)?;
    std::fs::write(dir.join("y_d.csv"), grid_csv(ocp, &ocp.grid.y_d))?;
    std::fs::write(dir.join("y.csv"), grid_csv(ocp, &y))?;
    std::fs::write(dir.join("u.csv"), grid_csv(ocp, u))?;
    Ok(())
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("config line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::InvalidParameter(format!("config line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Turns config entries into long flags, placed before the command line so
/// that explicit flags win. `true`/`false` values toggle switches.
pub fn config_args(entries: &[(String, String)]) -> Vec<String> {
    let mut args = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => args.push(format!("--{k}")),
            "false" => {}
            _ => {
                args.push(format!("--{k}"));
                args.push(v.clone());
            }
        }
    }
    args
}
