use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use lbfgsm::harness::{
    config_args, dump_grids, mesh_study, parse_config, random_start_csv, random_start_study, run_config, run_table,
    table_csv, write_trace_jsonl, BuiltProblem, ProblemSpec, ReferenceCache, RunConfig, RunSettings, TablePreset,
    DEFAULT_MESH_LEVELS, TABLE_HEADER,
};
use lbfgsm::{LineSearchKind, Status};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemArg {
    Rosenbrock,
    Pwquad,
    Ocp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LsArg {
    Armijo,
    Wolfe,
    Mt,
    Gll,
}

impl From<LsArg> for LineSearchKind {
    fn from(a: LsArg) -> Self {
        match a {
            LsArg::Armijo => LineSearchKind::Armijo,
            LsArg::Wolfe => LineSearchKind::Wolfe,
            LsArg::Mt => LineSearchKind::MoreThuente,
            LsArg::Gll => LineSearchKind::Gll,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lbfgsm", version, about = "Cautious limited-memory BFGS experiments", args_override_self = true)]
struct Cli {
    /// `key = value` file with defaults for any long flag
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "rosenbrock")]
    problem: ProblemArg,
    /// Number of 3-blocks for pwquad (dimension 3n)
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Mesh level(s) j, M = 2^j; a comma list for --table t5
    #[arg(long, value_delimiter = ',')]
    mesh_j: Vec<u32>,
    /// Memory size (stored secant pairs)
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Line search
    #[arg(long, value_enum, default_value = "armijo")]
    ls: LsArg,
    /// Nonmonotone memory for --ls gll [default: 10]
    #[arg(long)]
    gll_mem: Option<usize>,
    /// Gradient-norm tolerance [default: 1e-9, pwquad 1e-5]
    #[arg(long)]
    tol: Option<f64>,
    /// Threshold constants: omega = min(c0, c1 |grad|^c2) [defaults: 1e-4, 1, 1/(2m+3)]
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    /// Use every stored pair and the unrestricted seed scaling
    #[arg(long)]
    classic: bool,
    /// Sufficient-decrease constant [default: 1e-4; 1e-8 for ocp with mt]
    #[arg(long)]
    sigma: Option<f64>,
    /// Curvature constant [default: 0.9]
    #[arg(long)]
    eta: Option<f64>,
    /// Backtracking factor [default: 0.5]
    #[arg(long)]
    beta: Option<f64>,
    /// Iteration limit [default: 50000]
    #[arg(long)]
    max_iter: Option<usize>,
    /// Seed for the random-start study
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random starting points (pwquad); runs the random-start study
    #[arg(long)]
    runs: Option<usize>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSONL trace of a single run
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Table preset: t2 rosenbrock, t3 pwquad, t4 ocp j=6, t5 mesh study
    #[arg(long, value_parser = ["t2", "t3", "t4", "t5"])]
    table: Option<String>,
    /// Directory for y_d/y/u grid files of an ocp run
    #[arg(long)]
    dump_grids: Option<PathBuf>,
    /// Audit the dense operator norms every iteration (small problems only)
    #[arg(long)]
    oracle: bool,
}

impl Cli {
    fn settings(&self) -> RunSettings {
        RunSettings {
            tol: self.tol,
            c0: self.c0,
            c1: self.c1,
            c2: self.c2,
            sigma: self.sigma,
            eta: self.eta,
            beta: self.beta,
            gll_memory: self.gll_mem,
            max_iter: self.max_iter,
            classic: self.classic,
            oracle_checks: self.oracle,
        }
    }

    fn problem(&self) -> ProblemSpec {
        match self.problem {
            ProblemArg::Rosenbrock => ProblemSpec::Rosenbrock,
            ProblemArg::Pwquad => ProblemSpec::PwQuad { blocks: self.n },
            ProblemArg::Ocp => ProblemSpec::Ocp {
                j: self.mesh_j.first().copied().unwrap_or(4),
            },
        }
    }
}

fn parse_args() -> Result<Cli, String> {
    let argv: Vec<String> = std::env::args().collect();
    let first = Cli::try_parse_from(&argv).map_err(|e| e.to_string())?;
    let Some(path) = &first.config else {
        return Ok(first);
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let entries = parse_config(&text).map_err(|e| e.to_string())?;
    let mut merged = vec![argv[0].clone()];
    merged.extend(config_args(&entries));
    merged.extend(argv[1..].iter().cloned());
    Cli::try_parse_from(&merged).map_err(|e| e.to_string())
}

fn emit(csv: &str, path: &Option<PathBuf>) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, csv).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, String> {
    let settings = cli.settings();
    let mut cache = ReferenceCache::new();

    if let Some(name) = &cli.table {
        let preset: TablePreset = name.parse().map_err(|e: lbfgsm::Error| e.to_string())?;
        if preset == TablePreset::T5 {
            let js = if cli.mesh_j.is_empty() { DEFAULT_MESH_LEVELS.to_vec() } else { cli.mesh_j.clone() };
            let table = mesh_study(&preset.spec().configs, &js, &settings).map_err(|e| e.to_string())?;
            emit(&table.csv(), &cli.csv)?;
            return Ok(true);
        }
        let mut spec = preset.spec();
        spec.settings = settings;
        if let (TablePreset::T4, Some(&j)) = (preset, cli.mesh_j.first()) {
            spec.problem = ProblemSpec::Ocp { j };
        }
        let rows = run_table(&spec, &mut cache).map_err(|e| e.to_string())?;
        emit(&table_csv(&rows), &cli.csv)?;
        return Ok(rows.iter().all(|r| r.status == Status::Converged));
    }

    let spec = cli.problem();
    let config = RunConfig {
        m: cli.m,
        ls: cli.ls.into(),
    };

    if let Some(runs) = cli.runs {
        let rows = random_start_study(&spec, &[config], runs, cli.seed, &settings).map_err(|e| e.to_string())?;
        emit(&random_start_csv(&rows), &cli.csv)?;
        return Ok(rows.iter().all(|r| r.successes == r.runs));
    }

    let built = spec.build().map_err(|e| e.to_string())?;
    let reference = cache.get(&spec, &built).map_err(|e| e.to_string())?;
    let row = run_config(&built, &spec, config, &settings, &built.start(), Some(&reference))
        .map_err(|e| e.to_string())?;
    emit(&format!("{TABLE_HEADER}\n{}\n", row.csv()), &cli.csv)?;
    if let Some(path) = &cli.trace {
        let file = std::fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        write_trace_jsonl(&row.report, std::io::BufWriter::new(file)).map_err(|e| e.to_string())?;
    }
    if let (Some(dir), BuiltProblem::Ocp(ocp)) = (&cli.dump_grids, &built) {
        dump_grids(dir, ocp, &row.report.x_final).map_err(|e| e.to_string())?;
    }
    if let Some(msg) = &row.report.message {
        eprintln!("{}: {msg}", row.status);
    }
    Ok(row.status == Status::Converged)
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
