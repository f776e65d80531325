//! `hprlp` command-line frontend: solve, bench and plotdata.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;

use hprlp::adaptive::RestartConfig;
use hprlp::bench::{plot_data, read_trace_csv, write_plot_csv, write_trace_csv, BenchReport, BenchRow};
use hprlp::mps::{load_mps, MpsError, MpsProblem};
use hprlp::solver::Scaling;
use hprlp::{solve, Mode, SolveResult, SolverConfig, Status};

const EXIT_LIMIT: u8 = 2;
const EXIT_ERROR: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_PARSE: u8 = 65;

#[derive(Parser, Debug)]
#[command(name = "hprlp", version, about = "Halpern Peaceman-Rachford LP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one MPS file (`.mps` or `.mps.gz`).
    Solve {
        path: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
        /// Write the convergence trace as CSV.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// Print the full result as JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Solve every MPS file in a directory under each mode and report SGM10.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
        /// Comma-separated modes to run; defaults to --mode.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<String>,
        /// Write per-instance rows as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Convert one or more trace CSVs into long-format (k, series, value) rows.
    Plotdata {
        /// Trace files, optionally prefixed with a label: `hpr=trace.csv`.
        #[arg(required = true, value_name = "[LABEL=]FILE")]
        traces: Vec<String>,
        /// Output file; stdout when omitted.
        #[arg(long, short, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScalingArg {
    None,
    Ruiz,
}

#[derive(Args, Debug, Clone)]
struct SolveOpts {
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    iter_limit: Option<usize>,
    /// hpr, hdr, pr, epr or rhpdhg.
    #[arg(long, default_value = "hpr")]
    mode: String,
    /// Reflection parameter for --mode rhpdhg.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long)]
    lambda_safety: Option<f64>,
    #[arg(long, conflicts_with = "fixed_restart")]
    no_restart: bool,
    /// Restart every N iterations instead of adaptively.
    #[arg(long, value_name = "N")]
    fixed_restart: Option<usize>,
    #[arg(long)]
    no_adaptive_sigma: bool,
    #[arg(long)]
    check_interval: Option<usize>,
    #[arg(long, value_enum, default_value = "ruiz")]
    scaling: ScalingArg,
}

/// Failure classes, each with its own exit code.
enum Failure {
    Usage(String),
    Parse(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn parse_mode(name: &str, gamma: Option<f64>) -> Result<Mode, Failure> {
    let mode: Mode = name.parse().map_err(|e| Failure::Usage(format!("{e}")))?;
    match (mode, gamma) {
        (Mode::Rhpdhg { .. }, Some(g)) => Ok(Mode::Rhpdhg { gamma: g }),
        (_, Some(_)) => Err(Failure::Usage("--gamma only applies to --mode rhpdhg".into())),
        (m, None) => Ok(m),
    }
}

impl SolveOpts {
    fn config(&self, mode: Mode) -> Result<SolverConfig, Failure> {
        let mut cfg = SolverConfig { tol: self.tol, mode, time_limit: self.time_limit, ..Default::default() };
        if let Some(v) = self.iter_limit {
            cfg.iter_limit = v;
        }
        if let Some(v) = self.sigma0 {
            cfg.sigma0 = v;
        }
        if let Some(v) = self.lambda_safety {
            cfg.lambda_safety = v;
        }
        if let Some(v) = self.check_interval {
            cfg.check_interval = v;
        }
        if self.no_restart {
            cfg.restart = RestartConfig::disabled();
        } else if let Some(p) = self.fixed_restart {
            cfg.restart = RestartConfig::fixed(p);
        }
        cfg.adaptive_sigma = !self.no_adaptive_sigma;
        if let ScalingArg::None = self.scaling {
            cfg.scaling = Scaling::None;
        }
        cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn load(path: &Path) -> Result<MpsProblem, Failure> {
    match load_mps(path) {
        // the parser logs its own warnings
        Ok(p) => Ok(p),
        Err(MpsError::Io(e)) => Err(Failure::Other(anyhow!(e).context(format!("cannot read {}", path.display())))),
        Err(e) => Err(Failure::Parse(anyhow!(e).context(format!("cannot parse {}", path.display())))),
    }
}

fn status_exit(status: Status) -> u8 {
    match status {
        Status::Optimal => 0,
        Status::IterLimit | Status::TimeLimit => EXIT_LIMIT,
        Status::NumericalError => EXIT_ERROR,
    }
}

fn print_summary(name: &str, res: &SolveResult) {
    println!("instance     {name}");
    println!("mode         {}", res.mode);
    println!("status       {}", res.status.as_str());
    println!("objective    {:.12e}", res.primal_obj);
    println!("dual obj     {:.12e}", res.dual_obj);
    println!(
        "residuals    gap {:.2e}  primal {:.2e}  dual {:.2e}",
        res.rel_residuals.gap, res.rel_residuals.primal, res.rel_residuals.dual
    );
    println!("iterations   {} ({} restarts)", res.iterations, res.restarts);
    println!("sigma        {:.4e}", res.sigma);
    println!("time         {:.3}s", res.solve_seconds);
    if let Some(msg) = &res.message {
        println!("note         {msg}");
    }
}

fn cmd_solve(path: &Path, opts: &SolveOpts, trace: Option<&Path>, json: bool) -> Result<u8, Failure> {
    let cfg = opts.config(parse_mode(&opts.mode, opts.gamma)?)?;
    let inst = load(path)?;
    let res = solve(&inst.problem, &cfg).map_err(|e| anyhow!(e).context("solver failed"))?;
    if let Some(t) = trace {
        let file = File::create(t).with_context(|| format!("cannot create {}", t.display()))?;
        write_trace_csv(&res.trace, BufWriter::new(file)).map_err(anyhow::Error::from)?;
    }
    if json {
        let mut out = io::stdout().lock();
        serde_json::to_writer_pretty(&mut out, &res).context("serializing result")?;
        writeln!(out)?;
    } else {
        let name = if inst.name.is_empty() { path.display().to_string() } else { inst.name.clone() };
        print_summary(&name, &res);
    }
    if res.status != Status::Optimal {
        warn!(
            "stopped without convergence ({}) after {} iterations",
            res.status.as_str(),
            res.iterations
        );
    }
    Ok(status_exit(res.status))
}

fn instance_name(path: &Path) -> Option<String> {
    let file = path.file_name()?.to_str()?;
    let lower = file.to_ascii_lowercase();
    [".mps.gz", ".mps"]
        .iter()
        .find(|ext| lower.ends_with(*ext))
        .map(|ext| file[..file.len() - ext.len()].to_string())
}

fn worker_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("HPRLP_THREADS") {
        let n: usize = v.parse().with_context(|| format!("HPRLP_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("HPRLP_THREADS must be positive");
        }
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn cmd_bench(dir: &Path, opts: &SolveOpts, modes: &[String], csv: Option<&Path>, json: bool) -> Result<u8, Failure> {
    let names: Vec<String> = if modes.is_empty() { vec![opts.mode.clone()] } else { modes.to_vec() };
    let configs = names
        .iter()
        .map(|m| opts.config(parse_mode(m, opts.gamma)?))
        .collect::<Result<Vec<_>, _>>()?;
    let time_limit = opts.time_limit.unwrap_or(3600.0);

    let mut files: Vec<(String, PathBuf)> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter_map(|p| instance_name(&p).map(|n| (n, p)))
        .collect();
    if files.is_empty() {
        return Err(Failure::Other(anyhow!("no .mps or .mps.gz files in {}", dir.display())));
    }
    files.sort();
    let problems = files
        .iter()
        .map(|(name, path)| load(path).map(|p| (name.clone(), p.problem)))
        .collect::<Result<Vec<_>, _>>()?;

    let jobs: Vec<(usize, usize)> = (0..problems.len()).flat_map(|i| (0..configs.len()).map(move |j| (i, j))).collect();
    let pool = worker_pool()?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, j)| {
                let (name, prob) = &problems[i];
                let cfg = SolverConfig { time_limit: Some(time_limit), ..configs[j].clone() };
                let start = Instant::now();
                let res = solve(prob, &cfg).map_err(|e| anyhow!(e).context(format!("solving {name}")))?;
                let seconds = start.elapsed().as_secs_f64();
                info!("{name} [{}]: {} in {} iterations", names[j], res.status.as_str(), res.iterations);
                Ok(BenchRow {
                    instance: name.clone(),
                    mode: names[j].clone(),
                    status: res.status,
                    iterations: res.iterations,
                    seconds,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    let report = BenchReport::from_rows(rows, time_limit).map_err(anyhow::Error::from)?;
    if let Some(path) = csv {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        report.write_rows_csv(BufWriter::new(file)).map_err(anyhow::Error::from)?;
    }
    if json {
        let mut out = io::stdout().lock();
        serde_json::to_writer_pretty(&mut out, &report).context("serializing report")?;
        writeln!(out)?;
    } else {
        print!("{}", report.summary_table());
    }
    Ok(0)
}

fn cmd_plotdata(traces: &[String], out: Option<&Path>) -> Result<u8, Failure> {
    let mut loaded = Vec::with_capacity(traces.len());
    for arg in traces {
        let (label, path) = match arg.split_once('=') {
            Some((l, p)) if !l.is_empty() => (Some(l.to_string()), p),
            _ => (None, arg.as_str()),
        };
        let file = File::open(path).with_context(|| format!("cannot open {path}"))?;
        let records = read_trace_csv(file).map_err(|e| Failure::Parse(anyhow!(e).context(format!("in {path}"))))?;
        loaded.push((label, records));
    }
    if loaded.len() > 1 && loaded.iter().any(|(l, _)| l.is_none()) {
        return Err(Failure::Usage("label every trace (LABEL=FILE) when merging several".into()));
    }
    let points = plot_data(&loaded).map_err(|e| Failure::Parse(anyhow!(e)))?;
    match out {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            write_plot_csv(&points, BufWriter::new(file)).map_err(anyhow::Error::from)?;
        }
        None => write_plot_csv(&points, io::stdout().lock()).map_err(anyhow::Error::from)?,
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve { path, opts, trace, json } => cmd_solve(&path, &opts, trace.as_deref(), json),
        Command::Bench { dir, opts, modes, csv, json } => cmd_bench(&dir, &opts, &modes, csv.as_deref(), json),
        Command::Plotdata { traces, out } => cmd_plotdata(&traces, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Parse(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_PARSE)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
