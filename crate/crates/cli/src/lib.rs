//! `cayley`: runs the verification suites of `cayley-core` and writes a JSON report plus
//! CSV/SVG plot data.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails, 2 for usage,
//! configuration or I/O errors.

pub mod config;
pub mod plot;
pub mod report;
pub mod suites;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use cayley_core::octonion::MultiplicationTable;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use config::{ConfigError, Format, RunConfig};
use report::{Report, Timing};
use suites::{Context, SuiteName, SuiteOutput};

#[derive(Debug, Parser)]
#[command(name = "cayley", version, about = "Numerical verification of the Cayley hyperbolic plane toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one verification suite, or all of them.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteName,
        #[command(flatten)]
        opts: Options,
    },
    /// Dirichlet eigenvalue sweep over radii and grids.
    Spectrum {
        #[command(flatten)]
        opts: Options,
    },
    /// Extremal sectional curvatures by Grassmannian descent.
    Pinch {
        #[command(flatten)]
        opts: Options,
    },
    /// Print an existing report.json from the output directory.
    Report {
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Debug, Args)]
struct Options {
    #[arg(long)]
    seed: Option<u64>,
    /// Random trial count, overriding each suite's default.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated ball radii for the spectrum sweep.
    #[arg(long)]
    radius: Option<String>,
    /// Comma-separated grid sizes for the spectrum sweep.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Flat `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Octonion multiplication table replacing the built-in one.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Also write the 120×120 curvature operator as operator.csv.
    #[arg(long)]
    export_operator: bool,
}

impl Options {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.trials {
            c.trials = Some(t);
        }
        if let Some(r) = &self.radius {
            c.set("radius", r)?;
        }
        if let Some(g) = &self.grid {
            c.set("grid", g)?;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        c.parallel |= self.parallel;
        if let Some(f) = self.format {
            c.format = f;
        }
        if let Some(t) = &self.table {
            c.table = Some(t.clone());
        }
        c.export_operator |= self.export_operator;
        c.validate()?;
        Ok(c)
    }
}

fn load_table(path: Option<&Path>) -> Result<MultiplicationTable, String> {
    match path {
        None => Ok(MultiplicationTable::canonical().clone()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            MultiplicationTable::parse(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

type Job = fn(&Context) -> SuiteOutput;

fn jobs(command: &Command) -> (String, Vec<Job>) {
    match command {
        Command::Verify { suite, .. } => {
            let name = format!("verify {}", format!("{suite:?}").to_lowercase());
            let jobs = suite
                .expand()
                .into_iter()
                .map(|s| match s {
                    SuiteName::Octonion => suites::octonion as Job,
                    SuiteName::Exterior => suites::exterior,
                    SuiteName::Curvature => suites::curvature,
                    SuiteName::Geodesy => suites::geodesy,
                    SuiteName::Forms => suites::forms,
                    SuiteName::Kernels => suites::kernels,
                    SuiteName::All => unreachable!("expanded"),
                })
                .collect();
            (name, jobs)
        }
        Command::Spectrum { .. } => ("spectrum".into(), vec![suites::spectrum as Job]),
        Command::Pinch { .. } => ("pinch".into(), vec![suites::pinch as Job]),
        Command::Report { .. } => unreachable!("handled separately"),
    }
}

fn timed(job: Job, ctx: &Context) -> (SuiteOutput, f64) {
    let start = Instant::now();
    let out = job(ctx);
    (out, start.elapsed().as_secs_f64())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let opts = match &cli.command {
        Command::Verify { opts, .. } | Command::Spectrum { opts } | Command::Pinch { opts } | Command::Report { opts } => opts,
    };
    let config = match opts.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Command::Report { .. } = cli.command {
        return show_report(&config);
    }
    let table = match load_table(config.table.as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    let (command, jobs) = jobs(&cli.command);
    let ctx = Context::new(config.clone(), table);
    let start = Instant::now();
    let results: Vec<(SuiteOutput, f64)> = if config.parallel {
        jobs.par_iter().map(|j| timed(*j, &ctx)).collect()
    } else {
        jobs.iter().map(|j| timed(*j, &ctx)).collect()
    };

    if let Err(e) = std::fs::create_dir_all(&config.out) {
        eprintln!("error: cannot create {}: {e}", config.out.display());
        return 2;
    }
    let mut records = Vec::new();
    let mut artifact_names = Vec::new();
    let mut suite_seconds = BTreeMap::new();
    for (out, secs) in results {
        for a in &out.artifacts {
            if let Err(e) = write_file(&config.out, &a.name, &a.contents) {
                eprintln!("error: {e}");
                return 2;
            }
            artifact_names.push(a.name.clone());
        }
        suite_seconds.insert(out.record.suite.clone(), secs);
        records.push(out.record);
    }
    artifact_names.push("report.json".into());
    let timing = Timing {
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        total_seconds: start.elapsed().as_secs_f64(),
        suite_seconds,
    };
    let report = Report::new(&command, config.clone(), records, artifact_names, timing);
    let json = report.to_json();
    if let Err(e) = write_file(&config.out, "report.json", &json) {
        eprintln!("error: {e}");
        return 2;
    }
    match config.format {
        Format::Json => print!("{json}"),
        Format::Csv => print!("{}", report.checks_csv()),
    }
    for s in &report.suites {
        for c in s.failures() {
            eprintln!("FAILED {}.{}: residual {:e} > tolerance {:e}", s.suite, c.name, c.residual, c.tolerance);
        }
    }
    if report.passed {
        0
    } else {
        1
    }
}

fn show_report(config: &RunConfig) -> i32 {
    let path = config.out.join("report.json");
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return 2;
        }
    };
    let value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return 2;
        }
    };
    match config.format {
        Format::Json => print!("{text}"),
        Format::Csv => {
            println!("suite,checks_run,max_residual,passed");
            for s in value["suites"].as_array().into_iter().flatten() {
                println!("{},{},{},{}", s["suite"].as_str().unwrap_or(""), s["checks_run"], s["max_residual"], s["passed"]);
            }
        }
    }
    if value["passed"].as_bool() == Some(true) {
        0
    } else {
        1
    }
}
