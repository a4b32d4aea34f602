//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::analytics::{cdf_transform, fit_shifted_exponential, fit_statistics, heuristic_params, FitWindow};
use crate::config::{parse_config, write_config, ConfigFile};
use crate::error::{Error, Result};
use crate::model::{
    build_direct, build_reduced, export_model, model_size_report, parse_model_text, ConstraintModel,
    ExportFormat, ModelKind,
};
use crate::portfolio::{
    cdf_from_rows, collect_cdf_with, default_workers, race_with, read_runs_csv, write_runs_csv,
    RaceOptions,
};
use crate::search::{solve, SearchConfig, SolveStatus};
use crate::verify::{brute_force_d, expand, verify, Configuration, VerifyOptions};

#[derive(Parser, Debug)]
#[command(name = "nothree", version, about = "No-three-in-line models, solvers and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Grid size.
    #[arg(long)]
    pub n: usize,
    /// Use the rotation-symmetric model.
    #[arg(long)]
    pub reduced: bool,
}

impl ModelArgs {
    fn build(&self) -> Result<ConstraintModel> {
        if self.reduced {
            build_reduced(self.n)
        } else {
            build_direct(self.n)
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a constraint model as OPB or structured text.
    Gen {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "opb")]
        format: String,
        /// Output path; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one seeded search and print the solution.
    Solve {
        /// Grid size; ignored when --model is given.
        #[arg(long, required_unless_present = "model")]
        n: Option<usize>,
        #[arg(long)]
        reduced: bool,
        /// Structured-text model written by `gen --format text`.
        #[arg(long, conflicts_with_all = ["n", "reduced"])]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds.
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        /// Configuration file for the solution; defaults to `solution-n<N>.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Race seeded instances until the first solution; prints the record as JSON.
    Race {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(short = 'M', long = "instances")]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        /// Worker threads; defaults to NOTHREE_WORKERS or the available cores.
        #[arg(long)]
        workers: Option<usize>,
        /// Configuration file for the winning solution.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time independent runs and write them as CSV.
    Cdf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        runs: usize,
        /// Per-run cutoff in seconds.
        #[arg(long)]
        cutoff: f64,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[arg(long)]
        workers: Option<usize>,
        /// Output path; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a shifted exponential to the M-instance transform of a run CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(short = 'M', long = "instances")]
        m: u32,
        /// Drop points whose transformed probability exceeds this.
        #[arg(long, default_value_t = 0.98)]
        window_p: f64,
    },
    /// Check a configuration (or representatives) for collinear triples.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Require 2n points with two in every row and column.
        #[arg(long = "expect-2n")]
        expect_2n: bool,
    },
    /// Expand orbit representatives into a full configuration.
    Expand {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Heuristic count parameters as CSV.
    Stats {
        #[arg(long)]
        n: usize,
        /// Number of points; defaults to 2n.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Exhaustive maximum for n <= 6.
    Oracle {
        #[arg(long)]
        n: usize,
    },
    /// Variable and constraint counts of both models as CSV.
    Sizes {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
}

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success,
    NoSolution,
}

impl Exit {
    pub fn code(self) -> i32 {
        match self {
            Exit::Success => 0,
            Exit::NoSolution => 2,
        }
    }
}

fn seconds(s: f64, what: &str) -> Result<Duration> {
    Duration::try_from_secs_f64(s)
        .map_err(|_| Error::invalid(format!("{what} must be a non-negative number of seconds, got {s}")))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))
}

fn race_options(workers: Option<usize>, timeout: Duration) -> Result<RaceOptions> {
    if workers == Some(0) {
        return Err(Error::invalid("--workers must be at least 1"));
    }
    Ok(RaceOptions {
        workers: workers.unwrap_or_else(default_workers),
        search: SearchConfig {
            timeout,
            ..SearchConfig::default()
        },
    })
}

fn solution_file(model: &ConstraintModel, assignment: &[bool]) -> ConfigFile {
    let conf = Configuration::new(model.n, model.occupied_sites(assignment));
    let mut file = ConfigFile::from_configuration(&conf);
    if model.kind == ModelKind::Reduced {
        file.reps = Some(conf.restrict_to_domain());
    }
    file
}

fn print_points(out: &mut dyn Write, file: &ConfigFile) -> Result<()> {
    let pairs: Vec<String> = file.points.iter().map(|p| p.to_string()).collect();
    writeln!(out, "{}", pairs.join(" "))?;
    Ok(())
}

/// Loads a configuration, expanding representatives when no points are listed.
fn load_configuration(path: &Path) -> Result<Configuration> {
    let file = parse_config(&read(path)?)?;
    match (&file.reps, file.points.is_empty()) {
        (Some(reps), true) => expand(reps),
        _ => Ok(file.configuration()),
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Exit> {
    match cli.command {
        Command::Gen { model, format, out: path } => {
            let format: ExportFormat = format.parse()?;
            let m = model.build()?;
            let bytes = export_model(&m, format);
            match path {
                Some(p) => write_file(&p, &bytes)?,
                None => out.write_all(&bytes)?,
            }
            writeln!(err, "n={} kind={} vars={} constraints={}", m.n, m.kind, m.num_vars, m.num_constraints())?;
            Ok(Exit::Success)
        }
        Command::Solve { n, reduced, model, seed, timeout, out: path } => {
            let timeout = seconds(timeout, "--timeout")?;
            let m = match (model, n) {
                (Some(p), _) => parse_model_text(&read(&p)?)?,
                (None, Some(n)) => ModelArgs { n, reduced }.build()?,
                (None, None) => return Err(Error::invalid("either --n or --model is required")),
            };
            let cfg = SearchConfig {
                seed,
                timeout,
                ..SearchConfig::default()
            };
            let res = solve(&m, &cfg, &AtomicBool::new(false))?;
            writeln!(
                err,
                "status={} elapsed={:.3}s nodes={} restarts={}",
                res.status.as_str(), res.elapsed, res.nodes, res.restarts
            )?;
            match &res.assignment {
                Some(a) if res.status == SolveStatus::Sat => {
                    let file = solution_file(&m, a);
                    print_points(out, &file)?;
                    let path = path.unwrap_or_else(|| PathBuf::from(format!("solution-n{}.txt", m.n)));
                    write_file(&path, write_config(&file).as_bytes())?;
                    Ok(Exit::Success)
                }
                _ => Ok(Exit::NoSolution),
            }
        }
        Command::Race { model, m, seed_base, timeout, workers, out: path } => {
            let opts = race_options(workers, seconds(timeout, "--timeout")?)?;
            let cm = model.build()?;
            let record = race_with(&cm, m, seed_base, &opts)?;
            serde_json::to_writer_pretty(&mut *out, &record).map_err(|e| Error::invalid(e.to_string()))?;
            writeln!(out)?;
            match record.winner().and_then(|w| w.assignment.as_ref()) {
                Some(a) => {
                    if let Some(p) = path {
                        write_file(&p, write_config(&solution_file(&cm, a)).as_bytes())?;
                    }
                    Ok(Exit::Success)
                }
                None => Ok(Exit::NoSolution),
            }
        }
        Command::Cdf { model, runs, cutoff, seed_base, workers, out: path } => {
            let cutoff = seconds(cutoff, "--cutoff")?;
            let opts = race_options(workers, cutoff)?;
            let cm = model.build()?;
            let col = collect_cdf_with(&cm, runs, cutoff, seed_base, &opts)?;
            let mut buf = Vec::new();
            write_runs_csv(&col.runs, &mut buf)?;
            match path {
                Some(p) => write_file(&p, &buf)?,
                None => out.write_all(&buf)?,
            }
            writeln!(err, "completed={} censored={}", col.cdf.times().len(), col.cdf.censored())?;
            Ok(Exit::Success)
        }
        Command::Fit { input, m, window_p } => {
            if !(window_p > 0.0 && window_p < 1.0) {
                return Err(Error::invalid(format!("--window-p must lie in (0, 1), got {window_p}")));
            }
            let rows = read_runs_csv(read(&input)?.as_bytes())?;
            let cdf = cdf_from_rows(&rows, f64::INFINITY)?;
            let points = cdf_transform(&cdf, m)?.points();
            let window = FitWindow {
                max_probability: window_p,
                ..FitWindow::default()
            };
            let fit = fit_shifted_exponential(&points, m, window)?;
            let median = fit_statistics(&fit, 0.5)?;
            let q98 = fit_statistics(&fit, 0.98)?;
            writeln!(out, "t0,t1,mean,t_0.5,t_0.98")?;
            writeln!(out, "{},{},{},{},{}", fit.t0, fit.t1, median.mean, median.quantile, q98.quantile)?;
            Ok(Exit::Success)
        }
        Command::Verify { input, expect_2n } => {
            let conf = load_configuration(&input)?;
            let opts = VerifyOptions {
                expect_count: expect_2n.then_some(2 * conf.n),
                two_per_line: expect_2n,
                ..VerifyOptions::default()
            };
            let verdict = verify(&conf, opts);
            match &verdict.failure {
                None => {
                    writeln!(out, "pass, {} points", verdict.points)?;
                    Ok(Exit::Success)
                }
                Some(f) => Err(Error::invalid(format!("fail: {f}"))),
            }
        }
        Command::Expand { input, out: path } => {
            let file = parse_config(&read(&input)?)?;
            let reps = file
                .reps
                .ok_or_else(|| Error::invalid(format!("{} lists no `rep` records", input.display())))?;
            let conf = expand(&reps)?;
            let mut full = ConfigFile::from_configuration(&conf);
            full.reps = Some(reps);
            write_file(&path, write_config(&full).as_bytes())?;
            writeln!(out, "{} points", conf.len())?;
            Ok(Exit::Success)
        }
        Command::Stats { n, k } => {
            let h = heuristic_params(n, k.unwrap_or(2 * n))?;
            writeln!(out, "n,k,t_n,q_n,log_c")?;
            writeln!(out, "{},{},{},{:e},{}", h.n, h.k, h.t_n, h.q_n, h.log_c)?;
            Ok(Exit::Success)
        }
        Command::Oracle { n } => {
            let (d, conf) = brute_force_d(n)?;
            writeln!(out, "D({n}) = {d}")?;
            print_points(out, &ConfigFile::from_configuration(&conf))?;
            Ok(Exit::Success)
        }
        Command::Sizes { from, to } => {
            if from > to {
                return Err(Error::invalid(format!("--from {from} exceeds --to {to}")));
            }
            let rows = model_size_report(from, to)?;
            let mut w = csv::Writer::from_writer(&mut *out);
            for r in &rows {
                w.serialize(r).map_err(|e| Error::invalid(e.to_string()))?;
            }
            w.flush()?;
            Ok(Exit::Success)
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "{line}");
            return 1;
        }
    };
    match execute(cli, out, err) {
        Ok(exit) => exit.code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
