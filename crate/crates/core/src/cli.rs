//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 I/O error,
//! 4 degenerate data.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};
use crate::error::Error;
use crate::estimators::{jump_filtered_mle, least_squares, EstimatorKind, ObservedSeries};
use crate::monte_carlo::{run_campaign, sweep_intensity, with_workers};
use crate::ou::simulate_path;
use crate::report::{self, ReadError};
use crate::rng::RngStream;

#[derive(Parser, Debug)]
#[command(name = "levy-ou", version, about = "Simulate Lévy-driven OU processes and estimate their drift")]
pub struct Cli {
    /// Override the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on concurrent replications; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the parsed configuration in canonical form and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct ConfigArg {
    /// Run configuration (TOML).
    #[arg(long, short)]
    pub config: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one path and write it as CSV.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Write `t,x,dw,dd,dj,jump_count` instead of `t,x`.
        #[arg(long)]
        diagnostics: bool,
    },
    /// Estimate the drift of an observed or freshly simulated series.
    Estimate {
        #[command(flatten)]
        config: ConfigArg,
        /// `t,x` CSV to estimate from.
        #[arg(long, conflicts_with = "self_sim", required_unless_present = "self_sim")]
        data: Option<PathBuf>,
        /// Simulate a path from the configuration and estimate on it.
        #[arg(long)]
        self_sim: bool,
        /// Estimators to run (defaults to the configured `mc.estimators`).
        #[arg(long, value_delimiter = ',')]
        estimator: Vec<String>,
    },
    /// Reproduce summary tables: one campaign per configuration row.
    Table {
        #[command(flatten)]
        config: ConfigArg,
        /// Also write per-replication estimates here.
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// MLE vs LSE over a range of compound Poisson intensities.
    Compare {
        #[command(flatten)]
        config: ConfigArg,
        /// Jump intensities, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        intensities: Vec<f64>,
    },
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Input(String),
    Io(String, io::Error),
    Degenerate(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Io(..) => 3,
            CliError::Degenerate(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Io(what, e) => write!(f, "I/O error on {what}: {e}"),
            CliError::Degenerate(m) => write!(f, "degenerate data: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_degenerate() {
            CliError::Degenerate(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Ok(RunConfig::parse(&text)?)
}

/// Where CSV output goes and where the summary line goes.
struct Sink<'a> {
    out: Option<&'a Path>,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Sink<'_> {
    fn write_csv(&mut self, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
        match self.out {
            Some(p) => {
                let what = p.display().to_string();
                let file = File::create(p).map_err(|e| CliError::Io(what.clone(), e))?;
                let mut w = BufWriter::new(file);
                f(&mut w).map_err(|e| CliError::Io(what, e))
            }
            None => f(self.stdout).map_err(|e| CliError::Io("stdout".into(), e)),
        }
    }

    /// Summary lines go to stdout unless stdout carries the CSV.
    fn summary(&mut self, line: &str) -> Result<(), CliError> {
        let w: &mut dyn Write = if self.out.is_some() { self.stdout } else { self.stderr };
        writeln!(w, "{line}").map_err(|e| CliError::Io("stdout".into(), e))
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let what = path.display().to_string();
    let file = File::create(path).map_err(|e| CliError::Io(what.clone(), e))?;
    f(&mut BufWriter::new(file)).map_err(|e| CliError::Io(what, e))
}

fn config_path(cmd: &Command) -> &Path {
    match cmd {
        Command::Simulate { config, .. }
        | Command::Estimate { config, .. }
        | Command::Table { config, .. }
        | Command::Compare { config, .. } => &config.config,
    }
}

fn execute(cli: &Cli, sink: &mut Sink<'_>) -> Result<(), CliError> {
    let cfg = load_config(config_path(&cli.command))?;
    if cli.print_config {
        let text = cfg.to_toml()?;
        return write!(sink.stdout, "{text}").map_err(|e| CliError::Io("stdout".into(), e));
    }
    match &cli.command {
        Command::Simulate { diagnostics, .. } => {
            let model = cfg.model()?;
            let grid = cfg.grid()?;
            let seed = cli.seed.unwrap_or(cfg.mc.seed);
            let path = simulate_path(&model, &grid, &mut RngStream::new(seed, 0));
            if *diagnostics {
                sink.write_csv(|w| report::write_diagnostics_csv(w, &path))?;
            } else {
                sink.write_csv(|w| report::write_path_csv(w, &path))?;
            }
            let jumps = path.total_jumps().map_or("inf".to_string(), |j| j.to_string());
            sink.summary(&format!("n={} T={} jumps={}", grid.n(), grid.horizon(), jumps))
        }
        Command::Estimate { data, self_sim, estimator, .. } => {
            let kinds: Vec<EstimatorKind> = if estimator.is_empty() {
                cfg.estimators()?
            } else {
                estimator
                    .iter()
                    .map(|s| s.parse().map_err(|e: Error| CliError::Input(e.to_string())))
                    .collect::<Result<_, _>>()?
            };
            let filter = cfg.filter()?;
            let results = if *self_sim {
                let seed = cli.seed.unwrap_or(cfg.mc.seed);
                let path = simulate_path(&cfg.model()?, &cfg.grid()?, &mut RngStream::new(seed, 0));
                kinds
                    .iter()
                    .map(|k| Ok((*k, k.estimate(&path, filter)?)))
                    .collect::<Result<Vec<_>, Error>>()?
            } else {
                let data = data.as_ref().expect("clap enforces --data or --self-sim");
                let series = read_series(data)?;
                kinds
                    .iter()
                    .map(|k| match k {
                        EstimatorKind::FilteredMle => Ok((*k, jump_filtered_mle(&series, filter)?)),
                        EstimatorKind::Lse => Ok((*k, least_squares(&series)?)),
                        EstimatorKind::OracleMle => Err(CliError::Input(
                            "oracle_mle needs simulated ground truth; use --self-sim".into(),
                        )),
                    })
                    .collect::<Result<Vec<_>, CliError>>()?
            };
            sink.write_csv(|w| report::write_estimates_csv(w, &results))?;
            let (_, headline) = results
                .iter()
                .find(|(k, _)| *k == EstimatorKind::FilteredMle)
                .unwrap_or(&results[0]);
            sink.summary(&format!("a_hat={} filtered={}", headline.a_hat, headline.filtered))
        }
        Command::Table { raw, .. } => {
            let rows = cfg.table_rows()?;
            let mut summaries = Vec::with_capacity(rows.len());
            for row in &rows {
                let mc = row.mc_config(cli.seed)?;
                summaries.push(with_workers(cli.workers, || run_campaign(&mc))?);
            }
            sink.write_csv(|w| report::write_summary_csv(w, &summaries))?;
            if let Some(raw) = raw {
                write_file(raw, |w| report::write_raw_csv(w, &summaries))?;
            }
            for (row, s) in rows.iter().zip(&summaries) {
                let e = &s.estimators[0];
                sink.summary(&format!(
                    "a={} T={} n={} {}: mean={:.4} std_dev={:.4} avg_filtered={:.2}",
                    row.model.a,
                    s.horizon,
                    row.grid()?.n(),
                    e.kind,
                    e.mean,
                    e.std_dev,
                    e.avg_filtered
                ))?;
            }
            Ok(())
        }
        Command::Compare { intensities, .. } => {
            if let Some(bad) = intensities.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
                return Err(CliError::Input(format!("intensities must be >= 0, got {bad}")));
            }
            let mc = cfg.mc_config(cli.seed)?;
            let rows = with_workers(cli.workers, || sweep_intensity(&mc, intensities)).map_err(|e| match e {
                Error::UnsupportedModel(m) => CliError::Config(ConfigError {
                    path: "model.jump_family".into(),
                    msg: m,
                }),
                other => other.into(),
            })?;
            sink.write_csv(|w| report::write_sweep_csv(w, &rows))?;
            for r in &rows {
                sink.summary(&format!(
                    "lambda={} std_mle={:.4} std_lse={:.4} ratio={:.3}",
                    r.lambda,
                    r.std_mle,
                    r.std_lse,
                    r.std_lse / r.std_mle
                ))?;
            }
            Ok(())
        }
    }
}

fn read_series(path: &Path) -> Result<ObservedSeries, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    report::read_series_csv(io::BufReader::new(file)).map_err(|e| match e {
        ReadError::Io(io) => CliError::Io(path.display().to_string(), io),
        other => CliError::Input(format!("{}: {other}", path.display())),
    })
}

/// Run the CLI with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    let out = cli.out.clone();
    let mut sink = Sink { out: out.as_deref(), stdout, stderr };
    match execute(&cli, &mut sink) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(sink.stderr, "error: {e}");
            e.exit_code()
        }
    }
}
