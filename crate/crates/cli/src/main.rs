//! `trawl`: simulate trawl processes, estimate their spectral parameters and
//! run the Monte Carlo study from the command line.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use trawl_core::experiment::{run_experiment, ExperimentConfig};
use trawl_core::oracle::{acv_error_rate_scan, arfima_quadrature_check, empcov_fluctuation_scan};
use trawl_core::spectral::{empirical_acv, kernel_estimate, periodogram};
use trawl_core::trawl::{simulate, theoretical_acv};
use trawl_core::whittle::{fit_whittle, local_whittle};
use trawl_core::{Error, KernelSpec, SimulationConfig, TimeSeries, TrawlModel, WhittleConfig};

#[derive(Parser)]
#[command(name = "trawl", version, about = "Long-memory trawl processes: simulation and spectral estimation")]
struct Cli {
    /// Worker threads for Monte Carlo loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Whittle,
    LocalWhittle,
    Kernel,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one sample path and write it as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `rng_seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Append theoretical and empirical autocovariances up to this lag.
        #[arg(long, value_name = "KMAX")]
        emit_acf: Option<usize>,
    },
    /// Estimate from a CSV series (first column, optional header).
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "whittle")]
        estimator: EstimatorArg,
        /// Degree of the nuisance polynomial (whittle).
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Number of low frequencies (local-whittle).
        #[arg(long, default_value_t = 100)]
        m: usize,
        /// Target frequency (kernel).
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        lambda0: f64,
        /// Bandwidth (kernel).
        #[arg(long, default_value_t = 0.2)]
        bandwidth: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Monte Carlo study of the tail-exponent estimators.
    Experiment {
        /// JSON config; omitted fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run a validation scan described by a JSON config.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    model: TrawlModel,
    #[serde(flatten)]
    simulation: SimulationConfig,
}

#[derive(Deserialize)]
#[serde(tag = "scan", rename_all = "snake_case", deny_unknown_fields)]
enum OracleConfig {
    EmpcovFluctuation {
        model: TrawlModel,
        k: usize,
        l: usize,
        n_grid: Vec<usize>,
        reps: usize,
        #[serde(default)]
        rng_seed: u64,
    },
    AcvErrorRate {
        model: TrawlModel,
        kmax: usize,
        n_grid: Vec<usize>,
        reps: usize,
        #[serde(default)]
        rng_seed: u64,
    },
    ArfimaQuadrature {
        d: f64,
        kmax: usize,
    },
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resource(_) => 3,
            Error::Degenerate(_) | Error::FitFailure(_) | Error::NoLongMemory => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 3,
            message: format!("I/O error: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let file = File::open(path).map_err(|e| Failure::config(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Failure::config(format!("invalid config {}: {e}", path.display())))
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_simulate(config: &Path, out: &Option<PathBuf>, seed: Option<u64>, emit_acf: Option<usize>) -> CliResult<()> {
    let mut cfg: SimulateConfig = read_json(config)?;
    if let Some(s) = seed {
        cfg.simulation.rng_seed = s;
    }
    let series = simulate(&cfg.model, &cfg.simulation)?;
    let mut w = output(out)?;
    series.write_csv(&mut w)?;
    if let Some(kmax) = emit_acf {
        let empirical = empirical_acv(&series, kmax)?;
        let theory = theoretical_acv(&cfg.model, kmax);
        writeln!(w)?;
        writeln!(w, "lag,theoretical,empirical")?;
        for (k, (t, e)) in theory.iter().zip(&empirical).enumerate() {
            writeln!(w, "{k},{t},{e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    input: &Path,
    estimator: EstimatorArg,
    degree: usize,
    m: usize,
    lambda0: f64,
    bandwidth: f64,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    let file = File::open(input).map_err(|e| Failure::config(format!("cannot open {}: {e}", input.display())))?;
    let series = TimeSeries::read_csv(BufReader::new(file))?;
    if series.len() < 64 {
        return Err(Failure::config(format!("need at least 64 observations, got {}", series.len())));
    }
    let first = series.values()[0];
    if series.values().iter().all(|v| *v == first) {
        return Err(Error::Degenerate("the series is constant".into()).into());
    }
    let value = match estimator {
        EstimatorArg::Whittle => {
            let fit = fit_whittle(&periodogram(&series)?, &WhittleConfig::with_degree(degree))?;
            serde_json::to_value(fit).map_err(io::Error::from)?
        }
        EstimatorArg::LocalWhittle => {
            let alpha = local_whittle(&periodogram(&series)?, m)?;
            serde_json::json!({ "alpha_lw": alpha, "m": m })
        }
        EstimatorArg::Kernel => {
            let f = kernel_estimate(&series, lambda0, bandwidth, &KernelSpec::default())?;
            serde_json::json!({ "f_hat": f, "lambda0": lambda0, "bandwidth": bandwidth })
        }
    };
    let mut w = output(out)?;
    write_json(&mut w, &value)?;
    w.flush()?;
    Ok(())
}

fn cmd_experiment(config: &Option<PathBuf>, out: &Option<PathBuf>, seed: Option<u64>, format: Format) -> CliResult<()> {
    let mut cfg: ExperimentConfig = match config {
        Some(p) => read_json(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.rng_seed = s;
    }
    let mut report = run_experiment(&cfg)?;
    report.metadata.generated_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());
    let mut w = output(out)?;
    match format {
        Format::Csv => report.write_csv(&mut w)?,
        Format::Json => write_json(&mut w, &serde_json::to_value(&report).map_err(io::Error::from)?)?,
    }
    w.flush()?;
    let empty = report.empty_cells();
    if empty > 0 {
        return Err(Error::Degenerate(format!("{empty} cells have no successful replication")).into());
    }
    Ok(())
}

fn cmd_oracle(config: &Path, out: &Option<PathBuf>, seed: Option<u64>, format: Format) -> CliResult<()> {
    let cfg: OracleConfig = read_json(config)?;
    let report = match cfg {
        OracleConfig::EmpcovFluctuation {
            model,
            k,
            l,
            n_grid,
            reps,
            rng_seed,
        } => empcov_fluctuation_scan(&model, k, l, &n_grid, reps, seed.unwrap_or(rng_seed))?,
        OracleConfig::AcvErrorRate {
            model,
            kmax,
            n_grid,
            reps,
            rng_seed,
        } => acv_error_rate_scan(&model, kmax, &n_grid, reps, seed.unwrap_or(rng_seed))?,
        OracleConfig::ArfimaQuadrature { d, kmax } => {
            let err = arfima_quadrature_check(d, kmax)?;
            let mut w = output(out)?;
            match format {
                Format::Csv => writeln!(w, "d,kmax,max_abs_error\n{d},{kmax},{err}")?,
                Format::Json => write_json(&mut w, &serde_json::json!({ "d": d, "kmax": kmax, "max_abs_error": err }))?,
            }
            w.flush()?;
            return Ok(());
        }
    };
    let mut w = output(out)?;
    match format {
        Format::Csv => report.write_csv(&mut w)?,
        Format::Json => {
            let mut v = report.summary_json();
            v["values"] = serde_json::json!(report.values);
            v["stderrs"] = serde_json::json!(report.stderrs);
            write_json(&mut w, &v)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::config(format!("cannot configure {t} threads: {e}")))?;
    }
    match &cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            emit_acf,
        } => cmd_simulate(config, out, *seed, *emit_acf),
        Command::Fit {
            input,
            estimator,
            degree,
            m,
            lambda0,
            bandwidth,
            out,
        } => cmd_fit(input, *estimator, *degree, *m, *lambda0, *bandwidth, out),
        Command::Experiment {
            config,
            out,
            seed,
            format,
        } => cmd_experiment(config, out, *seed, *format),
        Command::Oracle {
            config,
            out,
            seed,
            format,
        } => cmd_oracle(config, out, *seed, *format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
