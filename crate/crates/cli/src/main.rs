use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use l1codec::harness::{self, parse_grid, Experiment, ExperimentConfig, HarnessError, OutputFormat};

/// Environment variable that sets the number of worker threads.
const WORKERS_ENV: &str = "L1CODEC_WORKERS";

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Phase,
    Facets,
    Necessity,
    Compressible,
    CodecRoundtrip,
    GeometryChecks,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::Phase => Experiment::Phase,
            ExperimentArg::Facets => Experiment::Facets,
            ExperimentArg::Necessity => Experiment::Necessity,
            ExperimentArg::Compressible => Experiment::Compressible,
            ExperimentArg::CodecRoundtrip => Experiment::CodecRoundtrip,
            ExperimentArg::GeometryChecks => Experiment::GeometryChecks,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// A parsed integer grid.
#[derive(Debug, Clone)]
struct Grid(Vec<usize>);

fn grid(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

/// Seeded l1-decoding experiments. Grids accept `7`, `start:stop:step` or comma lists.
#[derive(Debug, Parser)]
#[command(name = "l1codec", version)]
struct Cli {
    #[arg(value_enum)]
    experiment: ExperimentArg,
    /// Ambient dimensions.
    #[arg(long, value_parser = grid)]
    m: Grid,
    /// Code dimensions; used as `R = m - n` when `--R` is absent.
    #[arg(long, value_parser = grid)]
    n: Option<Grid>,
    /// Corruption counts (sparsity levels).
    #[arg(long, value_parser = grid)]
    r: Grid,
    /// Section dimensions `R = m - n` (number of measurements).
    #[arg(long = "R", value_parser = grid)]
    big_r: Option<Grid>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compressibility exponent for `compressible`.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Alphabet size for `codec-roundtrip`.
    #[arg(long, default_value_t = 8)]
    alphabet: i64,
    /// l1 norm of the dense noise for `codec-roundtrip`.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Number of certified codecs shared by the trials of a cell.
    #[arg(long)]
    codec_pool: Option<usize>,
    /// Record per-trial wall-clock time in JSON output.
    #[arg(long)]
    timing: bool,
}

impl Cli {
    fn config(self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.experiment.into());
        cfg.m = self.m.0;
        cfg.n = self.n.map(|g| g.0).unwrap_or_default();
        cfg.r = self.r.0;
        cfg.big_r = self.big_r.map(|g| g.0).unwrap_or_default();
        cfg.trials = self.trials;
        cfg.master_seed = self.seed;
        cfg.format = match self.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
        cfg.output_path = self.out;
        cfg.p = self.p;
        cfg.alphabet = self.alphabet;
        cfg.noise_l1 = self.noise;
        cfg.codec_pool = self.codec_pool;
        cfg.record_runtime = self.timing;
        cfg
    }
}

fn workers() -> Result<Option<usize>, HarnessError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(HarnessError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn execute(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    cfg.cells()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers()? {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| HarnessError::Config(e.to_string()))?;
    let table = pool.install(|| harness::run(cfg))?;
    harness::emit(&table, cfg.format, cfg.output_path.as_deref())
}

fn exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Config(_) => EXIT_CONFIG,
        HarnessError::Io(_) | HarnessError::Csv(_) => EXIT_IO,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match execute(&cli.config()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("l1codec: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
