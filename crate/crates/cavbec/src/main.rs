use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cavbec::calib::SplittingUnit;
use cavbec::cli::{self, CalibrateOptions, DataFormat};
use cavbec::exec;
use cavbec::Error;

/// Steady state, stability, output-field spectra, and collision-strength
/// calibration for a driven cavity coupled to an interacting condensate.
#[derive(Parser)]
#[command(name = "cavbec", version, about)]
struct Cli {
    /// Scenario config (JSON). Required by spectrum/stability/steady.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory data files are written to.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Data-file format (metadata sidecars are always JSON).
    #[arg(long, global = true, value_enum, default_value_t = CliFormat::Csv)]
    format: CliFormat,

    /// Worker threads for grid and sweep evaluation. The CAVBEC_THREADS
    /// environment variable overrides this flag.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliFormat {
    Csv,
    Json,
}

impl From<CliFormat> for DataFormat {
    fn from(f: CliFormat) -> Self {
        match f {
            CliFormat::Csv => DataFormat::Csv,
            CliFormat::Json => DataFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute one output-field spectrum from a scenario config.
    Spectrum,
    /// Emit the data files of a bundled figure preset.
    Figure {
        /// Preset name (fig2a, fig2b, fig3a, fig3b, fig4a, fig4b, fig5,
        /// fig6a, fig6b, fig6c).
        name: String,
    },
    /// Estimate the s-wave scattering frequency from a measured splitting.
    Calibrate {
        /// Measured normal-mode splitting (must be > 0).
        #[arg(long)]
        splitting: f64,
        /// Unit of the measurement: omega_R, kappa, or rad_s.
        #[arg(long)]
        unit: String,
        /// Load a tabulated calibration curve (JSON) instead of building one.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Build the curve from a protocol file (JSON) instead of the bundled
        /// reference protocol.
        #[arg(long, conflicts_with = "curve")]
        protocol: Option<PathBuf>,
        /// Samples in the tabulated curve.
        #[arg(long, default_value_t = 121)]
        samples: usize,
        /// Scattering-frequency range `LO:HI` (recoil units) to tabulate.
        #[arg(long, default_value = "0:120")]
        range: String,
    },
    /// Sweep the scattering frequency and report stability and splittings.
    Stability,
    /// Solve and report the steady-state branches.
    Steady,
}

fn parse_range(text: &str) -> Result<(f64, f64), Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("range must be LO:HI, got `{text}`")));
    }
    let lo = parts[0]
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("bad range lower bound: {e}")))?;
    let hi = parts[1]
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("bad range upper bound: {e}")))?;
    Ok((lo, hi))
}

fn require_config(config: &Option<PathBuf>) -> Result<&PathBuf, Error> {
    config
        .as_ref()
        .ok_or_else(|| Error::Config("this subcommand needs --config FILE".into()))
}

fn run(cli: &Cli) -> Result<(), Error> {
    let env_threads = std::env::var("CAVBEC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    exec::configure_threads(env_threads.or(cli.threads));

    match &cli.command {
        Command::Spectrum => {
            let config = require_config(&cli.config)?;
            cli::expect_task(config, "spectrum")?;
            let files = cli::run_scenario(config, &cli.out_dir, cli.format.into())?;
            print_written(&files);
            Ok(())
        }
        Command::Stability => {
            let config = require_config(&cli.config)?;
            cli::expect_task(config, "stability")?;
            let files = cli::run_scenario(config, &cli.out_dir, cli.format.into())?;
            print_written(&files);
            Ok(())
        }
        Command::Steady => {
            let config = require_config(&cli.config)?;
            cli::expect_task(config, "steady")?;
            let files = cli::run_scenario(config, &cli.out_dir, cli.format.into())?;
            print_written(&files);
            Ok(())
        }
        Command::Figure { name } => {
            let files = cli::run_figure(name, &cli.out_dir, cli.format.into())?;
            print_written(&files);
            Ok(())
        }
        Command::Calibrate {
            splitting,
            unit,
            curve,
            protocol,
            samples,
            range,
        } => {
            let opts = CalibrateOptions {
                splitting: *splitting,
                unit: unit.parse::<SplittingUnit>()?,
                curve_file: curve.clone(),
                protocol_file: protocol.clone(),
                samples: *samples,
                range: parse_range(range)?,
            };
            let doc = cli::run_calibrate(&opts)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("estimate serializes")
            );
            Ok(())
        }
    }
}

fn print_written(files: &[PathBuf]) {
    let names: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
    println!("{}", serde_json::json!({ "written": names }));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", cli::error_record(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
