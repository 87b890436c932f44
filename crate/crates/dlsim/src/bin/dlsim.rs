//! Pipeline binary: bler -> map-cqi -> simulate -> cdf.
//!
//! Stages are chained through files so the expensive link-level run is paid
//! once. Identical flags, config, and seeds reproduce outputs byte for byte
//! (set SOURCE_DATE_EPOCH to also pin the manifest timestamp).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dlsim::linksim::LinkSimConfig;
use dlsim::numerology::write_cqi_table_csv;
use dlsim::pipeline::{
    cmd_bler, cmd_cdf, cmd_map_cqi, cmd_simulate, load_simulate_config, CqiSelection,
};
use dlsim::sysim::SchedulerKind;
use dlsim::turbo::TurboConfig;

#[derive(Parser)]
#[command(name = "dlsim", version, about = "Downlink link- and system-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BLER curves over AWGN for the selected CQIs.
    Bler {
        /// CQI selection: `all` or a comma list like `1,4,15`.
        #[arg(long, default_value = "all")]
        cqi: String,
        /// Run seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// SNR sweep start, dB.
        #[arg(long, default_value_t = -10.0)]
        snr_min: f64,
        /// SNR sweep end, dB.
        #[arg(long, default_value_t = 22.0)]
        snr_max: f64,
        /// SNR step, dB.
        #[arg(long, default_value_t = 0.5)]
        snr_step: f64,
        /// Information bits per block (includes the 16-bit checksum).
        #[arg(long, default_value_t = 1024)]
        block_length: usize,
        /// Decoder iterations.
        #[arg(long, default_value_t = 8)]
        iterations: u32,
        /// Minimum blocks per SNR point.
        #[arg(long, default_value_t = 200)]
        min_blocks: u64,
        /// Early-stop block error target per SNR point.
        #[arg(long, default_value_t = 50)]
        min_errors: u64,
        /// Hard cap on blocks per SNR point.
        #[arg(long, default_value_t = 20_000)]
        max_blocks: u64,
    },
    /// Extract per-CQI SNR thresholds at the target BLER and write the LUT.
    MapCqi {
        /// Curves CSV from the bler stage.
        #[arg(long)]
        curves: PathBuf,
        /// Target block error rate.
        #[arg(long, default_value_t = 0.1)]
        target_bler: f64,
        /// Output LUT path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Multi-user drops under one scheduler; writes per-UE throughput.
    Simulate {
        /// TOML config; defaults apply when omitted. Bare names are also
        /// searched under $DLSIM_CONFIG_PATH.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Scheduler: pf, rr, or bestcqi.
        #[arg(long)]
        scheduler: String,
        /// LUT from the map-cqi stage.
        #[arg(long)]
        lut: PathBuf,
        /// Curves CSV from the bler stage (link performance model).
        #[arg(long)]
        curves: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Pool per-UE results into a CDF and percentile summary.
    Cdf {
        /// One or more ue_throughput.csv files.
        #[arg(long, required = true)]
        results: Vec<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the CQI/MCS table as CSV.
    CqiTable {
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run() -> dlsim::Result<()> {
    match Cli::parse().command {
        Command::Bler {
            cqi,
            seed,
            out,
            snr_min,
            snr_max,
            snr_step,
            block_length,
            iterations,
            min_blocks,
            min_errors,
            max_blocks,
        } => {
            let selection = CqiSelection::parse(&cqi)?;
            if snr_step <= 0.0 || snr_max < snr_min {
                return Err(dlsim::Error::InvalidInput(
                    "SNR sweep must be increasing with positive step".into(),
                ));
            }
            let n_points = ((snr_max - snr_min) / snr_step).round() as usize + 1;
            let cfg = LinkSimConfig {
                snr_grid_db: (0..n_points).map(|i| snr_min + snr_step * i as f64).collect(),
                min_blocks,
                min_block_errors: min_errors,
                max_blocks,
                rng_seed: seed,
                turbo: TurboConfig {
                    block_length_k: block_length,
                    n_iterations: iterations,
                    ..TurboConfig::default()
                },
                ..LinkSimConfig::default()
            };
            let curves = cmd_bler(&selection, &cfg, &out)?;
            eprintln!("wrote {} curves to {}", curves.len(), out.display());
        }
        Command::MapCqi {
            curves,
            target_bler,
            out,
        } => {
            let lut = cmd_map_cqi(&curves, target_bler, &out)?;
            eprintln!(
                "wrote LUT with {} thresholds to {}",
                lut.map.thresholds.len(),
                out.display()
            );
        }
        Command::Simulate {
            config,
            scheduler,
            lut,
            curves,
            out,
        } => {
            let kind = SchedulerKind::parse(&scheduler)?;
            let file_cfg = load_simulate_config(config.as_deref())?;
            let results = cmd_simulate(&file_cfg, kind, &lut, &curves, &out)?;
            eprintln!(
                "simulated {} drops ({}) into {}",
                results.len(),
                kind.id(),
                out.display()
            );
        }
        Command::Cdf { results, out } => {
            cmd_cdf(&results, &out)?;
        }
        Command::CqiTable { out } => match out {
            Some(path) => {
                let mut buf = Vec::new();
                write_cqi_table_csv(&mut buf)?;
                std::fs::write(path, buf)?;
            }
            None => write_cqi_table_csv(std::io::stdout().lock())?,
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
