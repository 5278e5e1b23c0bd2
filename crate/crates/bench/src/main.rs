use std::error::Error;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fama_core::channel::LinkPowers;
use fama_core::harness::{export_dataset, run_experiment, run_sweep, ExperimentConfig, SchemeKind, SerRecord, SweepAxis};
use fama_core::port_select::SpacingMode;

mod plot;

#[derive(Parser, Debug)]
#[command(name = "fama-bench", version, about = "SER experiments for fluid antenna multiple access")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure SER at one operating point.
    Run {
        #[command(flatten)]
        exp: ExpArgs,
        /// Results CSV to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure SER along one axis, appending a CSV row per point.
    Sweep {
        #[command(flatten)]
        exp: ExpArgs,
        /// users, ports, aperture, d, cbr or blocklength
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a FAMA-TX v1 dataset of combiner outputs.
    Export {
        #[command(flatten)]
        exp: ExpArgs,
        #[arg(long)]
        records: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw SER curves from a results CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Column for the horizontal axis (U, K, W, d, cbr). Guessed from
        /// the data when omitted.
        #[arg(long)]
        x: Option<plot::XColumn>,
    },
}

#[derive(Args, Debug)]
struct ExpArgs {
    #[arg(long, default_value = "turbo")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 50)]
    users: usize,
    #[arg(long, default_value_t = 200)]
    ports: usize,
    /// Aperture in wavelengths.
    #[arg(long, default_value_t = 20.0)]
    aperture: f64,
    #[arg(long, default_value_t = 20)]
    ksel: usize,
    #[arg(long, default_value_t = 0.6)]
    gamma_th: f64,
    /// sdm, none or fixed:D
    #[arg(long, default_value = "sdm")]
    spacing: SpacingMode,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Channel drops per batch.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Stop extending once this many drops have run (default 10× trials).
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 16)]
    symbols_per_drop: usize,
    #[arg(long, default_value_t = 1.0)]
    symbol_power: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_cross: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    cbr: f64,
    /// Codec block length before the bandwidth ratio is applied.
    #[arg(long, default_value_t = 1024)]
    block: usize,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

impl ExpArgs {
    fn config(&self, output: Option<PathBuf>) -> ExperimentConfig {
        ExperimentConfig {
            scheme: self.scheme,
            users: self.users,
            ports: self.ports,
            aperture: self.aperture,
            k_sel: self.ksel,
            gamma_th: self.gamma_th,
            spacing: self.spacing,
            snr_db: self.snr_db,
            num_trials: self.trials,
            max_trials: self.max_trials,
            min_errors: self.min_errors,
            symbols_per_drop: self.symbols_per_drop,
            symbol_power: self.symbol_power,
            powers: LinkPowers {
                desired: self.omega,
                cross: self.omega_cross,
            },
            seed: self.seed,
            cbr: self.cbr,
            block_len: self.block,
            workers: self.workers,
            output,
            ..ExperimentConfig::default()
        }
    }
}

fn summary(r: &SerRecord) -> String {
    let c = &r.config;
    format!(
        "{} U={} K={} W={} snr={}dB: SER {:.3e} [{:.3e}, {:.3e}] ({} / {} symbols, {} drops, {:.1}s)",
        c.scheme.label(),
        c.users,
        c.ports,
        c.aperture,
        c.snr_db,
        r.ser,
        r.ci.0,
        r.ci.1,
        r.symbol_errors,
        r.symbols_total,
        r.trials,
        r.wall_time_s
    )
}

fn main() -> Result<(), Box<dyn Error>> {
    match Cli::parse().command {
        Command::Run { exp, out } => {
            let record = run_experiment(&exp.config(out))?;
            println!("{}", summary(&record));
        }
        Command::Sweep {
            exp,
            axis,
            values,
            out,
        } => {
            for record in run_sweep(&exp.config(out), axis, &values)? {
                println!("{}", summary(&record));
            }
        }
        Command::Export { exp, records, out } => {
            let header = export_dataset(&exp.config(None), records, &out)?;
            println!(
                "wrote {} records of {} symbols to {} ({} bytes)",
                header.num_records,
                header.block_n,
                out.display(),
                header.file_len()
            );
        }
        Command::Plot { input, out, x } => plot::plot(&input, &out, x)?,
    }
    Ok(())
}
