use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spherelab::harness::{
    emit_csv, emit_svg, exit_code, mac_label, mac_rows, run_calibration, run_mac, run_sweep,
    verify_oracles, ExperimentConfig, VerifyCase,
};
use spherelab::mac::InfoSetSpec;
use spherelab::{Error, Result};

const SEED_VAR: &str = "SPHERELAB_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "spherelab",
    about = "Sphere decoding and lossless size reduction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate a reliability threshold table.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an SER and visited-node sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Estimate the minimum achievable complexity for an information set.
    Mac {
        #[arg(long)]
        config: PathBuf,
        /// radius-li, radius-ld, zf-point or mmse-point
        #[arg(long)]
        info_set: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check both sphere decoders against exhaustive search.
    Verify {
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print the version.
    Version,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Ok(v) = std::env::var(SEED_VAR) {
        config.seed = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_VAR}={v:?} is not a u64 seed")))?;
    }
    Ok(config)
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Calibrate { config, out } => {
            let mut config = load(&config)?;
            config.output.table = Some(std::env::current_dir().unwrap_or_default().join(out));
            let table = run_calibration(&config)?;
            for (db, row) in table.snr_grid_db.iter().zip(&table.eta_over_rho) {
                println!("{db:>8} dB  eta/rho = {row:?}");
            }
        }
        Command::Sweep { config, out, svg } => {
            let config = load(&config)?;
            let result = run_sweep(&config)?;
            emit_csv(&result, &out)?;
            if let Some(svg) = svg {
                emit_svg(&result, &svg)?;
            }
            println!("wrote {} rows to {}", result.rows.len(), out.display());
        }
        Command::Mac {
            config,
            info_set,
            out,
        } => {
            let config = load(&config)?;
            let spec: InfoSetSpec = info_set.parse()?;
            let curve = run_mac(&config, spec)?;
            emit_csv(&mac_rows(&curve, &mac_label(&config, spec)), &out)?;
            for (db, v) in curve.snr_grid_db.iter().zip(&curve.mac_values) {
                println!("{db:>8} dB  MAC = {v:.4}");
            }
        }
        Command::Verify { trials, seed } => {
            let outcomes = verify_oracles(&VerifyCase::standard_suite(), trials, seed)?;
            let mut ok = true;
            for o in &outcomes {
                let status = if o.passed() { "pass" } else { "FAIL" };
                println!(
                    "{status}  {:<28} FP {}/{}  SE {}/{}",
                    o.case.describe(),
                    o.fp_matches,
                    o.trials,
                    o.se_matches,
                    o.trials
                );
                ok &= o.passed();
            }
            if !ok {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Version => println!("spherelab {}", env!("CARGO_PKG_VERSION")),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
