//! `gomp` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use gomp_doa::array_model::{build_dictionary, synthesize_measurements, UlaConfig};
use gomp_doa::bench::{
    derive_seed, draw_scene, emit_csv, make_projection, read_complex_matrix, run_coherence_experiment, run_design,
    run_mse_sweep, write_coherence_csv, write_complex_matrix, write_estimate_csv, write_trace_csv, SweepConfig,
};
use gomp_doa::estimator::estimate;
use gomp_doa::projection_design::ProjectionMatrix;
use gomp_doa::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gomp",
    version,
    about = "Off-grid DoA estimation and CM projection design experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design a projection and write its iteration trace (iter, eta, mu_max).
    Design {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the designed projection as a complex-matrix CSV.
        #[arg(long)]
        phi_out: Option<PathBuf>,
    },
    /// Coherence versus iteration for every method and grid size.
    Coherence {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo MSE versus SNR.
    Sweep {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate K frequencies from a measurement file.
    Estimate {
        #[command(flatten)]
        common: ConfigArgs,
        /// Measurements: header `rows,cols`, then rows of `re+imj` entries.
        #[arg(long)]
        y: PathBuf,
        /// Projection used to take the measurements; built from the config
        /// when omitted.
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw one scene and write its compressed measurements.
    Simulate {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        seed: u64,
        /// Measurement file to write.
        #[arg(long)]
        out: PathBuf,
        /// SNR in dB (or `inf`); defaults to the first `snr_grid_db` entry.
        #[arg(long)]
        snr_db: Option<String>,
        /// Write the true frequencies (`k,nu`) here.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Write the projection used here.
        #[arg(long)]
        phi_out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config with flat keys; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set K=3` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    error: Error,
}

fn usage(error: Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error,
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Config { .. } => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        };
        Failure { code, error }
    }
}

fn load_config(args: &ConfigArgs, seed: Option<u64>) -> Result<SweepConfig, Failure> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = seed {
        overrides.push(format!("seed={seed}"));
    }
    match &args.config {
        Some(path) => SweepConfig::from_path(path, &overrides),
        None => SweepConfig::from_json_str("{}", &overrides),
    }
    .map_err(usage)
}

fn parse_snr(text: &str) -> Result<f64, Failure> {
    let t = text.trim();
    if matches!(t.to_ascii_lowercase().as_str(), "inf" | "+inf" | "infinity") {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
        usage(Error::Config {
            key: "snr_db".into(),
            reason: format!("`{t}` is neither a number nor \"inf\""),
        })
    })
}

fn write_text(path: &Path, text: String) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|source| {
        Failure::from(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Design {
            common,
            seed,
            out,
            phi_out,
        } => {
            let cfg = load_config(&common, seed)?;
            let dict = build_dictionary(cfg.p, cfg.nu_max, cfg.m)?;
            let trace = run_design(&cfg, cfg.projection_kind, &dict)?;
            write_trace_csv(&trace, &out)?;
            if let Some(path) = phi_out {
                write_complex_matrix(trace.final_phi.as_matrix(), &path)?;
            }
            eprintln!(
                "{}: mu_max {:.6} -> {:.6} (alpha {}, best iteration {})",
                cfg.projection_kind,
                trace.initial_coherence(),
                trace.best_coherence(),
                trace.alpha,
                trace.best_iter
            );
        }
        Command::Coherence { common, seed, out } => {
            let cfg = load_config(&common, Some(seed))?;
            let rows = run_coherence_experiment(&cfg)?;
            write_coherence_csv(&rows, &out)?;
        }
        Command::Sweep { common, seed, out } => {
            let cfg = load_config(&common, Some(seed))?;
            let result = run_mse_sweep(&cfg)?;
            emit_csv(&result, &out)?;
            for (row, dt) in result.rows.iter().zip(&result.mean_trial_runtime) {
                eprintln!(
                    "{} snr={} ongrid={:.3e} refined={:.3e} trials={} failed={} mean_trial={:.1?}",
                    row.method, row.snr_db, row.mse_ongrid, row.mse_refined, row.trials, row.failed_trials, dt
                );
            }
        }
        Command::Estimate {
            common,
            y,
            phi,
            seed,
            out,
        } => {
            let cfg = load_config(&common, seed)?;
            let dict = build_dictionary(cfg.p, cfg.nu_max, cfg.m)?;
            let phi = match phi {
                Some(path) => ProjectionMatrix::new(read_complex_matrix(&path)?)?,
                None => make_projection(&cfg, cfg.projection_kind, &dict)?,
            };
            let y = read_complex_matrix(&y)?;
            let result = estimate(&y, &phi, &dict, cfg.k, &cfg.gomp)?;
            write_estimate_csv(&result, &out)?;
        }
        Command::Simulate {
            common,
            seed,
            out,
            snr_db,
            truth,
            phi_out,
        } => {
            let cfg = load_config(&common, Some(seed))?;
            let snr_db = match snr_db {
                Some(text) => parse_snr(&text)?,
                None => cfg.snr_grid_db[0],
            };
            let dict = build_dictionary(cfg.p, cfg.nu_max, cfg.m)?;
            let phi = make_projection(&cfg, cfg.projection_kind, &dict)?;
            let scene = draw_scene(&cfg, derive_seed(cfg.seed, &[0, 0, 0]))?;
            let ula = UlaConfig::half_wavelength(cfg.m)?;
            let meas = synthesize_measurements(&scene, &phi, &ula, snr_db, derive_seed(cfg.seed, &[0, 0, 1]))?;
            write_complex_matrix(&meas.y, &out)?;
            if let Some(path) = truth {
                let mut text = String::from("k,nu\n");
                for (k, nu) in scene.nu().iter().enumerate() {
                    text.push_str(&format!("{k},{nu:.16e}\n"));
                }
                write_text(&path, text)?;
            }
            if let Some(path) = phi_out {
                write_complex_matrix(phi.as_matrix(), &path)?;
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.code
        }
    }
}
