use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ncmusic::covariance::CovarianceSet;
use ncmusic::error::{DoaError, Result};
use ncmusic::estimators::AngleGrid;
use ncmusic::harness::{
    Algorithm, AlgorithmOutput, ScenarioConfig, SweepConfig, TrialOutcome, emit_results,
    emit_spectra, run_algorithm, run_sweep_detailed, run_trial, trial_seed,
};
use ncmusic::signal::{Scenario, exact_covariances, synthesize_snapshots};

#[derive(Parser)]
#[command(
    name = "ncmusic",
    version,
    about = "Subspace DOA estimation for mixed circular/non-circular sources on a ULA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute pseudo-spectra for one realization (or analytic covariances)
    /// and write them as CSV.
    Spectrum {
        /// Built-in scenario name (fig1, fig2) or path to a scenario JSON file.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        algo: Algorithm,
        /// SNR in dB (overrides the scenario file value).
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for spectra.csv and manifest.json.
        #[arg(long)]
        out: PathBuf,
        /// Use analytic (infinite-snapshot) covariances instead of sampling.
        #[arg(long)]
        exact: bool,
        /// Search grid step in degrees.
        #[arg(long, default_value_t = AngleGrid::DEFAULT_STEP)]
        grid_step: f64,
    },
    /// Run a Monte Carlo SNR sweep described by a JSON config file.
    Sweep {
        /// Sweep config JSON (a manifest.json from a previous run works too).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores). Results do not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        /// Also write the spectra of the first trial of every (SNR, algorithm)
        /// cell.
        #[arg(long)]
        emit_spectra: bool,
    },
    /// Run a single trial and print the per-source estimation errors.
    Trial {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = AngleGrid::DEFAULT_STEP)]
        grid_step: f64,
    },
}

fn load_scenario(name_or_path: &str, snr: Option<f64>, seed: u64) -> Result<Scenario> {
    let mut cfg = ScenarioConfig::load(name_or_path)?;
    if let Some(snr_db) = snr {
        cfg.snr_db = snr_db;
        cfg.noiseless = false;
    }
    cfg.to_scenario(seed)
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| DoaError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    scenario: &str,
    algo: Algorithm,
    snr: Option<f64>,
    seed: u64,
    out: &PathBuf,
    exact: bool,
    grid_step: f64,
) -> Result<()> {
    let scenario = load_scenario(scenario, snr, seed)?;
    let grid = AngleGrid::with_step(grid_step)?;
    let cov = if exact {
        exact_covariances(&scenario)?
    } else {
        CovarianceSet::from_snapshots(&synthesize_snapshots(&scenario)?)?
    };

    match run_algorithm(&scenario, &cov, algo, &grid) {
        Ok(output) => {
            std::fs::create_dir_all(out).map_err(|source| DoaError::Io {
                path: out.display().to_string(),
                source,
            })?;
            let spectra_path = out.join("spectra.csv");
            emit_spectra(&output.curves(), &spectra_path)?;
            print_estimates(&output);

            let manifest = serde_json::json!({
                "version": env!("CARGO_PKG_VERSION"),
                "created_utc": chrono::Utc::now().to_rfc3339(),
                "algorithm": algo.as_str(),
                "snr_db": scenario.snr_db(),
                "seed": seed,
                "exact": exact,
                "grid_step_deg": grid_step,
                "outputs": ["spectra.csv"],
            });
            write_text(
                &out.join("manifest.json"),
                &format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()),
            )?;
            println!("wrote {}", spectra_path.display());
            Ok(())
        }
        Err(DoaError::InsufficientPeaks { stage, needed, found }) => {
            // Estimation failure is data, not a configuration error.
            eprintln!(
                "estimation failed at the {stage} stage: found {found} of {needed} minima; no spectra written"
            );
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn print_estimates(output: &AlgorithmOutput) {
    match output {
        AlgorithmOutput::Hrnc(report) => {
            println!("ncm: {:?}", report.ncm());
            println!("ncn: {:?}", report.ncn());
            println!("circular: {:?}", report.circ());
        }
        AlgorithmOutput::Baseline { doas, .. } => {
            println!("doas: {doas:?}");
        }
    }
}

fn cmd_sweep(
    config_path: &PathBuf,
    out: &PathBuf,
    threads: Option<usize>,
    with_spectra: bool,
) -> Result<()> {
    let config = SweepConfig::from_file(config_path)?;
    let detailed = run_sweep_detailed(&config, threads)?;
    let files = emit_results(&detailed.result, &config, out)?;
    println!("wrote {}", files.sweep_csv.display());

    if with_spectra {
        let template = config.scenario.resolve()?;
        let grid = AngleGrid::with_step(config.grid_step_deg)?;
        for (snr_index, &snr_db) in config.snr_grid_db.iter().enumerate() {
            for &algo in &config.algorithms {
                let seed = trial_seed(config.master_seed, snr_index, 0);
                let scenario = template.to_scenario(seed)?.with_snr_db(snr_db);
                let cov = CovarianceSet::from_snapshots(&synthesize_snapshots(&scenario)?)?;
                match run_algorithm(&scenario, &cov, algo, &grid) {
                    Ok(output) => {
                        let name = format!("spectra_{}_snr_{}.csv", algo.as_str(), snr_db);
                        emit_spectra(&output.curves(), &out.join(name))?;
                    }
                    Err(DoaError::InsufficientPeaks { stage, .. }) => {
                        eprintln!(
                            "spectra for {algo} at {snr_db} dB skipped: {stage} stage failed on trial 0"
                        );
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(())
}

fn cmd_trial(
    scenario: &str,
    algo: Algorithm,
    snr: Option<f64>,
    seed: u64,
    grid_step: f64,
) -> Result<()> {
    let scenario = load_scenario(scenario, snr, seed)?;
    let grid = AngleGrid::with_step(grid_step)?;
    match run_trial(&scenario, algo, &grid)? {
        TrialOutcome::Estimated { matches } => {
            println!("true_deg,est_deg,error_deg");
            for m in matches {
                println!("{:.4},{:.4},{:+.4e}", m.true_deg, m.est_deg, m.error_deg());
            }
        }
        TrialOutcome::Failed { stage, needed, found } => {
            println!("failed: {stage} stage found {found} of {needed} minima");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum {
            scenario,
            algo,
            snr,
            seed,
            out,
            exact,
            grid_step,
        } => cmd_spectrum(scenario, *algo, *snr, *seed, out, *exact, *grid_step),
        Command::Sweep {
            config,
            out,
            threads,
            emit_spectra,
        } => cmd_sweep(config, out, *threads, *emit_spectra),
        Command::Trial {
            scenario,
            algo,
            snr,
            seed,
            grid_step,
        } => cmd_trial(scenario, *algo, *snr, *seed, *grid_step),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
