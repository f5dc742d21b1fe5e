//! The `twinway` command line.
//!
//! Exit status: 0 on success, 1 on a runtime error, 2 on a usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, ScenarioConfig};
use crate::error::Result;
use crate::io::{emit_reports, ingest_detector_csv, read_traces_file, ReportBundle};
use crate::microsim::SimOutput;
use crate::powertrain::cost_rows;
use crate::twin::{
    divergence_by_interval, penetration_sweep, run_cidt, run_physical, run_pidt, GroundTruth,
    TwinRun,
};
use crate::validate::{validation_report, ValidationReport};

#[derive(Debug, Parser)]
#[command(
    name = "twinway",
    version,
    about = "Motorway digital-twin simulator and validator"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario config (TOML); defaults apply when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for reports and the run manifest
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed, overrides the config
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// EV penetration in [0, 1], overrides the config
    #[arg(long, value_name = "X")]
    penetration: Option<f64>,
    /// Emission interval in seconds, overrides the config
    #[arg(long, value_name = "S")]
    interval: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one physical scenario and write traces, costs and detector data
    Simulate(RunArgs),
    /// Run physical, CIDT and PIDT and validate both twins
    Twin {
        #[command(flatten)]
        run: RunArgs,
        /// Replay a ground truth written by `simulate` instead of simulating
        #[arg(long, value_name = "PATH")]
        ground_truth: Option<PathBuf>,
    },
    /// EV penetration sweep plus the divergence-by-interval table
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Replications per level (seeds are seed, seed+1, …)
        #[arg(long, value_name = "N")]
        seeds: Option<u32>,
    },
    /// Divergences and accuracies between two trace files (reference first)
    Metrics {
        reference: PathBuf,
        twin: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Validate detector CSV files
    Ingest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn resolve(args: &RunArgs) -> Result<ScenarioConfig> {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(p) = args.penetration {
        config.scenario.ev_penetration = p;
    }
    if let Some(i) = args.interval {
        config.scenario.emission_interval = i;
    }
    config
        .validate()
        .map_err(crate::config::ConfigError::from)?;
    Ok(config)
}

fn emit(bundle: &ReportBundle, out: Option<&Path>) -> Result<()> {
    if let Some(dir) = out {
        let manifest = emit_reports(bundle, dir)?;
        println!(
            "wrote {} files and manifest to {}",
            manifest.outputs.len(),
            dir.display()
        );
    }
    Ok(())
}

fn print_run(label: &str, output: &SimOutput, co2: f64, energy: f64) {
    println!(
        "{label:<9} inserted {:>5}  completed {:>5}  aborted {:>3}  unserved {:>3}  CO2 {:>12.1} g  energy {:>10.3}",
        output.inserted, output.completed, output.aborted, output.unserved, co2, energy
    );
}

fn print_validation(label: &str, r: &ValidationReport) {
    let pct = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}%"));
    println!(
        "{label:<9} speed acc {}  trip-length acc {}  count acc {}  KL {:.5}  JS {:.5}  W1 {:.4} m/s  B {:.5}",
        pct(r.speed_accuracy),
        pct(r.trip_length_accuracy),
        pct(r.count_accuracy),
        r.kl,
        r.js,
        r.wasserstein,
        r.bhattacharyya
    );
}

fn add_run(bundle: &mut ReportBundle, mode: &str, run: &TwinRun) -> Result<()> {
    bundle
        .traces(&format!("traces_{mode}.csv"), &run.output.traces)?
        .fleet(&format!("fleet_{mode}.csv"), &run.fleet)?
        .costs(
            &format!("costs_{mode}.csv"),
            &cost_rows(&run.output.traces, &run.fleet)?,
        )?
        .json(&format!("costs_{mode}.json"), &run.costs)?;
    Ok(())
}

fn simulate(args: RunArgs) -> Result<()> {
    let config = resolve(&args)?;
    let gt = run_physical(&config, config.seed)?;
    print_run(
        "physical",
        &gt.output,
        gt.costs.total_co2_g,
        gt.costs.total_energy,
    );
    let mut bundle = ReportBundle::new("simulate").with_config(&config);
    add_run(
        &mut bundle,
        "physical",
        &TwinRun {
            fleet: gt.fleet.clone(),
            output: gt.output.clone(),
            costs: gt.costs.clone(),
        },
    )?;
    bundle
        .detectors("detectors.csv", &gt.output.readings)?
        .detectors("detectors_observed.csv", &gt.observations.detector_readings)?
        .json("ground_truth.json", &gt)?;
    emit(&bundle, args.out.as_deref())
}

fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    let text = std::fs::read_to_string(path).map_err(|source| crate::io::IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text).map_err(crate::io::IoError::from)?)
}

fn twin(args: RunArgs, ground_truth: Option<PathBuf>) -> Result<()> {
    let config = resolve(&args)?;
    let gt = match ground_truth {
        Some(path) => load_ground_truth(&path)?,
        None => run_physical(&config, config.seed)?,
    };
    let cidt = run_cidt(&gt, &config)?;
    let pidt = run_pidt(&gt.observations, &config, gt.seed)?;
    print_run(
        "physical",
        &gt.output,
        gt.costs.total_co2_g,
        gt.costs.total_energy,
    );
    print_run(
        "cidt",
        &cidt.output,
        cidt.costs.total_co2_g,
        cidt.costs.total_energy,
    );
    print_run(
        "pidt",
        &pidt.output,
        pidt.costs.total_co2_g,
        pidt.costs.total_energy,
    );
    let cidt_report = validation_report(&cidt.output, &gt.output)?;
    let pidt_report = validation_report(&pidt.output, &gt.output)?;
    print_validation("cidt", &cidt_report);
    print_validation("pidt", &pidt_report);

    let mut bundle = ReportBundle::new("twin").with_config(&config);
    let physical = TwinRun {
        fleet: gt.fleet.clone(),
        output: gt.output.clone(),
        costs: gt.costs.clone(),
    };
    add_run(&mut bundle, "physical", &physical)?;
    add_run(&mut bundle, "cidt", &cidt)?;
    add_run(&mut bundle, "pidt", &pidt)?;
    bundle
        .detectors("detectors_observed.csv", &gt.observations.detector_readings)?
        .json("validation_cidt.json", &cidt_report)?
        .json("validation_pidt.json", &pidt_report)?;
    emit(&bundle, args.out.as_deref())
}

fn sweep(args: RunArgs, seeds: Option<u32>) -> Result<()> {
    let mut config = resolve(&args)?;
    if let Some(n) = seeds {
        config.sweep.seeds = n;
    }
    if let Some(p) = args.penetration {
        config.sweep.levels = vec![p];
    }
    if let Some(i) = args.interval {
        config.sweep.intervals = vec![i];
    }
    config
        .validate()
        .map_err(crate::config::ConfigError::from)?;
    let seeds = config.sweep_seeds();
    let report = penetration_sweep(&config, &config.sweep.levels, &seeds)?;
    let divergence = divergence_by_interval(&config, &config.sweep.intervals, &seeds)?;

    let pct = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{:+.2}%", 100.0 * v));
    println!("level  physical CO2 g  PIDT CO2 err  physical energy  PIDT energy err");
    for r in &report.rows {
        println!(
            "{:>5}  {:>14.1}  {:>12}  {:>15.3}  {:>15}",
            r.level,
            r.physical_co2,
            pct(r.pidt_co2_error),
            r.physical_energy,
            pct(r.pidt_energy_error)
        );
    }
    println!("interval_s  KL  JS  W1  B");
    for d in &divergence {
        println!(
            "{} {:.5} {:.5} {:.4} {:.5}",
            d.emission_interval_s, d.kl, d.js, d.wasserstein, d.bhattacharyya
        );
    }

    let mut bundle = ReportBundle::new("sweep").with_config(&config);
    bundle
        .sweep_csv("sweep.csv", &report)?
        .json("sweep.json", &report)?
        .divergences("divergence.csv", &divergence)?;
    emit(&bundle, args.out.as_deref())
}

fn metrics(reference: &Path, twin: &Path, out: Option<&Path>) -> Result<()> {
    let as_output = |path: &Path| -> Result<SimOutput> {
        let traces = read_traces_file(path)?;
        Ok(SimOutput {
            completed: traces.len(),
            traces,
            ..SimOutput::default()
        })
    };
    let report = validation_report(&as_output(twin)?, &as_output(reference)?)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(crate::io::IoError::from)?
    );
    let mut bundle = ReportBundle::new("metrics");
    bundle.json("metrics.json", &report)?;
    emit(&bundle, out)
}

fn ingest(files: &[PathBuf]) -> Result<()> {
    for path in files {
        let readings = ingest_detector_csv(path).map_err(|e| crate::io::IoError::File {
            path: path.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()),
        })?;
        let mut stations: Vec<f64> = readings.iter().map(|r| r.station).collect();
        stations.sort_by(f64::total_cmp);
        stations.dedup();
        let vehicles: u64 = readings.iter().map(|r| r.count).sum();
        println!(
            "{}: {} readings, {} stations, {} vehicle passages",
            path.display(),
            readings.len(),
            stations.len(),
            vehicles
        );
    }
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Twin { run, ground_truth } => twin(run, ground_truth),
        Command::Sweep { run, seeds } => sweep(run, seeds),
        Command::Metrics {
            reference,
            twin,
            out,
        } => metrics(&reference, &twin, out.as_deref()),
        Command::Ingest { files } => ingest(&files),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_arguments_is_a_usage_error() {
        assert_eq!(cli_main(["twinway"]), 2);
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(cli_main(["twinway", "simulate", "--bogus"]), 2);
    }

    #[test]
    fn help_exits_cleanly() {
        assert_eq!(cli_main(["twinway", "--help"]), 0);
    }

    #[test]
    fn invalid_override_is_a_runtime_error() {
        assert_eq!(cli_main(["twinway", "simulate", "--penetration", "1.5"]), 1);
    }

    #[test]
    fn command_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
