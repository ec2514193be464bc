use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use beaconloc::constraint::parse_constraint_list;
use beaconloc::harness::{
    run_sweep, run_trial_traced, Estimator, ExperimentConfig, ScenarioTemplate, TrialOptions,
};
use beaconloc::radio::RadioConfig;
use beaconloc::scenario::load_scenario;
use beaconloc::solver::{estimate_position, SolverConfig};

#[derive(Parser)]
#[command(
    name = "beaconloc",
    version,
    about = "Mobile-anchor range-free localization workbench"
)]
struct Cli {
    /// Overrides the scenario seed (trial) or the base seed (sweep).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scenario file utilities.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Estimate one position from a constraint list file.
    Solve {
        constraints: PathBuf,
        #[arg(long, default_value_t = SolverConfig::default().tol)]
        tol: f64,
        #[arg(long, default_value_t = SolverConfig::default().max_iter)]
        max_iter: usize,
    },
    /// Run one localization trial on a scenario file.
    Trial {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Switch::On)]
        relay: Switch,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Convex)]
        estimator: EstimatorArg,
        /// Print observation logs, relay events and constraints.
        #[arg(long)]
        dump_logs: bool,
    },
    /// Run a parameter sweep and write CSV results.
    Sweep {
        experiment: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Check a scenario file and print a short description.
    Validate { path: PathBuf },
    /// Write a random scenario from the default template.
    Generate {
        path: PathBuf,
        #[arg(long, default_value_t = 100)]
        nodes: usize,
        /// Side of a square obstacle at the field center.
        #[arg(long)]
        obstacle: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        doi: f64,
        #[arg(long, default_value_t = 0.0)]
        fading: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Convex,
    Baseline,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Convex => Estimator::Convex,
            EstimatorArg::Baseline => Estimator::Baseline,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scenario {
            action: ScenarioAction::Validate { path },
        } => {
            let s = load_scenario(&path).with_context(|| format!("invalid scenario {}", path.display()))?;
            println!(
                "ok: {} nodes, {} obstacles, {} power levels, seed {}",
                s.nodes.len(),
                s.obstacles.len(),
                s.radio.num_levels(),
                s.seed
            );
        }
        Command::Scenario {
            action:
                ScenarioAction::Generate {
                    path,
                    nodes,
                    obstacle,
                    doi,
                    fading,
                },
        } => {
            let mut template = ScenarioTemplate {
                node_count: nodes,
                radio: RadioConfig {
                    doi,
                    fading_f: fading,
                    ..RadioConfig::two_level(15.0)
                },
                ..ScenarioTemplate::default()
            };
            if let Some(side) = obstacle {
                template = template.with_central_obstacle(side);
            }
            template.validate()?;
            let scenario = template.instantiate(cli.seed.unwrap_or(0));
            scenario.write(&path)?;
            println!("wrote {}", path.display());
        }
        Command::Solve {
            constraints,
            tol,
            max_iter,
        } => {
            let text = fs::read_to_string(&constraints)
                .with_context(|| format!("cannot read {}", constraints.display()))?;
            let cs = parse_constraint_list(&text)?;
            let r = estimate_position(&cs, &SolverConfig { tol, max_iter })?;
            println!("x_hat = {} {}", r.x_hat.x, r.x_hat.y);
            println!("y = {}", r.y);
            println!("t = {}", r.t);
            println!("status = {}", r.status.as_str());
            println!("kkt_residual = {:e}", r.kkt_residual);
            println!("relaxation_tight = {}", r.relaxation_tight);
            println!("iterations = {}", r.iterations);
        }
        Command::Trial {
            scenario,
            relay,
            estimator,
            dump_logs,
        } => {
            let mut s = load_scenario(&scenario)
                .with_context(|| format!("invalid scenario {}", scenario.display()))?;
            if let Some(seed) = cli.seed {
                s.seed = seed;
            }
            let options = TrialOptions {
                relay_on: matches!(relay, Switch::On),
                estimator: estimator.into(),
                solver: SolverConfig::default(),
            };
            let (r, trace) = run_trial_traced(&s, &options)?;
            if dump_logs {
                print!("{}", trace.dump(&s.radio));
            }
            println!("stops = {}", trace.stops.len());
            println!("normalized_error = {}", fmt_opt(r.normalized_error));
            println!("localized_fraction = {:.4}", r.localized_fraction);
            println!("mean_constraint_count = {:.3}", r.mean_constraint_count);
            println!("relay_events = {}", r.relay_event_count);
            println!("runtime_ms = {:.3}", r.runtime.as_secs_f64() * 1e3);
        }
        Command::Sweep { experiment, out } => {
            let mut cfg = ExperimentConfig::load(&experiment)
                .with_context(|| format!("invalid experiment {}", experiment.display()))?;
            if let Some(seed) = cli.seed {
                cfg.base_seed = seed;
            }
            if let Some(w) = cli.workers {
                cfg.workers = w;
            }
            let result = run_sweep(&cfg)?;
            for p in &result.points {
                for (seed, msg) in &p.failures {
                    eprintln!("point {} seed {seed}: {msg}", p.point.index);
                }
            }
            let written = result.write_csv(&out)?;
            print!("{}", result.summary_csv()?);
            eprintln!("wrote {} files to {}", written.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
