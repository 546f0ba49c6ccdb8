//! `uavbs`: generate scenarios, solve placements, run experiment batches
//! and render report plots from the command line.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use uavbs_core::{audit, experiment, placement, plots, scenario};
use uavbs_core::{ExperimentPlan, GenSpec, Region, Scenario, SearchConfig, SolverKind};

#[derive(Parser)]
#[command(name = "uavbs", version, about = "UAV base-station placement and tiered rate allocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario and write it as JSON.
    Generate(GenerateArgs),
    /// Solve a scenario with one solver and write the solution as JSON.
    Solve(SolveArgs),
    /// Run an experiment plan and write CSV results.
    Experiment(ExperimentArgs),
    /// Render SVG charts from an experiment results CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of ground users.
    #[arg(long)]
    n: usize,
    /// Number of terrestrial base stations.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Tier set: 1 = {1,2} Mbps, 2 = {1,2,4}, 3 = {1,2,4,8}.
    #[arg(long, default_value_t = 2)]
    tiers: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1500.0)]
    region_width_m: f64,
    #[arg(long, default_value_t = 1500.0)]
    region_height_m: f64,
    /// Output scenario path (JSON).
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Scenario path (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Solver: gss, random, fixed or oracle.
    #[arg(long, default_value = "gss")]
    solver: String,
    /// Output solution path (JSON).
    #[arg(long, short)]
    out: PathBuf,
    /// Grid as rows,cols.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Altitude convergence threshold in metres.
    #[arg(long)]
    epsilon_m: Option<f64>,
    /// Knapsack rate unit in bps.
    #[arg(long)]
    rate_unit_bps: Option<f64>,
    /// Knapsack bandwidth unit in Hz.
    #[arg(long)]
    bw_unit_hz: Option<f64>,
    /// Oracle lattice as nx,ny,nh (oracle solver only).
    #[arg(long, value_delimiter = ',', default_value = "10,10,9")]
    oracle_lattice: Vec<usize>,
    /// Re-verify the solution and fail on any violation.
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment plan path (JSON).
    #[arg(long)]
    plan: PathBuf,
    /// Output directory for results.csv (and improvement.csv).
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Results CSV written by the experiment command.
    #[arg(long)]
    results: PathBuf,
    /// Optional improvement CSV for the single-tier comparison chart.
    #[arg(long)]
    improvements: Option<PathBuf>,
    /// Output directory for the SVG files.
    #[arg(long)]
    out_dir: PathBuf,
}

fn init_workers() {
    if let Ok(value) = std::env::var("UAVBS_WORKERS") {
        match value.parse::<usize>() {
            Ok(workers) if workers > 0 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build_global()
                    .ok();
            }
            _ => eprintln!("ignoring invalid UAVBS_WORKERS value {value:?}"),
        }
    }
}

fn run() -> uavbs_core::Result<()> {
    let cli = Cli::parse();
    init_workers();
    match cli.command {
        Command::Generate(args) => {
            let mut spec = GenSpec::new(args.n, args.m, args.tiers, args.seed);
            spec.region = Region {
                width_m: args.region_width_m,
                height_m: args.region_height_m,
            };
            let sc = scenario::generate(&spec)?;
            sc.save(&args.out)?;
            println!(
                "wrote scenario: {} users, {} base stations, {} tiers, seed {}",
                sc.user_count(),
                sc.gbss.len(),
                sc.tiers_bps.len(),
                sc.seed
            );
        }
        Command::Solve(args) => {
            let sc = Scenario::load(&args.scenario)?;
            let solver = SolverKind::from_str(&args.solver)?;
            let mut cfg = SearchConfig::for_scenario(&sc);
            if let Some(grid) = &args.grid {
                if grid.len() != 2 {
                    return Err(uavbs_core::Error::validation("--grid", "expected rows,cols"));
                }
                cfg.grid_rows = grid[0];
                cfg.grid_cols = grid[1];
            }
            if args.oracle_lattice.len() != 3 {
                return Err(uavbs_core::Error::validation(
                    "--oracle-lattice",
                    "expected nx,ny,nh",
                ));
            }
            if let Some(eps) = args.epsilon_m {
                cfg.epsilon_g_m = eps;
            }
            if let Some(unit) = args.rate_unit_bps {
                cfg.rate_unit_bps = unit;
            }
            if let Some(unit) = args.bw_unit_hz {
                cfg.bw_unit_hz = unit;
            }
            cfg.seed = sc.seed;
            cfg.validate()?;
            let solution = match solver {
                SolverKind::Gss => placement::gss_optimize(&sc, &cfg)?,
                SolverKind::Random => placement::heuristic_random(&sc, &cfg)?,
                SolverKind::Fixed => placement::heuristic_fixed(&sc, &cfg)?,
                SolverKind::Oracle => placement::exhaustive_oracle(
                    &sc,
                    &cfg,
                    args.oracle_lattice[0],
                    args.oracle_lattice[1],
                    args.oracle_lattice[2],
                    placement::DEFAULT_ORACLE_POINT_CAP,
                )?,
            };
            solution.save(&args.out)?;
            println!(
                "solver {}: profit {:.6}, position ({:.1}, {:.1}, {:.1}) m, {} users served",
                solver.name(),
                solution.profit,
                solution.uav.x,
                solution.uav.y,
                solution.uav.h,
                solution.assignment.chosen.len()
            );
            if args.audit {
                let violations = audit::audit_solution(&sc, &solution, &cfg)?;
                if violations.is_empty() {
                    println!("audit: clean");
                } else {
                    for v in &violations {
                        eprintln!("audit violation: {v}");
                    }
                    return Err(uavbs_core::Error::Validation {
                        path: args.out.display().to_string(),
                        message: format!("{} audit violations", violations.len()),
                    });
                }
            }
        }
        Command::Experiment(args) => {
            let plan = ExperimentPlan::load(&args.plan)?;
            let report = experiment::run_experiment(&plan, &args.out_dir)?;
            println!(
                "wrote {} result rows to {}",
                report.rows.len(),
                args.out_dir.join("results.csv").display()
            );
            if !report.failures.is_empty() {
                eprintln!("{} instance failures:", report.failures.len());
                for failure in &report.failures {
                    eprintln!("  {failure}");
                }
            }
        }
        Command::Report(args) => {
            let rows = experiment::read_report_csv(&args.results)?;
            let improvements = match &args.improvements {
                Some(path) => experiment::read_improvement_csv(path)?,
                None => Vec::new(),
            };
            let written = plots::render_plots(&rows, &improvements, &args.out_dir)?;
            for path in written {
                println!("wrote {}", path.display());
            }
        }
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
