//! Experiment pipeline: scenario batches, all solvers, metrics, CSV output.
//!
//! A plan names the user counts, tier sets, replication count and solvers to
//! run. Each replication derives its own seed from the plan seed, so the
//! whole report is reproducible byte for byte. Wall-clock timings are
//! recorded only when the plan opts in (`record_timings`), keeping the
//! default output deterministic across runs and machines.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::placement::{self, PlacementSolution, SearchConfig, SolverKind};
use crate::scenario::{self, GenSpec, Region, Scenario};

/// Header of the results CSV, in column order.
pub const REPORT_CSV_HEADER: &[&str] = &[
    "instance_id",
    "seed",
    "n",
    "tier_set",
    "solver",
    "profit",
    "normalized_profit",
    "coverage",
    "iterations",
    "knapsack_solves",
    "wall_time_s",
];

/// Header of the single-tier improvement CSV.
pub const IMPROVEMENT_CSV_HEADER: &[&str] =
    &["instance_id", "seed", "n", "tier_set", "improvement", "defined"];

/// A grid of instances to run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n_values: Vec<usize>,
    pub tier_sets: Vec<u8>,
    pub replications: u32,
    pub solvers: Vec<SolverKind>,
    pub seed: u64,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_region")]
    pub region: Region,
    #[serde(default = "default_grid")]
    pub grid: [usize; 2],
    #[serde(default = "default_epsilon")]
    pub epsilon_g_m: f64,
    #[serde(default = "default_rate_unit")]
    pub rate_unit_bps: f64,
    #[serde(default = "default_bw_unit")]
    pub bw_unit_hz: f64,
    #[serde(default = "default_random_reps")]
    pub replications_random: usize,
    /// `[nx, ny, nh]` lattice for the oracle solver, when enabled.
    #[serde(default = "default_oracle_lattice")]
    pub oracle_lattice: [usize; 3],
    /// Also run the single-tier pricing comparison per replication.
    #[serde(default)]
    pub single_tier: bool,
    /// Record wall-clock times (makes the CSV non-reproducible).
    #[serde(default)]
    pub record_timings: bool,
}

fn default_m() -> usize {
    4
}
fn default_region() -> Region {
    Region {
        width_m: 1500.0,
        height_m: 1500.0,
    }
}
fn default_grid() -> [usize; 2] {
    [5, 10]
}
fn default_epsilon() -> f64 {
    1.0
}
fn default_rate_unit() -> f64 {
    crate::knapsack::DEFAULT_RATE_UNIT_BPS
}
fn default_bw_unit() -> f64 {
    crate::knapsack::DEFAULT_BW_UNIT_HZ
}
fn default_random_reps() -> usize {
    50
}
fn default_oracle_lattice() -> [usize; 3] {
    [10, 10, 9]
}

impl ExperimentPlan {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.tier_sets.is_empty() || self.solvers.is_empty() {
            return Err(Error::validation(
                "plan",
                "need at least one n value, tier set and solver",
            ));
        }
        if self.replications == 0 {
            return Err(Error::validation("replications", "need at least one"));
        }
        Ok(())
    }
}

/// One (instance, solver) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance_id: String,
    pub seed: u64,
    pub n: usize,
    pub tier_set: u8,
    pub solver: String,
    pub profit: f64,
    pub normalized_profit: f64,
    pub coverage: f64,
    pub iterations: u32,
    pub knapsack_solves: u64,
    pub wall_time_s: f64,
}

/// One single-tier comparison result; `improvement` is `None` when the
/// single-tier profit is zero and the ratio is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub instance_id: String,
    pub seed: u64,
    pub n: usize,
    pub tier_set: u8,
    pub improvement: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub improvements: Vec<ImprovementRow>,
    /// Human-readable descriptions of per-instance failures.
    pub failures: Vec<String>,
}

/// Derive a per-replication seed from the plan seed and instance coordinates
/// (splitmix64 chaining; stable across platforms).
pub fn derive_seed(base: u64, n: usize, tier_set: u8, replication: u32) -> u64 {
    let mut state = base;
    for salt in [n as u64, tier_set as u64, replication as u64] {
        state = state
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(salt.wrapping_mul(0xBF58_476D_1CE4_E5B9));
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        state = z ^ (z >> 31);
    }
    state
}

/// Ratio of delivered tier rates to the maximum deliverable `n * delta_s`.
pub fn coverage_metric(scenario: &Scenario, solution: &PlacementSolution) -> f64 {
    let deltas = scenario.tiers_bps.deltas_bps();
    let delivered: f64 = solution
        .assignment
        .chosen
        .values()
        .map(|&tier| deltas[tier])
        .sum();
    delivered / (scenario.user_count() as f64 * scenario.tiers_bps.top_bps())
}

/// Profit normalized by the attainable upper bound: everyone served at the
/// top tier, i.e. the sum of top-tier willingness values.
pub fn normalized_profit(scenario: &Scenario, profit: f64) -> f64 {
    let bound: f64 = scenario.willingness.iter().map(|row| row.last().unwrap()).sum();
    if bound > 0.0 {
        profit / bound
    } else {
        0.0
    }
}

/// Profit gain of multi-tier pricing over the degenerate single-tier offer
/// (tier = mean of tiers, willingness = row mean). `None` when the
/// single-tier profit is zero.
pub fn single_tier_comparison(scenario: &Scenario, cfg: &SearchConfig) -> Result<Option<f64>> {
    let s = scenario.tiers_bps.len();
    if s < 2 {
        return Err(Error::Domain(
            "single-tier comparison needs at least two tiers".into(),
        ));
    }
    let multi = placement::gss_optimize(scenario, cfg)?;

    let mean_delta =
        scenario.tiers_bps.deltas_bps().iter().sum::<f64>() / s as f64;
    let mut degenerate = scenario.clone();
    degenerate.tiers_bps = crate::rate_inversion::RateTiers::new(vec![mean_delta])?;
    degenerate.willingness = scenario
        .willingness
        .iter()
        .map(|row| vec![row.iter().sum::<f64>() / s as f64])
        .collect();
    let single = placement::gss_optimize(&degenerate, cfg)?;

    if single.profit <= 0.0 {
        return Ok(None);
    }
    Ok(Some((multi.profit - single.profit) / single.profit))
}

fn run_solver(
    scenario: &Scenario,
    cfg: &SearchConfig,
    solver: SolverKind,
    oracle_lattice: [usize; 3],
) -> Result<PlacementSolution> {
    match solver {
        SolverKind::Gss => placement::gss_optimize(scenario, cfg),
        SolverKind::Random => placement::heuristic_random(scenario, cfg),
        SolverKind::Fixed => placement::heuristic_fixed(scenario, cfg),
        SolverKind::Oracle => placement::exhaustive_oracle(
            scenario,
            cfg,
            oracle_lattice[0],
            oracle_lattice[1],
            oracle_lattice[2],
            placement::DEFAULT_ORACLE_POINT_CAP,
        ),
    }
}

fn search_config(plan: &ExperimentPlan, scenario: &Scenario, seed: u64) -> SearchConfig {
    let mut cfg = SearchConfig::for_scenario(scenario);
    cfg.grid_rows = plan.grid[0];
    cfg.grid_cols = plan.grid[1];
    cfg.epsilon_g_m = plan.epsilon_g_m;
    cfg.rate_unit_bps = plan.rate_unit_bps;
    cfg.bw_unit_hz = plan.bw_unit_hz;
    cfg.replications_random = plan.replications_random;
    cfg.seed = seed;
    cfg
}

/// Run the whole plan and write `results.csv` (and `improvement.csv` when
/// the single-tier comparison is enabled) into `out_dir`. Per-instance
/// failures are collected, not fatal.
pub fn run_experiment(plan: &ExperimentPlan, out_dir: impl AsRef<Path>) -> Result<ExperimentReport> {
    plan.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut tasks = Vec::new();
    for &n in &plan.n_values {
        for &tier_set in &plan.tier_sets {
            for rep in 0..plan.replications {
                tasks.push((n, tier_set, rep));
            }
        }
    }

    type TaskOutcome = (Vec<ReportRow>, Option<ImprovementRow>, Vec<String>);
    let outcomes: Vec<TaskOutcome> = tasks
        .par_iter()
        .map(|&(n, tier_set, rep)| {
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            let seed = derive_seed(plan.seed, n, tier_set, rep);
            let instance_id = format!("n{n}_t{tier_set}_r{rep}");

            let mut spec = GenSpec::new(n, plan.m, tier_set, seed);
            spec.region = plan.region;
            let scenario = match scenario::generate(&spec) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("{instance_id}: generation failed: {e}"));
                    return (rows, None, failures);
                }
            };
            let cfg = search_config(plan, &scenario, seed);

            for &solver in &plan.solvers {
                let start = Instant::now();
                match run_solver(&scenario, &cfg, solver, plan.oracle_lattice) {
                    Ok(solution) => {
                        let wall = if plan.record_timings {
                            start.elapsed().as_secs_f64()
                        } else {
                            0.0
                        };
                        rows.push(ReportRow {
                            instance_id: instance_id.clone(),
                            seed,
                            n,
                            tier_set,
                            solver: solver.name().to_string(),
                            profit: solution.profit,
                            normalized_profit: normalized_profit(&scenario, solution.profit),
                            coverage: coverage_metric(&scenario, &solution),
                            iterations: solution.gss_iterations,
                            knapsack_solves: solution.evaluations,
                            wall_time_s: wall,
                        });
                    }
                    Err(e) => {
                        failures.push(format!("{instance_id}/{}: {e}", solver.name()));
                    }
                }
            }

            let improvement = if plan.single_tier {
                match single_tier_comparison(&scenario, &cfg) {
                    Ok(value) => Some(ImprovementRow {
                        instance_id: instance_id.clone(),
                        seed,
                        n,
                        tier_set,
                        improvement: value,
                    }),
                    Err(e) => {
                        failures.push(format!("{instance_id}/single_tier: {e}"));
                        None
                    }
                }
            } else {
                None
            };

            (rows, improvement, failures)
        })
        .collect();

    let mut report = ExperimentReport::default();
    for (rows, improvement, failures) in outcomes {
        report.rows.extend(rows);
        report.improvements.extend(improvement);
        report.failures.extend(failures);
    }
    // Deterministic ordering regardless of worker scheduling.
    report
        .rows
        .sort_by(|a, b| (&a.instance_id, &a.solver).cmp(&(&b.instance_id, &b.solver)));
    report
        .improvements
        .sort_by(|a, b| a.instance_id.cmp(&b.instance_id));

    write_report_csv(&report.rows, &out_dir.join("results.csv"))?;
    if plan.single_tier {
        write_improvement_csv(&report.improvements, &out_dir.join("improvement.csv"))?;
    }
    Ok(report)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

pub fn write_report_csv(rows: &[ReportRow], path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())
        .map_err(Error::Csv)?;
    writer.write_record(REPORT_CSV_HEADER)?;
    for row in rows {
        writer.write_record([
            row.instance_id.as_str(),
            &row.seed.to_string(),
            &row.n.to_string(),
            &row.tier_set.to_string(),
            &row.solver,
            &fmt_f64(row.profit),
            &fmt_f64(row.normalized_profit),
            &fmt_f64(row.coverage),
            &row.iterations.to_string(),
            &row.knapsack_solves.to_string(),
            &fmt_f64(row.wall_time_s),
        ])?;
    }
    writer.flush().map_err(|e| Error::io(path.as_ref(), e))?;
    Ok(())
}

pub fn read_report_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let mut reader = csv::Reader::from_path(path.as_ref()).map_err(Error::Csv)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        let field = |i: usize| -> &str { r.get(i).unwrap_or("") };
        let parse_err = |i: usize, what: &str| {
            Error::validation(format!("csv column {i}"), format!("bad {what}: {}", field(i)))
        };
        rows.push(ReportRow {
            instance_id: field(0).to_string(),
            seed: field(1).parse().map_err(|_| parse_err(1, "seed"))?,
            n: field(2).parse().map_err(|_| parse_err(2, "n"))?,
            tier_set: field(3).parse().map_err(|_| parse_err(3, "tier_set"))?,
            solver: field(4).to_string(),
            profit: field(5).parse().map_err(|_| parse_err(5, "profit"))?,
            normalized_profit: field(6).parse().map_err(|_| parse_err(6, "normalized_profit"))?,
            coverage: field(7).parse().map_err(|_| parse_err(7, "coverage"))?,
            iterations: field(8).parse().map_err(|_| parse_err(8, "iterations"))?,
            knapsack_solves: field(9).parse().map_err(|_| parse_err(9, "knapsack_solves"))?,
            wall_time_s: field(10).parse().map_err(|_| parse_err(10, "wall_time_s"))?,
        });
    }
    Ok(rows)
}

pub fn write_improvement_csv(rows: &[ImprovementRow], path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{}", IMPROVEMENT_CSV_HEADER.join(",")).map_err(|e| Error::io(path.as_ref(), e))?;
    for row in rows {
        let (value, defined) = match row.improvement {
            Some(v) => (fmt_f64(v), "true"),
            None => ("".to_string(), "false"),
        };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.instance_id, row.seed, row.n, row.tier_set, value, defined
        )
        .map_err(|e| Error::io(path.as_ref(), e))?;
    }
    out.flush().map_err(|e| Error::io(path.as_ref(), e))?;
    Ok(())
}

pub fn read_improvement_csv(path: impl AsRef<Path>) -> Result<Vec<ImprovementRow>> {
    let mut reader = csv::Reader::from_path(path.as_ref()).map_err(Error::Csv)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        let field = |i: usize| -> &str { r.get(i).unwrap_or("") };
        let improvement = if field(5) == "true" {
            Some(field(4).parse().map_err(|_| {
                Error::validation("csv column 4", format!("bad improvement: {}", field(4)))
            })?)
        } else {
            None
        };
        rows.push(ImprovementRow {
            instance_id: field(0).to_string(),
            seed: field(1).parse().map_err(|_| Error::validation("csv column 1", "bad seed"))?,
            n: field(2).parse().map_err(|_| Error::validation("csv column 2", "bad n"))?,
            tier_set: field(3)
                .parse()
                .map_err(|_| Error::validation("csv column 3", "bad tier_set"))?,
            improvement,
        });
    }
    Ok(rows)
}
