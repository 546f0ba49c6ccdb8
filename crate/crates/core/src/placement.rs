//! The full solution stack: horizontal grid search at a fixed altitude,
//! golden-section search over altitude, two baseline heuristics, and a
//! lattice-exhaustive oracle for desk-scale verification.
//!
//! Every candidate position is scored by the same pipeline: pick the GBS with
//! the highest backhaul capacity, invert the rate function into a per-(user,
//! tier) bandwidth demand table, and solve the resulting two-capacity
//! knapsack.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{self, Point3};
use crate::error::{Error, Result};
use crate::knapsack::{self, Assignment};
use crate::rate_inversion::{self, DemandTable};
use crate::scenario::{Scenario, RNG_STREAM_HEURISTIC};

/// Shrink factor of the golden-section bracket, `(sqrt 5 - 1) / 2`.
pub fn golden_ratio() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

/// Default cap on exhaustive-oracle lattice points.
pub const DEFAULT_ORACLE_POINT_CAP: usize = 100_000;

/// How the fixed-position heuristic weights the user centroid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentroidWeighting {
    /// Weight each user by its top-tier willingness (profit-oriented).
    TopTierWillingness,
    /// Plain arithmetic mean of user coordinates.
    Unweighted,
}

/// Search configuration shared by all solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Altitude bracket, meters.
    pub h_low_m: f64,
    pub h_high_m: f64,
    /// Golden-section stop width, meters.
    pub epsilon_g_m: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub seed: u64,
    pub replications_random: usize,
    pub rate_unit_bps: f64,
    pub bw_unit_hz: f64,
    pub bisect_tol_hz: f64,
    pub centroid_weighting: CentroidWeighting,
    pub cell_budget: u64,
}

impl SearchConfig {
    /// Defaults mirroring the reference setup: 50-cell grid as 5 rows by 10
    /// columns, 1 m stop width, 50 random replications.
    pub fn for_scenario(scenario: &Scenario) -> Self {
        SearchConfig {
            h_low_m: scenario.altitude_bracket_m[0],
            h_high_m: scenario.altitude_bracket_m[1],
            epsilon_g_m: 1.0,
            grid_rows: 5,
            grid_cols: 10,
            seed: scenario.seed,
            replications_random: 50,
            rate_unit_bps: knapsack::DEFAULT_RATE_UNIT_BPS,
            bw_unit_hz: knapsack::DEFAULT_BW_UNIT_HZ,
            bisect_tol_hz: rate_inversion::DEFAULT_BISECTION_TOL_HZ,
            centroid_weighting: CentroidWeighting::TopTierWillingness,
            cell_budget: knapsack::DEFAULT_CELL_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_low_m > 0.0 && self.h_high_m > self.h_low_m) {
            return Err(Error::validation("h_low_m/h_high_m", "need 0 < low < high"));
        }
        if self.epsilon_g_m <= 0.0 {
            return Err(Error::validation("epsilon_g_m", "must be positive"));
        }
        if self.grid_rows < 1 || self.grid_cols < 1 {
            return Err(Error::validation("grid", "need at least one cell"));
        }
        if self.rate_unit_bps <= 0.0 || self.bw_unit_hz <= 0.0 || self.bisect_tol_hz <= 0.0 {
            return Err(Error::validation("units", "must be positive"));
        }
        Ok(())
    }

    /// Number of grid cells evaluated per fixed-altitude sweep.
    pub fn grid_cells(&self) -> usize {
        self.grid_rows * self.grid_cols
    }
}

/// A solved placement: position, backhaul anchor, tier assignment and the
/// bookkeeping needed to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementSolution {
    pub uav: Point3,
    pub gbs_index: usize,
    pub assignment: Assignment,
    pub profit: f64,
    /// Bandwidth actually allocated to each served user, Hz.
    pub per_user_bw_hz: BTreeMap<usize, f64>,
    pub backhaul_capacity_bps: f64,
    pub backhaul_slack_bps: f64,
    pub access_slack_hz: f64,
    /// Knapsack solves performed to produce this solution.
    pub evaluations: u64,
    /// Golden-section loop iterations (zero for non-GSS solvers).
    pub gss_iterations: u32,
}

impl PlacementSolution {
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path.as_ref(), json).map_err(|e| Error::io(path.as_ref(), e))
    }
}

/// Score a single candidate position with the full pipeline.
pub fn evaluate_position(
    scenario: &Scenario,
    users: &[Point3],
    gbss: &[(Point3, f64)],
    pos: Point3,
    cfg: &SearchConfig,
) -> Result<PlacementSolution> {
    let params = &scenario.channel;
    let (gbs_index, capacity) = channel::best_gbs(params, &pos, gbss)?;
    let b_g = gbss[gbs_index].1;
    let demand = rate_inversion::build_demand_table(
        params,
        &pos,
        users,
        &scenario.tiers_bps,
        b_g,
        cfg.bisect_tol_hz,
    )?;
    let instance = knapsack::build_instance(
        &demand,
        &scenario.willingness,
        &scenario.tiers_bps,
        capacity,
        b_g,
    )?;
    let assignment = knapsack::solve_dp_with_budget(
        &instance,
        cfg.rate_unit_bps,
        cfg.bw_unit_hz,
        cfg.cell_budget,
    )?;
    Ok(finish_solution(pos, gbs_index, capacity, b_g, &demand, assignment))
}

fn finish_solution(
    pos: Point3,
    gbs_index: usize,
    capacity: f64,
    b_g: f64,
    demand: &DemandTable,
    assignment: Assignment,
) -> PlacementSolution {
    let per_user_bw_hz: BTreeMap<usize, f64> = assignment
        .chosen
        .iter()
        .map(|(&user, &tier)| (user, demand.required_bw_hz[user][tier].unwrap()))
        .collect();
    let profit = assignment.total_profit;
    let backhaul_slack_bps = capacity - assignment.used_rate_bps;
    let access_slack_hz = b_g - assignment.used_bw_hz;
    PlacementSolution {
        uav: pos,
        gbs_index,
        assignment,
        profit,
        per_user_bw_hz,
        backhaul_capacity_bps: capacity,
        backhaul_slack_bps,
        access_slack_hz,
        evaluations: 1,
        gss_iterations: 0,
    }
}

/// Center of grid cell `(row, col)` at altitude `h`.
fn cell_center(scenario: &Scenario, cfg: &SearchConfig, row: usize, col: usize, h: f64) -> Point3 {
    let w = scenario.region.width_m;
    let d = scenario.region.height_m;
    Point3::new(
        (col as f64 + 0.5) * w / cfg.grid_cols as f64,
        (row as f64 + 0.5) * d / cfg.grid_rows as f64,
        h,
    )
}

/// Evaluate every grid-cell center at a fixed altitude and return the most
/// profitable one. Ties resolve to the lowest cell index (row-major).
pub fn grid_search(scenario: &Scenario, h_fixed_m: f64, cfg: &SearchConfig) -> Result<PlacementSolution> {
    cfg.validate()?;
    let users = scenario.user_points();
    let gbss = scenario.gbs_entries();
    let cells: Vec<(usize, usize)> = (0..cfg.grid_rows)
        .flat_map(|r| (0..cfg.grid_cols).map(move |c| (r, c)))
        .collect();
    let evaluated: Vec<Result<PlacementSolution>> = cells
        .par_iter()
        .map(|&(r, c)| {
            let pos = cell_center(scenario, cfg, r, c, h_fixed_m);
            evaluate_position(scenario, &users, &gbss, pos, cfg)
        })
        .collect();
    let mut best: Option<PlacementSolution> = None;
    for sol in evaluated {
        let sol = sol?;
        match &best {
            Some(b) if sol.profit <= b.profit => {}
            _ => best = Some(sol),
        }
    }
    let mut best = best.expect("at least one grid cell");
    best.evaluations = cfg.grid_cells() as u64;
    Ok(best)
}

/// Golden-section search over altitude, with a full grid search at each
/// probed level. The bracket shrinks by the golden ratio each iteration; the
/// final answer is a grid search at the midpoint of the terminal bracket.
pub fn gss_optimize(scenario: &Scenario, cfg: &SearchConfig) -> Result<PlacementSolution> {
    cfg.validate()?;
    let gamma = golden_ratio();
    let mut h_low = cfg.h_low_m;
    let mut h_high = cfg.h_high_m;
    let mut iterations = 0u32;
    while h_high - h_low >= cfg.epsilon_g_m {
        let width = h_high - h_low;
        let h_inner_low = h_low + (1.0 - gamma) * width;
        let h_inner_high = h_low + gamma * width;
        let sol_high = grid_search(scenario, h_inner_high, cfg)?;
        let sol_low = grid_search(scenario, h_inner_low, cfg)?;
        if sol_high.profit >= sol_low.profit {
            h_low = h_inner_low;
        } else {
            h_high = h_inner_high;
        }
        iterations += 1;
    }
    let mut final_sol = grid_search(scenario, 0.5 * (h_low + h_high), cfg)?;
    final_sol.gss_iterations = iterations;
    final_sol.evaluations = (2 * iterations as u64 + 1) * cfg.grid_cells() as u64;
    Ok(final_sol)
}

/// Best of `replications_random` uniformly sampled positions in the region
/// times the altitude bracket. Deterministic given the seed; draws come from
/// the heuristic RNG stream so they never alias the scenario stream.
pub fn heuristic_random(scenario: &Scenario, cfg: &SearchConfig) -> Result<PlacementSolution> {
    cfg.validate()?;
    if cfg.replications_random < 1 {
        return Err(Error::validation("replications_random", "need at least one"));
    }
    let users = scenario.user_points();
    let gbss = scenario.gbs_entries();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(RNG_STREAM_HEURISTIC);
    let mut best: Option<PlacementSolution> = None;
    for _ in 0..cfg.replications_random {
        let pos = Point3::new(
            rng.gen_range(0.0..scenario.region.width_m),
            rng.gen_range(0.0..scenario.region.height_m),
            rng.gen_range(cfg.h_low_m..cfg.h_high_m),
        );
        let sol = evaluate_position(scenario, &users, &gbss, pos, cfg)?;
        match &best {
            Some(b) if sol.profit <= b.profit => {}
            _ => best = Some(sol),
        }
    }
    let mut best = best.unwrap();
    best.evaluations = cfg.replications_random as u64;
    Ok(best)
}

/// Willingness-weighted centroid of the users in the horizontal plane.
pub fn weighted_centroid(scenario: &Scenario, weighting: CentroidWeighting) -> (f64, f64) {
    let weights: Vec<f64> = match weighting {
        CentroidWeighting::TopTierWillingness => scenario
            .willingness
            .iter()
            .map(|row| *row.last().unwrap())
            .collect(),
        CentroidWeighting::Unweighted => vec![1.0; scenario.user_count()],
    };
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        // All-zero willingness degenerates to the plain mean.
        return weighted_centroid(scenario, CentroidWeighting::Unweighted);
    }
    let mut x = 0.0;
    let mut y = 0.0;
    for (u, w) in scenario.users.iter().zip(&weights) {
        x += u[0] * w;
        y += u[1] * w;
    }
    (x / total, y / total)
}

/// Fixed-position heuristic: the UAV hovers over the weighted user centroid
/// and tries the four quarter altitudes of the bracket.
pub fn heuristic_fixed(scenario: &Scenario, cfg: &SearchConfig) -> Result<PlacementSolution> {
    cfg.validate()?;
    let users = scenario.user_points();
    let gbss = scenario.gbs_entries();
    let (cx, cy) = weighted_centroid(scenario, cfg.centroid_weighting);
    let span = cfg.h_high_m - cfg.h_low_m;
    let mut best: Option<PlacementSolution> = None;
    for k in 1..=4u32 {
        let h = cfg.h_low_m + k as f64 * span / 4.0;
        let sol = evaluate_position(scenario, &users, &gbss, Point3::new(cx, cy, h), cfg)?;
        match &best {
            Some(b) if sol.profit <= b.profit => {}
            _ => best = Some(sol),
        }
    }
    let mut best = best.unwrap();
    best.evaluations = 4;
    Ok(best)
}

/// Evaluate every point of an `nx * ny * nh` cell-centered lattice over the
/// region and altitude bracket; exact over the lattice. With `nh = 1` and the
/// lattice matching the grid layout this reproduces `grid_search` at the
/// bracket midpoint.
pub fn exhaustive_oracle(
    scenario: &Scenario,
    cfg: &SearchConfig,
    nx: usize,
    ny: usize,
    nh: usize,
    point_cap: usize,
) -> Result<PlacementSolution> {
    cfg.validate()?;
    if nx < 1 || ny < 1 || nh < 1 {
        return Err(Error::Domain("lattice needs at least one point per axis".into()));
    }
    let total = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(nh))
        .ok_or_else(|| Error::ResourceLimit("lattice size overflow".into()))?;
    if total > point_cap {
        return Err(Error::ResourceLimit(format!(
            "{total} lattice points exceed the cap of {point_cap}"
        )));
    }
    let users = scenario.user_points();
    let gbss = scenario.gbs_entries();
    let w = scenario.region.width_m;
    let d = scenario.region.height_m;
    let span = cfg.h_high_m - cfg.h_low_m;

    let mut points = Vec::with_capacity(total);
    for ih in 0..nh {
        let h = cfg.h_low_m + (ih as f64 + 0.5) * span / nh as f64;
        for iy in 0..ny {
            for ix in 0..nx {
                points.push(Point3::new(
                    (ix as f64 + 0.5) * w / nx as f64,
                    (iy as f64 + 0.5) * d / ny as f64,
                    h,
                ));
            }
        }
    }
    let evaluated: Vec<Result<PlacementSolution>> = points
        .par_iter()
        .map(|&pos| evaluate_position(scenario, &users, &gbss, pos, cfg))
        .collect();
    let mut best: Option<PlacementSolution> = None;
    for sol in evaluated {
        let sol = sol?;
        match &best {
            Some(b) if sol.profit <= b.profit => {}
            _ => best = Some(sol),
        }
    }
    let mut best = best.unwrap();
    best.evaluations = total as u64;
    Ok(best)
}

/// Which solver produced a solution; used by the experiment harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Gss,
    Random,
    Fixed,
    Oracle,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Gss => "gss",
            SolverKind::Random => "random",
            SolverKind::Fixed => "fixed",
            SolverKind::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gss" => Ok(SolverKind::Gss),
            "random" => Ok(SolverKind::Random),
            "fixed" => Ok(SolverKind::Fixed),
            "oracle" => Ok(SolverKind::Oracle),
            other => Err(Error::Domain(format!(
                "unknown solver `{other}` (expected gss|random|fixed|oracle)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{self, GenSpec};
    use approx::assert_relative_eq;

    fn small_scenario(seed: u64) -> Scenario {
        let mut spec = GenSpec::new(6, 2, 1, seed);
        spec.region = crate::scenario::Region {
            width_m: 600.0,
            height_m: 600.0,
        };
        scenario::generate(&spec).unwrap()
    }

    fn small_cfg(scenario: &Scenario) -> SearchConfig {
        let mut cfg = SearchConfig::for_scenario(scenario);
        cfg.grid_rows = 2;
        cfg.grid_cols = 2;
        cfg.replications_random = 5;
        cfg.bw_unit_hz = 20.0e3;
        cfg
    }

    #[test]
    fn single_cell_grid_lands_at_region_center() {
        let scenario = small_scenario(1);
        let mut cfg = small_cfg(&scenario);
        cfg.grid_rows = 1;
        cfg.grid_cols = 1;
        let sol = grid_search(&scenario, 100.0, &cfg).unwrap();
        assert_relative_eq!(sol.uav.x, 300.0);
        assert_relative_eq!(sol.uav.y, 300.0);
        assert_relative_eq!(sol.uav.h, 100.0);
        assert_eq!(sol.evaluations, 1);
    }

    #[test]
    fn grid_search_matches_cell_by_cell_evaluation() {
        let scenario = small_scenario(2);
        let cfg = small_cfg(&scenario);
        let sol = grid_search(&scenario, 150.0, &cfg).unwrap();
        // Independent four-cell oracle.
        let users = scenario.user_points();
        let gbss = scenario.gbs_entries();
        let mut best_profit = f64::NEG_INFINITY;
        for r in 0..2 {
            for c in 0..2 {
                let pos = cell_center(&scenario, &cfg, r, c, 150.0);
                let s = evaluate_position(&scenario, &users, &gbss, pos, &cfg).unwrap();
                best_profit = best_profit.max(s.profit);
            }
        }
        assert_relative_eq!(sol.profit, best_profit);
        assert_eq!(sol.evaluations, 4);
    }

    #[test]
    fn zero_willingness_means_zero_profit_everywhere() {
        let mut scenario = small_scenario(3);
        for row in scenario.willingness.iter_mut() {
            for v in row.iter_mut() {
                *v = 0.0;
            }
        }
        let cfg = small_cfg(&scenario);
        let sol = grid_search(&scenario, 200.0, &cfg).unwrap();
        assert_eq!(sol.profit, 0.0);
    }

    #[test]
    fn gss_iteration_count_follows_shrinkage_law() {
        // Closed form: smallest R with 450 * gamma^R <= 1 is 13.
        let gamma = golden_ratio();
        let mut width = 450.0f64;
        let mut expected = 0u32;
        while width >= 1.0 {
            width *= gamma;
            expected += 1;
        }
        assert_eq!(expected, 13);

        let scenario = small_scenario(4);
        let cfg = small_cfg(&scenario);
        let sol = gss_optimize(&scenario, &cfg).unwrap();
        assert_eq!(sol.gss_iterations, 13);
        assert_eq!(sol.evaluations, (2 * 13 + 1) * 4);
    }

    #[test]
    fn gss_degenerate_bracket_runs_single_grid_search() {
        let scenario = small_scenario(5);
        let mut cfg = small_cfg(&scenario);
        cfg.h_low_m = 100.0;
        cfg.h_high_m = 100.5;
        cfg.epsilon_g_m = 1.0;
        let sol = gss_optimize(&scenario, &cfg).unwrap();
        assert_eq!(sol.gss_iterations, 0);
        assert_eq!(sol.evaluations, 4);
        assert_relative_eq!(sol.uav.h, 100.25);
    }

    #[test]
    fn gss_serves_single_user_fully_when_capacity_is_generous() {
        let mut scenario = small_scenario(6);
        scenario.users.truncate(1);
        scenario.willingness.truncate(1);
        scenario.willingness[0] = vec![0.6, 1.4];
        let cfg = small_cfg(&scenario);
        let sol = gss_optimize(&scenario, &cfg).unwrap();
        assert_relative_eq!(sol.profit, 1.4);
    }

    #[test]
    fn random_heuristic_is_seed_deterministic() {
        let scenario = small_scenario(7);
        let mut cfg = small_cfg(&scenario);
        cfg.replications_random = 1;
        let a = heuristic_random(&scenario, &cfg).unwrap();
        let b = heuristic_random(&scenario, &cfg).unwrap();
        assert_eq!(a.uav, b.uav);
        assert_eq!(a.profit, b.profit);
    }

    #[test]
    fn more_random_replications_never_hurt() {
        let scenario = small_scenario(8);
        let mut cfg = small_cfg(&scenario);
        cfg.replications_random = 10;
        let p10 = heuristic_random(&scenario, &cfg).unwrap().profit;
        cfg.replications_random = 50;
        let p50 = heuristic_random(&scenario, &cfg).unwrap().profit;
        assert!(p50 >= p10);
    }

    #[test]
    fn centroid_of_coincident_users_is_that_point() {
        let mut scenario = small_scenario(9);
        for u in scenario.users.iter_mut() {
            *u = [123.0, 456.0];
        }
        let (x, y) = weighted_centroid(&scenario, CentroidWeighting::TopTierWillingness);
        assert_relative_eq!(x, 123.0);
        assert_relative_eq!(y, 456.0);
    }

    #[test]
    fn centroid_symmetric_equal_weights() {
        let mut scenario = small_scenario(10);
        scenario.users = vec![[100.0, 300.0], [500.0, 300.0]];
        scenario.willingness = vec![vec![0.5, 1.0], vec![0.5, 1.0]];
        let (x, y) = weighted_centroid(&scenario, CentroidWeighting::TopTierWillingness);
        assert_relative_eq!(x, 300.0);
        assert_relative_eq!(y, 300.0);
    }

    #[test]
    fn fixed_heuristic_tries_quarter_altitudes() {
        let scenario = small_scenario(11);
        let cfg = small_cfg(&scenario);
        let sol = heuristic_fixed(&scenario, &cfg).unwrap();
        let span = cfg.h_high_m - cfg.h_low_m;
        let quarters: Vec<f64> = (1..=4).map(|k| cfg.h_low_m + k as f64 * span / 4.0).collect();
        assert!(quarters.iter().any(|q| (sol.uav.h - q).abs() < 1e-9));
        assert_eq!(sol.evaluations, 4);
    }

    #[test]
    fn oracle_with_grid_lattice_reproduces_grid_search() {
        let scenario = small_scenario(12);
        let mut cfg = small_cfg(&scenario);
        cfg.h_low_m = 120.0;
        cfg.h_high_m = 180.0;
        let oracle = exhaustive_oracle(&scenario, &cfg, 2, 2, 1, 1000).unwrap();
        let grid = grid_search(&scenario, 150.0, &cfg).unwrap();
        assert_eq!(oracle.uav, grid.uav);
        assert_relative_eq!(oracle.profit, grid.profit);
    }

    #[test]
    fn oracle_dominates_heuristics_on_lattice_candidates() {
        let scenario = small_scenario(13);
        let mut cfg = small_cfg(&scenario);
        cfg.replications_random = 3;
        let oracle = exhaustive_oracle(&scenario, &cfg, 5, 5, 5, 1000).unwrap();
        let fixed = heuristic_fixed(&scenario, &cfg).unwrap();
        // The oracle maximizes over a superset of comparable candidates; at
        // desk scale it should not fall below the fixed heuristic by more
        // than lattice coarseness allows. Sanity-check it is at least close.
        assert!(oracle.profit >= fixed.profit * 0.8);
    }

    #[test]
    fn oracle_point_cap_enforced() {
        let scenario = small_scenario(14);
        let cfg = small_cfg(&scenario);
        assert!(matches!(
            exhaustive_oracle(&scenario, &cfg, 100, 100, 100, 1000),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn gss_bracket_width_shrinks_by_gamma_exactly() {
        let gamma = golden_ratio();
        let mut h_low = 50.0f64;
        let mut h_high = 500.0f64;
        let w0 = h_high - h_low;
        for k in 1..=13 {
            let width = h_high - h_low;
            let inner_low = h_low + (1.0 - gamma) * width;
            let inner_high = h_low + gamma * width;
            // Either branch shrinks the bracket by exactly gamma.
            if k % 2 == 0 {
                h_low = inner_low;
            } else {
                h_high = inner_high;
            }
            let expected = w0 * gamma.powi(k);
            assert_relative_eq!(h_high - h_low, expected, max_relative = 1e-9);
        }
    }
}
