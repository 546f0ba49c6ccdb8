//! Independent re-verification of emitted solutions.
//!
//! Recomputes the backhaul capacity, the demand table and the constraint
//! sums at the solution's position from scratch and checks every contract a
//! valid placement must satisfy. Used by the test suites and available from
//! the CLI; it shares no state with the solvers beyond the channel formulas.

use crate::channel;
use crate::error::Result;
use crate::placement::{PlacementSolution, SearchConfig};
use crate::rate_inversion;
use crate::scenario::Scenario;

const PROFIT_EPS: f64 = 1e-9;
const BW_MATCH_EPS_HZ: f64 = 1e-6;

/// Check a solution against the scenario. Returns the list of violations;
/// empty means the solution audits clean.
pub fn audit_solution(
    scenario: &Scenario,
    solution: &PlacementSolution,
    cfg: &SearchConfig,
) -> Result<Vec<String>> {
    let mut violations = Vec::new();
    let params = &scenario.channel;
    let users = scenario.user_points();
    let gbss = scenario.gbs_entries();

    // Backhaul anchor must be the argmax-capacity GBS.
    let (best_idx, best_cap) = channel::best_gbs(params, &solution.uav, &gbss)?;
    if best_idx != solution.gbs_index {
        violations.push(format!(
            "gbs index {} is not the best anchor (expected {best_idx})",
            solution.gbs_index
        ));
    }
    let capacity = channel::backhaul_capacity(
        params,
        &solution.uav,
        &gbss[solution.gbs_index].0,
        gbss[solution.gbs_index].1,
    )?;
    if (capacity - solution.backhaul_capacity_bps).abs() > 1e-6 * capacity.max(1.0) {
        violations.push(format!(
            "recorded backhaul capacity {} differs from recomputed {capacity}",
            solution.backhaul_capacity_bps
        ));
    }
    if (best_cap - capacity).abs() > 1e-6 * capacity.max(1.0) {
        violations.push("anchor capacity does not match the best capacity".into());
    }

    let b_g = gbss[solution.gbs_index].1;
    let demand = rate_inversion::build_demand_table(
        params,
        &solution.uav,
        &users,
        &scenario.tiers_bps,
        b_g,
        cfg.bisect_tol_hz,
    )?;

    let deltas = scenario.tiers_bps.deltas_bps();
    let mut sum_rate = 0.0;
    let mut sum_bw = 0.0;
    let mut sum_profit = 0.0;
    for (&user, &tier) in &solution.assignment.chosen {
        if user >= users.len() || tier >= deltas.len() {
            violations.push(format!("assignment references unknown (user {user}, tier {tier})"));
            continue;
        }
        sum_rate += deltas[tier];
        sum_profit += scenario.willingness[user][tier];
        match demand.required_bw_hz[user][tier] {
            Some(bw) => {
                sum_bw += bw;
                match solution.per_user_bw_hz.get(&user) {
                    Some(&recorded) if (recorded - bw).abs() <= BW_MATCH_EPS_HZ.max(1e-9 * bw) => {}
                    Some(&recorded) => violations.push(format!(
                        "user {user}: allocated bandwidth {recorded} Hz does not match the \
                         demand-table value {bw} Hz"
                    )),
                    None => violations.push(format!("user {user}: served but no bandwidth recorded")),
                }
            }
            None => violations.push(format!(
                "user {user}: assigned tier {tier} is infeasible at this position"
            )),
        }
    }

    // Constraint sums against independently recomputed capacities.
    if sum_rate > capacity * (1.0 + 1e-12) {
        violations.push(format!(
            "backhaul constraint violated: total tier rate {sum_rate} bps > capacity {capacity} bps"
        ));
    }
    if sum_bw > b_g * (1.0 + 1e-12) {
        violations.push(format!(
            "access constraint violated: total bandwidth {sum_bw} Hz > {b_g} Hz"
        ));
    }
    if (sum_profit - solution.profit).abs() > PROFIT_EPS.max(1e-12 * sum_profit.abs()) {
        violations.push(format!(
            "profit {} does not match recomputed willingness sum {sum_profit}",
            solution.profit
        ));
    }
    if (solution.profit - solution.assignment.total_profit).abs() > PROFIT_EPS {
        violations.push("profit field disagrees with the assignment".into());
    }
    // At-most-one per user holds by map construction; spurious extra
    // bandwidth entries do not.
    for user in solution.per_user_bw_hz.keys() {
        if !solution.assignment.chosen.contains_key(user) {
            violations.push(format!("user {user}: bandwidth recorded but not served"));
        }
    }

    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::{self, SearchConfig};
    use crate::scenario::{self, GenSpec, Region};

    fn scenario() -> Scenario {
        let mut spec = GenSpec::new(8, 2, 2, 21);
        spec.region = Region {
            width_m: 800.0,
            height_m: 800.0,
        };
        scenario::generate(&spec).unwrap()
    }

    #[test]
    fn clean_solutions_audit_clean() {
        let sc = scenario();
        let mut cfg = SearchConfig::for_scenario(&sc);
        cfg.grid_rows = 2;
        cfg.grid_cols = 3;
        cfg.replications_random = 5;
        for sol in [
            placement::grid_search(&sc, 150.0, &cfg).unwrap(),
            placement::heuristic_random(&sc, &cfg).unwrap(),
            placement::heuristic_fixed(&sc, &cfg).unwrap(),
        ] {
            let violations = audit_solution(&sc, &sol, &cfg).unwrap();
            assert!(violations.is_empty(), "violations: {violations:?}");
        }
    }

    #[test]
    fn tampered_profit_is_flagged() {
        let sc = scenario();
        let mut cfg = SearchConfig::for_scenario(&sc);
        cfg.grid_rows = 1;
        cfg.grid_cols = 1;
        let mut sol = placement::grid_search(&sc, 150.0, &cfg).unwrap();
        sol.profit += 1.0;
        let violations = audit_solution(&sc, &sol, &cfg).unwrap();
        assert!(!violations.is_empty());
    }

    #[test]
    fn tampered_anchor_is_flagged() {
        let sc = scenario();
        let mut cfg = SearchConfig::for_scenario(&sc);
        cfg.grid_rows = 1;
        cfg.grid_cols = 1;
        let mut sol = placement::grid_search(&sc, 150.0, &cfg).unwrap();
        sol.gbs_index = (sol.gbs_index + 1) % sc.gbss.len();
        let violations = audit_solution(&sc, &sol, &cfg).unwrap();
        assert!(!violations.is_empty());
    }
}
