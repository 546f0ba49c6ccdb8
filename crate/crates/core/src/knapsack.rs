//! Multiple-choice two-dimensional knapsack: pick at most one data-rate tier
//! per user, maximizing total willingness-profit under a backhaul rate
//! capacity and an access bandwidth capacity.
//!
//! The production solver is a pseudo-polynomial dynamic program over users
//! (groups) with state `(rate_used, bw_used)` on a discretized grid; weights
//! are rounded up and capacities down, so every returned assignment is
//! feasible in continuous terms. A brute-force enumerator is kept alongside
//! as a verification oracle for small instances.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate_inversion::{DemandTable, RateTiers};

/// Default budget on DP cells (states times groups).
pub const DEFAULT_CELL_BUDGET: u64 = 300_000_000;

/// Default cap on brute-force states `(s+1)^n`.
pub const DEFAULT_BRUTEFORCE_STATE_CAP: f64 = 3.0e6;

/// Default rate-axis discretization unit, bps.
pub const DEFAULT_RATE_UNIT_BPS: f64 = 0.5e6;

/// Default bandwidth-axis discretization unit, Hz.
pub const DEFAULT_BW_UNIT_HZ: f64 = 10.0e3;

/// One selectable (user, tier) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MckpItem {
    pub user_id: usize,
    pub tier_id: usize,
    pub profit: f64,
    /// Data rate consumed against the backhaul capacity, bps.
    pub rate_weight_bps: f64,
    /// Bandwidth consumed against the access capacity, Hz.
    pub bw_weight_hz: f64,
}

/// A grouped 2-D knapsack instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MckpInstance {
    pub items: Vec<MckpItem>,
    /// Backhaul capacity, bps.
    pub rate_capacity_bps: f64,
    /// Access bandwidth capacity, Hz.
    pub bw_capacity_hz: f64,
}

impl MckpInstance {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path.as_ref(), json).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Items sorted and grouped by user, tiers ascending within each group.
    fn groups(&self) -> Vec<(usize, Vec<MckpItem>)> {
        let mut items = self.items.clone();
        items.sort_by(|a, b| (a.user_id, a.tier_id).cmp(&(b.user_id, b.tier_id)));
        let mut groups: Vec<(usize, Vec<MckpItem>)> = Vec::new();
        for item in items {
            match groups.last_mut() {
                Some((uid, g)) if *uid == item.user_id => g.push(item),
                _ => groups.push((item.user_id, vec![item])),
            }
        }
        groups
    }
}

/// A tier selection with its resource usage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// user_id -> tier_id; users absent from the map are unserved.
    pub chosen: BTreeMap<usize, usize>,
    pub total_profit: f64,
    pub used_rate_bps: f64,
    pub used_bw_hz: f64,
}

impl Assignment {
    pub fn empty() -> Self {
        Assignment {
            chosen: BTreeMap::new(),
            total_profit: 0.0,
            used_rate_bps: 0.0,
            used_bw_hz: 0.0,
        }
    }

    fn from_items(items: &[MckpItem]) -> Self {
        let mut a = Assignment::empty();
        for item in items {
            a.chosen.insert(item.user_id, item.tier_id);
            a.total_profit += item.profit;
            a.used_rate_bps += item.rate_weight_bps;
            a.used_bw_hz += item.bw_weight_hz;
        }
        a
    }
}

/// Assemble an instance from a demand table and a willingness matrix.
/// Infeasible demand entries produce no item.
pub fn build_instance(
    demand: &DemandTable,
    willingness: &[Vec<f64>],
    tiers: &RateTiers,
    rate_capacity_bps: f64,
    bw_capacity_hz: f64,
) -> Result<MckpInstance> {
    let n = demand.users();
    if willingness.len() != n {
        return Err(Error::Dimension(format!(
            "willingness has {} rows, demand table has {n}",
            willingness.len()
        )));
    }
    let s = tiers.len();
    let mut items = Vec::new();
    for (i, row) in demand.required_bw_hz.iter().enumerate() {
        if row.len() != s || willingness[i].len() != s {
            return Err(Error::Dimension(format!(
                "row {i} does not match the {s} tiers"
            )));
        }
        for (k, entry) in row.iter().enumerate() {
            if let Some(bw) = entry {
                items.push(MckpItem {
                    user_id: i,
                    tier_id: k,
                    profit: willingness[i][k],
                    rate_weight_bps: tiers.deltas_bps()[k],
                    bw_weight_hz: *bw,
                });
            }
        }
    }
    Ok(MckpInstance {
        items,
        rate_capacity_bps,
        bw_capacity_hz,
    })
}

/// Exact DP over the discretized instance.
///
/// Weights round up to the given units and capacities round down, so the
/// result is always feasible in continuous terms (and optimal on the rounded
/// instance). Ties prefer not serving, then the lower tier; groups are
/// processed in ascending user order.
pub fn solve_dp(inst: &MckpInstance, rate_unit_bps: f64, bw_unit_hz: f64) -> Result<Assignment> {
    solve_dp_with_budget(inst, rate_unit_bps, bw_unit_hz, DEFAULT_CELL_BUDGET)
}

pub fn solve_dp_with_budget(
    inst: &MckpInstance,
    rate_unit_bps: f64,
    bw_unit_hz: f64,
    cell_budget: u64,
) -> Result<Assignment> {
    if rate_unit_bps <= 0.0 || bw_unit_hz <= 0.0 {
        return Err(Error::Domain("discretization units must be positive".into()));
    }
    let groups = inst.groups();
    if groups.is_empty() || inst.rate_capacity_bps <= 0.0 || inst.bw_capacity_hz <= 0.0 {
        return Ok(Assignment::empty());
    }

    let unit_weights = |item: &MckpItem| -> (usize, usize) {
        (
            (item.rate_weight_bps / rate_unit_bps).ceil() as usize,
            (item.bw_weight_hz / bw_unit_hz).ceil() as usize,
        )
    };

    let r_cap = (inst.rate_capacity_bps / rate_unit_bps).floor() as usize;
    let b_cap = (inst.bw_capacity_hz / bw_unit_hz).floor() as usize;
    // The axes never need to exceed the total rounded weight of all items.
    let mut r_sum = 0usize;
    let mut b_sum = 0usize;
    for item in &inst.items {
        let (wr, wb) = unit_weights(item);
        r_sum = r_sum.saturating_add(wr);
        b_sum = b_sum.saturating_add(wb);
    }
    let r_axis = r_cap.min(r_sum);
    let b_axis = b_cap.min(b_sum);

    let width = b_axis + 1;
    let cells = (r_axis + 1) as u64 * width as u64;
    if cells.saturating_mul(groups.len() as u64) > cell_budget {
        return Err(Error::ResourceLimit(format!(
            "DP table of {} cells over {} user groups exceeds the budget of {} \
             (use coarser rate/bandwidth units)",
            cells,
            groups.len(),
            cell_budget
        )));
    }

    const SKIP: u8 = u8::MAX;
    let mut prev = vec![0f64; cells as usize];
    let mut cur = vec![0f64; cells as usize];
    let mut choices: Vec<Vec<u8>> = Vec::with_capacity(groups.len());

    for (_, group) in &groups {
        if group.len() >= SKIP as usize {
            return Err(Error::ResourceLimit(format!(
                "more than {} tiers for one user",
                SKIP
            )));
        }
        cur.copy_from_slice(&prev);
        let mut choice = vec![SKIP; cells as usize];
        for (k, item) in group.iter().enumerate() {
            let (wr, wb) = unit_weights(item);
            if wr > r_axis || wb > b_axis {
                continue;
            }
            let profit = item.profit;
            for r in wr..=r_axis {
                let src = (r - wr) * width;
                let dst = r * width;
                for b in wb..=b_axis {
                    let cand = prev[src + b - wb] + profit;
                    let slot = dst + b;
                    if cand > cur[slot] {
                        cur[slot] = cand;
                        choice[slot] = k as u8;
                    }
                }
            }
        }
        choices.push(choice);
        std::mem::swap(&mut prev, &mut cur);
    }

    // Backtrack from the full-capacity corner.
    let mut r = r_axis;
    let mut b = b_axis;
    let mut picked: Vec<MckpItem> = Vec::new();
    for (gi, (_, group)) in groups.iter().enumerate().rev() {
        let c = choices[gi][r * width + b];
        if c != SKIP {
            let item = group[c as usize];
            let (wr, wb) = unit_weights(&item);
            picked.push(item);
            r -= wr;
            b -= wb;
        }
    }
    Ok(Assignment::from_items(&picked))
}

/// Exhaustive enumeration with continuous weights; exact optimum.
pub fn solve_bruteforce(inst: &MckpInstance) -> Result<Assignment> {
    solve_bruteforce_capped(inst, DEFAULT_BRUTEFORCE_STATE_CAP)
}

pub fn solve_bruteforce_capped(inst: &MckpInstance, state_cap: f64) -> Result<Assignment> {
    let groups = inst.groups();
    let states: f64 = groups.iter().map(|(_, g)| (g.len() + 1) as f64).product();
    if states > state_cap {
        return Err(Error::ResourceLimit(format!(
            "{states} enumeration states exceed the cap of {state_cap}"
        )));
    }

    struct Search<'a> {
        groups: &'a [(usize, Vec<MckpItem>)],
        rate_cap: f64,
        bw_cap: f64,
        stack: Vec<MckpItem>,
        best: Vec<MckpItem>,
        best_profit: f64,
    }

    impl Search<'_> {
        fn recurse(&mut self, g: usize, rate_used: f64, bw_used: f64, profit: f64) {
            if g == self.groups.len() {
                if profit > self.best_profit {
                    self.best_profit = profit;
                    self.best = self.stack.clone();
                }
                return;
            }
            // Option order fixes the tie-break: skip first, then tiers
            // ascending; only a strict improvement replaces the incumbent.
            self.recurse(g + 1, rate_used, bw_used, profit);
            let items = self.groups[g].1.clone();
            for item in items {
                let nr = rate_used + item.rate_weight_bps;
                let nb = bw_used + item.bw_weight_hz;
                if nr <= self.rate_cap && nb <= self.bw_cap {
                    self.stack.push(item);
                    self.recurse(g + 1, nr, nb, profit + item.profit);
                    self.stack.pop();
                }
            }
        }
    }

    let mut search = Search {
        groups: &groups,
        rate_cap: inst.rate_capacity_bps,
        bw_cap: inst.bw_capacity_hz,
        stack: Vec::new(),
        best: Vec::new(),
        best_profit: 0.0,
    };
    search.recurse(0, 0.0, 0.0, 0.0);
    let best = std::mem::take(&mut search.best);
    Ok(Assignment::from_items(&best))
}

/// Recompute the profit of an assignment from the willingness matrix.
pub fn evaluate_profit(assignment: &Assignment, willingness: &[Vec<f64>]) -> f64 {
    assignment
        .chosen
        .iter()
        .map(|(&user, &tier)| willingness[user][tier])
        .sum()
}
