//! Inversion of the rate function: minimum bandwidth per (user, tier).
//!
//! There is no closed form for the bandwidth that achieves a given rate, but
//! the rate is strictly increasing and concave in bandwidth, so a bisection
//! over `[tol, bw_cap]` finds it. The returned bracket endpoint is always the
//! upper one, so the delivered rate meets the tier.

use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelParams, Point3};
use crate::error::{Error, Result};

/// Default bisection tolerance in Hz.
pub const DEFAULT_BISECTION_TOL_HZ: f64 = 100.0;

/// Ascending data-rate tiers in bps. Serializes as a plain JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RateTiers {
    deltas_bps: Vec<f64>,
}

impl TryFrom<Vec<f64>> for RateTiers {
    type Error = Error;

    fn try_from(deltas_bps: Vec<f64>) -> Result<Self> {
        RateTiers::new(deltas_bps)
    }
}

impl From<RateTiers> for Vec<f64> {
    fn from(tiers: RateTiers) -> Vec<f64> {
        tiers.deltas_bps
    }
}

impl RateTiers {
    pub fn new(deltas_bps: Vec<f64>) -> Result<Self> {
        if deltas_bps.is_empty() {
            return Err(Error::validation("tiers_bps", "at least one tier required"));
        }
        for (k, w) in deltas_bps.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::validation(
                    format!("tiers_bps[{}]", k + 1),
                    "tiers must be strictly ascending",
                ));
            }
        }
        if deltas_bps[0] <= 0.0 {
            return Err(Error::validation("tiers_bps[0]", "tiers must be positive"));
        }
        Ok(RateTiers { deltas_bps })
    }

    /// Tier sets 1-3: {1,2}, {1,2,4}, {1,2,4,8} Mbps.
    pub fn standard_set(id: u8) -> Result<Self> {
        let mbps: &[f64] = match id {
            1 => &[1.0, 2.0],
            2 => &[1.0, 2.0, 4.0],
            3 => &[1.0, 2.0, 4.0, 8.0],
            _ => return Err(Error::Domain(format!("unknown tier set id {id}"))),
        };
        RateTiers::new(mbps.iter().map(|m| m * 1.0e6).collect())
    }

    pub fn deltas_bps(&self) -> &[f64] {
        &self.deltas_bps
    }

    pub fn len(&self) -> usize {
        self.deltas_bps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas_bps.is_empty()
    }

    /// Highest tier, bps.
    pub fn top_bps(&self) -> f64 {
        *self.deltas_bps.last().unwrap()
    }
}

/// Per-(user, tier) minimum bandwidths at a fixed UAV position.
///
/// `None` marks an infeasible entry (the tier cannot be delivered within the
/// bandwidth cap). Rows are nondecreasing across tiers, and infeasibility is
/// suffix-closed within a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandTable {
    pub required_bw_hz: Vec<Vec<Option<f64>>>,
    pub uav: Point3,
}

impl DemandTable {
    pub fn users(&self) -> usize {
        self.required_bw_hz.len()
    }
}

/// Supremum of the achievable rate for unlimited bandwidth: `Theta / ln 2`.
pub fn rate_ceiling(params: &ChannelParams, uav: &Point3, user: &Point3) -> Result<f64> {
    let loss = channel::pathloss_user(params, uav, user)?;
    let theta = channel::snr_bandwidth_product(params, params.p_d_dbm, loss);
    Ok(theta / std::f64::consts::LN_2)
}

/// Minimum bandwidth delivering `delta_bps`, or `None` if the tier is
/// unattainable (above the rate ceiling, or needing more than `bw_cap_hz`).
///
/// The bisection bracket halves each iteration, so the iteration count is at
/// most `ceil(log2(bw_cap / tol))`.
pub fn required_bandwidth(
    params: &ChannelParams,
    uav: &Point3,
    user: &Point3,
    delta_bps: f64,
    bw_cap_hz: f64,
    tol_hz: f64,
) -> Result<Option<f64>> {
    if delta_bps <= 0.0 {
        return Err(Error::Domain("target rate must be positive".into()));
    }
    if bw_cap_hz <= 0.0 || tol_hz <= 0.0 {
        return Err(Error::Domain("bandwidth cap and tolerance must be positive".into()));
    }
    if delta_bps >= rate_ceiling(params, uav, user)? {
        return Ok(None);
    }
    if channel::data_rate(params, uav, user, bw_cap_hz)? < delta_bps {
        return Ok(None);
    }
    // Invariant: rate(hi) >= delta; rate(lo) < delta (once lo is interior).
    let mut lo = tol_hz.min(bw_cap_hz);
    if channel::data_rate(params, uav, user, lo)? >= delta_bps {
        return Ok(Some(lo));
    }
    let mut hi = bw_cap_hz;
    while hi - lo > tol_hz {
        let mid = 0.5 * (lo + hi);
        if channel::data_rate(params, uav, user, mid)? >= delta_bps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Build the full n-by-s demand table at a fixed UAV position.
pub fn build_demand_table(
    params: &ChannelParams,
    uav: &Point3,
    users: &[Point3],
    tiers: &RateTiers,
    bw_cap_hz: f64,
    tol_hz: f64,
) -> Result<DemandTable> {
    if users.is_empty() {
        return Err(Error::Domain("no users".into()));
    }
    let mut rows = Vec::with_capacity(users.len());
    for user in users {
        let mut row: Vec<Option<f64>> = Vec::with_capacity(tiers.len());
        let mut prev = 0.0f64;
        for &delta in tiers.deltas_bps() {
            let bw = required_bandwidth(params, uav, user, delta, bw_cap_hz, tol_hz)?;
            match bw {
                Some(b) => {
                    // Monotone within the row despite bisection rounding.
                    let b = b.max(prev);
                    prev = b;
                    row.push(Some(b));
                }
                None => row.push(None),
            }
        }
        // Infeasibility is suffix-closed: a higher tier can never need less.
        let mut seen_none = false;
        for entry in row.iter_mut() {
            if entry.is_none() {
                seen_none = true;
            } else if seen_none {
                *entry = None;
            }
        }
        rows.push(row);
    }
    Ok(DemandTable {
        required_bw_hz: rows,
        uav: *uav,
    })
}
