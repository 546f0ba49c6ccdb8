//! Problem-instance generation, validation and (de)serialization.
//!
//! Scenarios are stored as versioned JSON. Generation is deterministic per
//! seed: a `ChaCha8` generator is seeded with the scenario seed on stream
//! [`RNG_STREAM_SCENARIO`]; the random-placement heuristic draws from the
//! same seed on stream [`RNG_STREAM_HEURISTIC`] so the two never interleave.
//! The draw order within generation (parent count, clustering rate, parent
//! positions, clustered users, uniform users, GBS positions, willingness
//! rows) is part of the reproducibility contract.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Point3};
use crate::error::{Error, Result};
use crate::rate_inversion::RateTiers;

/// RNG stream id used for scenario generation.
pub const RNG_STREAM_SCENARIO: u64 = 0;
/// RNG stream id used for the random-placement heuristic replications.
pub const RNG_STREAM_HEURISTIC: u64 = 1;

/// Current scenario file schema version.
pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Rectangular service region anchored at the origin, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width_m: f64,
    pub height_m: f64,
}

impl Region {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width_m).contains(&x) && (0.0..=self.height_m).contains(&y)
    }
}

/// How a generated scenario was clustered; carried along for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenMetadata {
    pub parent_count: usize,
    pub clustering_rate: f64,
    pub cluster_sigma_m: f64,
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub version: u32,
    pub region: Region,
    pub channel: ChannelParams,
    /// Ground users as `[x, y]` pairs.
    pub users: Vec<[f64; 2]>,
    /// Ground base stations as `[x, y, b_g_hz]` triples.
    pub gbss: Vec<[f64; 3]>,
    pub tiers_bps: RateTiers,
    /// n-by-s willingness-to-pay matrix; rows nondecreasing across tiers.
    pub willingness: Vec<Vec<f64>>,
    /// `[h_low, h_high]` altitude bracket for the UAV, meters.
    pub altitude_bracket_m: [f64; 2],
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<GenMetadata>,
}

impl Scenario {
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn user_points(&self) -> Vec<Point3> {
        self.users.iter().map(|u| Point3::ground(u[0], u[1])).collect()
    }

    pub fn gbs_entries(&self) -> Vec<(Point3, f64)> {
        self.gbss
            .iter()
            .map(|g| (Point3::ground(g[0], g[1]), g[2]))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::validation("users", "at least one user required"));
        }
        if self.gbss.is_empty() {
            return Err(Error::validation("gbss", "at least one GBS required"));
        }
        self.channel.validate()?;
        for (i, u) in self.users.iter().enumerate() {
            if !self.region.contains(u[0], u[1]) {
                return Err(Error::validation(
                    format!("users[{i}]"),
                    "point outside the region",
                ));
            }
        }
        for (j, g) in self.gbss.iter().enumerate() {
            if !self.region.contains(g[0], g[1]) {
                return Err(Error::validation(
                    format!("gbss[{j}]"),
                    "point outside the region",
                ));
            }
            if g[2] <= 0.0 {
                return Err(Error::validation(
                    format!("gbss[{j}]"),
                    "available bandwidth must be positive",
                ));
            }
        }
        let s = self.tiers_bps.len();
        if self.willingness.len() != self.users.len() {
            return Err(Error::validation(
                "willingness",
                format!(
                    "{} rows for {} users",
                    self.willingness.len(),
                    self.users.len()
                ),
            ));
        }
        for (i, row) in self.willingness.iter().enumerate() {
            if row.len() != s {
                return Err(Error::validation(
                    format!("willingness[{i}]"),
                    format!("{} entries for {s} tiers", row.len()),
                ));
            }
            for (k, w) in row.windows(2).enumerate() {
                if w[1] < w[0] {
                    return Err(Error::validation(
                        format!("willingness[{i}][{}]", k + 1),
                        "willingness must be nondecreasing across tiers",
                    ));
                }
            }
            if row.iter().any(|v| *v < 0.0) {
                return Err(Error::validation(
                    format!("willingness[{i}]"),
                    "willingness must be nonnegative",
                ));
            }
        }
        let [lo, hi] = self.altitude_bracket_m;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::validation(
                "altitude_bracket_m",
                "bracket must satisfy 0 < low < high",
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path.as_ref(), json).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        let scenario: Scenario = serde_json::from_str(&text)?;
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Parameters for random scenario generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub tier_set_id: u8,
    pub seed: u64,
    /// Inclusive range the parent-point count is drawn from.
    pub parent_count_range: [usize; 2],
    /// Range the clustered-user fraction is drawn from.
    pub clustering_rate_range: [f64; 2],
    /// Isotropic normal spread of clustered users around their parent, m.
    pub cluster_sigma_m: f64,
    pub region: Region,
    /// Bandwidth each GBS can lend, Hz.
    pub b_g_hz: f64,
    pub altitude_bracket_m: [f64; 2],
    pub channel: ChannelParams,
}

impl GenSpec {
    /// Standard defaults: 1500 m square region, 10 MHz per GBS,
    /// altitudes 50-500 m, 3-7 parents, 50-90% clustering, 50 m spread.
    pub fn new(n: usize, m: usize, tier_set_id: u8, seed: u64) -> Self {
        GenSpec {
            n,
            m,
            tier_set_id,
            seed,
            parent_count_range: [3, 7],
            clustering_rate_range: [0.5, 0.9],
            cluster_sigma_m: 50.0,
            region: Region {
                width_m: 1500.0,
                height_m: 1500.0,
            },
            b_g_hz: 10.0e6,
            altitude_bracket_m: [50.0, 500.0],
            channel: ChannelParams::suburban(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::validation("n", "at least one user required"));
        }
        if self.m == 0 {
            return Err(Error::validation("m", "at least one GBS required"));
        }
        if self.parent_count_range[0] < 1 || self.parent_count_range[1] < self.parent_count_range[0]
        {
            return Err(Error::validation("parent_count_range", "invalid range"));
        }
        let [lo, hi] = self.clustering_rate_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || hi < lo {
            return Err(Error::validation(
                "clustering_rate_range",
                "range must sit inside [0, 1]",
            ));
        }
        if self.cluster_sigma_m < 0.0 {
            return Err(Error::validation("cluster_sigma_m", "must be nonnegative"));
        }
        Ok(())
    }
}

fn draw_in_range(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.gen_range(range[0]..range[1])
    }
}

/// Generate a scenario: a clustered fraction of users around uniformly drawn
/// parent points (isotropic normal offsets, clipped to the region), the
/// remainder uniform, GBSs uniform, willingness rows by the ascending
/// recursion over tiers.
pub fn generate(spec: &GenSpec) -> Result<Scenario> {
    spec.validate()?;
    let tiers = RateTiers::standard_set(spec.tier_set_id)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(RNG_STREAM_SCENARIO);

    let parent_count = if spec.parent_count_range[0] == spec.parent_count_range[1] {
        spec.parent_count_range[0]
    } else {
        rng.gen_range(spec.parent_count_range[0]..=spec.parent_count_range[1])
    };
    let clustering_rate = draw_in_range(&mut rng, spec.clustering_rate_range);
    let n_clustered = (clustering_rate * spec.n as f64).floor() as usize;

    let w = spec.region.width_m;
    let h = spec.region.height_m;
    let parents: Vec<[f64; 2]> = (0..parent_count)
        .map(|_| [rng.gen_range(0.0..w), rng.gen_range(0.0..h)])
        .collect();

    let normal = Normal::new(0.0, spec.cluster_sigma_m.max(f64::MIN_POSITIVE)).unwrap();
    let mut users = Vec::with_capacity(spec.n);
    for _ in 0..n_clustered {
        let parent = parents[rng.gen_range(0..parent_count)];
        let dx = if spec.cluster_sigma_m > 0.0 {
            normal.sample(&mut rng)
        } else {
            0.0
        };
        let dy = if spec.cluster_sigma_m > 0.0 {
            normal.sample(&mut rng)
        } else {
            0.0
        };
        users.push([(parent[0] + dx).clamp(0.0, w), (parent[1] + dy).clamp(0.0, h)]);
    }
    for _ in n_clustered..spec.n {
        users.push([rng.gen_range(0.0..w), rng.gen_range(0.0..h)]);
    }

    let gbss: Vec<[f64; 3]> = (0..spec.m)
        .map(|_| [rng.gen_range(0.0..w), rng.gen_range(0.0..h), spec.b_g_hz])
        .collect();

    let willingness = gen_willingness(&mut rng, spec.n, &tiers);

    let scenario = Scenario {
        version: SCENARIO_SCHEMA_VERSION,
        region: spec.region,
        channel: spec.channel,
        users,
        gbss,
        tiers_bps: tiers,
        willingness,
        altitude_bracket_m: spec.altitude_bracket_m,
        seed: spec.seed,
        metadata: Some(GenMetadata {
            parent_count,
            clustering_rate,
            cluster_sigma_m: spec.cluster_sigma_m,
        }),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Willingness recursion: `phi_1 = delta_1 * U(0,1)` and
/// `phi_k = phi_{k-1} + (delta_k - delta_{k-1}) * U(0,1)`.
pub fn gen_willingness(rng: &mut ChaCha8Rng, n: usize, tiers: &RateTiers) -> Vec<Vec<f64>> {
    let deltas = tiers.deltas_bps();
    // Willingness values carry abstract currency units; the Mbps scale keeps
    // reported profits in single digits per user.
    let scale = 1.0e-6;
    (0..n)
        .map(|_| {
            let mut row = Vec::with_capacity(deltas.len());
            let mut phi = deltas[0] * scale * rng.gen_range(0.0..1.0);
            row.push(phi);
            for k in 1..deltas.len() {
                phi += (deltas[k] - deltas[k - 1]) * scale * rng.gen_range(0.0..1.0);
                row.push(phi);
            }
            row
        })
        .collect()
}
