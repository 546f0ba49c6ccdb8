//! Joint 3-D placement and tiered data-rate allocation for a single UAV
//! base station relaying traffic from terrestrial base stations to ground
//! users.
//!
//! The pipeline: an air-to-ground channel model ([`channel`]) gives each
//! link a Shannon rate; bisection ([`rate_inversion`]) turns tier rates
//! into per-user bandwidth demands; a multiple-choice knapsack over two
//! resources ([`knapsack`]) picks the profit-maximizing tier per user
//! under the backhaul and access budgets; a golden-section altitude search
//! wrapped around a horizontal grid search ([`placement`]) optimizes the
//! UAV position. [`scenario`] generates reproducible instances,
//! [`experiment`] batches them across solvers into CSV reports, [`plots`]
//! renders the reports, and [`audit`] re-verifies solutions independently.

pub mod audit;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod knapsack;
pub mod placement;
pub mod plots;
pub mod rate_inversion;
pub mod scenario;

pub use channel::{ChannelParams, Point3};
pub use error::{Error, Result};
pub use experiment::{ExperimentPlan, ExperimentReport, ReportRow};
pub use knapsack::{Assignment, MckpInstance, MckpItem};
pub use placement::{PlacementSolution, SearchConfig, SolverKind};
pub use rate_inversion::{DemandTable, RateTiers};
pub use scenario::{GenSpec, Region, Scenario};
