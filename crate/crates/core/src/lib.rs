//! Maximum-profit pickup routing with multiple vehicles per site.
//!
//! The crate builds a single-visit baseline routing, improves it by letting
//! a second vehicle collect leftover supply at shared sites, and handles
//! linearly growing supply by discretizing each window into constant-supply
//! pseudo-sites. Every solver output can be checked with [`validate`].

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cli;
pub mod discretize;
pub mod error;
mod flow;
pub mod model;
pub mod oracle;
pub mod reassign;
pub mod validate;

pub use baseline::{solve_baseline, solve_exact_mprp, solve_heuristic_mprp, SolverConfig};
pub use discretize::{solve_mprp_mvs, DerivedInstance};
pub use error::{ModelError, SolveError};
pub use model::{
    distance, evaluate_profit, schedule_tour, Instance, Mode, Point, ProfitBreakdown, Schedule,
    Site, SiteId, Solution, SupplyProfile, Tour, VehicleId, Visit,
};
pub use oracle::{brute_force_optimum, OracleLimits};
pub use reassign::solve_mprp_m;
pub use validate::{audit_profit, validate, ValidationReport, Violation, ViolationKind};
