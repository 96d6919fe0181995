//! Machine-readable run reports.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::model::{Instance, Solution};
use crate::validate::{validate, ValidationReport, Violation};

use super::format::write_instance;

/// SHA-256 of the canonical instance text.
pub fn instance_digest(instance: &Instance) -> String {
    hex::encode(Sha256::digest(write_instance(instance).as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverInfo {
    pub name: String,
    pub exact_threshold: usize,
    pub insertion_rounds: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfitSection {
    pub reward: f64,
    pub cost: f64,
    pub profit: f64,
    pub claimed_profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TourListing {
    pub vehicle: usize,
    pub order: Vec<usize>,
    pub arrivals: Vec<f64>,
    pub pickups: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRecord {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vehicle: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub magnitude: f64,
}

impl From<&Violation> for ViolationRecord {
    fn from(v: &Violation) -> Self {
        Self {
            kind: v.kind.name().to_string(),
            vehicle: v.vehicle,
            site: v.site,
            time: v.time,
            magnitude: v.magnitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSection {
    pub feasible: bool,
    pub violation_count: usize,
    pub violations: Vec<ViolationRecord>,
}

impl From<&ValidationReport> for ValidationSection {
    fn from(r: &ValidationReport) -> Self {
        Self {
            feasible: r.is_feasible(),
            violation_count: r.violations.len(),
            violations: r.violations.iter().map(ViolationRecord::from).collect(),
        }
    }
}

/// Pipeline details beyond the final tours.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PipelineSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_profit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reassignments: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_only_rejections: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived_sites: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiagnosticsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orderings: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering_max_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering_min_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering_exceeds_four: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fleet_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fleet_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fleet_within_bound: Option<bool>,
    /// `44 ln T`, the asymptotic ratio guarantee for ramped supply.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_horizon_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instance_digest: String,
    pub mode: String,
    pub sites: usize,
    pub fleet: usize,
    pub solver: SolverInfo,
    pub profit: ProfitSection,
    pub pipeline: PipelineSection,
    pub validation: ValidationSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    pub tours: Vec<TourListing>,
}

impl RunReport {
    /// Audits `solution` and records the outcome alongside it.
    pub fn new(instance: &Instance, solution: &Solution, solver: SolverInfo) -> Self {
        let audit = validate(instance, solution);
        Self {
            instance_digest: instance_digest(instance),
            mode: instance.mode().name().to_string(),
            sites: instance.num_sites(),
            fleet: instance.fleet_size(),
            solver,
            profit: ProfitSection {
                reward: audit.audited.reward,
                cost: audit.audited.cost,
                profit: audit.audited.profit,
                claimed_profit: solution.claimed.profit,
            },
            pipeline: PipelineSection::default(),
            validation: ValidationSection::from(&audit),
            diagnostics: None,
            elapsed_ms: None,
            tours: solution
                .tours
                .iter()
                .map(|t| TourListing {
                    vehicle: t.vehicle,
                    order: t.order(),
                    arrivals: t.visits.iter().map(|v| v.arrival).collect(),
                    pickups: t.visits.iter().map(|v| v.pickup).collect(),
                })
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateReport {
    pub instance_digest: String,
    pub reward: f64,
    pub cost: f64,
    pub profit: f64,
    pub claimed_profit: f64,
    pub validation: ValidationSection,
}

impl ValidateReport {
    pub fn new(instance: &Instance, solution: &Solution) -> Self {
        let audit = validate(instance, solution);
        Self {
            instance_digest: instance_digest(instance),
            reward: audit.audited.reward,
            cost: audit.audited.cost,
            profit: audit.audited.profit,
            claimed_profit: solution.claimed.profit,
            validation: ValidationSection::from(&audit),
        }
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub index: usize,
    pub instance_digest: String,
    pub feasible: bool,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_profit: Option<f64>,
    pub solver_profit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_profit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_feasible: Option<bool>,
    /// `oracle / solver`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub instances: usize,
    pub feasible: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infinite_ratios: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_above_oracle: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub mode: String,
    pub seed: u64,
    pub count: usize,
    pub sites: usize,
    pub fleet: usize,
    pub solver: SolverInfo,
    pub summary: BenchSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}
