//! TOML instance and solution files.

use serde::{Deserialize, Serialize};

use crate::model::{Instance, Mode, Point, ProfitBreakdown, Site, SupplyProfile, Solution, Tour, Visit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub mode: String,
    pub horizon: f64,
    pub capacity: f64,
    pub fleet: usize,
    pub depot: [f64; 2],
    #[serde(default)]
    pub sites: Vec<SiteRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub e: f64,
    /// Fixed quantity, or the end-of-window quantity for ramped supply.
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub reward: f64,
    pub cost: f64,
    pub profit: f64,
    #[serde(default)]
    pub tours: Vec<TourRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TourRecord {
    pub vehicle: usize,
    #[serde(default)]
    pub start_time: f64,
    #[serde(default)]
    pub visits: Vec<VisitRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisitRecord {
    pub site: usize,
    pub arrival: f64,
    pub pickup: f64,
}

impl From<&Instance> for InstanceFile {
    fn from(instance: &Instance) -> Self {
        Self {
            mode: instance.mode().name().to_string(),
            horizon: instance.horizon(),
            capacity: instance.capacity(),
            fleet: instance.fleet_size(),
            depot: [instance.depot().x, instance.depot().y],
            sites: instance
                .sites()
                .iter()
                .map(|s| SiteRecord {
                    id: s.id,
                    x: s.position.x,
                    y: s.position.y,
                    s: s.window_open,
                    e: s.window_close,
                    q: s.end_quantity(),
                })
                .collect(),
        }
    }
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance, String> {
        let mode: Mode = self
            .mode
            .parse()
            .map_err(|_| format!("mode: unknown mode {:?}", self.mode))?;
        let mut sites = Vec::with_capacity(self.sites.len());
        for (idx, r) in self.sites.iter().enumerate() {
            if r.id != idx + 1 {
                return Err(format!(
                    "sites[{idx}].id: expected {} (ids run 1..n in listed order), found {}",
                    idx + 1,
                    r.id
                ));
            }
            let supply = if mode.has_variable_supply() {
                SupplyProfile::LinearRamp(r.q)
            } else {
                SupplyProfile::Fixed(r.q)
            };
            sites.push(Site::new(r.id, Point::new(r.x, r.y), (r.s, r.e), supply));
        }
        let depot = Point::new(self.depot[0], self.depot[1]);
        Instance::new(sites, depot, self.fleet, self.capacity, self.horizon, mode).map_err(|e| e.to_string())
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, String> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| e.to_string())?;
    file.to_instance()
}

pub fn write_instance(instance: &Instance) -> String {
    toml::to_string(&InstanceFile::from(instance)).expect("instance serializes")
}

impl From<&Solution> for SolutionFile {
    fn from(solution: &Solution) -> Self {
        Self {
            reward: solution.claimed.reward,
            cost: solution.claimed.cost,
            profit: solution.claimed.profit,
            tours: solution
                .tours
                .iter()
                .map(|t| TourRecord {
                    vehicle: t.vehicle,
                    start_time: t.start_time,
                    visits: t
                        .visits
                        .iter()
                        .map(|v| VisitRecord {
                            site: v.site,
                            arrival: v.arrival,
                            pickup: v.pickup,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl SolutionFile {
    /// Keeps the claimed profit as written so the validator can check it.
    pub fn to_solution(&self) -> Solution {
        Solution {
            tours: self
                .tours
                .iter()
                .map(|t| Tour {
                    vehicle: t.vehicle,
                    start_time: t.start_time,
                    visits: t
                        .visits
                        .iter()
                        .map(|v| Visit {
                            site: v.site,
                            arrival: v.arrival,
                            pickup: v.pickup,
                        })
                        .collect(),
                })
                .collect(),
            claimed: ProfitBreakdown {
                reward: self.reward,
                cost: self.cost,
                profit: self.profit,
            },
        }
    }
}

pub fn parse_solution(text: &str) -> Result<Solution, String> {
    let file: SolutionFile = toml::from_str(text).map_err(|e| e.to_string())?;
    Ok(file.to_solution())
}

pub fn write_solution(solution: &Solution) -> String {
    toml::to_string(&SolutionFile::from(solution)).expect("solution serializes")
}
