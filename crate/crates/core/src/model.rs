//! Instances, tours and solutions.
//!
//! Sites are numbered `1..=n`; node index `0` is the depot, so a site id is
//! also its row in the travel matrix. Vehicles are numbered `1..=m`.

use crate::error::ModelError;
use std::fmt;
use std::str::FromStr;

pub type SiteId = usize;
pub type VehicleId = usize;

/// Node index of the depot in the travel matrix.
pub const DEPOT: usize = 0;

/// Absolute tolerance for time and window comparisons.
pub const TIME_TOL: f64 = 1e-9;
/// Absolute tolerance for quantity comparisons.
pub const QTY_TOL: f64 = 1e-9;
/// Absolute tolerance when comparing audited profits.
pub const PROFIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// How much a site can supply over time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupplyProfile {
    /// Constant quantity throughout the window.
    Fixed(f64),
    /// Grows linearly from zero at window open to the given value at close.
    LinearRamp(f64),
}

impl SupplyProfile {
    /// The quantity available at window close, `q_i(e_i)`.
    pub fn end_quantity(&self) -> f64 {
        match *self {
            SupplyProfile::Fixed(q) | SupplyProfile::LinearRamp(q) => q,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: SiteId,
    pub position: Point,
    pub window_open: f64,
    pub window_close: f64,
    pub supply: SupplyProfile,
}

impl Site {
    pub fn new(id: SiteId, position: Point, window: (f64, f64), supply: SupplyProfile) -> Self {
        Self {
            id,
            position,
            window_open: window.0,
            window_close: window.1,
            supply,
        }
    }

    /// Quantity supplied at time `t`; zero outside the window.
    pub fn supply_at(&self, t: f64) -> f64 {
        if t < self.window_open || t > self.window_close {
            return 0.0;
        }
        match self.supply {
            SupplyProfile::Fixed(q) => q,
            SupplyProfile::LinearRamp(q_end) => {
                let span = self.window_close - self.window_open;
                if span <= 0.0 {
                    return q_end;
                }
                q_end * (t - self.window_open) / span
            }
        }
    }

    pub fn end_quantity(&self) -> f64 {
        self.supply.end_quantity()
    }

    pub fn window_contains(&self, t: f64) -> bool {
        t >= self.window_open - TIME_TOL && t <= self.window_close + TIME_TOL
    }
}

/// Free-function form of [`Site::supply_at`].
pub fn supply_at(site: &Site, t: f64) -> f64 {
    site.supply_at(t)
}

/// Which problem variant an instance describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// One vehicle per site, fixed supply.
    Mprp,
    /// Several vehicles per site, fixed supply.
    MprpM,
    /// Several vehicles per site, linearly ramping supply.
    MprpMvs,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Mprp, Mode::MprpM, Mode::MprpMvs];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Mprp => "mprp",
            Mode::MprpM => "mprp-m",
            Mode::MprpMvs => "mprp-mvs",
        }
    }

    pub fn allows_shared_sites(self) -> bool {
        !matches!(self, Mode::Mprp)
    }

    pub fn has_variable_supply(self) -> bool {
        matches!(self, Mode::MprpMvs)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mprp" => Ok(Mode::Mprp),
            "mprp-m" => Ok(Mode::MprpM),
            "mprp-mvs" => Ok(Mode::MprpMvs),
            other => Err(format!(
                "unknown mode `{other}` (expected mprp, mprp-m or mprp-mvs)"
            )),
        }
    }
}

/// A problem instance. Immutable once built; the travel matrix is cached.
#[derive(Debug, Clone)]
pub struct Instance {
    sites: Vec<Site>,
    depot: Point,
    fleet_size: usize,
    capacity: f64,
    horizon: f64,
    mode: Mode,
    travel: Vec<f64>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.sites == other.sites
            && self.depot == other.depot
            && self.fleet_size == other.fleet_size
            && self.capacity == other.capacity
            && self.horizon == other.horizon
            && self.mode == other.mode
    }
}

impl Instance {
    pub fn new(
        sites: Vec<Site>,
        depot: Point,
        fleet_size: usize,
        capacity: f64,
        horizon: f64,
        mode: Mode,
    ) -> Result<Self, ModelError> {
        if fleet_size == 0 {
            return Err(ModelError::EmptyFleet);
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(ModelError::InvalidCapacity(capacity));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ModelError::InvalidHorizon(horizon));
        }
        if !depot.is_finite() {
            return Err(ModelError::NonFiniteCoordinate);
        }
        for (idx, site) in sites.iter().enumerate() {
            let expected = idx + 1;
            if site.id != expected {
                return Err(ModelError::NonContiguousIds {
                    expected,
                    found: site.id,
                });
            }
            if !site.position.is_finite() {
                return Err(ModelError::NonFiniteCoordinate);
            }
            let (open, close) = (site.window_open, site.window_close);
            if !(open.is_finite() && close.is_finite() && 0.0 <= open && open <= close && close <= horizon)
            {
                return Err(ModelError::WindowOutOfHorizon {
                    site: site.id,
                    open,
                    close,
                    horizon,
                });
            }
            let q = site.end_quantity();
            if !(q.is_finite() && q >= 0.0) {
                return Err(ModelError::InvalidQuantity {
                    site: site.id,
                    quantity: q,
                });
            }
            match (mode, site.supply) {
                (Mode::MprpMvs, SupplyProfile::LinearRamp(_)) => {
                    if close <= open {
                        return Err(ModelError::DegenerateRamp { site: site.id });
                    }
                }
                (Mode::Mprp | Mode::MprpM, SupplyProfile::Fixed(_)) => {}
                _ => {
                    return Err(ModelError::ProfileModeMismatch {
                        site: site.id,
                        mode: mode.name(),
                    })
                }
            }
        }

        let nodes: Vec<Point> = std::iter::once(depot)
            .chain(sites.iter().map(|s| s.position))
            .collect();
        let dim = nodes.len();
        let mut travel = vec![0.0; dim * dim];
        for (a, pa) in nodes.iter().enumerate() {
            for (b, pb) in nodes.iter().enumerate().skip(a + 1) {
                let d = distance(*pa, *pb);
                travel[a * dim + b] = d;
                travel[b * dim + a] = d;
            }
        }

        Ok(Self {
            sites,
            depot,
            fleet_size,
            capacity,
            horizon,
            mode,
            travel,
        })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn depot(&self) -> Point {
        self.depot
    }

    pub fn fleet_size(&self) -> usize {
        self.fleet_size
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn site(&self, id: SiteId) -> Option<&Site> {
        id.checked_sub(1).and_then(|idx| self.sites.get(idx))
    }

    pub(crate) fn site_unchecked(&self, id: SiteId) -> &Site {
        &self.sites[id - 1]
    }

    /// Position of a node (`0` is the depot).
    pub fn position(&self, node: usize) -> Point {
        if node == DEPOT {
            self.depot
        } else {
            self.sites[node - 1].position
        }
    }

    /// Travel distance between two nodes (`0` is the depot).
    #[inline]
    pub fn travel(&self, a: usize, b: usize) -> f64 {
        self.travel[a * (self.sites.len() + 1) + b]
    }

    /// Copy of this instance under another mode. Fixed and ramped supplies are
    /// not interchangeable, so only `Mprp <-> MprpM` succeeds for fixed data.
    pub fn with_mode(&self, mode: Mode) -> Result<Self, ModelError> {
        let mut out = self.clone();
        out.mode = mode;
        Self::new(
            out.sites,
            out.depot,
            out.fleet_size,
            out.capacity,
            out.horizon,
            mode,
        )
    }

    pub fn with_fleet_size(&self, fleet_size: usize) -> Result<Self, ModelError> {
        if fleet_size == 0 {
            return Err(ModelError::EmptyFleet);
        }
        let mut out = self.clone();
        out.fleet_size = fleet_size;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub site: SiteId,
    /// Service instant, after any waiting.
    pub arrival: f64,
    pub pickup: f64,
}

/// One vehicle's route. The depot is implicit at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub vehicle: VehicleId,
    pub start_time: f64,
    pub visits: Vec<Visit>,
}

impl Tour {
    pub fn empty(vehicle: VehicleId) -> Self {
        Self {
            vehicle,
            start_time: 0.0,
            visits: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn load(&self) -> f64 {
        self.visits.iter().map(|v| v.pickup).sum()
    }

    pub fn contains(&self, site: SiteId) -> bool {
        self.visits.iter().any(|v| v.site == site)
    }

    pub fn position_of(&self, site: SiteId) -> Option<usize> {
        self.visits.iter().position(|v| v.site == site)
    }

    pub fn order(&self) -> Vec<SiteId> {
        self.visits.iter().map(|v| v.site).collect()
    }

    /// Node sequence including the depot at both ends.
    pub fn nodes(&self) -> Vec<usize> {
        let mut nodes = Vec::with_capacity(self.visits.len() + 2);
        nodes.push(DEPOT);
        nodes.extend(self.visits.iter().map(|v| v.site));
        nodes.push(DEPOT);
        nodes
    }

    /// Distance travelled; an empty tour costs nothing.
    pub fn cost(&self, instance: &Instance) -> f64 {
        if self.visits.is_empty() {
            return 0.0;
        }
        self.nodes()
            .windows(2)
            .map(|w| instance.travel(w[0], w[1]))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProfitBreakdown {
    pub reward: f64,
    pub cost: f64,
    pub profit: f64,
}

impl ProfitBreakdown {
    pub fn new(reward: f64, cost: f64) -> Self {
        Self {
            reward,
            cost,
            profit: reward - cost,
        }
    }
}

/// A set of tours together with the profit its producer claims for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub tours: Vec<Tour>,
    pub claimed: ProfitBreakdown,
}

impl Solution {
    /// Builds a solution and computes its claimed profit from the tours.
    pub fn new(instance: &Instance, mut tours: Vec<Tour>) -> Self {
        tours.sort_by_key(|t| t.vehicle);
        let claimed = profit_of_tours(instance, &tours);
        Self { tours, claimed }
    }

    /// One empty tour per vehicle.
    pub fn empty(instance: &Instance) -> Self {
        let tours = (1..=instance.fleet_size()).map(Tour::empty).collect();
        Self::new(instance, tours)
    }

    pub fn tour(&self, vehicle: VehicleId) -> Option<&Tour> {
        self.tours.iter().find(|t| t.vehicle == vehicle)
    }

    pub fn tour_mut(&mut self, vehicle: VehicleId) -> Option<&mut Tour> {
        self.tours.iter_mut().find(|t| t.vehicle == vehicle)
    }

    pub fn profit(&self) -> f64 {
        self.claimed.profit
    }

    /// Recomputes the claimed breakdown after the tours were edited.
    pub fn refresh(&mut self, instance: &Instance) {
        self.claimed = profit_of_tours(instance, &self.tours);
    }

    pub fn visit_count(&self) -> usize {
        self.tours.iter().map(Tour::len).sum()
    }
}

fn profit_of_tours(instance: &Instance, tours: &[Tour]) -> ProfitBreakdown {
    let reward = tours.iter().map(Tour::load).sum();
    let cost = tours.iter().map(|t| t.cost(instance)).sum();
    ProfitBreakdown::new(reward, cost)
}

/// Reward, travel cost and profit of a solution, recomputed from its tours.
pub fn evaluate_profit(instance: &Instance, solution: &Solution) -> ProfitBreakdown {
    profit_of_tours(instance, &solution.tours)
}

/// Result of laying a visit order out in time.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Feasible(Tour),
    /// The vehicle reaches `site` at `arrival`, after its window closed.
    Infeasible {
        site: SiteId,
        arrival: f64,
        window_close: f64,
    },
}

impl Schedule {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Schedule::Feasible(_))
    }

    pub fn into_tour(self) -> Option<Tour> {
        match self {
            Schedule::Feasible(t) => Some(t),
            Schedule::Infeasible { .. } => None,
        }
    }
}

/// Earliest-arrival schedule for a visit order: travel at unit speed, wait
/// for windows to open, fail once a window is missed. Pickups start at zero.
pub fn schedule_tour(
    instance: &Instance,
    vehicle: VehicleId,
    order: &[SiteId],
    start_time: f64,
) -> Result<Schedule, ModelError> {
    let mut seen = vec![false; instance.num_sites() + 1];
    for &site in order {
        if instance.site(site).is_none() {
            return Err(ModelError::UnknownSite(site));
        }
        if std::mem::replace(&mut seen[site], true) {
            return Err(ModelError::RepeatedSite(site));
        }
    }

    let mut visits = Vec::with_capacity(order.len());
    let mut prev = DEPOT;
    let mut clock = start_time;
    for &id in order {
        let site = instance.site_unchecked(id);
        let arrival = (clock + instance.travel(prev, id)).max(site.window_open);
        if arrival > site.window_close + TIME_TOL {
            return Ok(Schedule::Infeasible {
                site: id,
                arrival,
                window_close: site.window_close,
            });
        }
        visits.push(Visit {
            site: id,
            arrival,
            pickup: 0.0,
        });
        prev = id;
        clock = arrival;
    }
    Ok(Schedule::Feasible(Tour {
        vehicle,
        start_time,
        visits,
    }))
}

/// Forward/backward time slack of a tour, for O(1) insertion checks.
///
/// `earliest[p]` is the earliest service time of the `p`-th visit and
/// `latest[p]` the latest service time that still lets every later visit
/// meet its window. There is no deadline for returning to the depot.
#[derive(Debug, Clone)]
pub(crate) struct TourSlack {
    start_time: f64,
    earliest: Vec<f64>,
    latest: Vec<f64>,
    order: Vec<SiteId>,
}

impl TourSlack {
    pub fn new(instance: &Instance, start_time: f64, order: &[SiteId]) -> Self {
        let mut earliest = Vec::with_capacity(order.len());
        let mut prev = DEPOT;
        let mut clock = start_time;
        for &id in order {
            let site = instance.site_unchecked(id);
            clock = (clock + instance.travel(prev, id)).max(site.window_open);
            earliest.push(clock);
            prev = id;
        }
        let mut latest = vec![f64::INFINITY; order.len()];
        for p in (0..order.len()).rev() {
            let close = instance.site_unchecked(order[p]).window_close;
            latest[p] = if p + 1 == order.len() {
                close
            } else {
                close.min(latest[p + 1] - instance.travel(order[p], order[p + 1]))
            };
        }
        Self {
            start_time,
            earliest,
            latest,
            order: order.to_vec(),
        }
    }

    /// Whether `site` can be served right before the visit at `position`
    /// (or appended when `position == len`) without breaking any window.
    pub fn can_insert(&self, instance: &Instance, position: usize, site: SiteId) -> bool {
        let (prev, clock) = if position == 0 {
            (DEPOT, self.start_time)
        } else {
            (self.order[position - 1], self.earliest[position - 1])
        };
        let s = instance.site_unchecked(site);
        let arrival = (clock + instance.travel(prev, site)).max(s.window_open);
        if arrival > s.window_close + TIME_TOL {
            return false;
        }
        match self.order.get(position) {
            None => true,
            Some(&next) => {
                let open = instance.site_unchecked(next).window_open;
                let next_arrival = (arrival + instance.travel(site, next)).max(open);
                next_arrival <= self.latest[position] + TIME_TOL
            }
        }
    }
}
