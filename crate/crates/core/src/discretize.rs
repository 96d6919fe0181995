//! Ramped supply by discretization.
//!
//! Each window `[s, e]` is cut into `N` geometric intervals ending at `e`;
//! every interval becomes a constant-supply pseudo-site at the original
//! location. The resulting fixed-supply instance is solved by the
//! multi-visit pipeline and its routing is mapped back onto the real sites,
//! clamping pickups to what the ramp actually offers.

use crate::baseline::SolverConfig;
use crate::error::{Result, SolveError};
use crate::model::{
    Instance, Mode, Site, SiteId, Solution, SupplyProfile, Tour, VehicleId, Visit, DEPOT, QTY_TOL,
    TIME_TOL,
};
use crate::reassign::{run_mprp_m, ReassignRun};
use crate::validate::validate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

/// `max_i q_i(e_i) / min_j q_j(e_j)`; 1 for an instance without sites.
pub fn compute_alpha(instance: &Instance) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for site in instance.sites() {
        let q = site.end_quantity();
        if !(q > 0.0) {
            return Err(SolveError::InvalidInput(format!(
                "site {} has end quantity {q}; the ratio needs positive supplies",
                site.id
            )));
        }
        lo = lo.min(q);
        hi = hi.max(q);
    }
    if instance.num_sites() == 0 {
        return Ok(1.0);
    }
    Ok(hi / lo)
}

/// `N = max(2, 1 + ceil(ln(alpha) / epsilon))`.
pub fn num_intervals(alpha: f64, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SolveError::InvalidInput(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(SolveError::InvalidInput(format!(
            "alpha must be finite and at least 1, got {alpha}"
        )));
    }
    let steps = alpha.ln() / epsilon;
    // ln(e^2) / 0.5 may land a few ulps above 4.0
    let nearest = steps.round();
    let steps = if (steps - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        steps.ceil()
    };
    Ok((1 + steps as usize).max(2))
}

/// The `N` intervals `[s + w/(1+eps)^(N-l+1), s + w/(1+eps)^(N-l)]`,
/// `l = 1..=N`, with `w = e - s`. The stretch before the first interval is
/// left uncovered.
pub fn split_intervals(site: &Site, levels: usize, epsilon: f64) -> Result<Vec<Interval>> {
    if levels < 2 {
        return Err(SolveError::InvalidInput(format!(
            "need at least 2 intervals, got {levels}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SolveError::InvalidInput(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let (s, e) = (site.window_open, site.window_close);
    if !(e > s) {
        return Err(SolveError::InvalidInput(format!(
            "site {} has a zero-length window",
            site.id
        )));
    }
    let width = e - s;
    let base = 1.0 + epsilon;
    let point = |power: usize| -> f64 {
        if power == 0 {
            e
        } else {
            (s + width / base.powi(power as i32)).min(e)
        }
    };
    Ok((1..=levels)
        .map(|l| Interval {
            lo: point(levels - l + 1),
            hi: point(levels - l),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedSite {
    pub id: SiteId,
    pub origin: SiteId,
    /// `1..=N`, latest interval last.
    pub level: usize,
    pub window: Interval,
    /// `q_i(e_i) (l - 0.5) / (N - 1)` before clamping.
    pub raw_quantity: f64,
    /// Raw quantity clamped to the ramp value at the interval's end.
    pub quantity: f64,
}

/// The constant-supply instance built from a ramped one.
#[derive(Debug, Clone)]
pub struct DerivedInstance {
    pub instance: Instance,
    pub sites: Vec<DerivedSite>,
    pub epsilon: f64,
    pub alpha: f64,
    pub levels: usize,
}

impl DerivedInstance {
    /// `(origin, level)` of a derived site id.
    pub fn origin_of(&self, id: SiteId) -> Option<(SiteId, usize)> {
        id.checked_sub(1)
            .and_then(|idx| self.sites.get(idx))
            .map(|d| (d.origin, d.level))
    }
}

pub fn derive_instance(instance: &Instance, epsilon: f64) -> Result<DerivedInstance> {
    if instance.mode() != Mode::MprpMvs {
        return Err(SolveError::WrongMode {
            expected: Mode::MprpMvs.name(),
            found: instance.mode().name(),
        });
    }
    let alpha = compute_alpha(instance)?;
    let levels = num_intervals(alpha, epsilon)?;
    let mut derived = Vec::with_capacity(instance.num_sites() * levels);
    let mut sites = Vec::with_capacity(instance.num_sites() * levels);
    for origin in instance.sites() {
        let q_end = origin.end_quantity();
        for (idx, window) in split_intervals(origin, levels, epsilon)?.into_iter().enumerate() {
            let level = idx + 1;
            let id = derived.len() + 1;
            let raw_quantity = q_end * (level as f64 - 0.5) / (levels as f64 - 1.0);
            let quantity = raw_quantity.min(origin.supply_at(window.hi));
            derived.push(DerivedSite {
                id,
                origin: origin.id,
                level,
                window,
                raw_quantity,
                quantity,
            });
            sites.push(Site::new(
                id,
                origin.position,
                (window.lo, window.hi),
                SupplyProfile::Fixed(quantity),
            ));
        }
    }
    let fixed = Instance::new(
        sites,
        instance.depot(),
        instance.fleet_size(),
        instance.capacity(),
        instance.horizon(),
        Mode::MprpM,
    )?;
    Ok(DerivedInstance {
        instance: fixed,
        sites: derived,
        epsilon,
        alpha,
        levels,
    })
}

struct Collapsed {
    origin: SiteId,
    pickup: f64,
}

/// Turns a routing of the derived instance into one of the original.
///
/// Derived visits become visits to their origin with the same pickup.
/// Several levels of one origin on one tour collapse into a single visit at
/// the first of them, with the pickups summed. Each tour is served as late
/// as the original windows allow, since supply only grows. Pickups are then
/// cut back earliest-first (ties by vehicle id) until cumulative pickups
/// never exceed the ramp, and per tour until the load fits `Q`. Visits left
/// with nothing to collect, and tours that lose money, are dropped.
pub fn map_back(
    instance: &Instance,
    derived: &DerivedInstance,
    derived_solution: &Solution,
) -> Result<Solution> {
    let mut tours: Vec<Tour> = Vec::with_capacity(derived_solution.tours.len());
    for dtour in &derived_solution.tours {
        let mut collapsed: Vec<Collapsed> = Vec::new();
        for visit in &dtour.visits {
            let (origin, _) = derived.origin_of(visit.site).ok_or_else(|| {
                SolveError::Internal(format!("derived site {} has no origin", visit.site))
            })?;
            match collapsed.iter_mut().find(|c| c.origin == origin) {
                Some(c) => c.pickup += visit.pickup,
                None => collapsed.push(Collapsed {
                    origin,
                    pickup: visit.pickup,
                }),
            }
        }
        tours.push(lay_out(instance, dtour.vehicle, dtour.start_time, &collapsed)?);
    }

    clamp_availability(instance, &mut tours);
    for tour in &mut tours {
        let mut excess = tour.load() - instance.capacity();
        for visit in tour.visits.iter_mut().rev() {
            if excess <= 0.0 {
                break;
            }
            let cut = visit.pickup.min(excess);
            visit.pickup -= cut;
            excess -= cut;
        }
    }

    for tour in &mut tours {
        let kept: Vec<Collapsed> = tour
            .visits
            .iter()
            .filter(|v| v.pickup > QTY_TOL)
            .map(|v| Collapsed {
                origin: v.site,
                pickup: v.pickup,
            })
            .collect();
        *tour = lay_out(instance, tour.vehicle, tour.start_time, &kept)?;
        if tour.load() < tour.cost(instance) {
            tour.visits.clear();
        }
    }
    Ok(Solution::new(instance, tours))
}

/// Serves `stops` in order, each at the latest instant that still lets
/// every later stop meet its window.
fn lay_out(
    instance: &Instance,
    vehicle: VehicleId,
    start_time: f64,
    stops: &[Collapsed],
) -> Result<Tour> {
    let mut earliest = Vec::with_capacity(stops.len());
    let mut prev = DEPOT;
    let mut clock = start_time;
    for stop in stops {
        let site = instance
            .site(stop.origin)
            .ok_or_else(|| SolveError::Internal(format!("unknown origin {}", stop.origin)))?;
        let arrival = (clock + instance.travel(prev, stop.origin)).max(site.window_open);
        if arrival > site.window_close + TIME_TOL {
            return Err(SolveError::Internal(format!(
                "mapped visit to site {} at {arrival} misses its window",
                stop.origin
            )));
        }
        earliest.push(arrival);
        prev = stop.origin;
        clock = arrival;
    }
    let mut visits = vec![
        Visit {
            site: 0,
            arrival: 0.0,
            pickup: 0.0,
        };
        stops.len()
    ];
    let mut latest = f64::INFINITY;
    for p in (0..stops.len()).rev() {
        let close = instance.site_unchecked(stops[p].origin).window_close;
        if p + 1 < stops.len() {
            latest -= instance.travel(stops[p].origin, stops[p + 1].origin);
        }
        latest = latest.min(close).max(earliest[p]);
        visits[p] = Visit {
            site: stops[p].origin,
            arrival: latest,
            pickup: stops[p].pickup,
        };
    }
    Ok(Tour {
        vehicle,
        start_time,
        visits,
    })
}

fn clamp_availability(instance: &Instance, tours: &mut [Tour]) {
    let mut events: Vec<(SiteId, f64, VehicleId, usize, usize)> = Vec::new();
    for (t_idx, tour) in tours.iter().enumerate() {
        for (v_idx, visit) in tour.visits.iter().enumerate() {
            events.push((visit.site, visit.arrival, tour.vehicle, t_idx, v_idx));
        }
    }
    events.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut current = 0;
    let mut cumulative = 0.0;
    for (site_id, arrival, _, t_idx, v_idx) in events {
        if site_id != current {
            current = site_id;
            cumulative = 0.0;
        }
        let site = instance.site_unchecked(site_id);
        let available = site.supply_at(arrival.clamp(site.window_open, site.window_close));
        let visit = &mut tours[t_idx].visits[v_idx];
        visit.pickup = visit.pickup.min((available - cumulative).max(0.0)).max(0.0);
        cumulative += visit.pickup;
    }
}

/// Everything the ramped-supply pipeline produced.
#[derive(Debug, Clone)]
pub struct MvsRun {
    pub derived: DerivedInstance,
    pub derived_run: ReassignRun,
    pub solution: Solution,
}

/// Discretize, solve the fixed-supply instance, map back, and validate.
pub fn run_mprp_mvs(instance: &Instance, epsilon: f64, config: &SolverConfig) -> Result<MvsRun> {
    let derived = derive_instance(instance, epsilon)?;
    let derived_run = run_mprp_m(&derived.instance, config)?;
    let solution = map_back(instance, &derived, &derived_run.solution)?;
    let report = validate(instance, &solution);
    if !report.is_feasible() {
        return Err(SolveError::Internal(format!(
            "mapped solution is infeasible: {:?}",
            report.violations
        )));
    }
    Ok(MvsRun {
        derived,
        derived_run,
        solution,
    })
}

pub fn solve_mprp_mvs(instance: &Instance, epsilon: f64, config: &SolverConfig) -> Result<Solution> {
    run_mprp_mvs(instance, epsilon, config).map(|run| run.solution)
}

/// Profit with the full fleet versus a single vehicle on the same sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FleetDiagnostic {
    pub fleet_size: usize,
    pub fleet_profit: f64,
    pub single_profit: f64,
    /// `single_profit / fleet_profit` (1 when both are zero).
    pub ratio: f64,
    /// `(1 + 1/(1 + sqrt(m)))^2`.
    pub bound: f64,
}

impl FleetDiagnostic {
    pub fn within_bound(&self) -> bool {
        self.ratio <= self.bound + 1e-12
    }
}

pub fn fleet_diagnostic(
    instance: &Instance,
    epsilon: f64,
    config: &SolverConfig,
) -> Result<FleetDiagnostic> {
    let fleet_profit = solve_mprp_mvs(instance, epsilon, config)?.profit();
    let single = instance.with_fleet_size(1)?;
    let single_profit = solve_mprp_mvs(&single, epsilon, config)?.profit();
    let m = instance.fleet_size() as f64;
    let ratio = if fleet_profit > 0.0 {
        single_profit / fleet_profit
    } else if single_profit > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(FleetDiagnostic {
        fleet_size: instance.fleet_size(),
        fleet_profit,
        single_profit,
        ratio,
        bound: (1.0 + 1.0 / (1.0 + m.sqrt())).powi(2),
    })
}
