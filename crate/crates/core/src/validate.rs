//! Mode-aware feasibility checks and an independent profit audit.

use crate::model::{
    distance, Instance, Mode, ProfitBreakdown, SiteId, Solution, VehicleId, PROFIT_TOL, QTY_TOL,
    TIME_TOL,
};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    WindowViolation,
    CapacityViolation,
    /// Same vehicle visits the same site twice.
    DuplicateVisit,
    /// Single-visit mode: a site lies on two tours.
    SingleVisitViolation,
    AvailabilityViolation,
    ScheduleInconsistency,
    ProfitMismatch,
    /// Unknown site or vehicle id, repeated vehicle, negative pickup.
    Malformed,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::WindowViolation => "WindowViolation",
            ViolationKind::CapacityViolation => "CapacityViolation",
            ViolationKind::DuplicateVisit => "DuplicateVisit",
            ViolationKind::SingleVisitViolation => "SingleVisitViolation",
            ViolationKind::AvailabilityViolation => "AvailabilityViolation",
            ViolationKind::ScheduleInconsistency => "ScheduleInconsistency",
            ViolationKind::ProfitMismatch => "ProfitMismatch",
            ViolationKind::Malformed => "Malformed",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub vehicle: Option<VehicleId>,
    pub site: Option<SiteId>,
    pub time: Option<f64>,
    /// Amount by which the constraint is exceeded.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub audited: ProfitBreakdown,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn first(&self, kind: ViolationKind) -> Option<&Violation> {
        self.violations.iter().find(|v| v.kind == kind)
    }
}

/// Reward, cost and profit recomputed straight from coordinates.
///
/// Deliberately does not use the instance's cached travel matrix or
/// [`crate::model::evaluate_profit`]. Visits to unknown sites are skipped.
pub fn audit_profit(instance: &Instance, solution: &Solution) -> ProfitBreakdown {
    let mut reward = 0.0;
    let mut cost = 0.0;
    for tour in &solution.tours {
        let mut here = instance.depot();
        let mut moved = false;
        for visit in &tour.visits {
            let Some(site) = instance.site(visit.site) else {
                continue;
            };
            reward += visit.pickup;
            cost += distance(here, site.position);
            here = site.position;
            moved = true;
        }
        if moved {
            cost += distance(here, instance.depot());
        }
    }
    ProfitBreakdown::new(reward, cost)
}

struct PickupEvent {
    time: f64,
    vehicle: VehicleId,
    amount: f64,
}

/// Checks a solution against every constraint of the instance's mode.
///
/// Never fails: every problem found becomes a [`Violation`].
pub fn validate(instance: &Instance, solution: &Solution) -> ValidationReport {
    let mode = instance.mode();
    let n = instance.num_sites();
    let mut violations = Vec::new();
    let mut push = |kind, vehicle, site, time, magnitude| {
        violations.push(Violation {
            kind,
            vehicle,
            site,
            time,
            magnitude,
        })
    };

    let mut vehicle_seen = vec![false; instance.fleet_size() + 1];
    let mut tours_at_site: Vec<Vec<VehicleId>> = vec![Vec::new(); n + 1];
    let mut events: Vec<Vec<PickupEvent>> = (0..=n).map(|_| Vec::new()).collect();

    for tour in &solution.tours {
        let k = tour.vehicle;
        if k == 0 || k > instance.fleet_size() || std::mem::replace(&mut vehicle_seen[k], true) {
            push(ViolationKind::Malformed, Some(k), None, None, 0.0);
        }
        if !(tour.start_time >= 0.0 && tour.start_time.is_finite()) {
            push(
                ViolationKind::ScheduleInconsistency,
                Some(k),
                None,
                Some(tour.start_time),
                (-tour.start_time).max(0.0),
            );
        }

        let mut on_tour = vec![false; n + 1];
        let mut prev = instance.depot();
        let mut clock = tour.start_time;
        let mut load = 0.0;
        let mut overloaded = false;
        for visit in &tour.visits {
            let Some(site) = instance.site(visit.site) else {
                push(ViolationKind::Malformed, Some(k), Some(visit.site), None, 0.0);
                continue;
            };
            let id = visit.site;
            let t = visit.arrival;
            if !(visit.pickup >= -QTY_TOL && visit.pickup.is_finite()) {
                push(
                    ViolationKind::Malformed,
                    Some(k),
                    Some(id),
                    Some(t),
                    (-visit.pickup).max(0.0),
                );
            }
            if std::mem::replace(&mut on_tour[id], true) {
                push(ViolationKind::DuplicateVisit, Some(k), Some(id), Some(t), 0.0);
            } else {
                tours_at_site[id].push(k);
            }

            let reachable = clock + distance(prev, site.position);
            if !(t >= reachable - TIME_TOL) {
                let deficit = if t.is_finite() { reachable - t } else { f64::INFINITY };
                push(
                    ViolationKind::ScheduleInconsistency,
                    Some(k),
                    Some(id),
                    Some(t),
                    deficit,
                );
            }
            if t < site.window_open - TIME_TOL {
                push(
                    ViolationKind::WindowViolation,
                    Some(k),
                    Some(id),
                    Some(t),
                    site.window_open - t,
                );
            } else if t > site.window_close + TIME_TOL {
                push(
                    ViolationKind::WindowViolation,
                    Some(k),
                    Some(id),
                    Some(t),
                    t - site.window_close,
                );
            }

            load += visit.pickup;
            if !overloaded && load > instance.capacity() + QTY_TOL {
                overloaded = true;
                let total = tour.load();
                push(
                    ViolationKind::CapacityViolation,
                    Some(k),
                    Some(id),
                    Some(t),
                    total - instance.capacity(),
                );
            }

            events[id].push(PickupEvent {
                time: t,
                vehicle: k,
                amount: visit.pickup,
            });
            prev = site.position;
            clock = t;
        }
    }

    if mode == Mode::Mprp {
        for (site, vehicles) in tours_at_site.iter().enumerate() {
            for &k in vehicles.iter().skip(1) {
                push(ViolationKind::SingleVisitViolation, Some(k), Some(site), None, 0.0);
            }
        }
    }

    for (id, site_events) in events.iter_mut().enumerate().skip(1) {
        if site_events.is_empty() {
            continue;
        }
        let site = instance.site_unchecked(id);
        if mode.has_variable_supply() {
            site_events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.vehicle.cmp(&b.vehicle)));
            let mut cumulative = 0.0;
            for ev in site_events.iter() {
                cumulative += ev.amount;
                // Evaluate the ramp at the pickup instant clamped into the
                // window; a pickup outside the window is a WindowViolation.
                let t = ev.time.clamp(site.window_open, site.window_close);
                let available = site.supply_at(t);
                if cumulative > available + QTY_TOL {
                    push(
                        ViolationKind::AvailabilityViolation,
                        Some(ev.vehicle),
                        Some(id),
                        Some(ev.time),
                        cumulative - available,
                    );
                }
            }
        } else {
            let total: f64 = site_events.iter().map(|e| e.amount).sum();
            let available = site.end_quantity();
            if total > available + QTY_TOL {
                let last = site_events.last().map(|e| (e.vehicle, e.time));
                push(
                    ViolationKind::AvailabilityViolation,
                    last.map(|l| l.0),
                    Some(id),
                    last.map(|l| l.1),
                    total - available,
                );
            }
        }
    }

    let audited = audit_profit(instance, solution);
    let claimed = solution.claimed;
    let gap = (claimed.reward - audited.reward)
        .abs()
        .max((claimed.cost - audited.cost).abs())
        .max((claimed.profit - audited.profit).abs());
    if !(gap <= PROFIT_TOL) {
        push(ViolationKind::ProfitMismatch, None, None, None, gap);
    }

    ValidationReport {
        violations,
        audited,
    }
}
