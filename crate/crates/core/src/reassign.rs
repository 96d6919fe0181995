//! Multi-vehicle improvement of a single-visit routing.
//!
//! Starting from a single-visit solution, each (owner vehicle, shared site)
//! pair is examined in tour order. A *receiver* vehicle may insert the
//! shared site into its own tour and collect what the owner leaves behind.
//! The split of quantities is the optimum of a three-variable LP:
//!
//! ```text
//! maximize  x + y + z
//! s.t.      x     <= q_u          receiver's take at its anchor site u
//!           y + z <= q_u'         both vehicles' take at the shared site u'
//!           z     <= Q - Q_k'     owner's room
//! ```
//!
//! A candidate is kept only if the receiver can still carry `x + y`, the
//! owner can carry `z`, and the receiver's tour stays within every window
//! after the detour.

use crate::baseline::{solve_baseline, SolverConfig};
use crate::error::{Result, SolveError};
use crate::model::{
    schedule_tour, Instance, Mode, Schedule, SiteId, Solution, Tour, VehicleId, DEPOT, QTY_TOL,
};
use crate::validate::{audit_profit, validate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Optimal quantities for one re-assignment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LpSolution {
    /// Receiver's pickup at its anchor site.
    pub x: f64,
    /// Receiver's pickup at the shared site.
    pub y: f64,
    /// Owner's pickup at the shared site.
    pub z: f64,
}

impl LpSolution {
    pub fn objective(&self) -> f64 {
        self.x + self.y + self.z
    }
}

/// Closed-form optimum of the re-assignment LP.
///
/// `x` is independent of `y, z`, so `x* = q_u`; the owner keeps as much of
/// the shared site as its room allows and the receiver takes the rest.
pub fn solve_reassignment_lp(q_u: f64, q_shared: f64, owner_room: f64) -> Result<LpSolution> {
    for (name, v) in [("q_u", q_u), ("q_u'", q_shared), ("owner room", owner_room)] {
        if !(v >= 0.0) || v.is_nan() {
            return Err(SolveError::InvalidInput(format!("{name} must be >= 0, got {v}")));
        }
    }
    let z = q_shared.min(owner_room);
    Ok(LpSolution {
        x: q_u,
        y: q_shared - z,
        z,
    })
}

/// Committed load per vehicle and uncollected supply per site.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadLedger {
    loads: Vec<f64>,
    remaining: Vec<f64>,
}

impl LoadLedger {
    pub fn from_solution(instance: &Instance, solution: &Solution) -> Self {
        let mut loads = vec![0.0; instance.fleet_size() + 1];
        let mut remaining: Vec<f64> = std::iter::once(0.0)
            .chain(instance.sites().iter().map(|s| s.end_quantity()))
            .collect();
        for tour in &solution.tours {
            if let Some(load) = loads.get_mut(tour.vehicle) {
                *load += tour.load();
            }
            for v in &tour.visits {
                if let Some(r) = remaining.get_mut(v.site) {
                    *r -= v.pickup;
                }
            }
        }
        for r in &mut remaining {
            *r = r.max(0.0);
        }
        Self { loads, remaining }
    }

    /// Total pickup `Q_k` of a vehicle.
    pub fn load(&self, vehicle: VehicleId) -> f64 {
        self.loads.get(vehicle).copied().unwrap_or(0.0)
    }

    /// Supply at a site that no vehicle collects yet.
    pub fn remaining(&self, site: SiteId) -> f64 {
        self.remaining.get(site).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityRejection {
    /// `x + y <= Q - Q_k + q_u'` fails.
    LiteralForm,
    /// The receiver would carry more than `Q`.
    ReceiverOverload,
    /// The owner would carry more than `Q`.
    OwnerOverload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacityVerdict {
    pub literal_ok: bool,
    pub receiver_ok: bool,
    pub owner_ok: bool,
}

impl CapacityVerdict {
    pub fn accepted(&self) -> bool {
        self.literal_ok && self.receiver_ok && self.owner_ok
    }

    pub fn rejection(&self) -> Option<CapacityRejection> {
        if !self.literal_ok {
            Some(CapacityRejection::LiteralForm)
        } else if !self.receiver_ok {
            Some(CapacityRejection::ReceiverOverload)
        } else if !self.owner_ok {
            Some(CapacityRejection::OwnerOverload)
        } else {
            None
        }
    }

    /// The literal inequality accepts, but the receiver would exceed `Q`.
    pub fn literal_only(&self) -> bool {
        self.literal_ok && !self.receiver_ok
    }
}

/// Capacity test for a re-assignment. `receiver_load` and `owner_load` are
/// the vehicles' loads *without* the pickups the LP re-decides (the
/// receiver's at its anchor, the owner's at the shared site).
pub fn check_capacity(
    lp: &LpSolution,
    receiver_load: f64,
    owner_load: f64,
    q_shared: f64,
    capacity: f64,
) -> CapacityVerdict {
    CapacityVerdict {
        literal_ok: lp.x + lp.y <= capacity - receiver_load + q_shared + QTY_TOL,
        receiver_ok: receiver_load + lp.x + lp.y <= capacity + QTY_TOL,
        owner_ok: owner_load + lp.z <= capacity + QTY_TOL,
    }
}

/// Index in `tour.visits` at which a site inserted between the consecutive
/// nodes `a, b` would land.
fn leg_position(tour: &Tour, (a, b): (usize, usize)) -> Option<usize> {
    tour.nodes()
        .windows(2)
        .position(|w| w[0] == a && w[1] == b)
}

/// Extra distance `d(a, s) + d(s, b) - d(a, b)` of serving `site` between
/// the consecutive stops `a, b` of `tour` (node `0` is the depot).
pub fn detour_cost(
    instance: &Instance,
    tour: &Tour,
    site: SiteId,
    between: (usize, usize),
) -> Result<f64> {
    if instance.site(site).is_none() {
        return Err(SolveError::InvalidInput(format!("unknown site {site}")));
    }
    if leg_position(tour, between).is_none() {
        return Err(SolveError::InvalidInput(format!(
            "({}, {}) is not a leg of vehicle {}'s tour",
            between.0, between.1, tour.vehicle
        )));
    }
    Ok(leg_detour(instance, site, between))
}

fn leg_detour(instance: &Instance, site: SiteId, (a, b): (usize, usize)) -> f64 {
    let raw = instance.travel(a, site) + instance.travel(site, b) - instance.travel(a, b);
    raw.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeVerdict {
    Feasible,
    /// First window the rescheduled tour misses.
    Late {
        site: SiteId,
        arrival: f64,
        window_close: f64,
    },
}

impl TimeVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, TimeVerdict::Feasible)
    }
}

/// Reschedules `tour` with `site` inserted between `between` and reports
/// whether every window still holds. Waiting is allowed, so this accepts
/// everything the forward/backward slack inequality accepts, and more.
pub fn check_time_feasibility(
    instance: &Instance,
    tour: &Tour,
    site: SiteId,
    between: (usize, usize),
) -> Result<TimeVerdict> {
    let position = leg_position(tour, between).ok_or_else(|| {
        SolveError::InvalidInput(format!(
            "({}, {}) is not a leg of vehicle {}'s tour",
            between.0, between.1, tour.vehicle
        ))
    })?;
    let mut order = tour.order();
    order.insert(position, site);
    Ok(match schedule_tour(instance, tour.vehicle, &order, tour.start_time)? {
        Schedule::Feasible(_) => TimeVerdict::Feasible,
        Schedule::Infeasible {
            site,
            arrival,
            window_close,
        } => TimeVerdict::Late {
            site,
            arrival,
            window_close,
        },
    })
}

/// Net profit change of a re-assignment: the LP objective, minus what the
/// two vehicles already collected at the anchor and shared sites, minus the
/// detour; clamped at zero.
pub fn candidate_gain(objective: f64, displaced: f64, detour: f64) -> f64 {
    (objective - displaced - detour).max(0.0)
}

/// One re-assignment tuple `(k, k', u, u', (i, j), (i', j'))` with its
/// evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReassignmentCandidate {
    /// Vehicle `k` that takes on the shared site.
    pub receiver: VehicleId,
    /// Vehicle `k'` whose tour already holds the shared site.
    pub owner: VehicleId,
    /// Site `u` on the receiver's tour.
    pub anchor: SiteId,
    /// Site `u'` on the owner's tour.
    pub shared: SiteId,
    /// Consecutive stops `(i, j)` of the receiver's tour where `u'` goes.
    pub receiver_leg: (usize, usize),
    /// Consecutive stops `(i', j')` of the owner's tour.
    pub owner_leg: (usize, usize),
    /// LP inputs `(q_u, q_u', Q - Q_k')`.
    pub lp_inputs: (f64, f64, f64),
    pub lp: LpSolution,
    /// Pickups the LP replaces: receiver at `u` plus owner at `u'`.
    pub displaced: f64,
    pub detour: f64,
    pub capacity: CapacityVerdict,
    pub time: TimeVerdict,
    pub gain: f64,
}

impl ReassignmentCandidate {
    pub fn is_feasible(&self) -> bool {
        self.capacity.accepted() && self.time.is_feasible()
    }

    fn tie_key(&self) -> (VehicleId, SiteId, usize, usize) {
        (self.receiver, self.anchor, self.receiver_leg.0, self.owner_leg.0)
    }
}

/// Largest gain wins; gains within [`QTY_TOL`] tie and fall back to the
/// lowest receiver, anchor `u`, then `i`, then `i'`.
fn better(candidate: &ReassignmentCandidate, incumbent: Option<&ReassignmentCandidate>) -> bool {
    match incumbent {
        None => true,
        Some(best) => {
            if candidate.gain > best.gain + QTY_TOL {
                true
            } else if candidate.gain < best.gain - QTY_TOL {
                false
            } else {
                candidate.tie_key() < best.tie_key()
            }
        }
    }
}

/// Per-(receiver, leg) facts shared by every anchor and owner leg.
struct LegFacts {
    leg: (usize, usize),
    detour: f64,
    time: TimeVerdict,
}

struct PairContext<'a> {
    instance: &'a Instance,
    ledger: LoadLedger,
    owner: &'a Tour,
    shared: SiteId,
    owner_pickup: f64,
}

impl PairContext<'_> {
    fn receivers<'s>(&self, solution: &'s Solution) -> impl Iterator<Item = &'s Tour> + use<'s, '_> {
        let owner = self.owner.vehicle;
        let shared = self.shared;
        solution
            .tours
            .iter()
            .filter(move |t| t.vehicle != owner && !t.is_empty() && !t.contains(shared))
    }

    fn legs(&self, receiver: &Tour) -> Result<Vec<LegFacts>> {
        receiver
            .nodes()
            .windows(2)
            .map(|w| {
                let leg = (w[0], w[1]);
                Ok(LegFacts {
                    leg,
                    detour: leg_detour(self.instance, self.shared, leg),
                    time: check_time_feasibility(self.instance, receiver, self.shared, leg)?,
                })
            })
            .collect()
    }

    fn candidate(
        &self,
        receiver: &Tour,
        anchor_idx: usize,
        facts: &LegFacts,
        owner_leg: (usize, usize),
    ) -> ReassignmentCandidate {
        let capacity = self.instance.capacity();
        let anchor = receiver.visits[anchor_idx].site;
        let anchor_pickup = receiver.visits[anchor_idx].pickup;
        let receiver_load = self.ledger.load(receiver.vehicle) - anchor_pickup;
        let owner_load = self.ledger.load(self.owner.vehicle) - self.owner_pickup;
        let q_u = anchor_pickup + self.ledger.remaining(anchor);
        let q_shared = self.owner_pickup + self.ledger.remaining(self.shared);
        let room = (capacity - owner_load).max(0.0);
        let lp = solve_reassignment_lp(q_u, q_shared, room)
            .expect("ledger quantities are nonnegative");
        let verdict = check_capacity(&lp, receiver_load, owner_load, q_shared, capacity);
        let displaced = anchor_pickup + self.owner_pickup;
        let mut candidate = ReassignmentCandidate {
            receiver: receiver.vehicle,
            owner: self.owner.vehicle,
            anchor,
            shared: self.shared,
            receiver_leg: facts.leg,
            owner_leg,
            lp_inputs: (q_u, q_shared, room),
            lp,
            displaced,
            detour: facts.detour,
            capacity: verdict,
            time: facts.time,
            gain: 0.0,
        };
        if candidate.is_feasible() {
            candidate.gain = candidate_gain(lp.objective(), displaced, facts.detour);
        }
        candidate
    }
}

fn pair_context<'a>(
    instance: &'a Instance,
    solution: &'a Solution,
    owner: VehicleId,
    shared: SiteId,
) -> Result<PairContext<'a>> {
    let owner_tour = solution
        .tour(owner)
        .ok_or_else(|| SolveError::InvalidInput(format!("vehicle {owner} has no tour")))?;
    let idx = owner_tour.position_of(shared).ok_or_else(|| {
        SolveError::InvalidInput(format!("site {shared} is not on vehicle {owner}'s tour"))
    })?;
    Ok(PairContext {
        instance,
        ledger: LoadLedger::from_solution(instance, solution),
        owner: owner_tour,
        shared,
        owner_pickup: owner_tour.visits[idx].pickup,
    })
}

/// Every tuple for the pair (`owner`, `shared`): each other non-empty
/// vehicle not already serving `shared`, each anchor on its tour, each leg
/// of its tour and each leg of the owner's tour.
pub fn enumerate_candidates(
    instance: &Instance,
    solution: &Solution,
    owner: VehicleId,
    shared: SiteId,
) -> Result<Vec<ReassignmentCandidate>> {
    let ctx = pair_context(instance, solution, owner, shared)?;
    let owner_legs: Vec<(usize, usize)> = ctx.owner.nodes().windows(2).map(|w| (w[0], w[1])).collect();
    let mut out = Vec::new();
    for receiver in ctx.receivers(solution) {
        let legs = ctx.legs(receiver)?;
        for anchor_idx in 0..receiver.visits.len() {
            for facts in &legs {
                for &owner_leg in &owner_legs {
                    out.push(ctx.candidate(receiver, anchor_idx, facts, owner_leg));
                }
            }
        }
    }
    Ok(out)
}

/// Picks the best candidate with positive gain from a candidate list.
pub fn select_best(candidates: &[ReassignmentCandidate]) -> Option<&ReassignmentCandidate> {
    let mut best: Option<&ReassignmentCandidate> = None;
    for c in candidates.iter().filter(|c| c.gain > 0.0) {
        if better(c, best) {
            best = Some(c);
        }
    }
    best
}

/// Same result as `select_best(&enumerate_candidates(..))`, without
/// materializing the owner-leg dimension: the owner's legs never change a
/// candidate's gain, and the tie-break always prefers the leg leaving the
/// depot.
pub fn best_candidate(
    instance: &Instance,
    solution: &Solution,
    owner: VehicleId,
    shared: SiteId,
) -> Result<(Option<ReassignmentCandidate>, usize)> {
    let ctx = pair_context(instance, solution, owner, shared)?;
    let owner_leg = (DEPOT, ctx.owner.visits[0].site);
    let mut best: Option<ReassignmentCandidate> = None;
    let mut literal_only = 0;
    for receiver in ctx.receivers(solution) {
        let legs = ctx.legs(receiver)?;
        for anchor_idx in 0..receiver.visits.len() {
            for facts in &legs {
                let c = ctx.candidate(receiver, anchor_idx, facts, owner_leg);
                if c.capacity.literal_only() {
                    literal_only += 1;
                }
                if c.gain > 0.0 && better(&c, best.as_ref()) {
                    best = Some(c);
                }
            }
        }
    }
    Ok((best, literal_only))
}

/// Applies an accepted candidate: the receiver serves the shared site
/// between its leg's endpoints, taking `x*` at the anchor and `y*` at the
/// shared site; the owner keeps `z*` at the shared site.
pub fn apply_reassignment(
    instance: &Instance,
    solution: &Solution,
    candidate: &ReassignmentCandidate,
) -> Result<Solution> {
    let refuse = |reason: &str| SolveError::Precondition {
        vehicle: candidate.receiver,
        site: candidate.shared,
        reason: reason.to_string(),
    };
    if !(candidate.gain > 0.0) {
        return Err(refuse("gain is not positive"));
    }
    if !candidate.capacity.accepted() {
        return Err(refuse("capacity check failed"));
    }
    if !candidate.time.is_feasible() {
        return Err(refuse("time windows would be violated"));
    }
    if candidate.receiver == candidate.owner {
        return Err(refuse("receiver and owner coincide"));
    }

    let mut next = solution.clone();
    let receiver = next
        .tour(candidate.receiver)
        .ok_or_else(|| refuse("receiver has no tour"))?;
    if receiver.contains(candidate.shared) {
        return Err(refuse("receiver already serves the shared site"));
    }
    let anchor_idx = receiver
        .position_of(candidate.anchor)
        .ok_or_else(|| refuse("anchor is not on the receiver's tour"))?;
    let at = leg_position(receiver, candidate.receiver_leg)
        .ok_or_else(|| refuse("receiver leg is not consecutive"))?;

    let mut order = receiver.order();
    let mut pickups: Vec<f64> = receiver.visits.iter().map(|v| v.pickup).collect();
    pickups[anchor_idx] = candidate.lp.x;
    order.insert(at, candidate.shared);
    pickups.insert(at, candidate.lp.y);
    let mut rescheduled = schedule_tour(instance, candidate.receiver, &order, receiver.start_time)?
        .into_tour()
        .ok_or_else(|| refuse("rescheduled tour misses a window"))?;
    for (visit, pickup) in rescheduled.visits.iter_mut().zip(pickups) {
        visit.pickup = pickup;
    }
    *next.tour_mut(candidate.receiver).expect("checked above") = rescheduled;

    let owner = next
        .tour_mut(candidate.owner)
        .ok_or_else(|| refuse("owner has no tour"))?;
    let shared_idx = owner
        .position_of(candidate.shared)
        .ok_or_else(|| refuse("shared site is not on the owner's tour"))?;
    owner.visits[shared_idx].pickup = candidate.lp.z;

    next.refresh(instance);
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppliedReassignment {
    pub candidate: ReassignmentCandidate,
    /// Audited profit before and after applying.
    pub profit_before: f64,
    pub profit_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReassignRun {
    pub baseline: Solution,
    pub solution: Solution,
    pub applied: Vec<AppliedReassignment>,
    /// Candidates accepted by the literal capacity inequality but rejected
    /// because the receiver would exceed `Q`.
    pub literal_only_rejections: usize,
}

impl ReassignRun {
    pub fn total_gain(&self) -> f64 {
        self.solution.profit() - self.baseline.profit()
    }
}

/// Pairs `(owner, site)` in tour order: vehicles ascending, visits in order.
pub fn tour_order_pairs(solution: &Solution) -> Vec<(VehicleId, SiteId)> {
    let mut tours: Vec<&Tour> = solution.tours.iter().collect();
    tours.sort_by_key(|t| t.vehicle);
    tours
        .into_iter()
        .flat_map(|t| t.visits.iter().map(move |v| (t.vehicle, v.site)))
        .collect()
}

/// Runs the improvement over `pairs` in the given order, applying at most
/// one re-assignment per pair. Every applied step is re-validated.
pub fn improve_in_order(
    instance: &Instance,
    start: Solution,
    pairs: &[(VehicleId, SiteId)],
) -> Result<ReassignRun> {
    let mut current = start.clone();
    let mut applied = Vec::new();
    let mut literal_only_rejections = 0;
    for &(owner, shared) in pairs {
        let still_owned = current.tour(owner).is_some_and(|t| t.contains(shared));
        if !still_owned {
            continue;
        }
        let (best, flagged) = best_candidate(instance, &current, owner, shared)?;
        literal_only_rejections += flagged;
        let Some(candidate) = best else { continue };
        let next = apply_reassignment(instance, &current, &candidate)?;
        let report = validate(instance, &next);
        if !report.is_feasible() {
            return Err(SolveError::Internal(format!(
                "re-assignment left an infeasible solution: {:?}",
                report.violations
            )));
        }
        applied.push(AppliedReassignment {
            candidate,
            profit_before: audit_profit(instance, &current).profit,
            profit_after: report.audited.profit,
        });
        current = next;
    }
    Ok(ReassignRun {
        baseline: start,
        solution: current,
        applied,
        literal_only_rejections,
    })
}

fn require_multi_visit(instance: &Instance) -> Result<()> {
    if instance.mode() != Mode::MprpM {
        return Err(SolveError::WrongMode {
            expected: Mode::MprpM.name(),
            found: instance.mode().name(),
        });
    }
    Ok(())
}

/// Single-visit baseline on the same sites, re-expressed for `instance`.
pub fn baseline_for(instance: &Instance, config: &SolverConfig) -> Result<Solution> {
    require_multi_visit(instance)?;
    let single = instance.with_mode(Mode::Mprp)?;
    let base = solve_baseline(&single, config)?;
    Ok(Solution::new(instance, base.tours))
}

/// Baseline, then re-assignments in tour order, with the full trace.
pub fn run_mprp_m(instance: &Instance, config: &SolverConfig) -> Result<ReassignRun> {
    let baseline = baseline_for(instance, config)?;
    let pairs = tour_order_pairs(&baseline);
    improve_in_order(instance, baseline, &pairs)
}

/// Multi-visit fixed-supply solver.
pub fn solve_mprp_m(instance: &Instance, config: &SolverConfig) -> Result<Solution> {
    run_mprp_m(instance, config).map(|run| run.solution)
}

/// Spread of the total gain across random pair orderings.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingDiagnostic {
    /// Total gain under tour order first, then each shuffled order.
    pub totals: Vec<f64>,
    pub max: f64,
    pub min: f64,
    /// `max / min`; 1 when every total is zero, infinite when only the
    /// minimum is zero.
    pub ratio: f64,
    pub exceeds_four: bool,
    /// Sum of supplies on the baseline tours.
    pub collected_supply: f64,
    /// Sum of window lengths on the baseline tours.
    pub window_span: f64,
}

impl OrderingDiagnostic {
    /// `collected_supply - window_span`, the order-independent reference.
    pub fn reference(&self) -> f64 {
        self.collected_supply - self.window_span
    }
}

pub fn ordering_diagnostic(
    instance: &Instance,
    config: &SolverConfig,
    orderings: usize,
) -> Result<OrderingDiagnostic> {
    let baseline = baseline_for(instance, config)?;
    let pairs = tour_order_pairs(&baseline);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut totals = vec![improve_in_order(instance, baseline.clone(), &pairs)?.total_gain()];
    for _ in 0..orderings {
        let mut shuffled = pairs.clone();
        shuffled.shuffle(&mut rng);
        totals.push(improve_in_order(instance, baseline.clone(), &shuffled)?.total_gain());
    }
    let max = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = totals.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if max <= QTY_TOL {
        1.0
    } else if min <= QTY_TOL {
        f64::INFINITY
    } else {
        max / min
    };
    let (collected_supply, window_span) = pairs.iter().fold((0.0, 0.0), |(q, w), &(_, id)| {
        let s = instance.site_unchecked(id);
        (q + s.end_quantity(), w + (s.window_close - s.window_open))
    });
    Ok(OrderingDiagnostic {
        totals,
        max,
        min,
        ratio,
        exceeds_four: ratio > 4.0,
        collected_supply,
        window_span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Point, Site, SupplyProfile};

    /// Vertex enumeration of `{x <= a, y + z <= b, z <= c, x, y, z >= 0}`.
    fn lp_by_vertices(a: f64, b: f64, c: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for x in [0.0, a] {
            for (y, z) in [(0.0, 0.0), (b, 0.0), (0.0, b.min(c)), (b - b.min(c), b.min(c))] {
                if y >= 0.0 && z >= 0.0 && y + z <= b + 1e-12 && z <= c + 1e-12 {
                    best = best.max(x + y + z);
                }
            }
        }
        best
    }

    #[test]
    fn lp_examples() {
        let fig = solve_reassignment_lp(35.0, 55.0, 35.0).unwrap();
        assert_eq!((fig.x, fig.y, fig.z), (35.0, 20.0, 35.0));
        let zero = solve_reassignment_lp(0.0, 0.0, 12.0).unwrap();
        assert_eq!((zero.x, zero.y, zero.z), (0.0, 0.0, 0.0));
        let third = solve_reassignment_lp(10.0, 8.0, 3.0).unwrap();
        assert_eq!((third.x, third.y, third.z), (10.0, 5.0, 3.0));
        assert_eq!(lp_by_vertices(10.0, 8.0, 3.0), 18.0);
        assert_eq!(third.objective(), 18.0);
        assert!(solve_reassignment_lp(-1.0, 2.0, 3.0).is_err());
        assert!(solve_reassignment_lp(1.0, f64::NAN, 3.0).is_err());
    }

    #[test]
    fn capacity_examples() {
        let q = 50.0;
        // literal form holds (55 <= 105) but a vehicle of capacity 50
        // cannot carry 55.
        let lp = LpSolution { x: 35.0, y: 20.0, z: 0.0 };
        let v = check_capacity(&lp, 0.0, 0.0, 55.0, q);
        assert!(v.literal_ok);
        assert!(!v.receiver_ok);
        assert!(v.literal_only());
        assert_eq!(v.rejection(), Some(CapacityRejection::ReceiverOverload));

        let full_owner = check_capacity(&LpSolution { x: 0.0, y: 0.0, z: 1.0 }, 0.0, 50.0, 1.0, q);
        assert_eq!(full_owner.rejection(), Some(CapacityRejection::OwnerOverload));

        let noop = check_capacity(&LpSolution::default(), 50.0, 50.0, 0.0, q);
        assert!(noop.accepted());

        let literal = check_capacity(&LpSolution { x: 30.0, y: 30.0, z: 0.0 }, 40.0, 0.0, 5.0, q);
        assert_eq!(literal.rejection(), Some(CapacityRejection::LiteralForm));
    }

    fn line_instance(windows: &[(f64, f64)], positions: &[(f64, f64)]) -> Instance {
        let sites = positions
            .iter()
            .zip(windows)
            .enumerate()
            .map(|(i, (&(x, y), &w))| Site::new(i + 1, Point::new(x, y), w, SupplyProfile::Fixed(10.0)))
            .collect();
        Instance::new(sites, Point::new(0.0, 0.0), 2, 100.0, 1000.0, Mode::MprpM).unwrap()
    }

    #[test]
    fn detour_examples() {
        let inst = line_instance(
            &[(0.0, 1000.0), (0.0, 1000.0), (0.0, 1000.0)],
            &[(10.0, 0.0), (5.0, 5.0), (5.0, 0.0)],
        );
        let tour = schedule_tour(&inst, 1, &[1], 0.0).unwrap().into_tour().unwrap();
        let off_axis = detour_cost(&inst, &tour, 2, (DEPOT, 1)).unwrap();
        let oracle = 2.0 * 50f64.sqrt() - 10.0;
        assert!((off_axis - oracle).abs() < 1e-12);
        assert!((off_axis - 4.1421).abs() < 1e-4);
        assert!(detour_cost(&inst, &tour, 3, (DEPOT, 1)).unwrap().abs() < 1e-12);
        assert!(detour_cost(&inst, &tour, 1, (DEPOT, 1)).unwrap().abs() < 1e-12);
        assert!(detour_cost(&inst, &tour, 2, (1, 3)).is_err());
    }

    #[test]
    fn time_feasibility_examples() {
        // Tour 0 -> S1 (10, 0) closing at 12. Inserting S2 at (5, 5) first
        // pushes S1's arrival to 2*sqrt(50) + sqrt(50) ~ 21.2.
        let inst = line_instance(&[(0.0, 12.0), (0.0, 1000.0)], &[(10.0, 0.0), (5.0, 5.0)]);
        let tour = schedule_tour(&inst, 1, &[1], 0.0).unwrap().into_tour().unwrap();
        let verdict = check_time_feasibility(&inst, &tour, 2, (DEPOT, 1)).unwrap();
        assert!(matches!(verdict, TimeVerdict::Late { site: 1, .. }));
        assert!(check_time_feasibility(&inst, &tour, 2, (1, DEPOT)).unwrap().is_feasible());

        // Boundary: S1 closes exactly when the detoured vehicle arrives.
        let arrival = 2.0 * 50f64.sqrt();
        let tight = line_instance(&[(0.0, arrival), (0.0, 1000.0)], &[(10.0, 0.0), (5.0, 5.0)]);
        let tour = schedule_tour(&tight, 1, &[1], 0.0).unwrap().into_tour().unwrap();
        assert!(check_time_feasibility(&tight, &tour, 2, (DEPOT, 1)).unwrap().is_feasible());

        let open = line_instance(&[(0.0, 1000.0), (0.0, 1000.0)], &[(10.0, 0.0), (5.0, 5.0)]);
        let tour = schedule_tour(&open, 1, &[1], 0.0).unwrap().into_tour().unwrap();
        for leg in [(DEPOT, 1), (1, DEPOT)] {
            assert!(check_time_feasibility(&open, &tour, 2, leg).unwrap().is_feasible());
        }
    }

    #[test]
    fn gain_examples() {
        assert_eq!(candidate_gain(90.0, 55.0, 10.0), 25.0);
        assert_eq!(candidate_gain(90.0, 55.0, 40.0), 0.0);
        // q_u = 0 and the owner has room: objective = q_u', net = -detour
        assert_eq!(candidate_gain(55.0, 55.0, 3.0), 0.0);
    }

    /// Two vehicles; vehicle 2 is full after S3 and S2, leaving 20 of S2.
    /// Vehicle 1 serves S1 (35) and has room to collect the leftover.
    fn figure_like() -> (Instance, Solution) {
        let sites = vec![
            Site::new(1, Point::new(0.0, 10.0), (0.0, 500.0), SupplyProfile::Fixed(35.0)),
            Site::new(2, Point::new(4.0, 10.0), (0.0, 500.0), SupplyProfile::Fixed(55.0)),
            Site::new(3, Point::new(8.0, 10.0), (0.0, 500.0), SupplyProfile::Fixed(25.0)),
        ];
        let inst = Instance::new(sites, Point::new(0.0, 0.0), 2, 60.0, 500.0, Mode::MprpM).unwrap();
        let mut t1 = schedule_tour(&inst, 1, &[1], 0.0).unwrap().into_tour().unwrap();
        t1.visits[0].pickup = 35.0;
        let mut t2 = schedule_tour(&inst, 2, &[3, 2], 0.0).unwrap().into_tour().unwrap();
        t2.visits[0].pickup = 25.0;
        t2.visits[1].pickup = 35.0;
        let sol = Solution::new(&inst, vec![t1, t2]);
        (inst, sol)
    }

    #[test]
    fn figure_like_split() {
        let (inst, sol) = figure_like();
        assert!(validate(&inst, &sol).is_feasible());
        let (best, _) = best_candidate(&inst, &sol, 2, 2).unwrap();
        let best = best.expect("leftover is worth collecting");
        assert_eq!((best.lp.x, best.lp.y, best.lp.z), (35.0, 20.0, 35.0));
        assert_eq!(best.lp_inputs, (35.0, 55.0, 35.0));
        assert_eq!(best.receiver, 1);
        // both legs of vehicle 1 cost the same detour; the depot leg wins
        assert_eq!(best.receiver_leg, (DEPOT, 1));
        let next = apply_reassignment(&inst, &sol, &best).unwrap();
        let report = validate(&inst, &next);
        assert!(report.is_feasible(), "{:?}", report.violations);
        let v1 = next.tour(1).unwrap();
        let v2 = next.tour(2).unwrap();
        assert_eq!(v1.visits[v1.position_of(2).unwrap()].pickup, 20.0);
        assert_eq!(v2.visits[v2.position_of(2).unwrap()].pickup, 35.0);
        let before = audit_profit(&inst, &sol).profit;
        assert!((report.audited.profit - (before + best.gain)).abs() < 1e-9);
        // detour 0 -> S1 -> S2 -> 0 versus 0 -> S1 -> 0
        let detour = 116f64.sqrt() + 4.0 - 10.0;
        assert!((best.gain - (20.0 - detour)).abs() < 1e-12);
    }

    #[test]
    fn zero_gain_is_refused() {
        let (inst, sol) = figure_like();
        let (best, _) = best_candidate(&inst, &sol, 2, 2).unwrap();
        let mut c = best.unwrap();
        c.gain = 0.0;
        assert!(matches!(
            apply_reassignment(&inst, &sol, &c),
            Err(SolveError::Precondition { .. })
        ));
    }

    #[test]
    fn enumeration_counts_match_exhaustive_formula() {
        let (inst, sol) = figure_like();
        // pair (owner 2, S2): receiver 1 has one anchor, two legs; the
        // owner's tour has three legs.
        let all = enumerate_candidates(&inst, &sol, 2, 2).unwrap();
        assert_eq!(all.len(), 6);
        let picked = select_best(&all).unwrap();
        let (fast, _) = best_candidate(&inst, &sol, 2, 2).unwrap();
        assert_eq!(Some(picked), fast.as_ref());

        // m = 1: nobody to receive
        let single = inst.with_fleet_size(1).unwrap();
        let only = Solution::new(&single, vec![sol.tours[0].clone()]);
        assert!(enumerate_candidates(&single, &only, 1, 1).unwrap().is_empty());

        // a receiver with an empty tour has no anchors
        let mut emptied = sol.clone();
        emptied.tours[0].visits.clear();
        emptied.refresh(&inst);
        assert!(enumerate_candidates(&inst, &emptied, 2, 2).unwrap().is_empty());
    }

    #[test]
    fn remote_leftover_is_left_alone() {
        // 20 units stay at S2, but fetching them costs vehicle 1 a detour of 80
        let sites = vec![
            Site::new(1, Point::new(0.0, 10.0), (0.0, 500.0), SupplyProfile::Fixed(35.0)),
            Site::new(2, Point::new(0.0, -40.0), (0.0, 500.0), SupplyProfile::Fixed(80.0)),
        ];
        let inst = Instance::new(sites, Point::new(0.0, 0.0), 2, 60.0, 500.0, Mode::MprpM).unwrap();
        let mut t1 = schedule_tour(&inst, 1, &[1], 0.0).unwrap().into_tour().unwrap();
        t1.visits[0].pickup = 35.0;
        let mut t2 = schedule_tour(&inst, 2, &[2], 0.0).unwrap().into_tour().unwrap();
        t2.visits[0].pickup = 60.0;
        let sol = Solution::new(&inst, vec![t1, t2]);
        let run = improve_in_order(&inst, sol.clone(), &tour_order_pairs(&sol)).unwrap();
        assert!(run.applied.is_empty());
        assert_eq!(run.solution, sol);
    }

    #[test]
    fn mprp_m_single_vehicle_matches_baseline() {
        let (inst, _) = figure_like();
        let single = inst.with_fleet_size(1).unwrap();
        let cfg = SolverConfig::default();
        let run = run_mprp_m(&single, &cfg).unwrap();
        assert!(run.applied.is_empty());
        assert_eq!(run.solution, run.baseline);
    }

    #[test]
    fn pipeline_rejects_wrong_mode() {
        let (inst, _) = figure_like();
        let single = inst.with_mode(Mode::Mprp).unwrap();
        assert!(matches!(
            solve_mprp_m(&single, &SolverConfig::default()),
            Err(SolveError::WrongMode { .. })
        ));
    }

    #[test]
    fn applied_steps_keep_single_visit_per_vehicle() {
        let (inst, sol) = figure_like();
        let run = improve_in_order(&inst, sol.clone(), &tour_order_pairs(&sol)).unwrap();
        assert_eq!(run.applied.len(), 1);
        for tour in &run.solution.tours {
            let mut ids = tour.order();
            ids.sort_unstable();
            ids.dedup();
            assert_eq!(ids.len(), tour.len());
        }
        let step = &run.applied[0];
        assert!((step.profit_after - step.profit_before - step.candidate.gain).abs() < 1e-9);
    }
}
