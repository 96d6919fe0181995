//! Single-visit solvers: exhaustive search for tiny instances and a greedy
//! profitable-insertion heuristic for everything else.

use crate::error::{Result, SolveError};
use crate::model::{
    schedule_tour, Instance, Mode, SiteId, Solution, Tour, TourSlack, DEPOT, TIME_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Largest site count handled by exhaustive search.
    pub exact_threshold: usize,
    /// Upper bound on heuristic insertion rounds.
    pub insertion_rounds: usize,
    /// Seed for the randomized diagnostics (pair shuffles); the solvers
    /// themselves are deterministic.
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            exact_threshold: 8,
            insertion_rounds: 100_000,
            rng_seed: 0,
        }
    }
}

impl SolverConfig {
    fn check(&self) -> Result<()> {
        if self.exact_threshold == 0 {
            return Err(SolveError::InvalidInput(
                "exact_threshold must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn require_single_visit(instance: &Instance) -> Result<()> {
    if instance.mode() != Mode::Mprp {
        return Err(SolveError::WrongMode {
            expected: Mode::Mprp.name(),
            found: instance.mode().name(),
        });
    }
    Ok(())
}

/// Fills pickups along a fixed route, saturating each site up to the
/// remaining capacity. Two orders are tried (visit order, then largest
/// supply first) and the better is kept; ties keep visit order.
pub(crate) fn saturate_pickups(instance: &Instance, tour: &mut Tour) {
    let capacity = instance.capacity();
    let fill = |order: &mut dyn Iterator<Item = usize>, out: &mut [f64]| -> f64 {
        let mut room = capacity;
        for idx in order {
            let q = instance.site_unchecked(tour.visits[idx].site).end_quantity();
            let take = q.min(room).max(0.0);
            out[idx] = take;
            room -= take;
        }
        capacity - room
    };

    let n = tour.visits.len();
    let mut in_order = vec![0.0; n];
    let first = fill(&mut (0..n), &mut in_order);

    let mut by_supply: Vec<usize> = (0..n).collect();
    by_supply.sort_by(|&a, &b| {
        let qa = instance.site_unchecked(tour.visits[a].site).end_quantity();
        let qb = instance.site_unchecked(tour.visits[b].site).end_quantity();
        qb.total_cmp(&qa).then(a.cmp(&b))
    });
    let mut largest_first = vec![0.0; n];
    let second = fill(&mut by_supply.into_iter(), &mut largest_first);

    let chosen = if second > first { largest_first } else { in_order };
    for (visit, pickup) in tour.visits.iter_mut().zip(chosen) {
        visit.pickup = pickup;
    }
}

/// Exhaustive single-visit optimum.
///
/// Every time-feasible visit order is enumerated once (prefix-pruned DFS)
/// to find the cheapest feasible route for each subset of sites. Because a
/// unit of supply is worth the same everywhere, a route's reward is
/// `min(sum of supplies, Q)` whatever the order, so the best routing is a
/// packing of disjoint subsets into at most `m` vehicles, solved by a
/// subset DP.
pub fn solve_exact_mprp(instance: &Instance, config: &SolverConfig) -> Result<Solution> {
    require_single_visit(instance)?;
    config.check()?;
    let n = instance.num_sites();
    if n > config.exact_threshold {
        return Err(SolveError::TooLarge {
            sites: n,
            limit: config.exact_threshold,
        });
    }
    if n == 0 {
        return Ok(Solution::empty(instance));
    }

    let full = (1usize << n) - 1;
    let mut best_cost = vec![f64::INFINITY; full + 1];
    let mut best_order: Vec<Vec<SiteId>> = vec![Vec::new(); full + 1];
    best_cost[0] = 0.0;

    // DFS over feasible prefixes: (mask, last node, clock, path cost, order)
    let mut order = Vec::with_capacity(n);
    cheapest_routes(
        instance,
        0,
        DEPOT,
        0.0,
        0.0,
        &mut order,
        &mut best_cost,
        &mut best_order,
    );

    let q: Vec<f64> = instance.sites().iter().map(|s| s.end_quantity()).collect();
    let capacity = instance.capacity();
    let route_profit: Vec<f64> = (0..=full)
        .map(|mask| {
            if mask == 0 {
                return 0.0;
            }
            if !best_cost[mask].is_finite() {
                return f64::NEG_INFINITY;
            }
            let supply: f64 = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| q[b]).sum();
            supply.min(capacity) - best_cost[mask]
        })
        .collect();

    // packed[j][mask]: best profit from at most j routes over disjoint
    // subsets of `mask`; choice[j][mask] is the subset served by route j.
    let m = instance.fleet_size().min(n);
    let mut packed = vec![vec![0.0f64; full + 1]; m + 1];
    let mut choice = vec![vec![0usize; full + 1]; m + 1];
    for j in 1..=m {
        for mask in 0..=full {
            let mut best = packed[j - 1][mask];
            let mut pick = 0usize;
            let mut sub = mask;
            while sub > 0 {
                let value = route_profit[sub] + packed[j - 1][mask ^ sub];
                if value > best {
                    best = value;
                    pick = sub;
                }
                sub = (sub - 1) & mask;
            }
            packed[j][mask] = best;
            choice[j][mask] = pick;
        }
    }

    let mut subsets = Vec::new();
    let mut mask = full;
    for j in (1..=m).rev() {
        let pick = choice[j][mask];
        if pick != 0 {
            subsets.push(pick);
            mask ^= pick;
        }
    }
    // Lowest site id rides with the lowest vehicle id.
    subsets.sort_by_key(|s| s.trailing_zeros());

    let mut tours = Vec::with_capacity(instance.fleet_size());
    for (idx, subset) in subsets.iter().enumerate() {
        let mut tour = schedule_tour(instance, idx + 1, &best_order[*subset], 0.0)?
            .into_tour()
            .ok_or_else(|| SolveError::Internal("exhaustive route became infeasible".into()))?;
        saturate_pickups(instance, &mut tour);
        tours.push(tour);
    }
    for vehicle in subsets.len() + 1..=instance.fleet_size() {
        tours.push(Tour::empty(vehicle));
    }
    Ok(Solution::new(instance, tours))
}

#[allow(clippy::too_many_arguments)]
fn cheapest_routes(
    instance: &Instance,
    mask: usize,
    last: usize,
    clock: f64,
    path: f64,
    order: &mut Vec<SiteId>,
    best_cost: &mut [f64],
    best_order: &mut [Vec<SiteId>],
) {
    for id in 1..=instance.num_sites() {
        let bit = 1usize << (id - 1);
        if mask & bit != 0 {
            continue;
        }
        let site = instance.site_unchecked(id);
        let arrival = (clock + instance.travel(last, id)).max(site.window_open);
        if arrival > site.window_close + TIME_TOL {
            continue;
        }
        let next_mask = mask | bit;
        let next_path = path + instance.travel(last, id);
        order.push(id);
        let closed = next_path + instance.travel(id, DEPOT);
        if closed < best_cost[next_mask] {
            best_cost[next_mask] = closed;
            best_order[next_mask] = order.clone();
        }
        cheapest_routes(
            instance, next_mask, id, arrival, next_path, order, best_cost, best_order,
        );
        order.pop();
    }
}

/// Greedy profitable insertion.
///
/// Each round inserts the (site, vehicle, position) with the largest
/// marginal profit `min(q_i, Q - load) - detour` among time-feasible
/// insertions with positive margin. Ties go to the lowest site id, then the
/// lowest vehicle id, then the earliest position.
pub fn solve_heuristic_mprp(instance: &Instance, config: &SolverConfig) -> Result<Solution> {
    require_single_visit(instance)?;
    config.check()?;
    let capacity = instance.capacity();
    let m = instance.fleet_size();

    let mut orders: Vec<Vec<SiteId>> = vec![Vec::new(); m];
    let mut pickups: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut loads = vec![0.0f64; m];
    let mut slack: Vec<TourSlack> = (0..m).map(|_| TourSlack::new(instance, 0.0, &[])).collect();
    let mut unrouted: Vec<SiteId> = (1..=instance.num_sites()).collect();

    for _ in 0..config.insertion_rounds {
        // (margin, index into unrouted, vehicle index, position, pickup)
        let mut best: Option<(f64, usize, usize, usize, f64)> = None;
        for (slot, &id) in unrouted.iter().enumerate() {
            let q = instance.site_unchecked(id).end_quantity();
            for k in 0..m {
                let gain = q.min(capacity - loads[k]);
                if gain <= 0.0 {
                    continue;
                }
                let order = &orders[k];
                for pos in 0..=order.len() {
                    let prev = if pos == 0 { DEPOT } else { order[pos - 1] };
                    let next = order.get(pos).copied().unwrap_or(DEPOT);
                    let detour = instance.travel(prev, id) + instance.travel(id, next)
                        - instance.travel(prev, next);
                    let margin = gain - detour;
                    if margin <= 0.0 || best.is_some_and(|b| margin <= b.0) {
                        continue;
                    }
                    if slack[k].can_insert(instance, pos, id) {
                        best = Some((margin, slot, k, pos, gain));
                    }
                }
            }
        }
        let Some((_, slot, k, pos, gain)) = best else {
            break;
        };
        let id = unrouted.remove(slot);
        orders[k].insert(pos, id);
        pickups[k].insert(pos, gain);
        loads[k] += gain;
        slack[k] = TourSlack::new(instance, 0.0, &orders[k]);
    }

    let mut tours = Vec::with_capacity(m);
    for (k, order) in orders.iter().enumerate() {
        let mut tour = schedule_tour(instance, k + 1, order, 0.0)?
            .into_tour()
            .ok_or_else(|| SolveError::Internal("heuristic produced a late route".into()))?;
        for (visit, &pickup) in tour.visits.iter_mut().zip(&pickups[k]) {
            visit.pickup = pickup;
        }
        tours.push(tour);
    }
    Ok(Solution::new(instance, tours))
}

/// Exhaustive search when the instance is small enough, otherwise the
/// insertion heuristic.
pub fn solve_baseline(instance: &Instance, config: &SolverConfig) -> Result<Solution> {
    if instance.num_sites() <= config.exact_threshold {
        solve_exact_mprp(instance, config)
    } else {
        solve_heuristic_mprp(instance, config)
    }
}
