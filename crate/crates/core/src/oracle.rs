//! Exhaustive optimum for tiny instances, in every mode.
//!
//! Every time-feasible visit order is enumerated. A route is scheduled as
//! late as its windows allow: with nondecreasing supply, serving later
//! never shrinks what can be collected, so the latest schedule dominates
//! every other timing of the same order. Given one route per vehicle, the
//! best pickups form a max-flow problem (vehicle capacity on one side,
//! cumulative supply over each site's visit instants on the other), which
//! is solved exactly. The result is the true optimum, not a grid bound.

use crate::error::{Result, SolveError};
use crate::flow::FlowNetwork;
use crate::model::{Instance, Mode, SiteId, Solution, Tour, Visit, DEPOT, TIME_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_sites: usize,
    pub max_vehicles: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_sites: 6,
            max_vehicles: 2,
        }
    }
}

impl OracleLimits {
    pub fn admits(&self, instance: &Instance) -> bool {
        instance.num_sites() <= self.max_sites && instance.fleet_size() <= self.max_vehicles
    }
}

#[derive(Debug, Clone)]
struct Route {
    order: Vec<SiteId>,
    times: Vec<f64>,
    mask: u32,
    cost: f64,
    /// `min(Q, sum of supply at the service instants) - cost`
    bound: f64,
}

fn enumerate_routes(instance: &Instance, late: bool) -> Vec<Route> {
    let n = instance.num_sites();
    let mut out = Vec::new();
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n + 1];
    extend(instance, late, &mut order, &mut used, DEPOT, 0.0, &mut out);
    out
}

fn extend(
    instance: &Instance,
    late: bool,
    order: &mut Vec<SiteId>,
    used: &mut [bool],
    last: usize,
    clock: f64,
    out: &mut Vec<Route>,
) {
    for id in 1..=instance.num_sites() {
        if used[id] {
            continue;
        }
        let site = &instance.sites()[id - 1];
        let arrival = f64::max(clock + instance.travel(last, id), site.window_open);
        if arrival > site.window_close + TIME_TOL {
            continue;
        }
        order.push(id);
        used[id] = true;
        out.push(finish(instance, late, order));
        extend(instance, late, order, used, id, arrival, out);
        used[id] = false;
        order.pop();
    }
}

fn finish(instance: &Instance, late: bool, order: &[SiteId]) -> Route {
    let mut times = vec![0.0; order.len()];
    let mut clock = 0.0;
    let mut prev = DEPOT;
    for (p, &id) in order.iter().enumerate() {
        let site = &instance.sites()[id - 1];
        clock = f64::max(clock + instance.travel(prev, id), site.window_open);
        times[p] = clock;
        prev = id;
    }
    if late {
        let last = order.len() - 1;
        let mut latest = instance.sites()[order[last] - 1].window_close;
        times[last] = times[last].max(latest);
        for p in (0..last).rev() {
            let close = instance.sites()[order[p] - 1].window_close;
            latest = close.min(latest - instance.travel(order[p], order[p + 1]));
            times[p] = times[p].max(latest);
        }
    }
    let mut cost = 0.0;
    let mut prev = DEPOT;
    for &id in order {
        cost += instance.travel(prev, id);
        prev = id;
    }
    cost += instance.travel(prev, DEPOT);
    let supply: f64 = order
        .iter()
        .zip(&times)
        .map(|(&id, &t)| instance.sites()[id - 1].supply_at(t))
        .sum();
    Route {
        order: order.to_vec(),
        times,
        mask: order.iter().fold(0, |m, &id| m | 1 << (id - 1)),
        cost,
        bound: supply.min(instance.capacity()) - cost,
    }
}

/// Keeps, per visited set, only routes not dominated in (cost, per-site
/// service time). Fixed supply ignores time, so the cheapest route wins.
fn prune(instance: &Instance, routes: Vec<Route>) -> Vec<Route> {
    let timed = instance.mode().has_variable_supply();
    let n = instance.num_sites();
    let mut kept: Vec<Route> = Vec::new();
    let mut by_mask: Vec<Vec<usize>> = vec![Vec::new(); 1 << n];
    let time_of = |r: &Route, id: SiteId| r.times[r.order.iter().position(|&s| s == id).unwrap()];
    for route in routes {
        let bucket = &by_mask[route.mask as usize];
        let dominated = bucket.iter().any(|&k| {
            let other = &kept[k];
            other.cost <= route.cost
                && (!timed || route.order.iter().all(|&id| time_of(other, id) >= time_of(&route, id)))
        });
        if dominated {
            continue;
        }
        // drop survivors the newcomer dominates
        let mut survivors = Vec::new();
        for &k in bucket {
            let other = &kept[k];
            let beaten = route.cost <= other.cost
                && (!timed || route.order.iter().all(|&id| time_of(&route, id) >= time_of(other, id)));
            if !beaten {
                survivors.push(k);
            }
        }
        survivors.push(kept.len());
        by_mask[route.mask as usize] = survivors;
        kept.push(route);
    }
    let mut alive = vec![false; kept.len()];
    for bucket in &by_mask {
        for &k in bucket {
            alive[k] = true;
        }
    }
    kept.into_iter()
        .zip(alive)
        .filter_map(|(r, a)| a.then_some(r))
        .collect()
}

/// Best pickups for one route per vehicle, with the per-visit amounts.
fn best_pickups(instance: &Instance, routes: &[Option<&Route>]) -> (f64, Vec<Vec<f64>>) {
    let m = routes.len();
    let n = instance.num_sites();
    // visits per site: (time, vehicle slot, position in route)
    let mut visits: Vec<Vec<(f64, usize, usize)>> = vec![Vec::new(); n + 1];
    for (slot, route) in routes.iter().enumerate() {
        if let Some(r) = route {
            for (p, (&id, &t)) in r.order.iter().zip(&r.times).enumerate() {
                visits[id].push((t, slot, p));
            }
        }
    }
    let total: usize = visits.iter().map(Vec::len).sum();
    let source = 0;
    let sink = 1;
    let vehicle_node = |slot: usize| 2 + slot;
    let mut g = FlowNetwork::new(2 + m + total);
    let mut next = 2 + m;
    let mut edges = Vec::with_capacity(total);
    for (id, list) in visits.iter_mut().enumerate().skip(1) {
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let site = &instance.sites()[id - 1];
        let mut offered = 0.0;
        let mut prev_node = None;
        for &(t, slot, p) in list.iter() {
            let node = next;
            next += 1;
            let here = site.supply_at(t.clamp(site.window_open, site.window_close));
            g.add_edge(source, node, (here - offered).max(0.0));
            offered = offered.max(here);
            if let Some(prev) = prev_node {
                g.add_edge(prev, node, f64::INFINITY);
            }
            g.add_edge(node, vehicle_node(slot), f64::INFINITY);
            edges.push((node, slot, p));
            prev_node = Some(node);
        }
    }
    for slot in 0..m {
        g.add_edge(vehicle_node(slot), sink, instance.capacity());
    }
    let value = g.max_flow(source, sink);
    let mut amounts: Vec<Vec<f64>> = routes
        .iter()
        .map(|r| vec![0.0; r.map_or(0, |r| r.order.len())])
        .collect();
    for (node, slot, p) in edges {
        amounts[slot][p] = g.flow(node, vehicle_node(slot));
    }
    (value, amounts)
}

struct Search<'a> {
    instance: &'a Instance,
    options: Vec<Option<Route>>,
    disjoint: bool,
    best: f64,
    best_pick: Vec<usize>,
}

impl Search<'_> {
    fn bound(&self, idx: usize) -> f64 {
        self.options[idx].as_ref().map_or(0.0, |r| r.bound)
    }

    fn value(&self, pick: &[usize]) -> f64 {
        let routes: Vec<Option<&Route>> = pick.iter().map(|&i| self.options[i].as_ref()).collect();
        let masks: Vec<u32> = routes.iter().map(|r| r.map_or(0, |r| r.mask)).collect();
        let overlap = masks.iter().enumerate().any(|(a, &ma)| masks[a + 1..].iter().any(|&mb| ma & mb != 0));
        if overlap {
            best_pickups(self.instance, &routes).0 - routes.iter().flatten().map(|r| r.cost).sum::<f64>()
        } else {
            // without sharing, each route collects its own bound
            routes.iter().flatten().map(|r| r.bound).sum()
        }
    }

    fn go(&mut self, pick: &mut Vec<usize>, used: u32, partial: f64) {
        let slots = self.instance.fleet_size();
        if pick.len() == slots {
            let v = self.value(pick);
            if v > self.best {
                self.best = v;
                self.best_pick = pick.clone();
            }
            return;
        }
        let start = pick.last().copied().unwrap_or(0);
        let left = (slots - pick.len()) as f64;
        for idx in start..self.options.len() {
            let ub = self.bound(idx);
            // later slots only take options at or after idx, whose bounds
            // are no larger
            if partial + ub * left <= self.best {
                break;
            }
            let mask = self.options[idx].as_ref().map_or(0, |r| r.mask);
            if self.disjoint && used & mask != 0 {
                continue;
            }
            pick.push(idx);
            self.go(pick, used | mask, partial + ub);
            pick.pop();
        }
    }
}

/// Exact optimum and a solution attaining it. Refuses instances beyond
/// `limits`.
pub fn brute_force_optimum(instance: &Instance, limits: &OracleLimits) -> Result<(Solution, f64)> {
    if instance.num_sites() > limits.max_sites {
        return Err(SolveError::TooLarge {
            sites: instance.num_sites(),
            limit: limits.max_sites,
        });
    }
    if instance.fleet_size() > limits.max_vehicles {
        return Err(SolveError::TooManyVehicles {
            vehicles: instance.fleet_size(),
            limit: limits.max_vehicles,
        });
    }
    if instance.num_sites() > 20 {
        return Err(SolveError::InvalidInput("oracle masks hold at most 20 sites".into()));
    }

    let late = instance.mode().has_variable_supply();
    let routes = prune(instance, enumerate_routes(instance, late));
    let mut options: Vec<Option<Route>> = std::iter::once(None).chain(routes.into_iter().map(Some)).collect();
    options.sort_by(|a, b| {
        let ba = a.as_ref().map_or(0.0, |r| r.bound);
        let bb = b.as_ref().map_or(0.0, |r| r.bound);
        bb.total_cmp(&ba)
    });
    let empty_idx = options.iter().position(Option::is_none).expect("empty option present");
    let mut search = Search {
        instance,
        options,
        disjoint: instance.mode() == Mode::Mprp,
        best: 0.0,
        best_pick: vec![empty_idx; instance.fleet_size()],
    };
    search.go(&mut Vec::with_capacity(instance.fleet_size()), 0, 0.0);

    let chosen: Vec<Option<&Route>> = search.best_pick.iter().map(|&i| search.options[i].as_ref()).collect();
    let (_, amounts) = best_pickups(instance, &chosen);
    let tours = chosen
        .iter()
        .zip(amounts)
        .enumerate()
        .map(|(slot, (route, amounts))| match route {
            None => Tour::empty(slot + 1),
            Some(r) => Tour {
                vehicle: slot + 1,
                start_time: 0.0,
                visits: r
                    .order
                    .iter()
                    .zip(&r.times)
                    .zip(amounts)
                    .map(|((&site, &arrival), pickup)| Visit {
                        site,
                        arrival,
                        pickup,
                    })
                    .collect(),
            },
        })
        .collect();
    let solution = Solution::new(instance, tours);
    let optimum = solution.profit();
    Ok((solution, optimum))
}

/// `oracle / solver`. Equal profits (including both zero) give 1; a solver
/// that earns nothing against a positive optimum gives infinity.
pub fn measure_ratio(solver_profit: f64, oracle_profit: f64) -> f64 {
    const TOL: f64 = 1e-9;
    if (oracle_profit - solver_profit).abs() <= TOL {
        1.0
    } else if solver_profit <= TOL {
        f64::INFINITY
    } else {
        oracle_profit / solver_profit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RatioSummary {
    pub count: usize,
    pub infinite: usize,
    /// Largest finite ratio (1 for an empty batch).
    pub max: f64,
    /// Mean of the finite ratios.
    pub mean: f64,
}

impl RatioSummary {
    pub fn from_ratios(ratios: impl IntoIterator<Item = f64>) -> Self {
        let mut count = 0;
        let mut infinite = 0;
        let mut max: f64 = 1.0;
        let mut sum = 0.0;
        for r in ratios {
            count += 1;
            if r.is_finite() {
                max = max.max(r);
                sum += r;
            } else {
                infinite += 1;
            }
        }
        let finite = count - infinite;
        Self {
            count,
            infinite,
            max,
            mean: if finite > 0 { sum / finite as f64 } else { 1.0 },
        }
    }
}
