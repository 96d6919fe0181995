#![allow(dead_code)]

use mprp::cli::{generate_instance, GeneratorParams};
use mprp::{Instance, Mode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Instance `index` of a seeded corpus with up to `max_n` sites and
/// `max_m` vehicles. Capacity varies so some instances are tight.
pub fn corpus_instance(mode: Mode, seed: u64, index: usize, max_n: usize, max_m: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let sites = rng.random_range(0..=max_n);
    let fleet = rng.random_range(1..=max_m);
    let capacity = [40.0, 60.0, 100.0, 150.0][rng.random_range(0..4)];
    let side = [30.0, 50.0, 100.0][rng.random_range(0..3)];
    let horizon = [100.0, 240.0, 480.0][rng.random_range(0..3)];
    generate_instance(&GeneratorParams {
        seed,
        stream: index as u64,
        sites,
        fleet,
        mode,
        side,
        capacity,
        horizon,
        q_min: 10.0,
        q_max: 60.0,
    })
    .expect("corpus parameters are valid")
}

/// Ramp value at `t`, computed from the definition.
pub fn ramp(open: f64, close: f64, q_end: f64, t: f64) -> f64 {
    if t <= open {
        0.0
    } else if t >= close {
        q_end
    } else {
        q_end * (t - open) / (close - open)
    }
}

/// Vertex enumeration of `max x + y + z` over
/// `{0 <= x <= a, y >= 0, z >= 0, y + z <= b, z <= c}`: every choice of
/// three tight constraints, solved by Cramer's rule.
pub fn lp_by_vertices(a: f64, b: f64, c: f64) -> f64 {
    // rows: coefficients (x, y, z) and right-hand side
    let rows: [([f64; 3], f64); 6] = [
        ([1.0, 0.0, 0.0], 0.0),
        ([1.0, 0.0, 0.0], a),
        ([0.0, 1.0, 0.0], 0.0),
        ([0.0, 0.0, 1.0], 0.0),
        ([0.0, 1.0, 1.0], b),
        ([0.0, 0.0, 1.0], c),
    ];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let feasible = |p: [f64; 3]| {
        let tol = 1e-9 * (1.0 + a.max(b).max(c));
        p[0] >= -tol && p[0] <= a + tol && p[1] >= -tol && p[2] >= -tol && p[1] + p[2] <= b + tol && p[2] <= c + tol
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..6 {
        for j in i + 1..6 {
            for k in j + 1..6 {
                let m = [rows[i].0, rows[j].0, rows[k].0];
                let rhs = [rows[i].1, rows[j].1, rows[k].1];
                let d = det(m);
                if d.abs() < 1e-12 {
                    continue;
                }
                let mut p = [0.0; 3];
                for (col, value) in p.iter_mut().enumerate() {
                    let mut mc = m;
                    for r in 0..3 {
                        mc[r][col] = rhs[r];
                    }
                    *value = det(mc) / d;
                }
                if feasible(p) {
                    best = best.max(p[0] + p[1] + p[2]);
                }
            }
        }
    }
    best
}
