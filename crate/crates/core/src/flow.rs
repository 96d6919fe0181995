//! Small dense max-flow (Edmonds–Karp) over real capacities.

use std::collections::VecDeque;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    n: usize,
    cap: Vec<f64>,
    flow: Vec<f64>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            cap: vec![0.0; n * n],
            flow: vec![0.0; n * n],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, capacity: f64) {
        self.cap[from * self.n + to] += capacity.max(0.0);
    }

    pub fn flow(&self, from: usize, to: usize) -> f64 {
        self.flow[from * self.n + to].max(0.0)
    }

    fn residual(&self, a: usize, b: usize) -> f64 {
        self.cap[a * self.n + b] - self.flow[a * self.n + b]
    }

    pub fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        let mut parent = vec![usize::MAX; n];
        loop {
            parent.fill(usize::MAX);
            parent[source] = source;
            let mut queue = VecDeque::from([source]);
            while let Some(a) = queue.pop_front() {
                if a == sink {
                    break;
                }
                for (b, from) in parent.iter_mut().enumerate() {
                    if *from == usize::MAX && self.residual(a, b) > EPS {
                        *from = a;
                        queue.push_back(b);
                    }
                }
            }
            if parent[sink] == usize::MAX {
                return total;
            }
            let mut push = f64::INFINITY;
            let mut v = sink;
            while v != source {
                let u = parent[v];
                push = push.min(self.residual(u, v));
                v = u;
            }
            let mut v = sink;
            while v != source {
                let u = parent[v];
                self.flow[u * n + v] += push;
                self.flow[v * n + u] -= push;
                v = u;
            }
            total += push;
        }
    }
}
