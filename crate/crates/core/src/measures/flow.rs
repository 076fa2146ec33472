//! Edmonds–Karp max-flow with real capacities, sized for transportation
//! feasibility problems of a few hundred nodes.

use std::collections::VecDeque;

/// Residual capacities at or below this are treated as saturated.
const SATURATED: f64 = 1e-15;

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    cap: Vec<Vec<f64>>,
    flow: Vec<Vec<f64>>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork { cap: vec![vec![0.0; nodes]; nodes], flow: vec![vec![0.0; nodes]; nodes] }
    }

    pub(crate) fn add_edge(&mut self, from: usize, to: usize, capacity: f64) {
        self.cap[from][to] += capacity;
    }

    fn residual(&self, u: usize, v: usize) -> f64 {
        self.cap[u][v] - self.flow[u][v]
    }

    pub(crate) fn flow(&self, u: usize, v: usize) -> f64 {
        self.flow[u][v].max(0.0)
    }

    /// Pushes flow along shortest augmenting paths until none remains.
    pub(crate) fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let n = self.cap.len();
        let mut total = 0.0;
        loop {
            let mut parent = vec![usize::MAX; n];
            parent[source] = source;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for v in 0..n {
                    if parent[v] == usize::MAX && self.residual(u, v) > SATURATED {
                        parent[v] = u;
                        queue.push_back(v);
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
                self.flow[u][v] += push;
                self.flow[v][u] -= push;
                v = u;
            }
            total += push;
        }
    }

    /// Nodes reachable from `source` in the residual graph (the source side
    /// of a minimum cut once the flow is maximal).
    pub(crate) fn reachable(&self, source: usize) -> Vec<bool> {
        let n = self.cap.len();
        let mut seen = vec![false; n];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && self.residual(u, v) > SATURATED {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}
