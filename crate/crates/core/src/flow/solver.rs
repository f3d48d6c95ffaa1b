//! Max-flow (Edmonds-Karp) and min-cost max-flow (successive shortest paths
//! with Dijkstra on reduced costs) over a [`TimeExpandedNetwork`].
//!
//! Supplies and demands are attached to a private super source and super
//! sink. Both solvers are deterministic: residual arcs are scanned in arc-id
//! order and Dijkstra breaks distance ties towards the lower-id predecessor.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::time::Instant;

use super::network::TimeExpandedNetwork;
use crate::error::TimedOut;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    /// Units delivered from supplies to demands.
    pub value: usize,
    /// Total weight of the arcs carrying flow.
    pub cost: i64,
    /// Flow on each network arc, indexed by arc id.
    pub flow: Vec<u32>,
    /// Number of augmenting paths used.
    pub augmentations: usize,
}

struct Residual {
    node_count: usize,
    source: usize,
    sink: usize,
    head: Vec<u32>,
    cap: Vec<u32>,
    cost: Vec<i64>,
    /// CSR adjacency over residual arc ids.
    start: Vec<usize>,
    adj: Vec<u32>,
    /// Residual arcs `2i` (forward) and `2i + 1` (backward) of network arc `i`
    /// for `i < base_arcs`.
    base_arcs: usize,
}

impl Residual {
    fn new(net: &TimeExpandedNetwork) -> Self {
        let n = net.node_count();
        let (source, sink) = (n, n + 1);
        let mut tails: Vec<u32> = Vec::new();
        let mut head = Vec::new();
        let mut cap = Vec::new();
        let mut cost = Vec::new();
        let mut push = |t: usize, h: usize, c: u32, w: i64| {
            tails.push(t as u32);
            head.push(h as u32);
            cap.push(c);
            cost.push(w);
            tails.push(h as u32);
            head.push(t as u32);
            cap.push(0);
            cost.push(-w);
        };
        for a in net.arcs() {
            push(a.tail as usize, a.head as usize, a.capacity, a.weight);
        }
        for &(node, units) in net.supplies() {
            push(source, node as usize, units, 0);
        }
        for &(node, units) in net.demands() {
            push(node as usize, sink, units, 0);
        }
        let total = n + 2;
        let mut start = vec![0usize; total + 1];
        for &t in &tails {
            start[t as usize + 1] += 1;
        }
        for i in 0..total {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut adj = vec![0u32; tails.len()];
        for (id, &t) in tails.iter().enumerate() {
            adj[fill[t as usize]] = id as u32;
            fill[t as usize] += 1;
        }
        Residual {
            node_count: total,
            source,
            sink,
            head,
            cap,
            cost,
            start,
            adj,
            base_arcs: net.arc_count(),
        }
    }

    fn out(&self, v: usize) -> &[u32] {
        &self.adj[self.start[v]..self.start[v + 1]]
    }

    fn augment(&mut self, pred: &[u32], tail_of: impl Fn(u32) -> usize) -> u32 {
        let mut delta = u32::MAX;
        let mut v = self.sink;
        while v != self.source {
            let e = pred[v];
            delta = delta.min(self.cap[e as usize]);
            v = tail_of(e);
        }
        let mut v = self.sink;
        while v != self.source {
            let e = pred[v] as usize;
            self.cap[e] -= delta;
            self.cap[e ^ 1] += delta;
            v = tail_of(e as u32);
        }
        delta
    }

    fn result(&self, net: &TimeExpandedNetwork, augmentations: usize) -> FlowResult {
        let flow: Vec<u32> = (0..self.base_arcs).map(|i| self.cap[2 * i + 1]).collect();
        let cost = net
            .arcs()
            .iter()
            .zip(&flow)
            .map(|(a, &f)| a.weight * f as i64)
            .sum();
        let value = self
            .out(self.sink)
            .iter()
            .map(|&e| self.cap[e as usize] as usize)
            .sum();
        FlowResult {
            value,
            cost,
            flow,
            augmentations,
        }
    }
}

fn check(deadline: Option<Instant>) -> Result<(), TimedOut> {
    match deadline {
        Some(d) if Instant::now() >= d => Err(TimedOut),
        _ => Ok(()),
    }
}

/// Maximum flow, ignoring weights. The reported cost is the weight of
/// whatever maximum flow was found.
pub fn max_flow(net: &TimeExpandedNetwork) -> FlowResult {
    max_flow_until(net, None).expect("no deadline")
}

pub fn max_flow_until(
    net: &TimeExpandedNetwork,
    deadline: Option<Instant>,
) -> Result<FlowResult, TimedOut> {
    let mut r = Residual::new(net);
    let tail_of = residual_tails(&r);
    let mut augmentations = 0;
    let mut pred = vec![u32::MAX; r.node_count];
    let mut queue = VecDeque::new();
    loop {
        check(deadline)?;
        pred.fill(u32::MAX);
        queue.clear();
        queue.push_back(r.source);
        let mut reached = false;
        'bfs: while let Some(u) = queue.pop_front() {
            for &e in r.out(u) {
                let v = r.head[e as usize] as usize;
                if r.cap[e as usize] == 0 || v == r.source || pred[v] != u32::MAX {
                    continue;
                }
                pred[v] = e;
                if v == r.sink {
                    reached = true;
                    break 'bfs;
                }
                queue.push_back(v);
            }
        }
        if !reached {
            break;
        }
        r.augment(&pred, |e| tail_of[e as usize] as usize);
        augmentations += 1;
    }
    Ok(r.result(net, augmentations))
}

fn residual_tails(r: &Residual) -> Vec<u32> {
    let mut tails = vec![0u32; r.head.len()];
    for v in 0..r.node_count {
        for &e in r.out(v) {
            tails[e as usize] = v as u32;
        }
    }
    tails
}

/// Among all maximum flows, one of minimum total weight. Requires
/// non-negative weights.
pub fn min_cost_max_flow(net: &TimeExpandedNetwork) -> FlowResult {
    min_cost_max_flow_until(net, None).expect("no deadline")
}

pub fn min_cost_max_flow_until(
    net: &TimeExpandedNetwork,
    deadline: Option<Instant>,
) -> Result<FlowResult, TimedOut> {
    debug_assert!(net.arcs().iter().all(|a| a.weight >= 0));
    let mut r = Residual::new(net);
    let tail_of = residual_tails(&r);
    let n = r.node_count;
    const INF: i64 = i64::MAX / 4;
    // zero potentials are feasible because all weights are non-negative
    let mut phi = vec![0i64; n];
    let mut dist = vec![INF; n];
    let mut pred = vec![u32::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut augmentations = 0;
    loop {
        check(deadline)?;
        dist.fill(INF);
        pred.fill(u32::MAX);
        done.fill(false);
        heap.clear();
        dist[r.source] = 0;
        heap.push(Reverse((0i64, r.source as u32)));
        while let Some(Reverse((d, u))) = heap.pop() {
            let u = u as usize;
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == r.sink {
                break;
            }
            for &e in r.out(u) {
                let e = e as usize;
                if r.cap[e] == 0 {
                    continue;
                }
                let v = r.head[e] as usize;
                if done[v] {
                    continue;
                }
                let nd = d + r.cost[e] + phi[u] - phi[v];
                let better = nd < dist[v]
                    || (nd == dist[v] && (tail_of[pred[v] as usize] as usize) > u);
                if better {
                    if nd < dist[v] {
                        heap.push(Reverse((nd, v as u32)));
                    }
                    dist[v] = nd;
                    pred[v] = e as u32;
                }
            }
        }
        if !done[r.sink] {
            break;
        }
        let ds = dist[r.sink];
        for v in 0..n {
            phi[v] += dist[v].min(ds);
        }
        r.augment(&pred, |e| tail_of[e as usize] as usize);
        augmentations += 1;
    }
    Ok(r.result(net, augmentations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::Constraint;
    use crate::fixtures;
    use crate::flow::network::{build_network, ArcKind, NetworkOptions, NetworkRequest};
    use crate::graph::Graph;
    use crate::instance::Team;

    fn net(
        graph: &Graph,
        team: &Team,
        horizon: usize,
        constraints: &[Constraint],
    ) -> TimeExpandedNetwork {
        build_network(&NetworkRequest {
            graph,
            team_id: 0,
            team,
            horizon,
            constraints,
            bias: None,
            options: NetworkOptions::default(),
        })
        .unwrap()
    }

    #[test]
    fn empty_supply_has_zero_flow() {
        let g = fixtures::path_graph(2);
        let team = Team::new(vec![], vec![]);
        let r = max_flow(&net(&g, &team, 2, &[]));
        assert_eq!(r.value, 0);
        assert_eq!(min_cost_max_flow(&net(&g, &team, 2, &[])).value, 0);
    }

    #[test]
    fn single_edge_one_move() {
        let inst = fixtures::single_edge();
        let n = net(&inst.graph, &inst.teams[0], 1, &[]);
        assert_eq!(max_flow(&n).value, 1);
        let r = min_cost_max_flow(&n);
        assert_eq!((r.value, r.cost), (1, 0));
    }

    #[test]
    fn vertex_constraint_on_single_edge() {
        let inst = fixtures::single_edge();
        let c = [Constraint::Vertex { team: 0, vertex: 1, t: 1 }];
        assert_eq!(max_flow(&net(&inst.graph, &inst.teams[0], 1, &c)).value, 0);
        assert_eq!(max_flow(&net(&inst.graph, &inst.teams[0], 2, &c)).value, 1);
    }

    #[test]
    fn gadget_admits_one_direction() {
        // with stay arcs removed both agents must cross the single edge in
        // opposite directions; the gadget passes only one of them
        let g = fixtures::path_graph(2);
        let team = Team::new(vec![0, 1], vec![0, 1]);
        let full = net(&g, &team, 1, &[]);
        assert_eq!(max_flow(&full).value, 2);
        let crossing = full.filtered(|a| a.kind != ArcKind::Stay);
        assert_eq!(max_flow(&crossing).value, 1);
        assert_eq!(min_cost_max_flow(&crossing).value, 1);
    }

    #[test]
    fn two_team_example_team_two() {
        let inst = fixtures::two_team_example();
        let n = net(&inst.graph, &inst.teams[1], 3, &[]);
        assert_eq!(max_flow(&n).value, 2);
        assert_eq!(min_cost_max_flow(&n).value, 2);
        let n = net(&inst.graph, &inst.teams[1], 1, &[]);
        assert!(max_flow(&n).value < 2);
    }

    #[test]
    fn deadline_in_the_past_times_out() {
        let inst = fixtures::single_edge();
        let n = net(&inst.graph, &inst.teams[0], 1, &[]);
        let past = Some(Instant::now());
        assert_eq!(min_cost_max_flow_until(&n, past), Err(TimedOut));
        assert_eq!(max_flow_until(&n, past), Err(TimedOut));
    }

    #[test]
    fn deterministic() {
        let inst = fixtures::two_team_example();
        let n = net(&inst.graph, &inst.teams[1], 4, &[]);
        assert_eq!(min_cost_max_flow(&n), min_cost_max_flow(&n));
        assert_eq!(max_flow(&n), max_flow(&n));
    }
}
