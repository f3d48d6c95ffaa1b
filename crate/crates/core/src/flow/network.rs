//! Time-expanded networks for one team.
//!
//! For horizon `T` every vertex `v` becomes `out(v, t)` for `t = 0..=T` and
//! `in(v, t)` for `t = 1..=T`. Arcs:
//!
//! * stay: `out(v, t) -> in(v, t + 1)`
//! * vertex capacity: `in(v, t) -> out(v, t)`
//! * per undirected edge `(u, v)` and `t < T`, a gadget with private nodes
//!   `w`, `w'`: `out(u, t) -> w`, `out(v, t) -> w`, `w -> w'`,
//!   `w' -> in(u, t + 1)`, `w' -> in(v, t + 1)`
//!
//! Every arc has capacity one, so at most one agent occupies a vertex at a
//! time and at most one agent crosses an edge per step, in one direction.
//! Node and arc ids are assigned in construction order, layer by layer in
//! time, and all tie-breaks downstream refer to them.

use std::collections::HashMap;

use crate::collision::Constraint;
use crate::error::NetworkError;
use crate::graph::{EdgeId, Graph, VertexId, UNREACHABLE};
use crate::instance::{Team, TeamId};
use crate::solution::Path;

pub type NodeId = u32;
pub type ArcId = u32;

const NONE: NodeId = NodeId::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Out { vertex: VertexId, t: usize },
    In { vertex: VertexId, t: usize },
    /// First gadget node (`w`) of `edge` between `t` and `t + 1`.
    GadgetEntry { edge: EdgeId, t: usize },
    /// Second gadget node (`w'`).
    GadgetExit { edge: EdgeId, t: usize },
    /// Collects agents absorbed at a funnel target.
    Funnel { vertex: VertexId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcKind {
    Stay,
    VertexCapacity,
    GadgetIn,
    GadgetBridge,
    GadgetOut,
    Funnel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub capacity: u32,
    pub weight: i64,
    pub kind: ArcKind,
}

/// Counts of other teams' agents on vertices and edges, used to weight arcs.
/// Agents that finished keep occupying their final vertex forever.
#[derive(Debug, Clone, Default)]
pub struct BiasTable {
    horizon: usize,
    occupancy: HashMap<(VertexId, usize), u32>,
    traversals: HashMap<(VertexId, VertexId, usize), u32>,
    parked: HashMap<VertexId, u32>,
}

impl BiasTable {
    pub fn from_paths<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Self {
        let mut table = BiasTable::default();
        let paths: Vec<&Path> = paths.into_iter().collect();
        table.horizon = paths.iter().map(|p| p.horizon()).max().unwrap_or(0);
        for p in paths {
            for t in 0..=table.horizon {
                if let Some(v) = p.at(t) {
                    *table.occupancy.entry((v, t)).or_default() += 1;
                }
                if t < table.horizon {
                    if let (Some(u), Some(v)) = (p.at(t), p.at(t + 1)) {
                        if u != v {
                            *table.traversals.entry((u, v, t)).or_default() += 1;
                        }
                    }
                }
            }
            if let Some(v) = p.at(table.horizon) {
                *table.parked.entry(v).or_default() += 1;
            }
        }
        table
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    pub fn occupancy(&self, v: VertexId, t: usize) -> u32 {
        if t <= self.horizon {
            self.occupancy.get(&(v, t)).copied().unwrap_or(0)
        } else {
            self.parked.get(&v).copied().unwrap_or(0)
        }
    }

    pub fn traversals(&self, from: VertexId, to: VertexId, t: usize) -> u32 {
        self.traversals.get(&(from, to, t)).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkOptions {
    /// Largest horizon a network may be built for.
    pub max_horizon: usize,
    /// Drop nodes that no unit can reach in time or that cannot reach a
    /// demand in time. Flow values and costs are unchanged.
    pub prune: bool,
    /// Replace the target demands with one unit of demand at every vertex at
    /// the horizon (funnel demands are kept). Used to test whether a team
    /// can survive its constraints at all. Disables pruning.
    pub any_vertex_sink: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        NetworkOptions {
            max_horizon: usize::MAX,
            prune: false,
            any_vertex_sink: false,
        }
    }
}

/// Everything needed to build a network for one team.
#[derive(Debug, Clone, Copy)]
pub struct NetworkRequest<'a> {
    pub graph: &'a Graph,
    pub team_id: TeamId,
    pub team: &'a Team,
    pub horizon: usize,
    pub constraints: &'a [Constraint],
    pub bias: Option<&'a BiasTable>,
    pub options: NetworkOptions,
}

#[derive(Debug, Clone)]
pub struct TimeExpandedNetwork {
    horizon: usize,
    vertex_count: usize,
    team_size: usize,
    nodes: Vec<NodeKind>,
    arcs: Vec<Arc>,
    supplies: Vec<(NodeId, u32)>,
    demands: Vec<(NodeId, u32)>,
    out_ids: Vec<NodeId>,
    in_ids: Vec<NodeId>,
}

impl TimeExpandedNetwork {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn team_size(&self) -> usize {
        self.team_size
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn supplies(&self) -> &[(NodeId, u32)] {
        &self.supplies
    }

    pub fn demands(&self) -> &[(NodeId, u32)] {
        &self.demands
    }

    pub fn total_supply(&self) -> u32 {
        self.supplies.iter().map(|s| s.1).sum()
    }

    pub fn total_demand(&self) -> u32 {
        self.demands.iter().map(|d| d.1).sum()
    }

    pub fn out_node(&self, v: VertexId, t: usize) -> Option<NodeId> {
        self.lookup(&self.out_ids, v, t)
    }

    pub fn in_node(&self, v: VertexId, t: usize) -> Option<NodeId> {
        self.lookup(&self.in_ids, v, t)
    }

    fn lookup(&self, table: &[NodeId], v: VertexId, t: usize) -> Option<NodeId> {
        if v >= self.vertex_count || t > self.horizon {
            return None;
        }
        match table[t * self.vertex_count + v] {
            NONE => None,
            id => Some(id),
        }
    }

    pub fn kind(&self, node: NodeId) -> NodeKind {
        self.nodes[node as usize]
    }

    /// Copy keeping only the arcs accepted by `keep`. Arc ids are renumbered.
    pub fn filtered(&self, keep: impl Fn(&Arc) -> bool) -> Self {
        let mut out = self.clone();
        out.arcs.retain(|a| keep(a));
        out
    }

    /// Copy with the given per-arc weights.
    pub fn reweighted(&self, weights: &[i64]) -> Self {
        assert_eq!(weights.len(), self.arcs.len());
        let mut out = self.clone();
        for (a, &w) in out.arcs.iter_mut().zip(weights) {
            a.weight = w;
        }
        out
    }

    /// Id of the arc `tail -> head`, if present.
    pub fn find_arc(&self, tail: NodeId, head: NodeId) -> Option<ArcId> {
        self.arcs
            .iter()
            .position(|a| a.tail == tail && a.head == head)
            .map(|i| i as ArcId)
    }
}

/// Closed-form size of an unpruned, unconstrained network:
/// `(nodes, arcs)` = `(|V|(2T+1) + 2|E|T, 2|V|T + 5|E|T)`, plus one node and
/// `T + 1` arcs per distinct funnel target.
pub fn expected_size(graph: &Graph, team: &Team, horizon: usize) -> (usize, usize) {
    let (n, m, t) = (graph.vertex_count(), graph.edge_count(), horizon);
    let mut nodes = n * (2 * t + 1) + 2 * m * t;
    let mut arcs = 2 * n * t + 5 * m * t;
    if team.flags.funnel_target {
        let k = team.target_slots().len();
        nodes += k;
        arcs += k * (t + 1);
    }
    (nodes, arcs)
}

/// Builds the weighted, constrained time-expanded network for one team.
pub fn build_network(req: &NetworkRequest<'_>) -> Result<TimeExpandedNetwork, NetworkError> {
    let graph = req.graph;
    let team = req.team;
    let horizon = req.horizon;
    if horizon > req.options.max_horizon {
        return Err(NetworkError::HorizonTooLarge {
            horizon,
            bound: req.options.max_horizon,
        });
    }
    let n = graph.vertex_count();

    // constraint surgery tables
    let mut blocked_capacity: HashMap<(VertexId, usize), ()> = HashMap::new();
    let mut blocked_entry: HashMap<(VertexId, EdgeId, usize), ()> = HashMap::new();
    let mut blocked_exit: HashMap<(VertexId, EdgeId, usize), ()> = HashMap::new();
    let mut latest_vertex_ban: HashMap<VertexId, usize> = HashMap::new();
    for c in req.constraints {
        if c.team() != req.team_id {
            return Err(NetworkError::ForeignConstraint {
                expected: req.team_id,
                found: c.team(),
            });
        }
        match *c {
            Constraint::Vertex { vertex, t, .. } => {
                if vertex >= n {
                    return Err(NetworkError::UnknownVertex(vertex));
                }
                blocked_capacity.insert((vertex, t), ());
                let e = latest_vertex_ban.entry(vertex).or_insert(t);
                *e = (*e).max(t);
            }
            Constraint::Edge { from, to, t, .. } => {
                let edge = graph
                    .edge_id(from, to)
                    .ok_or(NetworkError::UnknownEdge(from, to))?;
                blocked_entry.insert((from, edge, t), ());
                blocked_exit.insert((to, edge, t), ());
            }
        }
    }

    // terminals, before pruning
    let departures = team.departure_times();
    let mut supply_points: Vec<(VertexId, usize)> = team
        .starts
        .iter()
        .zip(&departures)
        .map(|(&s, &t)| (s, t))
        .collect();
    supply_points.sort_unstable_by_key(|&(s, t)| (t, s));
    // agents released at t = 0 cannot be banned from their start; the ban
    // makes the network infeasible instead
    supply_points.retain(|&(s, t)| !(t == 0 && blocked_capacity.contains_key(&(s, 0))));
    let slots = team.target_slots();
    // a target whose vertex is banned after the horizon cannot be parked at
    let demand_points: Vec<(VertexId, usize)> = if team.flags.funnel_target {
        slots.clone()
    } else {
        slots
            .iter()
            .copied()
            .filter(|&(g, _)| latest_vertex_ban.get(&g).is_none_or(|&t| t <= horizon))
            .collect()
    };

    // time windows for pruning: keep (v, t) iff earliest[v] <= t <= horizon - to_target[v]
    let (earliest, to_target) = if req.options.prune && !req.options.any_vertex_sink {
        let mut earliest = vec![u32::MAX as usize; n];
        for &(s, t0) in &supply_points {
            let d = graph.distances_from([s]);
            for v in 0..n {
                if d[v] != UNREACHABLE {
                    earliest[v] = earliest[v].min(t0 + d[v] as usize);
                }
            }
        }
        let d = graph.distances_from(demand_points.iter().map(|&(g, _)| g));
        let to_target: Vec<usize> = d
            .iter()
            .map(|&x| if x == UNREACHABLE { usize::MAX } else { x as usize })
            .collect();
        (earliest, to_target)
    } else {
        (vec![0; n], vec![0; n])
    };
    let live = |v: VertexId, t: usize| -> bool {
        earliest[v] <= t && to_target[v] != usize::MAX && t + to_target[v] <= horizon
    };

    let mut net = TimeExpandedNetwork {
        horizon,
        vertex_count: n,
        team_size: team.size(),
        nodes: Vec::new(),
        arcs: Vec::new(),
        supplies: Vec::new(),
        demands: Vec::new(),
        out_ids: vec![NONE; n * (horizon + 1)],
        in_ids: vec![NONE; n * (horizon + 1)],
    };
    let edges = graph.edges();

    for v in 0..n {
        if live(v, 0) {
            net.out_ids[v] = push_node(&mut net.nodes, NodeKind::Out { vertex: v, t: 0 });
        }
    }
    let mut gadget_ids: Vec<(NodeId, NodeId)> = vec![(NONE, NONE); edges.len()];
    for t in 0..horizon {
        // gadget nodes for step t -> t + 1
        for (e, &(u, v)) in edges.iter().enumerate() {
            let from_live = live(u, t) || live(v, t);
            let to_live = live(u, t + 1) || live(v, t + 1);
            gadget_ids[e] = if from_live && to_live {
                (
                    push_node(&mut net.nodes, NodeKind::GadgetEntry { edge: e, t }),
                    push_node(&mut net.nodes, NodeKind::GadgetExit { edge: e, t }),
                )
            } else {
                (NONE, NONE)
            };
        }
        let layer = (t + 1) * n;
        for v in 0..n {
            if live(v, t + 1) {
                net.in_ids[layer + v] = push_node(&mut net.nodes, NodeKind::In { vertex: v, t: t + 1 });
            }
        }
        for v in 0..n {
            if live(v, t + 1) {
                net.out_ids[layer + v] =
                    push_node(&mut net.nodes, NodeKind::Out { vertex: v, t: t + 1 });
            }
        }

        let out_t = |v: VertexId| net.out_ids[t * n + v];
        let in_next = |v: VertexId| net.in_ids[layer + v];
        let mut new_arcs: Vec<Arc> = Vec::new();
        for v in 0..n {
            push_arc(&mut new_arcs, out_t(v), in_next(v), 0, ArcKind::Stay);
        }
        for (e, &(u, v)) in edges.iter().enumerate() {
            let (w, w2) = gadget_ids[e];
            if w == NONE {
                continue;
            }
            for (a, b) in [(u, v), (v, u)] {
                if !blocked_entry.contains_key(&(a, e, t)) {
                    // penalize moving a -> b while another team moves b -> a
                    let weight = req.bias.map_or(0, |bt| bt.traversals(b, a, t)) as i64;
                    push_arc(&mut new_arcs, out_t(a), w, weight, ArcKind::GadgetIn);
                }
            }
            push_arc(&mut new_arcs, w, w2, 0, ArcKind::GadgetBridge);
            for a in [u, v] {
                if !blocked_exit.contains_key(&(a, e, t)) {
                    push_arc(&mut new_arcs, w2, in_next(a), 0, ArcKind::GadgetOut);
                }
            }
        }
        for v in 0..n {
            if blocked_capacity.contains_key(&(v, t + 1)) {
                continue;
            }
            let weight = req.bias.map_or(0, |bt| bt.occupancy(v, t + 1)) as i64;
            push_arc(
                &mut new_arcs,
                in_next(v),
                net.out_ids[layer + v],
                weight,
                ArcKind::VertexCapacity,
            );
        }
        net.arcs.extend(new_arcs);
    }

    // supplies
    for &(s, t0) in &supply_points {
        if t0 > horizon {
            continue;
        }
        let node = if t0 == 0 {
            net.out_node(s, 0)
        } else {
            net.in_node(s, t0)
        };
        if let Some(node) = node {
            net.supplies.push((node, 1));
        }
    }

    // demands
    if team.flags.funnel_target {
        for &(g, units) in &demand_points {
            let aux = push_node(&mut net.nodes, NodeKind::Funnel { vertex: g });
            for t in 0..=horizon {
                if let Some(out) = net.out_node(g, t) {
                    net.arcs.push(Arc {
                        tail: out,
                        head: aux,
                        capacity: 1,
                        weight: 0,
                        kind: ArcKind::Funnel,
                    });
                }
            }
            net.demands.push((aux, units as u32));
        }
    } else if !req.options.any_vertex_sink {
        for &(g, units) in &demand_points {
            if let Some(node) = net.out_node(g, horizon) {
                net.demands.push((node, units as u32));
            }
        }
    }
    if req.options.any_vertex_sink {
        for v in 0..n {
            if let Some(node) = net.out_node(v, horizon) {
                net.demands.push((node, 1));
            }
        }
    }
    Ok(net)
}

fn push_node(nodes: &mut Vec<NodeKind>, kind: NodeKind) -> NodeId {
    nodes.push(kind);
    (nodes.len() - 1) as NodeId
}

fn push_arc(arcs: &mut Vec<Arc>, tail: NodeId, head: NodeId, weight: i64, kind: ArcKind) {
    if tail != NONE && head != NONE {
        arcs.push(Arc {
            tail,
            head,
            capacity: 1,
            weight,
            kind,
        });
    }
}
