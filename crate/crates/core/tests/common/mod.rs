//! Helpers shared by the integration tests: small random instances and
//! independent reference checks (exhaustive flow search, an LP row
//! evaluator, a condition-by-condition solution checker).
#![allow(dead_code)]

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tapf_core::flow::TimeExpandedNetwork;
use tapf_core::{Graph, Path, Solution, TapfInstance, Team, VertexId};

/// Connected graph on `n` vertices: a random spanning tree plus `extra`
/// random chords.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((order[i].min(order[j]), order[i].max(order[j])));
    }
    let mut tries = 0;
    while edges.len() < n - 1 + extra && tries < 200 {
        tries += 1;
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let e = (a.min(b), a.max(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    }
    Graph::new(n, &edges).unwrap()
}

/// Small grid with a few blocked cells, kept only when its free cells are
/// connected and number between `lo` and `hi`.
pub fn random_grid(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Graph {
    loop {
        let (w, h) = *[(2, 3), (2, 4), (3, 3), (2, 5), (3, 4), (2, 6), (4, 3), (3, 5)]
            .choose(rng)
            .unwrap();
        let blocked: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.12)).collect();
        let Ok(g) = Graph::grid(w, h, blocked) else { continue };
        let n = g.vertex_count();
        if n < lo || n > hi {
            continue;
        }
        let comp = g.components();
        if comp.iter().all(|&c| c == comp[0]) {
            return g;
        }
    }
}

/// Splits `agents` into `teams` non-empty team sizes.
pub fn split(rng: &mut ChaCha8Rng, agents: usize, teams: usize) -> Vec<usize> {
    let mut sizes = vec![1; teams];
    for _ in teams..agents {
        let i = rng.gen_range(0..teams);
        sizes[i] += 1;
    }
    sizes
}

/// Plain teams with distinct starts and distinct targets drawn from `graph`.
pub fn random_teams(rng: &mut ChaCha8Rng, graph: &Graph, sizes: &[usize]) -> Vec<Team> {
    let total: usize = sizes.iter().sum();
    let mut verts: Vec<usize> = (0..graph.vertex_count()).collect();
    verts.shuffle(rng);
    let starts = verts[..total].to_vec();
    verts.shuffle(rng);
    let targets = verts[..total].to_vec();
    let mut teams = Vec::new();
    let mut at = 0;
    for &k in sizes {
        let mut t = targets[at..at + k].to_vec();
        t.sort_unstable();
        teams.push(Team::new(starts[at..at + k].to_vec(), t));
        at += k;
    }
    teams
}

/// The oracle-suite family: 6 to 12 vertices (grids and random connected
/// graphs, some sparse enough to be infeasible), 1 to 3 teams, 2 to 4 agents.
pub fn oracle_suite_instance(seed: u64) -> TapfInstance {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let graph = if seed.is_multiple_of(3) {
        random_grid(&mut rng, 6, 12)
    } else {
        let n = rng.gen_range(6..=12);
        let extra = if seed % 5 == 1 { rng.gen_range(0..=1) } else { rng.gen_range(1..=n) };
        random_connected_graph(&mut rng, n, extra)
    };
    let agents = rng.gen_range(2..=4);
    let teams = rng.gen_range(1..=3usize.min(agents));
    let sizes = split(&mut rng, agents, teams);
    let teams = random_teams(&mut rng, &graph, &sizes);
    TapfInstance::new(graph, teams)
}

/// Maximum flow value and the least cost among flows of that value, by
/// trying every set of arc-disjoint supply-to-demand paths. Node ids of a
/// time-expanded network increase along every arc, so the paths are found
/// by a plain depth-first walk.
pub fn exhaustive_min_cost_flow(net: &TimeExpandedNetwork) -> (u32, i64) {
    let arcs = net.arcs();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); net.node_count()];
    for (i, a) in arcs.iter().enumerate() {
        assert!(a.tail < a.head, "arc {i} runs backwards");
        out[a.tail as usize].push(i);
    }
    let demand: HashMap<u32, u32> = net.demands().iter().copied().collect();
    // (supply index, demand node, arcs)
    let mut paths: Vec<(usize, u32, Vec<usize>)> = Vec::new();
    fn walk(
        node: u32,
        src: usize,
        out: &[Vec<usize>],
        arcs: &[tapf_core::flow::Arc],
        demand: &HashMap<u32, u32>,
        stack: &mut Vec<usize>,
        paths: &mut Vec<(usize, u32, Vec<usize>)>,
    ) {
        if demand.contains_key(&node) {
            paths.push((src, node, stack.clone()));
        }
        for &a in &out[node as usize] {
            stack.push(a);
            walk(arcs[a].head, src, out, arcs, demand, stack, paths);
            stack.pop();
        }
    }
    for (si, &(node, _)) in net.supplies().iter().enumerate() {
        walk(node, si, &out, arcs, &demand, &mut Vec::new(), &mut paths);
    }

    struct Search<'a> {
        paths: &'a [(usize, u32, Vec<usize>)],
        arcs: &'a [tapf_core::flow::Arc],
        arc_use: Vec<u32>,
        supply_left: Vec<u32>,
        demand_left: HashMap<u32, u32>,
        best: (u32, i64),
    }
    impl Search<'_> {
        fn go(&mut self, from: usize, value: u32, cost: i64) {
            if value > self.best.0 || (value == self.best.0 && cost < self.best.1) {
                self.best = (value, cost);
            }
            for p in from..self.paths.len() {
                let (s, d, ref route) = self.paths[p];
                if self.supply_left[s] == 0 || self.demand_left[&d] == 0 {
                    continue;
                }
                if route.iter().any(|&a| self.arc_use[a] >= self.arcs[a].capacity) {
                    continue;
                }
                self.supply_left[s] -= 1;
                *self.demand_left.get_mut(&d).unwrap() -= 1;
                let mut add = 0;
                for &a in route {
                    self.arc_use[a] += 1;
                    add += self.arcs[a].weight;
                }
                // the same path may carry a second unit only if capacities allow
                self.go(p, value + 1, cost + add);
                for &a in route {
                    self.arc_use[a] -= 1;
                }
                self.supply_left[s] += 1;
                *self.demand_left.get_mut(&d).unwrap() += 1;
            }
        }
    }
    let mut s = Search {
        paths: &paths,
        arcs,
        arc_use: vec![0; arcs.len()],
        supply_left: net.supplies().iter().map(|&(_, u)| u).collect(),
        demand_left: demand.clone(),
        best: (0, 0),
    };
    s.go(0, 0, 0);
    s.best
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(i64, String)>,
    pub sense: String,
    pub rhs: i64,
}

#[derive(Debug, Clone, Default)]
pub struct LpModel {
    pub rows: Vec<LpRow>,
    pub bounds: HashMap<String, (i64, i64)>,
    pub integers: Vec<String>,
}

/// Reads the subset of CPLEX LP text the exporter writes.
pub fn parse_lp(text: &str) -> LpModel {
    let mut model = LpModel::default();
    let mut section = "";
    let mut pending = String::new();
    let flush = |pending: &mut String, model: &mut LpModel| {
        if pending.trim().is_empty() {
            return;
        }
        let (name, body) = pending.split_once(':').expect("row has a name");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let n = tokens.len();
        let (sense, rhs) = (tokens[n - 2].to_string(), tokens[n - 1].parse().unwrap());
        let mut terms = Vec::new();
        let mut sign = 1;
        for tok in &tokens[..n - 2] {
            match *tok {
                "+" => sign = 1,
                "-" => sign = -1,
                "0" => sign = 0,
                var => {
                    terms.push((sign, var.to_string()));
                    sign = 1;
                }
            }
        }
        model.rows.push(LpRow {
            name: name.trim().to_string(),
            terms,
            sense,
            rhs,
        });
        pending.clear();
    };
    for line in text.lines() {
        if line.starts_with('\\') {
            continue;
        }
        match line.trim() {
            "Minimize" | "Subject To" | "Bounds" | "General" | "End" => {
                flush(&mut pending, &mut model);
                section = line.trim();
                continue;
            }
            _ => {}
        }
        match section {
            "Subject To" => {
                if line.starts_with(' ') && !line.starts_with("   ") {
                    flush(&mut pending, &mut model);
                }
                pending.push(' ');
                pending.push_str(line.trim());
            }
            "Bounds" => {
                let t: Vec<&str> = line.split_whitespace().collect();
                model.bounds.insert(t[2].to_string(), (t[0].parse().unwrap(), t[4].parse().unwrap()));
            }
            "General" => model.integers.extend(line.split_whitespace().map(String::from)),
            _ => {}
        }
    }
    flush(&mut pending, &mut model);
    model
}

impl LpModel {
    /// Names of rows violated by `x` (missing variables read as 0), plus
    /// bound violations.
    pub fn violations(&self, x: &HashMap<String, i64>) -> Vec<String> {
        let get = |v: &str| x.get(v).copied().unwrap_or(0);
        let mut bad = Vec::new();
        for r in &self.rows {
            let lhs: i64 = r.terms.iter().map(|(c, v)| c * get(v)).sum();
            let ok = match r.sense.as_str() {
                "=" => lhs == r.rhs,
                "<=" => lhs <= r.rhs,
                ">=" => lhs >= r.rhs,
                s => panic!("unknown sense {s}"),
            };
            if !ok {
                bad.push(r.name.clone());
            }
        }
        for (v, &val) in x {
            match self.bounds.get(v) {
                Some(&(lo, hi)) if lo <= val && val <= hi => {}
                _ => bad.push(format!("bound {v}")),
            }
        }
        bad
    }
}

/// Direct check of the solution conditions for plain teams: every path
/// starts at its agent's start, moves along edges or waits, the team's
/// final vertices are exactly its targets, and no two agents share a
/// vertex or swap along an edge. Paths must share one length.
pub fn reference_valid(instance: &TapfInstance, paths: &[Vec<Vec<VertexId>>]) -> bool {
    let g = &instance.graph;
    if paths.len() != instance.teams.len() {
        return false;
    }
    let len = match paths.iter().flatten().next() {
        Some(p) => p.len(),
        None => return true,
    };
    let all: Vec<&Vec<VertexId>> = paths.iter().flatten().collect();
    if all.iter().any(|p| p.len() != len || p.is_empty()) {
        return false;
    }
    for (team, ps) in instance.teams.iter().zip(paths) {
        if ps.len() != team.starts.len() {
            return false;
        }
        for (p, &s) in ps.iter().zip(&team.starts) {
            if p[0] != s {
                return false;
            }
            if p.windows(2).any(|w| w[0] != w[1] && !g.has_edge(w[0], w[1])) {
                return false;
            }
        }
        let mut ends: Vec<VertexId> = ps.iter().map(|p| p[len - 1]).collect();
        ends.sort_unstable();
        let mut want = team.targets.clone();
        want.sort_unstable();
        if ends != want {
            return false;
        }
    }
    for t in 0..len {
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if all[i][t] == all[j][t] {
                    return false;
                }
                if t + 1 < len && all[i][t] == all[j][t + 1] && all[i][t + 1] == all[j][t] && all[i][t] != all[i][t + 1] {
                    return false;
                }
            }
        }
    }
    true
}

pub fn to_solution(paths: &[Vec<Vec<VertexId>>]) -> Solution {
    Solution::new(
        paths
            .iter()
            .map(|ps| ps.iter().map(|p| Path::new(p.clone())).collect())
            .collect(),
    )
}

/// Every walk of `len` vertices starting at `s` (waits allowed).
pub fn walks(g: &Graph, s: VertexId, len: usize) -> Vec<Vec<VertexId>> {
    let mut out = vec![vec![s]];
    for _ in 1..len {
        let mut next = Vec::new();
        for w in out {
            let last = *w.last().unwrap();
            for v in std::iter::once(last).chain(g.neighbors(last)) {
                let mut x = w.clone();
                x.push(v);
                next.push(x);
            }
        }
        out = next;
    }
    out
}

/// Smallest horizon up to `max_len - 1` at which some joint choice of walks
/// passes [`reference_valid`].
pub fn enumerated_makespan(instance: &TapfInstance, max_horizon: usize) -> Option<usize> {
    let agents: Vec<(usize, VertexId)> = instance
        .teams
        .iter()
        .enumerate()
        .flat_map(|(i, t)| t.starts.iter().map(move |&s| (i, s)))
        .collect();
    for horizon in 0..=max_horizon {
        let options: Vec<Vec<Vec<VertexId>>> = agents
            .iter()
            .map(|&(_, s)| walks(&instance.graph, s, horizon + 1))
            .collect();
        let mut pick = vec![0usize; agents.len()];
        loop {
            let mut paths: Vec<Vec<Vec<VertexId>>> = vec![Vec::new(); instance.teams.len()];
            for (a, &(team, _)) in agents.iter().enumerate() {
                paths[team].push(options[a][pick[a]].clone());
            }
            if reference_valid(instance, &paths) {
                return Some(horizon);
            }
            let mut k = 0;
            loop {
                if k == pick.len() {
                    break;
                }
                pick[k] += 1;
                if pick[k] < options[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == pick.len() {
                break;
            }
        }
    }
    None
}

/// Up to `count` random constraints for team `team` at times `0..=max_t`.
pub fn random_constraints(
    rng: &mut ChaCha8Rng,
    g: &Graph,
    team: usize,
    count: usize,
    max_t: usize,
) -> Vec<tapf_core::Constraint> {
    use tapf_core::Constraint;
    let mut out = Vec::new();
    for _ in 0..count {
        let t = rng.gen_range(0..=max_t);
        if rng.gen_bool(0.6) || g.edge_count() == 0 {
            out.push(Constraint::Vertex {
                team,
                vertex: rng.gen_range(0..g.vertex_count()),
                t,
            });
        } else {
            let (a, b) = g.edges()[rng.gen_range(0..g.edge_count())];
            let (from, to) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            out.push(Constraint::Edge { team, from, to, t });
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// A random network of at most 30 nodes: 2 to 4 vertices, horizon 1 or 2,
/// one or two agents (sometimes a funnel team), random constraints and
/// random arc weights in `0..4`.
pub fn random_small_network(seed: u64) -> TimeExpandedNetwork {
    use tapf_core::flow::{build_network, NetworkOptions, NetworkRequest};
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(2..=4);
        let extra = rng.gen_range(0..=1);
        let g = random_connected_graph(&mut rng, n, extra);
        let horizon = rng.gen_range(1..=2);
        let k = rng.gen_range(1..=2usize.min(n));
        let mut team = random_teams(&mut rng, &g, &[k]).remove(0);
        if k == 2 && rng.gen_bool(0.25) {
            team.targets = vec![team.targets[0]; 2];
            team.flags.funnel_target = true;
        }
        let count = rng.gen_range(0..=3);
        let constraints = random_constraints(&mut rng, &g, 0, count, horizon);
        let Ok(net) = build_network(&NetworkRequest {
            graph: &g,
            team_id: 0,
            team: &team,
            horizon,
            constraints: &constraints,
            bias: None,
            options: NetworkOptions::default(),
        }) else {
            continue;
        };
        if net.node_count() > 30 {
            continue;
        }
        let weights: Vec<i64> = (0..net.arc_count()).map(|_| rng.gen_range(0..4)).collect();
        return net.reweighted(&weights);
    }
}
