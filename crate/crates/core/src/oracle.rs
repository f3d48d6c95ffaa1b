//! Brute-force reference solver: breadth-first search over joint
//! configurations of all agents. Only for tiny instances.
//!
//! Agents of one team are interchangeable, so a configuration is stored with
//! each team's positions sorted.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::collision::Constraint;
use crate::error::OracleError;
use crate::graph::{Graph, VertexId};
use crate::instance::{TapfInstance, Team};
use crate::solution::{Path, Solution};

/// Default refusal threshold on `|V|^agents`.
pub const DEFAULT_STATE_LIMIT: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    /// Minimal makespan with one optimal solution.
    Optimal { makespan: usize, solution: Solution },
    /// Every reachable configuration was explored; no solution exists.
    Infeasible,
    /// No solution with makespan at most the cap.
    CapReached,
}

impl OracleOutcome {
    pub fn makespan(&self) -> Option<usize> {
        match self {
            OracleOutcome::Optimal { makespan, .. } => Some(*makespan),
            _ => None,
        }
    }
}

fn guard(vertices: usize, agents: usize, limit: u128) -> Result<(), OracleError> {
    let states = (vertices as u128).checked_pow(agents as u32).unwrap_or(u128::MAX);
    if states > limit {
        return Err(OracleError::StateSpaceTooLarge { states, limit });
    }
    Ok(())
}

/// Team boundaries in the flat agent vector.
fn team_ranges(teams: &[Team]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(teams.len());
    let mut at = 0;
    for t in teams {
        out.push((at, at + t.size()));
        at += t.size();
    }
    out
}

fn canonical(mut state: Vec<VertexId>, ranges: &[(usize, usize)]) -> Vec<VertexId> {
    for &(a, b) in ranges {
        state[a..b].sort_unstable();
    }
    state
}

/// Packs canonical configurations into a `u128`.
struct Codec {
    ranges: Vec<(usize, usize)>,
    bits: u32,
    agents: usize,
}

impl Codec {
    fn new(vertices: usize, ranges: Vec<(usize, usize)>) -> Result<Self, OracleError> {
        let agents = ranges.last().map_or(0, |r| r.1);
        let bits = usize::BITS - vertices.leading_zeros();
        if agents as u32 * bits > 128 {
            return Err(OracleError::StateSpaceTooLarge {
                states: u128::MAX,
                limit: u128::MAX,
            });
        }
        Ok(Codec { ranges, bits, agents })
    }

    fn key(&self, state: &[VertexId]) -> u128 {
        let mut buf = [0usize; 128];
        let buf = &mut buf[..state.len()];
        buf.copy_from_slice(state);
        for &(a, b) in &self.ranges {
            buf[a..b].sort_unstable();
        }
        buf.iter()
            .fold(0u128, |acc, &v| (acc << self.bits) | v as u128)
    }

    fn decode(&self, mut key: u128) -> Vec<VertexId> {
        let mask = (1u128 << self.bits) - 1;
        let mut out = vec![0; self.agents];
        for slot in out.iter_mut().rev() {
            *slot = (key & mask) as VertexId;
            key >>= self.bits;
        }
        out
    }
}

/// Calls `emit` with every joint successor of `state`: each agent stays or
/// moves to a neighbor, no two agents share a vertex, no two swap.
fn for_each_successor(
    graph: &Graph,
    state: &[VertexId],
    allowed: &dyn Fn(usize, VertexId, VertexId) -> bool,
    emit: &mut dyn FnMut(&[VertexId]),
) {
    let options: Vec<Vec<VertexId>> = state
        .iter()
        .enumerate()
        .map(|(a, &u)| {
            std::iter::once(u)
                .chain(graph.neighbors(u))
                .filter(|&v| allowed(a, u, v))
                .collect()
        })
        .collect();
    let mut next = Vec::with_capacity(state.len());
    fn rec(
        state: &[VertexId],
        options: &[Vec<VertexId>],
        next: &mut Vec<VertexId>,
        emit: &mut dyn FnMut(&[VertexId]),
    ) {
        let a = next.len();
        if a == state.len() {
            emit(next);
            return;
        }
        for &v in &options[a] {
            let clash = next.iter().enumerate().any(|(b, &w)| {
                w == v || (state[b] == v && w == state[a] && v != state[a])
            });
            if clash {
                continue;
            }
            next.push(v);
            rec(state, options, next, emit);
            next.pop();
        }
    }
    rec(state, &options, &mut next, emit);
}

/// Minimal makespan of `instance` by breadth-first search over joint
/// configurations, considering makespans up to `horizon_cap`.
pub fn optimal_makespan(
    instance: &TapfInstance,
    horizon_cap: usize,
    state_limit: u128,
) -> Result<OracleOutcome, OracleError> {
    if instance.has_relaxed_teams() {
        return Err(OracleError::UnsupportedFlags);
    }
    let graph = &instance.graph;
    let n_agents = instance.agent_count();
    guard(graph.vertex_count(), n_agents, state_limit)?;
    let ranges = team_ranges(&instance.teams);
    let codec = Codec::new(graph.vertex_count(), ranges.clone())?;
    let start: Vec<VertexId> = instance.teams.iter().flat_map(|t| t.starts.clone()).collect();
    let targets: Vec<VertexId> = instance.teams.iter().flat_map(|t| t.targets.clone()).collect();
    let goal = codec.key(&targets);
    let root = codec.key(&start);

    let mut parent: HashMap<u128, u128> = HashMap::from([(root, root)]);
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        if frontier.contains(&goal) {
            break;
        }
        if frontier.is_empty() {
            return Ok(OracleOutcome::Infeasible);
        }
        if depth == horizon_cap {
            return Ok(OracleOutcome::CapReached);
        }
        let mut next_frontier = Vec::new();
        for &s in &frontier {
            let state = codec.decode(s);
            for_each_successor(graph, &state, &|_, _, _| true, &mut |succ| {
                let c = codec.key(succ);
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(c) {
                    e.insert(s);
                    next_frontier.push(c);
                }
            });
        }
        frontier = next_frontier;
        depth += 1;
    }

    // canonical chain from root to goal, then relabel forward from the starts
    let mut chain = vec![goal];
    while *chain.last().unwrap() != root {
        chain.push(parent[chain.last().unwrap()]);
    }
    chain.reverse();
    let mut labeled = vec![start];
    for target in &chain[1..] {
        let cur = labeled.last().unwrap().clone();
        let mut step = None;
        for_each_successor(graph, &cur, &|_, _, _| true, &mut |succ| {
            if step.is_none() && codec.key(succ) == *target {
                step = Some(succ.to_vec());
            }
        });
        labeled.push(step.expect("canonical successor has a labeled witness"));
    }
    let paths: Vec<Vec<Path>> = ranges
        .iter()
        .map(|&(a, b)| {
            (a..b)
                .map(|agent| Path::new(labeled.iter().map(|s| s[agent]).collect()))
                .collect()
        })
        .collect();
    Ok(OracleOutcome::Optimal {
        makespan: depth,
        solution: Solution::new(paths),
    })
}

/// Whether the team alone can reach its targets at horizon `horizon` while
/// obeying `constraints` (constraints are read for this team regardless of
/// their team id). Agents stay at their targets after the horizon, so a
/// vertex constraint on a target later than the horizon also counts.
pub fn enumerate_team_feasibility(
    graph: &Graph,
    team: &Team,
    constraints: &[Constraint],
    horizon: usize,
    state_limit: u128,
) -> Result<bool, OracleError> {
    if !team.flags.is_plain() {
        return Err(OracleError::UnsupportedFlags);
    }
    guard(graph.vertex_count(), team.size(), state_limit)?;
    let ranges = [(0, team.size())];
    let banned_vertex: HashSet<(VertexId, usize)> = constraints
        .iter()
        .filter_map(|c| match *c {
            Constraint::Vertex { vertex, t, .. } => Some((vertex, t)),
            _ => None,
        })
        .collect();
    let banned_edge: HashSet<(VertexId, VertexId, usize)> = constraints
        .iter()
        .filter_map(|c| match *c {
            Constraint::Edge { from, to, t, .. } => Some((from, to, t)),
            _ => None,
        })
        .collect();
    let occupied_ok = |s: &[VertexId], t: usize| s.iter().all(|&v| !banned_vertex.contains(&(v, t)));

    let codec = Codec::new(graph.vertex_count(), ranges.to_vec())?;
    let start = canonical(team.starts.clone(), &ranges);
    if !occupied_ok(&start, 0) {
        return Ok(false);
    }
    let mut goal = team.targets.clone();
    goal.sort_unstable();
    let parked_ok = |s: &[VertexId]| {
        banned_vertex
            .iter()
            .all(|&(v, t)| t <= horizon || !s.contains(&v))
    };

    let mut layer: HashSet<u128> = HashSet::from([codec.key(&start)]);
    for t in 0..horizon {
        let mut next: HashSet<u128> = HashSet::new();
        for &key in &layer {
            let s = codec.decode(key);
            let allowed = |_: usize, u: VertexId, v: VertexId| {
                !banned_vertex.contains(&(v, t + 1)) && !banned_edge.contains(&(u, v, t))
            };
            for_each_successor(graph, &s, &allowed, &mut |succ| {
                next.insert(codec.key(succ));
            });
        }
        if next.is_empty() {
            return Ok(false);
        }
        layer = next;
    }
    Ok(layer.contains(&codec.key(&goal)) && parked_ok(&goal))
}

/// Number of joint configurations reachable from the starts.
pub fn reachable_configurations(instance: &TapfInstance) -> Result<usize, OracleError> {
    let codec = Codec::new(instance.graph.vertex_count(), team_ranges(&instance.teams))?;
    let start: Vec<VertexId> = instance.teams.iter().flat_map(|t| t.starts.clone()).collect();
    let root = codec.key(&start);
    let mut seen = HashSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(s) = queue.pop_front() {
        for_each_successor(&instance.graph, &codec.decode(s), &|_, _, _| true, &mut |succ| {
            let c = codec.key(succ);
            if seen.insert(c) {
                queue.push_back(c);
            }
        });
    }
    Ok(seen.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::solution::validate_solution;

    const CAP: usize = 64;

    #[test]
    fn already_at_target() {
        let g = fixtures::path_graph(3);
        let inst = TapfInstance::new(g, vec![Team::new(vec![1], vec![1])]);
        assert_eq!(optimal_makespan(&inst, CAP, DEFAULT_STATE_LIMIT).unwrap().makespan(), Some(0));
    }

    #[test]
    fn two_team_example_is_three() {
        let inst = fixtures::two_team_example();
        let r = optimal_makespan(&inst, CAP, DEFAULT_STATE_LIMIT).unwrap();
        assert_eq!(r.makespan(), Some(3));
        let OracleOutcome::Optimal { solution, .. } = r else { unreachable!() };
        assert_eq!(validate_solution(&inst, &solution), Ok(()));
    }

    #[test]
    fn head_on_is_infeasible_and_cap_is_distinct() {
        let inst = fixtures::head_on_path();
        assert_eq!(
            optimal_makespan(&inst, CAP, DEFAULT_STATE_LIMIT).unwrap(),
            OracleOutcome::Infeasible
        );
        // the agents can never pass each other: (0,2), (0,1), (1,2)
        assert_eq!(reachable_configurations(&inst), Ok(3));
        let inst = fixtures::two_team_example();
        assert_eq!(
            optimal_makespan(&inst, 2, DEFAULT_STATE_LIMIT).unwrap(),
            OracleOutcome::CapReached
        );
    }

    #[test]
    fn guard_refuses_big_spaces() {
        let g = Graph::grid(10, 10, vec![false; 100]).unwrap();
        let inst = TapfInstance::new(g, vec![Team::new(vec![0, 1, 2, 3, 4], vec![95, 96, 97, 98, 99])]);
        assert!(matches!(
            optimal_makespan(&inst, CAP, 1_000_000),
            Err(OracleError::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn team_feasibility_examples() {
        let g = Graph::grid(3, 1, vec![false; 3]).unwrap();
        let team = Team::new(vec![0], vec![2]);
        assert!(!enumerate_team_feasibility(&g, &team, &[], 1, DEFAULT_STATE_LIMIT).unwrap());
        assert!(enumerate_team_feasibility(&g, &team, &[], 2, DEFAULT_STATE_LIMIT).unwrap());

        let inst = fixtures::single_edge();
        let c = [Constraint::Vertex { team: 0, vertex: 1, t: 1 }];
        let team = &inst.teams[0];
        assert!(!enumerate_team_feasibility(&inst.graph, team, &c, 1, DEFAULT_STATE_LIMIT).unwrap());
        assert!(enumerate_team_feasibility(&inst.graph, team, &c, 2, DEFAULT_STATE_LIMIT).unwrap());

        let fig = fixtures::two_team_example();
        assert!(enumerate_team_feasibility(&fig.graph, &fig.teams[1], &[], 3, DEFAULT_STATE_LIMIT).unwrap());
    }

    #[test]
    fn late_ban_on_target_blocks_parking() {
        let inst = fixtures::single_edge();
        let c = [Constraint::Vertex { team: 0, vertex: 1, t: 5 }];
        let team = &inst.teams[0];
        assert!(!enumerate_team_feasibility(&inst.graph, team, &c, 3, DEFAULT_STATE_LIMIT).unwrap());
        assert!(enumerate_team_feasibility(&inst.graph, team, &c, 6, DEFAULT_STATE_LIMIT).unwrap());
    }

    #[test]
    fn rotation_on_a_triangle_is_allowed() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let inst = TapfInstance::new(
            g,
            vec![
                Team::new(vec![0], vec![1]),
                Team::new(vec![1], vec![2]),
                Team::new(vec![2], vec![0]),
            ],
        );
        assert_eq!(optimal_makespan(&inst, CAP, DEFAULT_STATE_LIMIT).unwrap().makespan(), Some(1));
    }
}
