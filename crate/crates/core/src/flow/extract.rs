//! Decomposition of an integral flow into per-agent paths.

use std::collections::BTreeMap;

use super::network::{NodeId, NodeKind, TimeExpandedNetwork};
use super::solver::FlowResult;
use crate::error::NetworkError;
use crate::graph::VertexId;
use crate::instance::Team;
use crate::solution::Path;

/// Splits `flow` into one unit path per agent and converts each into a
/// [`Path`] over `0..=T`. Paths are assigned to agents by start vertex;
/// agents sharing a start take the paths in order of departure.
pub fn extract_paths(
    net: &TimeExpandedNetwork,
    flow: &FlowResult,
    team: &Team,
) -> Result<Vec<Path>, NetworkError> {
    let k = team.size();
    if flow.value < k {
        return Err(NetworkError::InfeasibleAtHorizon {
            value: flow.value,
            needed: k,
        });
    }
    let horizon = net.horizon();
    let mut remaining = flow.flow.clone();
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); net.node_count()];
    for (id, a) in net.arcs().iter().enumerate() {
        outgoing[a.tail as usize].push(id);
    }
    let mut demand_left: BTreeMap<NodeId, u32> = net.demands().iter().copied().collect();

    // unit paths keyed by start vertex, in the order they were peeled off
    let mut by_start: BTreeMap<VertexId, Vec<Path>> = BTreeMap::new();
    let mut units = Vec::new();
    for &(node, n) in net.supplies() {
        for _ in 0..n {
            units.push(node);
        }
    }
    for start in units {
        let mut steps: Vec<Option<VertexId>> = vec![None; horizon + 1];
        let mut node = start;
        loop {
            if let NodeKind::Out { vertex, t } = net.kind(node) {
                steps[t] = Some(vertex);
            }
            if let Some(left) = demand_left.get_mut(&node) {
                // a unit ends here unless it continues on a flow-carrying arc;
                // out nodes of a non-funnel team only end at the horizon
                let ends_here = match net.kind(node) {
                    NodeKind::Funnel { .. } => true,
                    NodeKind::Out { t, .. } => t == horizon,
                    _ => false,
                };
                if *left > 0 && ends_here {
                    *left -= 1;
                    break;
                }
            }
            let next = outgoing[node as usize]
                .iter()
                .copied()
                .find(|&a| remaining[a] > 0);
            let Some(a) = next else {
                // supply that carries no flow in a maximum flow below K
                break;
            };
            remaining[a] -= 1;
            node = net.arcs()[a].head;
        }
        let path = Path::with_presence(steps);
        let Some((_, s)) = path.first_present() else {
            continue;
        };
        by_start.entry(s).or_default().push(path);
    }

    let mut out: Vec<Option<Path>> = vec![None; k];
    for (&s, paths) in by_start.iter_mut() {
        paths.sort_by_key(|p| p.first_present().map(|(t, _)| t));
        let agents = (0..k).filter(|&j| team.starts[j] == s);
        for (j, p) in agents.zip(paths.drain(..)) {
            out[j] = Some(p);
        }
    }
    out.into_iter()
        .collect::<Option<Vec<Path>>>()
        .ok_or(NetworkError::InfeasibleAtHorizon {
            value: flow.value,
            needed: k,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::flow::network::{build_network, NetworkOptions, NetworkRequest};
    use crate::flow::solver::{max_flow, min_cost_max_flow};
    use crate::graph::Graph;
    use crate::instance::{TapfInstance, TeamFlags};
    use crate::solution::{validate_solution, Solution};

    fn solve_one(graph: &Graph, team: &Team, horizon: usize) -> Result<Vec<Path>, NetworkError> {
        let net = build_network(&NetworkRequest {
            graph,
            team_id: 0,
            team,
            horizon,
            constraints: &[],
            bias: None,
            options: NetworkOptions::default(),
        })
        .unwrap();
        extract_paths(&net, &min_cost_max_flow(&net), team)
    }

    #[test]
    fn single_edge_path() {
        let inst = fixtures::single_edge();
        let paths = solve_one(&inst.graph, &inst.teams[0], 1).unwrap();
        assert_eq!(paths, vec![Path::new(vec![0, 1])]);
    }

    #[test]
    fn two_team_example_team_two_paths() {
        let inst = fixtures::two_team_example();
        let team = inst.teams[1].clone();
        let paths = solve_one(&inst.graph, &team, 3).unwrap();
        let single = TapfInstance::new(inst.graph.clone(), vec![team]);
        let sol = Solution::new(vec![paths]);
        assert_eq!(validate_solution(&single, &sol), Ok(()));
        assert!(sol.team_cost(0) <= 3);
    }

    #[test]
    fn short_flow_is_infeasible() {
        let inst = fixtures::two_team_example();
        let err = solve_one(&inst.graph, &inst.teams[1], 1).unwrap_err();
        assert!(matches!(err, NetworkError::InfeasibleAtHorizon { needed: 2, .. }));
        assert!(err.to_string().contains("infeasible at this horizon"));
    }

    #[test]
    fn spread_and_funnel_presence() {
        // 0 - 1 - 2 - 3; two agents leave 0 one step apart, both absorbed at 3
        let g = fixtures::path_graph(4);
        let team = Team::new(vec![0, 0], vec![3, 3]).with_flags(TeamFlags {
            shared_start_spread: true,
            funnel_target: true,
            ..Default::default()
        });
        let paths = solve_one(&g, &team, 5).unwrap();
        assert_eq!(paths[0].first_present(), Some((0, 0)));
        assert_eq!(paths[1].first_present(), Some((1, 0)));
        assert!(paths.iter().all(|p| p.is_absorbed()));
        let inst = TapfInstance::new(g.clone(), vec![team.clone()]);
        let sol = Solution::new(vec![paths]);
        assert_eq!(validate_solution(&inst, &sol), Ok(()));
        assert_eq!(sol.team_cost(0), 4);
        // one step short of letting the second agent through
        let net = build_network(&NetworkRequest {
            graph: &g,
            team_id: 0,
            team: &team,
            horizon: 3,
            constraints: &[],
            bias: None,
            options: NetworkOptions::default(),
        })
        .unwrap();
        assert_eq!(max_flow(&net).value, 1);
    }
}
