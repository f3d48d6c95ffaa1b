//! Single-team planning: the smallest horizon at which the team's network
//! carries one unit per agent, found by trying horizons in increasing order.

use std::time::Instant;

use crate::collision::Constraint;
use crate::flow::{
    build_network, extract_paths, max_flow_until, min_cost_max_flow_until, BiasTable,
    NetworkOptions, NetworkRequest,
};
use crate::graph::{Graph, UNREACHABLE};
use crate::instance::{Team, TeamId};
use crate::solution::{agent_cost, Path};

#[derive(Debug, Clone, Copy)]
pub struct LowLevelRequest<'a> {
    pub graph: &'a Graph,
    pub team_id: TeamId,
    pub team: &'a Team,
    /// Constraints of the search node that belong to this team.
    pub constraints: &'a [Constraint],
    /// Occupancy of the other teams; ignored when `weighted` is false.
    pub bias: Option<&'a BiasTable>,
    pub start_t: usize,
    pub max_t: usize,
    /// Min-cost max-flow with bias weights when true, plain max-flow otherwise.
    pub weighted: bool,
    pub prune: bool,
    pub deadline: Option<Instant>,
    /// Re-solve every weighted network as a plain max-flow and count value
    /// differences in [`PlanStats::bias_mismatches`].
    pub check_bias: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamPlan {
    /// One path per agent, all of length `horizon + 1`.
    pub paths: Vec<Path>,
    /// Largest arrival time over the team's agents; at most `horizon`.
    pub cost: usize,
    pub horizon: usize,
    /// Total bias weight of the chosen flow.
    pub flow_cost: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanOutcome {
    Planned(TeamPlan),
    /// No horizon works, proven.
    Infeasible,
    /// Nothing found up to `max_t`.
    HorizonCap,
    TimedOut,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlanStats {
    pub flow_solves: usize,
    pub survival_checks: usize,
    pub augmentations: usize,
    /// Largest augmentation count of a single solve.
    pub max_augmentations: usize,
    pub bias_checks: usize,
    pub bias_mismatches: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanResult {
    pub outcome: PlanOutcome,
    pub stats: PlanStats,
}

/// Horizon below which the team's network cannot carry all agents: each
/// agent needs to reach some target, and each target must be reached unless
/// the team has surplus targets. `None` when an agent cannot reach any
/// target at all.
pub fn horizon_lower_bound(graph: &Graph, team: &Team) -> Option<usize> {
    let departures = team.departure_times();
    let targets: Vec<usize> = team.target_slots().iter().map(|&(g, _)| g).collect();
    if team.size() == 0 {
        return Some(0);
    }
    let to_target = graph.distances_from(targets.iter().copied());
    let mut lb = 0usize;
    for (j, &s) in team.starts.iter().enumerate() {
        if to_target[s] == UNREACHABLE {
            return None;
        }
        lb = lb.max(departures[j] + to_target[s] as usize);
    }
    if !team.flags.surplus_targets {
        for &g in &targets {
            let d = graph.distances_from([g]);
            let best = team
                .starts
                .iter()
                .zip(&departures)
                .filter(|(&s, _)| d[s] != UNREACHABLE)
                .map(|(&s, &dep)| dep + d[s] as usize)
                .min()?;
            lb = lb.max(best);
        }
    }
    Some(lb)
}

/// Plans the team for the smallest horizon `T >= start_t` whose network
/// carries every agent, returning the extracted paths padded to `T`.
///
/// Once `T` passes the latest constraint and the last departure, one extra
/// max-flow checks whether the team can be alive at all at that time; if
/// not, no horizon works and the team is reported infeasible.
pub fn plan_team(req: &LowLevelRequest<'_>) -> PlanResult {
    let mut stats = PlanStats::default();
    let done = |outcome, stats| PlanResult { outcome, stats };
    let Some(lb) = horizon_lower_bound(req.graph, req.team) else {
        return done(PlanOutcome::Infeasible, stats);
    };
    let latest = req
        .constraints
        .iter()
        .map(|c| c.time())
        .chain(req.team.departure_times())
        .max()
        .unwrap_or(0);
    let survival_horizon = latest + 1;
    let k = req.team.size();
    let options = NetworkOptions {
        max_horizon: req.max_t,
        prune: req.prune,
        any_vertex_sink: false,
    };
    let mut t = req.start_t.max(lb);
    let mut survival_checked = false;
    while t <= req.max_t {
        if req.deadline.is_some_and(|d| Instant::now() >= d) {
            return done(PlanOutcome::TimedOut, stats);
        }
        if !survival_checked && t >= survival_horizon {
            survival_checked = true;
            stats.survival_checks += 1;
            let net = build_network(&NetworkRequest {
                graph: req.graph,
                team_id: req.team_id,
                team: req.team,
                horizon: survival_horizon,
                constraints: req.constraints,
                bias: None,
                options: NetworkOptions {
                    max_horizon: usize::MAX,
                    prune: false,
                    any_vertex_sink: true,
                },
            })
            .expect("constraints were checked by the caller");
            match max_flow_until(&net, req.deadline) {
                Ok(r) if r.value < k => return done(PlanOutcome::Infeasible, stats),
                Ok(_) => {}
                Err(_) => return done(PlanOutcome::TimedOut, stats),
            }
        }
        let bias = if req.weighted { req.bias } else { None };
        let net = build_network(&NetworkRequest {
            graph: req.graph,
            team_id: req.team_id,
            team: req.team,
            horizon: t,
            constraints: req.constraints,
            bias,
            options,
        })
        .expect("constraints were checked by the caller");
        let solved = if req.weighted {
            min_cost_max_flow_until(&net, req.deadline)
        } else {
            max_flow_until(&net, req.deadline)
        };
        let Ok(flow) = solved else {
            return done(PlanOutcome::TimedOut, stats);
        };
        stats.flow_solves += 1;
        if req.check_bias && req.weighted {
            stats.bias_checks += 1;
            match max_flow_until(&net, req.deadline) {
                Ok(plain) if plain.value != flow.value => stats.bias_mismatches += 1,
                Ok(_) => {}
                Err(_) => return done(PlanOutcome::TimedOut, stats),
            }
        }
        stats.augmentations += flow.augmentations;
        stats.max_augmentations = stats.max_augmentations.max(flow.augmentations);
        if flow.value >= k {
            let paths = extract_paths(&net, &flow, req.team).expect("flow carries every agent");
            let cost = paths.iter().map(agent_cost).max().unwrap_or(0);
            return done(
                PlanOutcome::Planned(TeamPlan {
                    paths,
                    cost,
                    horizon: t,
                    flow_cost: flow.cost,
                }),
                stats,
            );
        }
        t += 1;
    }
    done(PlanOutcome::HorizonCap, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::TapfInstance;
    use crate::solution::{validate_solution, Solution};

    fn request<'a>(graph: &'a Graph, team: &'a Team, constraints: &'a [Constraint]) -> LowLevelRequest<'a> {
        LowLevelRequest {
            graph,
            team_id: 0,
            team,
            constraints,
            bias: None,
            start_t: 0,
            max_t: 64,
            weighted: true,
            prune: true,
            deadline: None,
            check_bias: true,
        }
    }

    fn planned(r: PlanResult) -> TeamPlan {
        match r.outcome {
            PlanOutcome::Planned(p) => p,
            other => panic!("expected a plan, got {other:?}"),
        }
    }

    #[test]
    fn single_agent_is_shortest_path() {
        let g = Graph::grid(5, 5, vec![false; 25]).unwrap();
        let team = Team::new(vec![0], vec![24]);
        let plan = planned(plan_team(&request(&g, &team, &[])));
        assert_eq!(plan.cost, 8);
        assert_eq!(plan.horizon, 8);
    }

    #[test]
    fn blocked_target_inserts_a_wait() {
        let g = fixtures::path_graph(4);
        let team = Team::new(vec![0], vec![3]);
        let c = [Constraint::Vertex { team: 0, vertex: 3, t: 3 }];
        let plan = planned(plan_team(&request(&g, &team, &c)));
        assert_eq!(plan.cost, 4);
        assert!(!c[0].violated_by(&plan.paths[0]));
    }

    #[test]
    fn swapped_targets_cost_nothing() {
        // anonymous agents at both ends of p-x-q already sit on the targets
        let g = fixtures::path_graph(3);
        let team = Team::new(vec![0, 2], vec![2, 0]);
        let plan = planned(plan_team(&request(&g, &team, &[])));
        assert_eq!(plan.cost, 0);
    }

    #[test]
    fn start_t_pads_the_horizon() {
        let inst = fixtures::single_edge();
        let mut req = request(&inst.graph, &inst.teams[0], &[]);
        req.start_t = 3;
        let plan = planned(plan_team(&req));
        assert_eq!((plan.cost, plan.horizon), (1, 3));
        assert_eq!(plan.paths[0].len(), 4);
    }

    #[test]
    fn trapped_agent_is_proven_infeasible() {
        // the only agent must leave its start at t=1 but every move is banned
        let g = fixtures::path_graph(2);
        let team = Team::new(vec![0], vec![1]);
        let c = [
            Constraint::Vertex { team: 0, vertex: 0, t: 1 },
            Constraint::Edge { team: 0, from: 0, to: 1, t: 0 },
        ];
        let r = plan_team(&request(&g, &team, &c));
        assert_eq!(r.outcome, PlanOutcome::Infeasible);
        assert_eq!(r.stats.survival_checks, 1);
    }

    #[test]
    fn cap_is_not_infeasibility() {
        let g = Graph::grid(5, 5, vec![false; 25]).unwrap();
        let team = Team::new(vec![0], vec![24]);
        let mut req = request(&g, &team, &[]);
        req.max_t = 5;
        assert_eq!(plan_team(&req).outcome, PlanOutcome::HorizonCap);
    }

    #[test]
    fn unweighted_matches_weighted_cost() {
        let inst = fixtures::two_team_example();
        for team in &inst.teams {
            let mut req = request(&inst.graph, team, &[]);
            let a = planned(plan_team(&req)).cost;
            req.weighted = false;
            let b = planned(plan_team(&req)).cost;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn plans_validate_for_the_team() {
        let inst = fixtures::two_team_example();
        for (i, team) in inst.teams.iter().enumerate() {
            let plan = planned(plan_team(&request(&inst.graph, team, &[])));
            let single = TapfInstance::new(inst.graph.clone(), vec![team.clone()]);
            assert_eq!(
                validate_solution(&single, &Solution::new(vec![plan.paths])),
                Ok(()),
                "team {i}"
            );
        }
    }

    #[test]
    fn bias_check_counts_weighted_solves() {
        let inst = fixtures::two_team_example();
        let bias = BiasTable::from_paths(&fixtures::two_team_solution().paths[0]);
        let mut req = request(&inst.graph, &inst.teams[1], &[]);
        req.team_id = 1;
        req.bias = Some(&bias);
        let r = plan_team(&req);
        assert_eq!(r.stats.bias_checks, r.stats.flow_solves);
        assert_eq!(r.stats.bias_mismatches, 0);
    }

    #[test]
    fn unreachable_target_is_infeasible() {
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        let team = Team::new(vec![0], vec![2]);
        assert_eq!(plan_team(&request(&g, &team, &[])).outcome, PlanOutcome::Infeasible);
    }
}
