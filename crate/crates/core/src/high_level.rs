//! Best-first search over constraint sets with teams as meta-agents.
//!
//! Every search node holds a constraint set and one plan per team. Nodes are
//! expanded in order of (key, number of colliding teams, creation order); the
//! first collision-free node popped is an optimal solution. Expanding a node
//! picks its earliest collision and creates two children, each forbidding the
//! collision for one of the two teams and replanning only that team.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collision::{find_collisions, Collision, Constraint};
use crate::error::SolveError;
use crate::flow::BiasTable;
use crate::instance::{TapfInstance, Team, TeamId};
use crate::low_level::{plan_team, LowLevelRequest, PlanOutcome, PlanStats, TeamPlan};
use crate::solution::{Path, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveConfig {
    /// Bias each team's flow against the other teams' paths. Off gives the
    /// unweighted baseline, which uses plain max-flow.
    pub weighted: bool,
    pub time_limit: Option<Duration>,
    /// Horizon cap for every team. `None` uses [`theoretical_horizon_bound`].
    pub max_t: Option<usize>,
    /// Plan the two children of a node on separate threads.
    pub parallel_children: bool,
    /// Skip nodes whose constraint set was already generated.
    pub dedupe: bool,
    /// Prune time-expanded networks to the reachable window.
    pub prune: bool,
    /// Record popped keys and generated children in the report.
    pub trace: bool,
    /// Compare every weighted flow value with a plain max-flow on the same
    /// network; see [`SolveStats::bias_mismatches`].
    pub check_bias: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            weighted: true,
            time_limit: None,
            max_t: None,
            parallel_children: true,
            dedupe: true,
            prune: true,
            trace: false,
            check_bias: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Solution,
    NoSolution,
    Timeout,
    HorizonCap,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Solution => "solution",
            Outcome::NoSolution => "no-solution",
            Outcome::Timeout => "timeout",
            Outcome::HorizonCap => "horizon-cap",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes_generated: usize,
    pub nodes_expanded: usize,
    pub low_level_calls: usize,
    pub flow_solves: usize,
    pub survival_checks: usize,
    pub duplicates_skipped: usize,
    pub bias_checks: usize,
    /// Weighted solves whose flow value differed from the plain max-flow.
    pub bias_mismatches: usize,
    /// Key of the root node, a lower bound on the optimal makespan.
    pub root_key: Option<usize>,
    pub wall_time: Duration,
}

impl SolveStats {
    fn absorb(&mut self, s: &PlanStats) {
        self.low_level_calls += 1;
        self.flow_solves += s.flow_solves;
        self.survival_checks += s.survival_checks;
        self.bias_checks += s.bias_checks;
        self.bias_mismatches += s.bias_mismatches;
    }
}

/// A child generated during search, for instrumentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChildRecord {
    pub parent: usize,
    pub parent_key: usize,
    pub constraint: Constraint,
    /// `None` when the child was dropped (replanning failed).
    pub key: Option<usize>,
    /// Whether some agent of the constrained team broke the constraint in
    /// the parent's plan.
    pub violated_by_parent: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchTrace {
    /// Key of every popped node, in pop order.
    pub popped_keys: Vec<usize>,
    pub children: Vec<ChildRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: Outcome,
    /// Present iff `outcome` is [`Outcome::Solution`]; every path has the
    /// makespan as its horizon.
    pub solution: Option<Solution>,
    pub stats: SolveStats,
    /// The horizon cap that was in force.
    pub max_t: usize,
    pub trace: Option<SearchTrace>,
}

impl SolveReport {
    pub fn makespan(&self) -> Option<usize> {
        self.solution.as_ref().map(Solution::makespan)
    }
}

/// Makespan bound for complete search: `|V|^3`, tightened for instances
/// without relaxed teams to the number of joint configurations minus one
/// (agents of a team are interchangeable, so configurations count sets, not
/// tuples). A shortest solution never repeats a configuration.
pub fn theoretical_horizon_bound(instance: &TapfInstance) -> usize {
    let n = instance.graph.vertex_count() as u128;
    let cube = n.saturating_mul(n).saturating_mul(n);
    let mut bound = cube;
    if !instance.has_relaxed_teams() {
        let mut configs: u128 = 1;
        let mut free = n;
        for team in &instance.teams {
            let k = team.size() as u128;
            configs = configs.saturating_mul(binomial(free, k));
            free = free.saturating_sub(k);
        }
        bound = bound.min(configs.saturating_sub(1));
    }
    bound.min(usize::MAX as u128) as usize
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(n - i) {
            Some(x) => x / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

struct Node {
    id: usize,
    parent: Option<usize>,
    /// The constraint added by this node; the full set follows parent links.
    constraint: Option<Constraint>,
    plans: Vec<Arc<Vec<Path>>>,
    key: usize,
    collision: Option<Collision>,
    colliding_teams: usize,
}

struct Search<'a> {
    instance: &'a TapfInstance,
    config: SolveConfig,
    max_t: usize,
    deadline: Option<Instant>,
    nodes: Vec<Node>,
    stats: SolveStats,
    trace: Option<SearchTrace>,
}

enum ChildPlan {
    Planned(TeamPlan),
    Dropped { capped: bool },
    TimedOut,
}

impl<'a> Search<'a> {
    fn constraints_of(&self, mut id: usize) -> Vec<Constraint> {
        let mut out = Vec::new();
        loop {
            let node = &self.nodes[id];
            if let Some(c) = node.constraint {
                out.push(c);
            }
            match node.parent {
                Some(p) => id = p,
                None => break,
            }
        }
        out.sort_unstable();
        out
    }

    fn plan(
        &self,
        team_id: TeamId,
        constraints: &[Constraint],
        bias: Option<&BiasTable>,
        start_t: usize,
    ) -> (PlanOutcome, PlanStats) {
        let r = plan_team(&LowLevelRequest {
            graph: &self.instance.graph,
            team_id,
            team: &self.instance.teams[team_id],
            constraints,
            bias,
            start_t,
            max_t: self.max_t,
            weighted: self.config.weighted,
            prune: self.config.prune,
            deadline: self.deadline,
            check_bias: self.config.check_bias,
        });
        (r.outcome, r.stats)
    }

    fn make_node(
        &mut self,
        parent: Option<usize>,
        constraint: Option<Constraint>,
        plans: Vec<Arc<Vec<Path>>>,
        parent_key: usize,
    ) -> usize {
        let solution = Solution::new(plans.iter().map(|p| (**p).clone()).collect());
        let report = find_collisions(&solution).expect("low level never plans within-team collisions");
        let key = solution.makespan().max(parent_key);
        let id = self.nodes.len();
        self.nodes.push(Node {
            id,
            parent,
            constraint,
            plans,
            key,
            collision: report.earliest().copied(),
            colliding_teams: report.colliding_teams,
        });
        self.stats.nodes_generated += 1;
        id
    }
}

/// Runs the search on `instance`.
pub fn solve(instance: &TapfInstance, config: &SolveConfig) -> Result<SolveReport, SolveError> {
    let violations = instance.validate();
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(SolveError::InvalidInstance(text.join("; ")));
    }
    let started = Instant::now();
    let bound = theoretical_horizon_bound(instance);
    let max_t = config.max_t.unwrap_or(bound);
    let complete = max_t >= bound;
    let mut search = Search {
        instance,
        config: *config,
        max_t,
        deadline: config.time_limit.map(|d| started + d),
        nodes: Vec::new(),
        stats: SolveStats::default(),
        trace: config.trace.then(SearchTrace::default),
    };
    let finish = |search: Search<'_>, outcome: Outcome, solution: Option<Solution>| {
        let mut stats = search.stats;
        stats.wall_time = started.elapsed();
        SolveReport {
            outcome,
            solution,
            stats,
            max_t,
            trace: search.trace,
        }
    };
    let cap_outcome = if complete {
        Outcome::NoSolution
    } else {
        Outcome::HorizonCap
    };

    // root: plan the teams one by one, each biased against those before it
    let mut root_plans: Vec<Arc<Vec<Path>>> = Vec::with_capacity(instance.teams.len());
    for i in 0..instance.teams.len() {
        let bias = BiasTable::from_paths(root_plans.iter().flat_map(|p| p.iter()));
        let (outcome, stats) = search.plan(i, &[], Some(&bias), 0);
        search.stats.absorb(&stats);
        match outcome {
            PlanOutcome::Planned(p) => root_plans.push(Arc::new(p.paths)),
            PlanOutcome::Infeasible => return Ok(finish(search, Outcome::NoSolution, None)),
            PlanOutcome::HorizonCap => return Ok(finish(search, cap_outcome, None)),
            PlanOutcome::TimedOut => return Ok(finish(search, Outcome::Timeout, None)),
        }
    }
    let root = search.make_node(None, None, root_plans, 0);
    search.stats.root_key = Some(search.nodes[root].key);

    let mut open: BinaryHeap<Reverse<(usize, usize, usize)>> = BinaryHeap::new();
    let push = |open: &mut BinaryHeap<_>, n: &Node| open.push(Reverse((n.key, n.colliding_teams, n.id)));
    push(&mut open, &search.nodes[root]);
    let mut seen: HashSet<Vec<Constraint>> = HashSet::new();
    seen.insert(Vec::new());
    let mut capped = false;

    while let Some(Reverse((key, _, id))) = open.pop() {
        if search.deadline.is_some_and(|d| Instant::now() >= d) {
            return Ok(finish(search, Outcome::Timeout, None));
        }
        if let Some(trace) = search.trace.as_mut() {
            trace.popped_keys.push(key);
        }
        let Some(collision) = search.nodes[id].collision else {
            let mut solution = Solution::new(
                search.nodes[id].plans.iter().map(|p| (**p).clone()).collect(),
            );
            let makespan = solution.makespan();
            solution.pad_to(solution.horizon().max(makespan));
            for team in solution.paths.iter_mut() {
                for p in team.iter_mut() {
                    p.truncate_to(makespan);
                }
            }
            return Ok(finish(search, Outcome::Solution, Some(solution)));
        };
        search.stats.nodes_expanded += 1;

        let parent_constraints = search.constraints_of(id);
        let mut jobs: Vec<(Constraint, Vec<Constraint>)> = Vec::with_capacity(2);
        for c in collision.constraints() {
            let mut set = parent_constraints.clone();
            let pos = set.binary_search(&c).unwrap_or_else(|p| p);
            set.insert(pos, c);
            if search.config.dedupe && !seen.insert(set.clone()) {
                search.stats.duplicates_skipped += 1;
                continue;
            }
            jobs.push((c, set));
        }

        let plan_child = |c: &Constraint, set: &[Constraint]| -> (ChildPlan, PlanStats) {
            let team = c.team();
            let own: Vec<Constraint> = set.iter().copied().filter(|x| x.team() == team).collect();
            let parent = &search.nodes[id];
            let bias = search.config.weighted.then(|| {
                BiasTable::from_paths(
                    parent
                        .plans
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != team)
                        .flat_map(|(_, p)| p.iter()),
                )
            });
            let (outcome, stats) = search.plan(team, &own, bias.as_ref(), parent.key);
            let child = match outcome {
                PlanOutcome::Planned(p) => ChildPlan::Planned(p),
                PlanOutcome::Infeasible => ChildPlan::Dropped { capped: false },
                PlanOutcome::HorizonCap => ChildPlan::Dropped { capped: true },
                PlanOutcome::TimedOut => ChildPlan::TimedOut,
            };
            (child, stats)
        };
        let results: Vec<(ChildPlan, PlanStats)> = match jobs.as_slice() {
            [(c0, s0), (c1, s1)] if search.config.parallel_children => {
                let (a, b) = rayon::join(|| plan_child(c0, s0), || plan_child(c1, s1));
                vec![a, b]
            }
            _ => jobs.iter().map(|(c, s)| plan_child(c, s)).collect(),
        };

        let parent_key = search.nodes[id].key;
        for ((c, _), (child, stats)) in jobs.into_iter().zip(results) {
            search.stats.absorb(&stats);
            let team = c.team();
            let violated = search.nodes[id].plans[team].iter().any(|p| c.violated_by(p));
            let mut record = ChildRecord {
                parent: id,
                parent_key,
                constraint: c,
                key: None,
                violated_by_parent: violated,
            };
            match child {
                ChildPlan::TimedOut => return Ok(finish(search, Outcome::Timeout, None)),
                ChildPlan::Dropped { capped: hit } => capped |= hit,
                ChildPlan::Planned(plan) => {
                    let mut plans = search.nodes[id].plans.clone();
                    plans[team] = Arc::new(plan.paths);
                    let child_id = search.make_node(Some(id), Some(c), plans, parent_key);
                    record.key = Some(search.nodes[child_id].key);
                    push(&mut open, &search.nodes[child_id]);
                }
            }
            if let Some(trace) = search.trace.as_mut() {
                trace.children.push(record);
            }
        }
    }
    let outcome = if capped { cap_outcome } else { Outcome::NoSolution };
    Ok(finish(search, outcome, None))
}

/// Fixes a random target for every agent (a seeded bijection per team) and
/// solves the result with one team per agent. The returned solution is
/// grouped like `instance`.
pub fn solve_as_mapf(
    instance: &TapfInstance,
    assignment_seed: u64,
    config: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    if instance.has_relaxed_teams() {
        return Err(SolveError::Unsupported(
            "fixed assignment needs teams without relaxation flags".into(),
        ));
    }
    let mapf = assign_randomly(instance, assignment_seed);
    let mut report = solve(&mapf, config)?;
    if let Some(sol) = report.solution.take() {
        let mut flat = sol.paths.into_iter().map(|mut t| t.pop().expect("singleton team"));
        let grouped = instance
            .teams
            .iter()
            .map(|t| flat.by_ref().take(t.size()).collect())
            .collect();
        report.solution = Some(Solution::new(grouped));
    }
    Ok(report)
}

/// The singleton-team instance used by [`solve_as_mapf`], teams in agent
/// order.
pub fn assign_randomly(instance: &TapfInstance, seed: u64) -> TapfInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut teams = Vec::with_capacity(instance.agent_count());
    for team in &instance.teams {
        let mut targets = team.targets.clone();
        targets.shuffle(&mut rng);
        for (&s, g) in team.starts.iter().zip(targets) {
            teams.push(Team::new(vec![s], vec![g]));
        }
    }
    TapfInstance::new(instance.graph.clone(), teams)
}
