//! Paths, solutions, team costs and the solution validator.
//!
//! A path stores one entry per time step. An entry is `None` while the agent
//! is off the grid: before it departs a shared start (spread teams) or after
//! it has been absorbed at a funnel target. Reading a path past its end
//! repeats its last entry, so agents stay where they finished.
//!
//! Text format: one line per agent, `agent <team>.<index>: v0 v1 ...`, with
//! `-` for off-grid steps.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::error::ParseError;
use crate::graph::VertexId;
use crate::instance::{AgentRef, TapfInstance, TeamId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    steps: Vec<Option<VertexId>>,
}

impl Path {
    pub fn new(vertices: Vec<VertexId>) -> Self {
        Path {
            steps: vertices.into_iter().map(Some).collect(),
        }
    }

    pub fn with_presence(steps: Vec<Option<VertexId>>) -> Self {
        Path { steps }
    }

    pub fn steps(&self) -> &[Option<VertexId>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Last time step stored explicitly.
    pub fn horizon(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    /// Position at time `t`; past the end the final entry repeats.
    pub fn at(&self, t: usize) -> Option<VertexId> {
        match self.steps.get(t) {
            Some(&s) => s,
            None => self.steps.last().copied().flatten(),
        }
    }

    pub fn first_present(&self) -> Option<(usize, VertexId)> {
        self.steps
            .iter()
            .enumerate()
            .find_map(|(t, s)| s.map(|v| (t, v)))
    }

    pub fn last_present(&self) -> Option<(usize, VertexId)> {
        self.steps
            .iter()
            .enumerate()
            .rev()
            .find_map(|(t, s)| s.map(|v| (t, v)))
    }

    /// True when the agent leaves the grid for good before the path ends.
    pub fn is_absorbed(&self) -> bool {
        matches!(self.steps.last(), Some(None)) && self.last_present().is_some()
    }

    /// The vertex the agent finishes at (its assigned target).
    pub fn final_vertex(&self) -> Option<VertexId> {
        self.last_present().map(|(_, v)| v)
    }

    pub fn pad_to(&mut self, horizon: usize) {
        if let Some(&last) = self.steps.last() {
            while self.steps.len() < horizon + 1 {
                self.steps.push(last);
            }
        }
    }

    pub fn truncate_to(&mut self, horizon: usize) {
        self.steps.truncate(horizon + 1);
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TeamCostError {
    #[error("path is empty")]
    Empty,
    #[error("path never settles at target {0}")]
    NeverSettles(VertexId),
}

/// Earliest time step from which the agent sits at `target` for good. An
/// absorbed agent (trailing off-grid steps) counts from the step it was
/// absorbed at, which must be `target`.
pub fn team_cost(path: &Path, target: VertexId) -> Result<usize, TeamCostError> {
    let (last_t, last_v) = path.last_present().ok_or(TeamCostError::Empty)?;
    if last_v != target {
        return Err(TeamCostError::NeverSettles(target));
    }
    if path.is_absorbed() {
        return Ok(last_t);
    }
    let steps = path.steps();
    let mut t = steps.len() - 1;
    while t > 0 && steps[t - 1] == Some(target) {
        t -= 1;
    }
    Ok(t)
}

/// Time step at which an agent finished, using its own final vertex.
pub fn agent_cost(path: &Path) -> usize {
    path.final_vertex()
        .and_then(|g| team_cost(path, g).ok())
        .unwrap_or(0)
}

/// Paths for every agent, grouped by team in instance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub paths: Vec<Vec<Path>>,
}

impl Solution {
    pub fn new(paths: Vec<Vec<Path>>) -> Self {
        Solution { paths }
    }

    pub fn path(&self, agent: AgentRef) -> &Path {
        &self.paths[agent.team][agent.index]
    }

    pub fn agents(&self) -> impl Iterator<Item = (AgentRef, &Path)> + '_ {
        self.paths.iter().enumerate().flat_map(|(team, ps)| {
            ps.iter()
                .enumerate()
                .map(move |(index, p)| (AgentRef { team, index }, p))
        })
    }

    /// Longest stored horizon across all paths.
    pub fn horizon(&self) -> usize {
        self.agents().map(|(_, p)| p.horizon()).max().unwrap_or(0)
    }

    pub fn is_ragged(&self) -> bool {
        let mut lens = self.agents().map(|(_, p)| p.len());
        match lens.next() {
            Some(first) => lens.any(|l| l != first),
            None => false,
        }
    }

    pub fn team_cost(&self, team: TeamId) -> usize {
        self.paths[team].iter().map(agent_cost).max().unwrap_or(0)
    }

    pub fn team_costs(&self) -> Vec<usize> {
        (0..self.paths.len()).map(|i| self.team_cost(i)).collect()
    }

    pub fn makespan(&self) -> usize {
        self.team_costs().into_iter().max().unwrap_or(0)
    }

    /// Pads every path to a common horizon.
    pub fn pad_to(&mut self, horizon: usize) {
        for p in self.paths.iter_mut().flatten() {
            p.pad_to(horizon);
        }
    }

    /// Pads or trims every path to the makespan.
    pub fn normalize(&mut self) {
        let m = self.makespan();
        for p in self.paths.iter_mut().flatten() {
            p.pad_to(m);
            p.truncate_to(m);
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (agent, path) in self.agents() {
            let _ = write!(s, "agent {agent}:");
            for step in path.steps() {
                match step {
                    Some(v) => {
                        let _ = write!(s, " {v}");
                    }
                    None => s.push_str(" -"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut teams: Vec<Vec<Path>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (head, body) = line
                .split_once(':')
                .ok_or_else(|| ParseError::new(line_no, "expected 'agent <team>.<index>: ...'"))?;
            let id = head
                .strip_prefix("agent")
                .map(str::trim)
                .ok_or_else(|| ParseError::new(line_no, "expected 'agent'"))?;
            let (team, index) = id
                .split_once('.')
                .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
                .ok_or_else(|| ParseError::new(line_no, format!("bad agent id '{id}'")))?;
            let mut steps = Vec::new();
            for w in body.split_whitespace() {
                if w == "-" {
                    steps.push(None);
                } else {
                    let v = w
                        .parse()
                        .map_err(|_| ParseError::new(line_no, format!("bad vertex '{w}'")))?;
                    steps.push(Some(v));
                }
            }
            if steps.is_empty() {
                return Err(ParseError::new(line_no, "agent path is empty"));
            }
            if team == teams.len() && index == 0 {
                teams.push(Vec::new());
            }
            let team_count = teams.len();
            match teams.get_mut(team) {
                Some(list) if team + 1 == team_count && list.len() == index => {
                    list.push(Path::with_presence(steps))
                }
                _ => {
                    return Err(ParseError::new(
                        line_no,
                        format!("agent {team}.{index} out of order"),
                    ))
                }
            }
        }
        Ok(Solution { paths: teams })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionViolation {
    RaggedHorizon,
    AgentCount { team: TeamId, expected: usize, found: usize },
    TeamCount { expected: usize, found: usize },
    /// Off-grid steps in a place the team's flags do not allow.
    PresenceGap { agent: AgentRef },
    WrongStart { agent: AgentRef, expected: VertexId, found: Option<VertexId> },
    BadDeparture { agent: AgentRef, t: usize },
    NotAtTarget { agent: AgentRef, vertex: VertexId },
    TargetOveruse { team: TeamId, target: VertexId },
    TargetNotCovered { team: TeamId, target: VertexId },
    IllegalMove { agent: AgentRef, t: usize, from: VertexId, to: VertexId },
    VertexCollision { a: AgentRef, b: AgentRef, vertex: VertexId, t: usize },
    EdgeCollision { a: AgentRef, b: AgentRef, from: VertexId, to: VertexId, t: usize },
}

impl fmt::Display for SolutionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SolutionViolation::*;
        match self {
            RaggedHorizon => write!(f, "ragged horizon: paths have different lengths"),
            AgentCount {
                team,
                expected,
                found,
            } => write!(f, "team {team} has {found} paths, expected {expected}"),
            TeamCount { expected, found } => {
                write!(f, "solution has {found} teams, expected {expected}")
            }
            PresenceGap { agent } => write!(f, "agent {agent}: disallowed off-grid steps"),
            WrongStart {
                agent,
                expected,
                found,
            } => match found {
                Some(v) => write!(f, "agent {agent}: starts at {v}, expected {expected}"),
                None => write!(f, "agent {agent}: never appears, expected start {expected}"),
            },
            BadDeparture { agent, t } => {
                write!(f, "agent {agent}: departure at t={t} outside its release window")
            }
            NotAtTarget { agent, vertex } => {
                write!(f, "agent {agent}: ends at {vertex}, not a target of its team")
            }
            TargetOveruse { team, target } => {
                write!(f, "team {team}: target {target} used by too many agents")
            }
            TargetNotCovered { team, target } => {
                write!(f, "team {team}: target {target} not covered")
            }
            IllegalMove { agent, t, from, to } => {
                write!(f, "agent {agent}: illegal move {from}->{to} at t={t}")
            }
            VertexCollision { a, b, vertex, t } => {
                write!(f, "vertex collision: agents {a} and {b} at {vertex}, t={t}")
            }
            EdgeCollision { a, b, from, to, t } => write!(
                f,
                "edge collision: agents {a} ({from}->{to}) and {b} ({to}->{from}) at t={t}"
            ),
        }
    }
}

/// Checks start vertices, target coverage, move legality, vertex collisions
/// and swap collisions. Returns every violation found.
pub fn validate_solution(
    instance: &TapfInstance,
    solution: &Solution,
) -> Result<(), Vec<SolutionViolation>> {
    use SolutionViolation::*;
    let mut out = Vec::new();
    if solution.paths.len() != instance.teams.len() {
        out.push(TeamCount {
            expected: instance.teams.len(),
            found: solution.paths.len(),
        });
        return Err(out);
    }
    for (i, team) in instance.teams.iter().enumerate() {
        if solution.paths[i].len() != team.size() {
            out.push(AgentCount {
                team: i,
                expected: team.size(),
                found: solution.paths[i].len(),
            });
        }
    }
    if !out.is_empty() {
        return Err(out);
    }
    if solution.is_ragged() {
        out.push(RaggedHorizon);
        return Err(out);
    }
    let horizon = solution.horizon();
    let graph = &instance.graph;

    for (i, team) in instance.teams.iter().enumerate() {
        let release: HashMap<VertexId, usize> = team.start_slots().into_iter().collect();
        let mut used: BTreeMap<VertexId, usize> = BTreeMap::new();
        for (j, path) in solution.paths[i].iter().enumerate() {
            let agent = AgentRef { team: i, index: j };
            let steps = path.steps();
            // Presence must be one contiguous block.
            let Some((first_t, first_v)) = path.first_present() else {
                out.push(WrongStart {
                    agent,
                    expected: team.starts[j],
                    found: None,
                });
                continue;
            };
            let (last_t, last_v) = path.last_present().expect("present at least once");
            let contiguous = steps[first_t..=last_t].iter().all(Option::is_some);
            let leading_ok = first_t == 0 || team.flags.shared_start_spread;
            let trailing_ok = last_t == horizon || team.flags.funnel_target;
            if !contiguous || !leading_ok || !trailing_ok {
                out.push(PresenceGap { agent });
            }
            if vertex_out_of_range(graph.vertex_count(), steps) {
                out.push(PresenceGap { agent });
                continue;
            }
            // condition 1
            if first_v != team.starts[j] {
                out.push(WrongStart {
                    agent,
                    expected: team.starts[j],
                    found: Some(first_v),
                });
            }
            // agents sharing a start leave inside its release window; distinct
            // departure times follow from the vertex-collision check below
            if team.flags.shared_start_spread {
                let window = release.get(&team.starts[j]).copied().unwrap_or(1);
                if first_t >= window {
                    out.push(BadDeparture { agent, t: first_t });
                }
            }
            // condition 2
            if !team.targets.contains(&last_v) {
                out.push(NotAtTarget {
                    agent,
                    vertex: last_v,
                });
            } else {
                *used.entry(last_v).or_default() += 1;
            }
            // condition 3
            for t in first_t..last_t {
                let (a, b) = (steps[t].unwrap(), steps[t + 1].unwrap());
                if a != b && !graph.has_edge(a, b) {
                    out.push(IllegalMove {
                        agent,
                        t,
                        from: a,
                        to: b,
                    });
                }
            }
        }
        let slots: BTreeMap<VertexId, usize> = team.target_slots().into_iter().collect();
        for (&g, &n) in &used {
            if n > slots.get(&g).copied().unwrap_or(0) {
                out.push(TargetOveruse { team: i, target: g });
            }
        }
        if !team.flags.surplus_targets {
            for (&g, &cap) in &slots {
                if used.get(&g).copied().unwrap_or(0) < cap {
                    out.push(TargetNotCovered { team: i, target: g });
                }
            }
        }
    }

    // conditions 4 and 5, over every pair of agents
    let agents: Vec<(AgentRef, &Path)> = solution.agents().collect();
    for t in 0..=horizon {
        let mut at: HashMap<VertexId, AgentRef> = HashMap::new();
        for &(a, p) in &agents {
            if let Some(v) = p.steps()[t] {
                if let Some(&b) = at.get(&v) {
                    out.push(VertexCollision {
                        a: b,
                        b: a,
                        vertex: v,
                        t,
                    });
                } else {
                    at.insert(v, a);
                }
            }
        }
        if t == horizon {
            break;
        }
        for &(a, p) in &agents {
            let (Some(u), Some(v)) = (p.steps()[t], p.steps()[t + 1]) else {
                continue;
            };
            if u == v {
                continue;
            }
            if let Some(&b) = at.get(&v) {
                if a < b && solution.path(b).steps()[t + 1] == Some(u) {
                    out.push(EdgeCollision {
                        a,
                        b,
                        from: u,
                        to: v,
                        t,
                    });
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn vertex_out_of_range(n: usize, steps: &[Option<VertexId>]) -> bool {
    steps.iter().flatten().any(|&v| v >= n)
}
