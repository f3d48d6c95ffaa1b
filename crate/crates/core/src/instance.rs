//! TAPF instances: a graph plus teams of interchangeable agents, the
//! instance validator, and the plain-text instance format.
//!
//! Format (ASCII, one item per line, `#` starts a comment):
//!
//! ```text
//! grid <width> <height>
//! <height rows of '.' (free) and '@' (blocked)>
//! teams <K>
//! team <i>: starts <v...> targets <v...> [flags: <flag>...]
//! ```
//!
//! A general graph replaces the grid block with `vertices <n>` followed by
//! `edge <u> <v>` lines. Grid cells map to vertex ids row-major over free
//! cells. Team ids are 0-based and must appear in order.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use crate::error::ParseError;
use crate::graph::{Graph, VertexId};

pub type TeamId = usize;

/// Relaxations of the distinct-start / distinct-target / equal-size rules
/// used by warehouse-style instances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TeamFlags {
    /// Several agents share a start vertex and leave it one per time step.
    pub shared_start_spread: bool,
    /// Several agents end at one target vertex and are absorbed there one
    /// per time step.
    pub funnel_target: bool,
    /// The team may have more candidate targets than agents.
    pub surplus_targets: bool,
}

impl TeamFlags {
    pub fn is_plain(&self) -> bool {
        *self == TeamFlags::default()
    }

    fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.shared_start_spread {
            out.push("shared_start_spread");
        }
        if self.funnel_target {
            out.push("funnel_target");
        }
        if self.surplus_targets {
            out.push("surplus_targets");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Team {
    /// Start vertex of each agent, in agent order.
    pub starts: Vec<VertexId>,
    /// Target vertices. Repeated entries are only meaningful for funnel teams,
    /// where a repeat count is the number of agents absorbed at that vertex.
    pub targets: Vec<VertexId>,
    pub flags: TeamFlags,
}

impl Team {
    pub fn new(starts: Vec<VertexId>, targets: Vec<VertexId>) -> Self {
        Team {
            starts,
            targets,
            flags: TeamFlags::default(),
        }
    }

    pub fn with_flags(mut self, flags: TeamFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn size(&self) -> usize {
        self.starts.len()
    }

    /// Distinct target vertices with the number of agents each accepts.
    pub fn target_slots(&self) -> Vec<(VertexId, usize)> {
        let mut counts: BTreeMap<VertexId, usize> = BTreeMap::new();
        for &g in &self.targets {
            *counts.entry(g).or_default() += 1;
        }
        counts.into_iter().collect()
    }

    /// Departure time of each agent. Zero unless the team spreads a shared
    /// start, in which case agents sharing a start leave at 0, 1, 2, ... in
    /// index order.
    pub fn departure_times(&self) -> Vec<usize> {
        if !self.flags.shared_start_spread {
            return vec![0; self.starts.len()];
        }
        let mut seen: HashMap<VertexId, usize> = HashMap::new();
        self.starts
            .iter()
            .map(|&s| {
                let slot = seen.entry(s).or_default();
                let t = *slot;
                *slot += 1;
                t
            })
            .collect()
    }

    /// Distinct start vertices with the number of agents leaving from each.
    pub fn start_slots(&self) -> Vec<(VertexId, usize)> {
        let mut counts: BTreeMap<VertexId, usize> = BTreeMap::new();
        for &s in &self.starts {
            *counts.entry(s).or_default() += 1;
        }
        counts.into_iter().collect()
    }
}

/// Identifies agent `index` of team `team`; displayed as `team.index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentRef {
    pub team: TeamId,
    pub index: usize,
}

impl fmt::Display for AgentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.team, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TapfInstance {
    pub graph: Graph,
    pub teams: Vec<Team>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceViolation {
    NoTeams,
    EmptyTeam(TeamId),
    VertexOutOfRange { team: TeamId, vertex: VertexId },
    DuplicateStart(VertexId),
    DuplicateTarget(VertexId),
    CardinalityMismatch { team: TeamId, starts: usize, targets: usize },
    IncompatibleFlags(TeamId),
    Disconnected { team: TeamId, start: VertexId, target: VertexId },
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use InstanceViolation::*;
        match self {
            NoTeams => write!(f, "instance has no teams"),
            EmptyTeam(t) => write!(f, "team {t} has no agents"),
            VertexOutOfRange { team, vertex } => {
                write!(f, "team {team} references vertex {vertex} outside the graph")
            }
            DuplicateStart(v) => write!(f, "duplicate start at vertex {v}"),
            DuplicateTarget(v) => write!(f, "duplicate target at vertex {v}"),
            CardinalityMismatch {
                team,
                starts,
                targets,
            } => write!(
                f,
                "team cardinality mismatch: team {team} has {starts} starts and {targets} targets"
            ),
            IncompatibleFlags(t) => {
                write!(f, "team {t} combines funnel_target with surplus_targets")
            }
            Disconnected {
                team,
                start,
                target,
            } => write!(
                f,
                "team {team}: start {start} is not connected to target {target}"
            ),
        }
    }
}

impl TapfInstance {
    pub fn new(graph: Graph, teams: Vec<Team>) -> Self {
        TapfInstance { graph, teams }
    }

    pub fn agent_count(&self) -> usize {
        self.teams.iter().map(Team::size).sum()
    }

    pub fn team_count(&self) -> usize {
        self.teams.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentRef> + '_ {
        self.teams
            .iter()
            .enumerate()
            .flat_map(|(team, t)| (0..t.size()).map(move |index| AgentRef { team, index }))
    }

    pub fn has_relaxed_teams(&self) -> bool {
        self.teams.iter().any(|t| !t.flags.is_plain())
    }

    /// Checks every instance invariant; an empty list means the instance is
    /// valid.
    pub fn validate(&self) -> Vec<InstanceViolation> {
        let mut out = Vec::new();
        if self.teams.is_empty() {
            out.push(InstanceViolation::NoTeams);
        }
        let n = self.graph.vertex_count();
        let mut range_ok = true;
        for (i, team) in self.teams.iter().enumerate() {
            if team.starts.is_empty() {
                out.push(InstanceViolation::EmptyTeam(i));
            }
            for &v in team.starts.iter().chain(&team.targets) {
                if v >= n {
                    range_ok = false;
                    out.push(InstanceViolation::VertexOutOfRange { team: i, vertex: v });
                }
            }
            if team.flags.funnel_target && team.flags.surplus_targets {
                out.push(InstanceViolation::IncompatibleFlags(i));
            }
            let cardinality_ok = if team.flags.surplus_targets {
                team.targets.len() >= team.starts.len()
            } else {
                team.targets.len() == team.starts.len()
            };
            if !cardinality_ok {
                out.push(InstanceViolation::CardinalityMismatch {
                    team: i,
                    starts: team.starts.len(),
                    targets: team.targets.len(),
                });
            }
        }

        // Distinctness: a vertex may repeat only inside one relaxed team.
        let mut start_owner: BTreeMap<VertexId, TeamId> = BTreeMap::new();
        let mut target_owner: BTreeMap<VertexId, TeamId> = BTreeMap::new();
        let mut dup_starts = Vec::new();
        let mut dup_targets = Vec::new();
        for (i, team) in self.teams.iter().enumerate() {
            for &s in &team.starts {
                match start_owner.get(&s) {
                    None => {
                        start_owner.insert(s, i);
                    }
                    Some(&o) if o == i && team.flags.shared_start_spread => {}
                    Some(_) => dup_starts.push(s),
                }
            }
            for &g in &team.targets {
                match target_owner.get(&g) {
                    None => {
                        target_owner.insert(g, i);
                    }
                    Some(&o) if o == i && team.flags.funnel_target => {}
                    Some(_) => dup_targets.push(g),
                }
            }
        }
        dup_starts.sort_unstable();
        dup_starts.dedup();
        dup_targets.sort_unstable();
        dup_targets.dedup();
        out.extend(dup_starts.into_iter().map(InstanceViolation::DuplicateStart));
        out.extend(dup_targets.into_iter().map(InstanceViolation::DuplicateTarget));

        if range_ok {
            let comp = self.graph.components();
            for (i, team) in self.teams.iter().enumerate() {
                for &s in &team.starts {
                    for &g in &team.targets {
                        if comp[s] != comp[g] {
                            out.push(InstanceViolation::Disconnected {
                                team: i,
                                start: s,
                                target: g,
                            });
                        }
                    }
                }
            }
            out.dedup();
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self.graph.grid_meta() {
            Some(meta) => {
                let _ = writeln!(s, "grid {} {}", meta.width, meta.height);
                for y in 0..meta.height {
                    let row: String = (0..meta.width)
                        .map(|x| if meta.blocked[y * meta.width + x] { '@' } else { '.' })
                        .collect();
                    let _ = writeln!(s, "{row}");
                }
            }
            None => {
                let _ = writeln!(s, "vertices {}", self.graph.vertex_count());
                for &(u, v) in self.graph.edges() {
                    let _ = writeln!(s, "edge {u} {v}");
                }
            }
        }
        let _ = writeln!(s, "teams {}", self.teams.len());
        for (i, team) in self.teams.iter().enumerate() {
            let _ = write!(s, "team {i}: starts");
            for v in &team.starts {
                let _ = write!(s, " {v}");
            }
            s.push_str(" targets");
            for v in &team.targets {
                let _ = write!(s, " {v}");
            }
            let flags = team.flags.names();
            if !flags.is_empty() {
                let _ = write!(s, " flags: {}", flags.join(" "));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Parser::new(text).parse()
    }
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Parser { lines, pos: 0 }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        let last = self.lines.last().map_or(0, |l| l.0);
        let line = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| ParseError::new(last, format!("unexpected end of input, expected {what}")))?;
        self.pos += 1;
        Ok(line)
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<TapfInstance, ParseError> {
        let (lno, header) = self.next_line("'grid' or 'vertices'")?;
        let words: Vec<&str> = header.split_whitespace().collect();
        let graph = match words.as_slice() {
            ["grid", w, h] => {
                let w = num(lno, w)?;
                let h = num(lno, h)?;
                let mut blocked = Vec::with_capacity(w * h);
                for _ in 0..h {
                    let (rl, row) = self.next_line("grid row")?;
                    if row.chars().count() != w {
                        return Err(ParseError::new(rl, format!("grid row must have {w} cells")));
                    }
                    for c in row.chars() {
                        match c {
                            '.' => blocked.push(false),
                            '@' => blocked.push(true),
                            other => {
                                return Err(ParseError::new(rl, format!("bad grid cell '{other}'")))
                            }
                        }
                    }
                }
                Graph::grid(w, h, blocked).map_err(|e| ParseError::new(lno, e.to_string()))?
            }
            ["vertices", n] => {
                let n = num(lno, n)?;
                let mut edges = Vec::new();
                while let Some((el, line)) = self.peek() {
                    let w: Vec<&str> = line.split_whitespace().collect();
                    if w.first() != Some(&"edge") {
                        break;
                    }
                    self.pos += 1;
                    match w.as_slice() {
                        ["edge", u, v] => edges.push((num(el, u)?, num(el, v)?)),
                        _ => return Err(ParseError::new(el, "expected 'edge <u> <v>'")),
                    }
                }
                Graph::new(n, &edges).map_err(|e| ParseError::new(lno, e.to_string()))?
            }
            _ => return Err(ParseError::new(lno, "expected 'grid <w> <h>' or 'vertices <n>'")),
        };

        let (tl, teams_line) = self.next_line("'teams <K>'")?;
        let k = match teams_line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["teams", k] => num(tl, k)?,
            _ => return Err(ParseError::new(tl, "expected 'teams <K>'")),
        };
        let mut teams = Vec::with_capacity(k);
        for i in 0..k {
            let (l, line) = self.next_line("team line")?;
            teams.push(parse_team(l, line, i)?);
        }
        if let Some((l, _)) = self.peek() {
            return Err(ParseError::new(l, "trailing content after team list"));
        }
        Ok(TapfInstance { graph, teams })
    }
}

fn num(line: usize, s: &str) -> Result<usize, ParseError> {
    s.parse()
        .map_err(|_| ParseError::new(line, format!("expected a non-negative integer, got '{s}'")))
}

fn parse_team(line: usize, text: &str, expected: usize) -> Result<Team, ParseError> {
    let (head, body) = text
        .split_once(':')
        .ok_or_else(|| ParseError::new(line, "expected 'team <i>: ...'"))?;
    match head.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["team", i] if num(line, i)? == expected => {}
        ["team", i] => {
            return Err(ParseError::new(
                line,
                format!("team {i} out of order, expected team {expected}"),
            ))
        }
        _ => return Err(ParseError::new(line, "expected 'team <i>:'")),
    }
    let (body, flag_text) = match body.split_once("flags:") {
        Some((b, f)) => (b, Some(f)),
        None => (body, None),
    };
    let mut starts = Vec::new();
    let mut targets = Vec::new();
    let mut section: Option<&mut Vec<VertexId>> = None;
    let mut saw_starts = false;
    let mut saw_targets = false;
    for word in body.split_whitespace() {
        match word {
            "starts" if !saw_starts => {
                saw_starts = true;
                section = Some(&mut starts);
            }
            "targets" if saw_starts && !saw_targets => {
                saw_targets = true;
                section = Some(&mut targets);
            }
            w => match section.as_mut() {
                Some(list) => list.push(num(line, w)?),
                None => return Err(ParseError::new(line, format!("unexpected '{w}'"))),
            },
        }
    }
    if !saw_starts || !saw_targets {
        return Err(ParseError::new(line, "team line needs 'starts' and 'targets'"));
    }
    let mut flags = TeamFlags::default();
    if let Some(f) = flag_text {
        for name in f.split(|c: char| c.is_whitespace() || c == '|' || c == ',') {
            match name {
                "" => {}
                "shared_start_spread" => flags.shared_start_spread = true,
                "funnel_target" => flags.funnel_target = true,
                "surplus_targets" => flags.surplus_targets = true,
                other => return Err(ParseError::new(line, format!("unknown flag '{other}'"))),
            }
        }
    }
    Ok(Team {
        starts,
        targets,
        flags,
    })
}
