//! Inter-team collisions and the per-team constraints that resolve them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::graph::VertexId;
use crate::instance::{AgentRef, TeamId};
use crate::solution::{Path, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// No agent of `team` may occupy `vertex` at time `t`.
    Vertex { team: TeamId, vertex: VertexId, t: usize },
    /// No agent of `team` may move `from -> to` between `t` and `t + 1`.
    Edge { team: TeamId, from: VertexId, to: VertexId, t: usize },
}

impl Constraint {
    pub fn team(&self) -> TeamId {
        match *self {
            Constraint::Vertex { team, .. } | Constraint::Edge { team, .. } => team,
        }
    }

    pub fn time(&self) -> usize {
        match *self {
            Constraint::Vertex { t, .. } | Constraint::Edge { t, .. } => t,
        }
    }

    /// Whether `path` breaks this constraint. Past its end a path keeps its
    /// final entry.
    pub fn violated_by(&self, path: &Path) -> bool {
        match *self {
            Constraint::Vertex { vertex, t, .. } => path.at(t) == Some(vertex),
            Constraint::Edge { from, to, t, .. } => {
                path.at(t) == Some(from) && path.at(t + 1) == Some(to)
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Vertex { team, vertex, t } => write!(f, "({team}, {vertex}, {t})"),
            Constraint::Edge { team, from, to, t } => write!(f, "({team}, {from}, {to}, {t})"),
        }
    }
}

/// A collision between agents of two different teams. Field order gives the
/// deterministic processing order: earliest `t` first, then the lower team
/// pair, then vertex before edge collisions, then locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Collision {
    pub t: usize,
    /// `teams.0 < teams.1`.
    pub teams: (TeamId, TeamId),
    pub kind: CollisionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CollisionKind {
    Vertex { vertex: VertexId },
    /// The agent of `teams.0` moves `from -> to`, the agent of `teams.1`
    /// moves `to -> from`.
    Edge { from: VertexId, to: VertexId },
}

impl Collision {
    /// The two constraints that split the search on this collision, one per
    /// involved team.
    pub fn constraints(&self) -> [Constraint; 2] {
        let (i, j) = self.teams;
        let t = self.t;
        match self.kind {
            CollisionKind::Vertex { vertex } => [
                Constraint::Vertex { team: i, vertex, t },
                Constraint::Vertex { team: j, vertex, t },
            ],
            CollisionKind::Edge { from, to } => [
                Constraint::Edge { team: i, from, to, t },
                Constraint::Edge {
                    team: j,
                    from: to,
                    to: from,
                    t,
                },
            ],
        }
    }
}

impl fmt::Display for Collision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = self.teams;
        match self.kind {
            CollisionKind::Vertex { vertex } => {
                write!(f, "vertex collision ({i}, {j}, {vertex}, {})", self.t)
            }
            CollisionKind::Edge { from, to } => {
                write!(f, "edge collision ({i}, {j}, {from}, {to}, {})", self.t)
            }
        }
    }
}

/// Two agents of the same team collided; the low level must never produce
/// this.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("internal error: agents {a} and {b} of the same team collide at t={t}")]
pub struct WithinTeamCollision {
    pub a: AgentRef,
    pub b: AgentRef,
    pub t: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollisionReport {
    /// Sorted by [`Collision`]'s ordering.
    pub collisions: Vec<Collision>,
    /// Number of distinct teams involved in at least one collision.
    pub colliding_teams: usize,
}

impl CollisionReport {
    pub fn earliest(&self) -> Option<&Collision> {
        self.collisions.first()
    }

    pub fn is_empty(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Every pairwise inter-team vertex and edge collision, in processing order.
/// Paths are read with [`Path::at`], so ragged paths are handled as if padded.
pub fn find_collisions(solution: &Solution) -> Result<CollisionReport, WithinTeamCollision> {
    let agents: Vec<(AgentRef, &Path)> = solution.agents().collect();
    let horizon = solution.horizon();
    let mut found = Vec::new();
    let mut occupant: HashMap<VertexId, AgentRef> = HashMap::with_capacity(agents.len());
    for t in 0..=horizon {
        occupant.clear();
        for &(a, p) in &agents {
            let Some(v) = p.at(t) else { continue };
            if let Some(&b) = occupant.get(&v) {
                if a.team == b.team {
                    return Err(WithinTeamCollision { a: b, b: a, t });
                }
                // several agents on one vertex: record each inter-team pair
                for &(c, q) in &agents {
                    if c < a && c.team != a.team && q.at(t) == Some(v) {
                        found.push(Collision {
                            t,
                            teams: (c.team.min(a.team), c.team.max(a.team)),
                            kind: CollisionKind::Vertex { vertex: v },
                        });
                    }
                }
            } else {
                occupant.insert(v, a);
            }
        }
        if t == horizon {
            break;
        }
        for &(a, p) in &agents {
            let (Some(u), Some(v)) = (p.at(t), p.at(t + 1)) else {
                continue;
            };
            if u == v {
                continue;
            }
            let Some(&b) = occupant.get(&v) else { continue };
            if b <= a || solution.path(b).at(t + 1) != Some(u) {
                continue;
            }
            if a.team == b.team {
                return Err(WithinTeamCollision { a, b, t });
            }
            // orient so that the lower team moved from -> to
            let kind = if a.team < b.team {
                CollisionKind::Edge { from: u, to: v }
            } else {
                CollisionKind::Edge { from: v, to: u }
            };
            found.push(Collision {
                t,
                teams: (a.team.min(b.team), a.team.max(b.team)),
                kind,
            });
        }
    }
    found.sort_unstable();
    found.dedup();
    let teams: BTreeSet<TeamId> = found
        .iter()
        .flat_map(|c| [c.teams.0, c.teams.1])
        .collect();
    Ok(CollisionReport {
        colliding_teams: teams.len(),
        collisions: found,
    })
}
