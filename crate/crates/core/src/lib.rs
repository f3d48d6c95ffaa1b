//! Optimal combined target assignment and path finding for teams of agents.
//!
//! The solver searches a constraint tree over teams; each team is planned by
//! min-cost max-flow on a time-expanded network of the graph.

pub mod bench;
pub mod collision;
pub mod error;
pub mod fixtures;
pub mod generators;
pub mod flow;
pub mod graph;
pub mod high_level;
pub mod instance;
pub mod low_level;
pub mod oracle;
pub mod solution;

pub use collision::{find_collisions, Collision, CollisionKind, Constraint};
pub use graph::{Graph, VertexId};
pub use instance::{Team, TeamFlags, TapfInstance};
pub use solution::{validate_solution, Path, Solution};
pub use high_level::{solve, solve_as_mapf, Outcome, SolveConfig, SolveReport};
