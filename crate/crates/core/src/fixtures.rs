//! Small hand-built instances shared by tests, examples and the CLI docs.

use crate::graph::Graph;
use crate::instance::{TapfInstance, Team};
use crate::solution::{Path, Solution};

/// Vertex names of the two-team example: a..f map to 0..5.
pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;
pub const D: usize = 3;
pub const E: usize = 4;
pub const F: usize = 5;

/// Two teams on the graph a-c, b-c, c-d, d-e, d-f. Team 0 has one agent at c
/// heading for f; team 1 has agents at a and b heading for {d, e}. The
/// optimal makespan is 3.
pub fn two_team_example() -> TapfInstance {
    let graph = Graph::new(6, &[(A, C), (B, C), (C, D), (D, E), (D, F)]).expect("valid graph");
    TapfInstance::new(
        graph,
        vec![Team::new(vec![C], vec![F]), Team::new(vec![A, B], vec![D, E])],
    )
}

/// An optimal solution of [`two_team_example`].
pub fn two_team_solution() -> Solution {
    Solution::new(vec![
        vec![Path::new(vec![C, D, F, F])],
        vec![Path::new(vec![A, C, D, E]), Path::new(vec![B, B, C, D])],
    ])
}

pub fn path_graph(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &edges).expect("valid path graph")
}

/// One agent crossing a single edge: u=0 to v=1.
pub fn single_edge() -> TapfInstance {
    TapfInstance::new(path_graph(2), vec![Team::new(vec![0], vec![1])])
}

/// Two singleton teams swapping the ends of the path p-x-q. No solution
/// exists.
pub fn head_on_path() -> TapfInstance {
    TapfInstance::new(
        path_graph(3),
        vec![Team::new(vec![0], vec![2]), Team::new(vec![2], vec![0])],
    )
}
