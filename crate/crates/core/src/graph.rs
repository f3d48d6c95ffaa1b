//! Undirected graphs with optional 4-neighbor grid metadata.

use std::collections::VecDeque;

use crate::error::GraphError;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Marker for "not reachable" in distance tables.
pub const UNREACHABLE: u32 = u32::MAX;

/// Layout information kept when a graph was built from a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMeta {
    pub width: usize,
    pub height: usize,
    /// Row-major blocked mask, `width * height` entries.
    pub blocked: Vec<bool>,
    /// Cell index (row-major) of every vertex.
    pub cell_of_vertex: Vec<usize>,
}

impl GridMeta {
    pub fn vertex_at(&self, x: usize, y: usize) -> Option<VertexId> {
        if x >= self.width || y >= self.height {
            return None;
        }
        let cell = y * self.width + x;
        self.cell_of_vertex.binary_search(&cell).ok()
    }

    pub fn coords(&self, v: VertexId) -> (usize, usize) {
        let cell = self.cell_of_vertex[v];
        (cell % self.width, cell / self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    /// Canonical edges `(u, v)` with `u < v`, sorted.
    edges: Vec<(VertexId, VertexId)>,
    /// Per vertex: `(neighbor, edge id)` sorted by neighbor.
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    grid: Option<GridMeta>,
}

impl Graph {
    pub fn new(vertex_count: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut canon = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(GraphError::VertexOutOfRange(u.max(v), vertex_count));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        for w in canon.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        Ok(Self::from_canonical(vertex_count, canon, None))
    }

    /// Builds the 4-neighbor graph over the free cells of a grid. Vertex ids
    /// follow row-major order over free cells.
    pub fn grid(width: usize, height: usize, blocked: Vec<bool>) -> Result<Self, GraphError> {
        if blocked.len() != width * height {
            return Err(GraphError::MaskSize {
                expected: width * height,
                got: blocked.len(),
            });
        }
        let cell_of_vertex: Vec<usize> = (0..width * height).filter(|&c| !blocked[c]).collect();
        if cell_of_vertex.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut vertex_of_cell = vec![None; width * height];
        for (v, &c) in cell_of_vertex.iter().enumerate() {
            vertex_of_cell[c] = Some(v);
        }
        let mut edges = Vec::new();
        for (v, &c) in cell_of_vertex.iter().enumerate() {
            let (x, y) = (c % width, c / width);
            if x + 1 < width {
                if let Some(r) = vertex_of_cell[c + 1] {
                    edges.push((v, r));
                }
            }
            if y + 1 < height {
                if let Some(d) = vertex_of_cell[c + width] {
                    edges.push((v, d));
                }
            }
        }
        edges.sort_unstable();
        let meta = GridMeta {
            width,
            height,
            blocked,
            cell_of_vertex,
        };
        let n = meta.cell_of_vertex.len();
        Ok(Self::from_canonical(n, edges, Some(meta)))
    }

    fn from_canonical(
        vertex_count: usize,
        edges: Vec<(VertexId, VertexId)>,
        grid: Option<GridMeta>,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (id, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            vertex_count,
            edges,
            adjacency,
            grid,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn grid_meta(&self) -> Option<&GridMeta> {
        self.grid.as_ref()
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency[v].iter().map(|&(n, _)| n)
    }

    pub fn incident(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    /// Id of the undirected edge between `u` and `v`, if any.
    pub fn edge_id(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        if u >= self.vertex_count || v >= self.vertex_count {
            return None;
        }
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |&(n, _)| n)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_id(u, v).is_some()
    }

    /// Hop distances from all `sources` (multi-source BFS).
    pub fn distances_from(&self, sources: impl IntoIterator<Item = VertexId>) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.vertex_count];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            for &(v, _) in &self.adjacency[u] {
                if dist[v] == UNREACHABLE {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected-component label per vertex; labels are assigned in order of
    /// the smallest vertex id in each component.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.vertex_count {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }
}
