//! Simple undirected graphs with vertices drawn from `[n] = {0, …, n-1}`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Vertex subsets of graphs on at most 64 vertices.
pub type Subset = u64;

pub fn subset_contains(s: Subset, v: usize) -> bool {
    s >> v & 1 == 1
}

pub fn subset_from(vs: impl IntoIterator<Item = usize>) -> Subset {
    vs.into_iter().fold(0, |acc, v| acc | 1 << v)
}

pub fn subset_elems(s: Subset) -> Vec<usize> {
    (0..64).filter(|&v| subset_contains(s, v)).collect()
}

/// A graph on a vertex subset of `[n]`.
///
/// Edges are stored as sorted pairs `(u, v)` with `u < v`, in lexicographic
/// order, so equal graphs compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    vertices: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    vertices: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            n: g.n,
            vertices: g.vertices,
            edges: g.edges,
        }
    }
}

impl TryFrom<GraphRepr> for Graph {
    type Error = crate::error::Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        Graph::new(r.n, r.vertices, r.edges)
    }
}

impl Graph {
    /// Validates and normalizes: no self-loops, endpoints must be vertices.
    pub fn new(
        n: usize,
        vertices: impl IntoIterator<Item = usize>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let vs: BTreeSet<usize> = vertices.into_iter().collect();
        if let Some(&v) = vs.iter().find(|&&v| v >= n) {
            return Err(domain!("vertex {v} outside [0, {n})"));
        }
        let mut es = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(domain!("self-loop at {a}"));
            }
            if !vs.contains(&a) || !vs.contains(&b) {
                return Err(domain!("edge ({a}, {b}) has an endpoint outside the vertex set"));
            }
            es.insert((a.min(b), a.max(b)));
        }
        Ok(Graph {
            n,
            vertices: vs.into_iter().collect(),
            edges: es.into_iter().collect(),
        })
    }

    /// Graph on all of `[n]`.
    pub fn on_all(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(n, 0..n, edges)
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            vertices: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Self::on_all(n, edges).expect("complete graph is valid")
    }

    pub fn path(n: usize) -> Self {
        Self::on_all(n, (1..n).map(|i| (i - 1, i))).expect("path is valid")
    }

    pub fn cycle(n: usize) -> Self {
        let mut e: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        if n >= 3 {
            e.push((0, n - 1));
        }
        Self::on_all(n, e).expect("cycle is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_vertex(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Vertex set as a bit mask; requires `n <= 64`.
    pub fn vertex_mask(&self) -> Subset {
        subset_from(self.vertices.iter().copied())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Adjacency lists indexed by vertex id (length `n`).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Induced subgraph on `keep ∩ V(G)`, same ambient `n`.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let ks: BTreeSet<usize> = keep.iter().copied().filter(|&v| self.has_vertex(v)).collect();
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|(a, b)| ks.contains(a) && ks.contains(b))
            .collect();
        Graph {
            n: self.n,
            vertices: ks.into_iter().collect(),
            edges,
        }
    }

    /// Edges with both endpoints in the mask.
    pub fn edges_inside(&self, s: Subset) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| subset_contains(s, a) && subset_contains(s, b))
            .count()
    }

    /// Edges with exactly one endpoint in the mask.
    pub fn edges_cut(&self, s: Subset) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| subset_contains(s, a) != subset_contains(s, b))
            .count()
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.first() else {
            return true;
        };
        let adj = self.adjacency();
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    pub fn is_independent(&self, s: Subset) -> bool {
        self.edges_inside(s) == 0
    }

    pub fn is_vertex_cover(&self, s: Subset) -> bool {
        self.edges
            .iter()
            .all(|&(a, b)| subset_contains(s, a) || subset_contains(s, b))
    }

    /// All perfect matchings of the graph as mate arrays (`mate[v]` for each
    /// `v` in `[n]`; vertices outside `V(G)` map to themselves), in
    /// lexicographic order of their sorted edge lists.
    pub fn perfect_matchings(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if self.vertices.len() % 2 == 1 {
            return out;
        }
        let adj = self.adjacency();
        let mut mate: Vec<usize> = (0..self.n).collect();
        let mut free: Vec<bool> = vec![false; self.n];
        for &v in &self.vertices {
            free[v] = true;
        }
        fn rec(
            verts: &[usize],
            adj: &[Vec<usize>],
            free: &mut Vec<bool>,
            mate: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            let Some(&v) = verts.iter().find(|&&v| free[v]) else {
                out.push(mate.clone());
                return;
            };
            free[v] = false;
            let mut nb = adj[v].clone();
            nb.sort_unstable();
            for w in nb {
                if free[w] {
                    free[w] = false;
                    mate[v] = w;
                    mate[w] = v;
                    rec(verts, adj, free, mate, out);
                    mate[v] = v;
                    mate[w] = w;
                    free[w] = true;
                }
            }
            free[v] = true;
        }
        let verts = self.vertices.clone();
        rec(&verts, &adj, &mut free, &mut mate, &mut out);
        out
    }
}

/// Edges of a mate array as sorted pairs.
pub fn matching_edges(mate: &[usize]) -> Vec<(usize, usize)> {
    (0..mate.len())
        .filter(|&v| mate[v] > v)
        .map(|v| (v, mate[v]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Graph::new(3, [0, 1], [(0, 2)]).is_err());
        assert!(Graph::new(3, [0, 1], [(1, 1)]).is_err());
        assert!(Graph::new(2, [0, 5], []).is_err());
        let g = Graph::new(4, [0, 1, 2], [(2, 0), (0, 2), (1, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2), (1, 2)]);
    }

    #[test]
    fn k4_has_three_perfect_matchings() {
        let pms = Graph::complete(4).perfect_matchings();
        assert_eq!(pms.len(), 3);
        assert_eq!(matching_edges(&pms[0]), vec![(0, 1), (2, 3)]);
        assert_eq!(Graph::complete(6).perfect_matchings().len(), 15);
        assert!(Graph::path(3).perfect_matchings().is_empty());
    }

    #[test]
    fn cuts_and_connectivity() {
        let c5 = Graph::cycle(5);
        assert_eq!(c5.edges_cut(subset_from([0, 2])), 4);
        assert!(c5.is_connected());
        assert!(!Graph::on_all(3, [(0, 1)]).unwrap().is_connected());
    }
}
