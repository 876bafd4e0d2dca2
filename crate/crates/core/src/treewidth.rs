//! Exact treewidth by dynamic programming over elimination orderings, and
//! validation of tree decompositions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::verdict::Verdict;

/// Default vertex limit for [`treewidth_exact`].
pub const DEFAULT_TREEWIDTH_LIMIT: usize = 16;

/// Tree with a vertex bag per node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Largest bag size minus one (0 for a decomposition without vertices).
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }

    pub fn neighbors(&self, t: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == t {
                    Some(b)
                } else if b == t {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Single bag holding every vertex.
    pub fn trivial(g: &Graph) -> Self {
        TreeDecomposition {
            bags: vec![g.vertices().to_vec()],
            edges: Vec::new(),
        }
    }
}

/// Checks the three defining conditions (plus that the node graph is a tree).
/// A rejection names the violated condition and a witness.
pub fn validate_tree_decomposition(g: &Graph, t: &TreeDecomposition) -> Verdict {
    let mut v = Verdict::new();
    let k = t.bags.len();

    let tree_failure = if k == 0 {
        Some(format!("decomposition has no nodes"))
    } else if let Some(&(a, b)) = t.edges.iter().find(|&&(a, b)| a >= k || b >= k || a == b) {
        Some(format!("invalid tree edge ({a}, {b})"))
    } else if t.edges.len() != k - 1 {
        Some(format!("{} tree edges for {k} nodes", t.edges.len()))
    } else {
        let comps = components(k, &t.edges, &vec![true; k]);
        (comps > 1).then(|| format!("node graph has {comps} components"))
    };
    v.record("tree", tree_failure);

    // Condition 1: the bags cover V(G) and contain only vertices of G.
    let all: BTreeSet<usize> = t.bags.iter().flatten().copied().collect();
    let cover = g
        .vertices()
        .iter()
        .find(|x| !all.contains(x))
        .map(|x| format!("vertex {x} is in no bag"))
        .or_else(|| {
            all.iter()
                .find(|&&x| !g.has_vertex(x))
                .map(|x| format!("bag vertex {x} is not a vertex of the graph"))
        });
    v.record("condition1_cover", cover);

    // Condition 2: every edge inside some bag.
    let edge_fail = g.edges().iter().find(|&&(a, b)| {
        !t.bags
            .iter()
            .any(|bag| bag.contains(&a) && bag.contains(&b))
    });
    v.record(
        "condition2_edges",
        edge_fail.map(|(a, b)| format!("edge {{{a}, {b}}} lies in no bag")),
    );

    // Condition 3: the nodes containing each vertex induce a connected subtree.
    let mut cond3 = None;
    if v.checks[0].passed {
        for &x in &all {
            let mask: Vec<bool> = t.bags.iter().map(|b| b.contains(&x)).collect();
            let sub_edges: Vec<(usize, usize)> = t
                .edges
                .iter()
                .copied()
                .filter(|&(a, b)| mask[a] && mask[b])
                .collect();
            if components(k, &sub_edges, &mask) > 1 {
                let nodes: Vec<usize> = (0..k).filter(|&i| mask[i]).collect();
                cond3 = Some(format!(
                    "vertex {x} appears in disconnected nodes {nodes:?}"
                ));
                break;
            }
        }
    } else {
        cond3 = Some(format!("not checked: node graph is not a tree"));
    }
    v.record("condition3_connectivity", cond3);
    v
}

fn components(k: usize, edges: &[(usize, usize)], mask: &[bool]) -> usize {
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let n = p[c];
            p[c] = r;
            c = n;
        }
        r
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let roots: BTreeSet<usize> = (0..k)
        .filter(|&i| mask[i])
        .map(|i| find(&mut parent, i))
        .collect();
    roots.len()
}

/// Exact treewidth and an optimal decomposition; limit 16 vertices.
pub fn treewidth_exact(g: &Graph) -> Result<(usize, TreeDecomposition)> {
    treewidth_exact_with_limit(g, DEFAULT_TREEWIDTH_LIMIT)
}

/// Optimal elimination ordering (vertex ids) together with the width.
pub fn optimal_elimination_order(g: &Graph, limit: usize) -> Result<(usize, Vec<usize>)> {
    let verts = g.vertices();
    let k = verts.len();
    if k > limit {
        return Err(Error::Capacity(format!(
            "treewidth_exact limited to {limit} vertices, graph has {k}"
        )));
    }
    if k == 0 {
        return Ok((0, Vec::new()));
    }
    let index: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![0u32; k];
    for &(a, b) in g.edges() {
        let (ia, ib) = (index[&a], index[&b]);
        adj[ia] |= 1 << ib;
        adj[ib] |= 1 << ia;
    }
    // q(S, v): vertices outside S ∪ {v} reachable from v through S.
    let q = |s: u32, v: usize| -> u32 {
        let mut seen = 1u32 << v;
        let mut frontier = 1u32 << v;
        let mut reach = 0u32;
        while frontier != 0 {
            let x = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let nb = adj[x] & !seen;
            seen |= nb;
            reach |= nb & !s;
            frontier |= nb & s;
        }
        reach
    };
    let full: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    // tw[S] = best max-|Q| for eliminating S first; i32 so the empty set is -1.
    let size = 1usize << k;
    let mut tw = vec![i32::MAX; size];
    let mut choice = vec![0u8; size];
    tw[0] = -1;
    for s in 1..size {
        let s32 = s as u32;
        let mut best = i32::MAX;
        let mut arg = 0;
        let mut bits = s32;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s32 & !(1 << v);
            let cand = tw[rest as usize].max(q(rest, v).count_ones() as i32);
            if cand < best {
                best = cand;
                arg = v;
            }
        }
        tw[s] = best;
        choice[s] = arg as u8;
    }
    let mut order_rev = Vec::with_capacity(k);
    let mut s = full;
    while s != 0 {
        let v = choice[s as usize] as usize;
        order_rev.push(verts[v]);
        s &= !(1 << v);
    }
    order_rev.reverse();
    Ok((tw[full as usize].max(0) as usize, order_rev))
}

/// Exact treewidth with a custom vertex limit.
pub fn treewidth_exact_with_limit(g: &Graph, limit: usize) -> Result<(usize, TreeDecomposition)> {
    let (w, order) = optimal_elimination_order(g, limit)?;
    let td = decomposition_from_order(g, &order);
    debug_assert_eq!(td.width(), w);
    Ok((w, td))
}

/// Tree decomposition induced by eliminating vertices in `order`; bags that
/// are contained in a neighboring bag are merged away.
pub fn decomposition_from_order(g: &Graph, order: &[usize]) -> TreeDecomposition {
    if order.is_empty() {
        return TreeDecomposition {
            bags: vec![Vec::new()],
            edges: Vec::new(),
        };
    }
    let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut nb: BTreeMap<usize, BTreeSet<usize>> =
        order.iter().map(|&v| (v, BTreeSet::new())).collect();
    for &(a, b) in g.edges() {
        nb.get_mut(&a).expect("vertex").insert(b);
        nb.get_mut(&b).expect("vertex").insert(a);
    }
    let mut bags: Vec<BTreeSet<usize>> = Vec::with_capacity(order.len());
    let mut parent: Vec<Option<usize>> = Vec::with_capacity(order.len());
    for (i, &v) in order.iter().enumerate() {
        let higher: BTreeSet<usize> = nb[&v].iter().copied().filter(|w| pos[w] > i).collect();
        // Fill-in: make the later neighbors a clique.
        let hv: Vec<usize> = higher.iter().copied().collect();
        for x in 0..hv.len() {
            for y in x + 1..hv.len() {
                nb.get_mut(&hv[x]).expect("vertex").insert(hv[y]);
                nb.get_mut(&hv[y]).expect("vertex").insert(hv[x]);
            }
        }
        let p = higher.iter().map(|w| pos[w]).min();
        let mut bag = higher;
        bag.insert(v);
        bags.push(bag);
        parent.push(p);
    }
    // Connect components by chaining their roots.
    let roots: Vec<usize> = (0..order.len()).filter(|&i| parent[i].is_none()).collect();
    for w in roots.windows(2) {
        parent[w[0]] = Some(w[1]);
    }
    // Merge a bag into its parent when contained in it.
    let mut alive = vec![true; bags.len()];
    for i in 0..bags.len() {
        if let Some(p) = parent[i] {
            if bags[i].is_subset(&bags[p]) {
                alive[i] = false;
                for j in 0..bags.len() {
                    if parent[j] == Some(i) {
                        parent[j] = Some(p);
                    }
                }
            }
        }
    }
    let new_index: Vec<Option<usize>> = {
        let mut next = 0;
        alive
            .iter()
            .map(|&a| {
                if a {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let mut out_bags = Vec::new();
    let mut out_edges = Vec::new();
    for i in 0..bags.len() {
        if !alive[i] {
            continue;
        }
        out_bags.push(bags[i].iter().copied().collect());
        if let Some(p) = parent[i] {
            let (a, b) = (new_index[i].expect("alive"), new_index[p].expect("alive parent"));
            out_edges.push((a.min(b), a.max(b)));
        }
    }
    out_edges.sort_unstable();
    TreeDecomposition {
        bags: out_bags,
        edges: out_edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_widths() {
        assert_eq!(treewidth_exact(&Graph::complete(1)).unwrap().0, 0);
        assert_eq!(treewidth_exact(&Graph::path(4)).unwrap().0, 1);
        assert_eq!(treewidth_exact(&Graph::complete(4)).unwrap().0, 3);
        assert_eq!(treewidth_exact(&Graph::cycle(6)).unwrap().0, 2);
        let (w, td) = treewidth_exact(&Graph::empty(0)).unwrap();
        assert_eq!(w, 0);
        assert_eq!(td.num_nodes(), 1);
    }

    #[test]
    fn produced_decompositions_validate() {
        for g in [Graph::cycle(5), Graph::complete(5), Graph::path(6), Graph::on_all(5, [(0, 1), (3, 4)]).unwrap()] {
            let (w, td) = treewidth_exact(&g).unwrap();
            assert!(validate_tree_decomposition(&g, &td).accepted(), "{g:?}");
            assert_eq!(td.width(), w);
        }
    }

    #[test]
    fn rejects_with_named_condition() {
        let tri = Graph::cycle(3);
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![1, 2]],
            edges: vec![(0, 1)],
        };
        let v = validate_tree_decomposition(&tri, &td);
        let f = v.first_failure().unwrap();
        assert_eq!(f.name, "condition2_edges");
        assert!(f.witness.as_ref().unwrap().contains("{0, 2}"));

        let p3 = Graph::path(3);
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            edges: vec![(0, 1), (1, 2)],
        };
        let v = validate_tree_decomposition(&p3, &td);
        assert_eq!(v.first_failure().unwrap().name, "condition3_connectivity");
    }

    #[test]
    fn capacity_limit() {
        assert!(matches!(
            treewidth_exact_with_limit(&Graph::path(5), 4),
            Err(Error::Capacity(_))
        ));
    }
}
