//! Connected graphs up to isomorphism, for sweeping the uniform LP.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::Result;
use crate::graph::Graph;
use crate::treewidth::treewidth_exact;

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

fn edge_mask(n: usize, edges: &[(usize, usize)], perm: &[usize]) -> u64 {
    let ps = pairs(n);
    edges.iter().fold(0, |m, &(a, b)| {
        let (x, y) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
        m | 1 << ps.iter().position(|&p| p == (x, y)).unwrap_or(0)
    })
}

/// Smallest edge mask (over pairs of `[n]` in lexicographic order) among
/// relabelings that list vertices by nonincreasing degree. Two graphs on
/// `[n]` are isomorphic iff their canonical forms agree.
pub fn canonical_form(g: &Graph) -> u64 {
    let n = g.n();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| core::cmp::Reverse(if g.has_vertex(v) { g.degree(v) } else { 0 }));
    // Positions 0..n are split into runs of equal degree; a relabeling may
    // only permute vertices within a run.
    let deg = |v: usize| if g.has_vertex(v) { g.degree(v) } else { 0 };
    let mut best = u64::MAX;
    let mut perm = alloc::vec![usize::MAX; n];
    let mut used = alloc::vec![false; n];
    fn go(
        pos: usize,
        order: &[usize],
        deg: &dyn Fn(usize) -> usize,
        g: &Graph,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut u64,
    ) {
        let n = order.len();
        if pos == n {
            *best = (*best).min(edge_mask(n, g.edges(), perm));
            return;
        }
        let d = deg(order[pos]);
        for v in 0..n {
            if !used[v] && deg(v) == d {
                used[v] = true;
                perm[v] = pos;
                go(pos + 1, order, deg, g, perm, used, best);
                used[v] = false;
            }
        }
    }
    go(0, &by_degree, &deg, g, &mut perm, &mut used, &mut best);
    best
}

/// One connected graph on all of `[n]` per isomorphism class, ordered by
/// edge count and then canonical form.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    if n == 0 {
        return Vec::new();
    }
    let ps = pairs(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..1 << ps.len() {
        let edges: Vec<(usize, usize)> = ps.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        if edges.len() + 1 < n {
            continue;
        }
        let g = Graph::on_all(n, edges).expect("pairs of [n]");
        if !g.is_connected() {
            continue;
        }
        let c = canonical_form(&g);
        if seen.insert((g.num_edges(), c)) {
            out.push((g.num_edges(), c, g));
        }
    }
    out.sort_by_key(|(m, c, _)| (*m, *c));
    out.into_iter().map(|(_, _, g)| g).collect()
}

/// Connected graphs with `1..=max_n` vertices and treewidth at most `max_tw`.
pub fn tw_family(max_n: usize, max_tw: usize) -> Result<Vec<Graph>> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        for g in connected_graphs(n) {
            if treewidth_exact(&g)?.0 <= max_tw {
                out.push(g);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connected_graph_counts() {
        // Connected graphs up to isomorphism on 1..=5 vertices.
        let counts: Vec<usize> = (1..=5).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 6, 21]);
    }

    #[test]
    fn isomorphic_relabelings_agree() {
        let a = Graph::on_all(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let b = Graph::on_all(4, [(2, 0), (0, 3), (3, 1)]).unwrap();
        let star = Graph::on_all(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert_ne!(canonical_form(&a), canonical_form(&star));
    }

    #[test]
    fn treewidth_filter_drops_k4() {
        let fam = tw_family(4, 2).unwrap();
        assert_eq!(fam.len(), 1 + 1 + 2 + 5);
    }
}
