//! Admissible graph problems over bounded-treewidth graphs on `[n]`, the
//! decomposition-free uniform LP, and the recursive factorization of its
//! slack matrix along a tree decomposition.
//!
//! Solutions and partial solutions are bitmasks. For IndependentSet,
//! VertexCover, MaxCUT and UniqueGames with `q = 2` they are vertex sets
//! (a labeling `[n] → {0,1}` is the set of vertices labeled 1) and
//! restriction is intersection. For Matching they are edge sets of `K_n`
//! and `s↾X` keeps the edges with an endpoint in `X`.

mod alpha;
mod family;
mod lp;
mod sweep;

pub use alpha::{alpha_factorization, alpha_objective, compute_alpha, verify_alpha, AlphaEntry, AlphaTable};
pub use sweep::{instances_for, sweep, ug_labelings, SweepReport, SweepRow};
pub use family::{canonical_form, connected_graphs, tw_family};
pub use lp::{
    build_objective, build_uniform_lp, closed_form_size_bound, size_bound, solve_uniform_lp, AffineObjective,
    UniformLpModel, UniformLpSolution,
};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graph::{subset_contains, subset_elems, Graph, Subset};
use crate::problems::Sense;
use crate::treewidth::{decomposition_from_order, optimal_elimination_order, TreeDecomposition};
use crate::verdict::Verdict;

/// Largest universe handled by exhaustive enumeration.
pub const MAX_TW_VERTICES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TwProblemKind {
    IndependentSet,
    VertexCover,
    MaxCut,
    /// UniqueGames with alphabet `{0, 1}`; edge constraints are identity or swap.
    UniqueGames,
    Matching,
}

impl TwProblemKind {
    pub const ALL: [TwProblemKind; 5] = [
        TwProblemKind::IndependentSet,
        TwProblemKind::VertexCover,
        TwProblemKind::MaxCut,
        TwProblemKind::UniqueGames,
        TwProblemKind::Matching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TwProblemKind::IndependentSet => "IndependentSet",
            TwProblemKind::VertexCover => "VertexCover",
            TwProblemKind::MaxCut => "MaxCUT",
            TwProblemKind::UniqueGames => "UniqueGames2",
            TwProblemKind::Matching => "Matching",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s) || format!("{k:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| domain!("unknown admissible problem {s}"))
    }

    pub fn sense(self) -> Sense {
        match self {
            TwProblemKind::VertexCover => Sense::Min,
            _ => Sense::Max,
        }
    }
}

/// A graph on a vertex subset of `[n]`; `swaps[e]` marks edge `e` (in the
/// graph's edge order) as a swap constraint. Only UniqueGames reads it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwInstance {
    pub graph: Graph,
    pub swaps: Vec<bool>,
}

impl TwInstance {
    pub fn plain(graph: Graph) -> Self {
        let swaps = vec![false; graph.num_edges()];
        TwInstance { graph, swaps }
    }

    pub fn with_swaps(graph: Graph, swaps: Vec<bool>) -> Result<Self> {
        if swaps.len() != graph.num_edges() {
            return Err(domain!("{} swap flags for {} edges", swaps.len(), graph.num_edges()));
        }
        Ok(TwInstance { graph, swaps })
    }

    /// `G[keep]`, keeping swap flags.
    pub fn induced(&self, keep: Subset) -> TwInstance {
        let vs: Vec<usize> = self.graph.vertices().iter().copied().filter(|&v| subset_contains(keep, v)).collect();
        let (edges, swaps): (Vec<_>, Vec<_>) = self
            .graph
            .edges()
            .iter()
            .zip(&self.swaps)
            .filter(|((a, b), _)| subset_contains(keep, *a) && subset_contains(keep, *b))
            .map(|(&e, &s)| (e, s))
            .unzip();
        let graph = Graph::new(self.graph.n(), vs, edges).expect("induced subgraph of a valid graph");
        TwInstance { graph, swaps }
    }
}

/// One of the five admissible problems on the universe `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleProblem {
    pub kind: TwProblemKind,
    pub n: usize,
    solutions: Vec<u64>,
    /// `K_n` edges `(a, b)`, `a < b`, in lexicographic order; bit `i` of a
    /// Matching solution is `pairs[i]`.
    pairs: Vec<(usize, usize)>,
}

impl AdmissibleProblem {
    pub fn new(kind: TwProblemKind, n: usize) -> Result<Self> {
        if n > MAX_TW_VERTICES {
            return Err(Error::Capacity(format!("n = {n} exceeds {MAX_TW_VERTICES}")));
        }
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let solutions = if kind == TwProblemKind::Matching {
            if n % 2 == 1 {
                return Err(domain!("Matching needs an even number of vertices, got {n}"));
            }
            let host = Graph::complete(n);
            host.perfect_matchings()
                .iter()
                .map(|mate| {
                    pairs
                        .iter()
                        .enumerate()
                        .filter(|(_, &(a, b))| mate[a] == b)
                        .fold(0u64, |m, (i, _)| m | 1 << i)
                })
                .collect::<BTreeSet<u64>>()
                .into_iter()
                .collect()
        } else {
            (0..1u64 << n).collect()
        };
        Ok(AdmissibleProblem {
            kind,
            n,
            solutions,
            pairs,
        })
    }

    pub fn sense(&self) -> Sense {
        self.kind.sense()
    }

    /// `τ = 1` for maximization, `−1` for minimization.
    pub fn tau(&self) -> i64 {
        match self.sense() {
            Sense::Max => 1,
            Sense::Min => -1,
        }
    }

    pub fn solutions(&self) -> &[u64] {
        &self.solutions
    }

    fn edge_index(&self, a: usize, b: usize) -> usize {
        let (a, b) = (a.min(b), a.max(b));
        // Pairs are listed row by row: row a has n − 1 − a entries.
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    /// Matching: `K_n` edges touching `x`.
    fn incident(&self, x: Subset) -> u64 {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| subset_contains(x, a) || subset_contains(x, b))
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn restrict(&self, s: u64, x: Subset) -> u64 {
        match self.kind {
            TwProblemKind::Matching => s & self.incident(x),
            _ => s & x,
        }
    }

    /// `𝒮_X = {s↾X : s ∈ 𝒮}`, sorted.
    pub fn partial_solutions(&self, x: Subset) -> Vec<u64> {
        let set: BTreeSet<u64> = self.solutions.iter().map(|&s| self.restrict(s, x)).collect();
        set.into_iter().collect()
    }

    /// Unnormalized measure. Also meaningful on a partial solution that
    /// contains `s↾V(G)`.
    pub fn value(&self, inst: &TwInstance, s: u64) -> i64 {
        let g = &inst.graph;
        let has = |v: usize| subset_contains(s, v);
        match self.kind {
            TwProblemKind::IndependentSet => {
                (s & g.vertex_mask()).count_ones() as i64 - g.edges_inside(s) as i64
            }
            TwProblemKind::VertexCover => {
                let uncovered = g.edges().iter().filter(|&&(a, b)| !has(a) && !has(b)).count();
                (s & g.vertex_mask()).count_ones() as i64 + uncovered as i64
            }
            TwProblemKind::MaxCut => g.edges_cut(s) as i64,
            TwProblemKind::UniqueGames => g
                .edges()
                .iter()
                .zip(&inst.swaps)
                .filter(|(&(a, b), &swap)| (has(a) != has(b)) == swap)
                .count() as i64,
            TwProblemKind::Matching => g
                .edges()
                .iter()
                .filter(|&&(a, b)| s >> self.edge_index(a, b) & 1 == 1)
                .count() as i64,
        }
    }

    pub fn optimum(&self, inst: &TwInstance) -> i64 {
        self.conditional_optimum(inst, 0, 0).expect("solution set is nonempty")
    }

    /// `OPT` over the solutions with `s↾x = sigma`, or `None` if there is none.
    pub fn conditional_optimum(&self, inst: &TwInstance, x: Subset, sigma: u64) -> Option<i64> {
        let vals = self
            .solutions
            .iter()
            .filter(|&&s| self.restrict(s, x) == sigma)
            .map(|&s| self.value(inst, s));
        match self.sense() {
            Sense::Max => vals.max(),
            Sense::Min => vals.min(),
        }
    }

    /// The decomposition correction
    /// `val_{G[B_t]}(σ) − Σ_i val_{G[B_t ∩ B_{t_i}]}(σ)`.
    pub fn corr(&self, inst: &TwInstance, td: &TreeDecomposition, t: usize, sigma: u64) -> i64 {
        let bt = bag_mask(td, t);
        let mut c = self.value(&inst.induced(bt), sigma);
        for ti in td.neighbors(t) {
            c -= self.value(&inst.induced(bt & bag_mask(td, ti)), sigma);
        }
        c
    }

    pub fn label(&self, s: u64) -> String {
        match self.kind {
            TwProblemKind::Matching => {
                let edges: Vec<String> = self
                    .pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| s >> i & 1 == 1)
                    .map(|(_, (a, b))| format!("{a}-{b}"))
                    .collect();
                format!("{{{}}}", edges.join(","))
            }
            _ => crate::problems::subset_label(s),
        }
    }
}

pub fn bag_mask(td: &TreeDecomposition, t: usize) -> Subset {
    td.bags[t].iter().fold(0, |m, &v| m | 1 << v)
}

/// Union of the bags in the component of `T − t` containing `start`.
pub fn component_mask(td: &TreeDecomposition, t: usize, start: usize) -> Subset {
    let mut seen = vec![false; td.num_nodes()];
    seen[t] = true;
    seen[start] = true;
    let mut stack = vec![start];
    let mut mask = 0;
    while let Some(u) = stack.pop() {
        mask |= bag_mask(td, u);
        for w in td.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    mask
}

/// The minimum-width decompositions exercised by the admissibility check:
/// the exact one, plus the one from the reversed optimal elimination order
/// when it has the same width.
pub fn test_decompositions(g: &Graph) -> Result<Vec<TreeDecomposition>> {
    let (w, order) = optimal_elimination_order(g, crate::treewidth::DEFAULT_TREEWIDTH_LIMIT)?;
    let first = decomposition_from_order(g, &order);
    let mut rev = order.clone();
    rev.reverse();
    let second = decomposition_from_order(g, &rev);
    let mut out = vec![first];
    if second.width() == w && second != out[0] {
        out.push(second);
    }
    Ok(out)
}

/// Gluing check on one cover: every pairwise compatible choice of partial
/// solutions must extend to exactly one solution.
fn check_gluing(p: &AdmissibleProblem, parts: &[Subset]) -> Option<String> {
    let options: Vec<Vec<u64>> = parts.iter().map(|&x| p.partial_solutions(x)).collect();
    let mut chosen: Vec<u64> = Vec::with_capacity(parts.len());
    fn go(p: &AdmissibleProblem, parts: &[Subset], options: &[Vec<u64>], chosen: &mut Vec<u64>) -> Option<String> {
        let i = chosen.len();
        if i == parts.len() {
            let count = p
                .solutions()
                .iter()
                .filter(|&&s| parts.iter().zip(chosen.iter()).all(|(&x, &sig)| p.restrict(s, x) == sig))
                .count();
            return (count != 1).then(|| {
                let labels: Vec<String> = chosen.iter().map(|&s| p.label(s)).collect();
                format!(
                    "cover {:?} with parts {:?}: {count} glued solutions",
                    parts.iter().map(|&x| subset_elems(x)).collect::<Vec<_>>(),
                    labels
                )
            });
        }
        for &sig in &options[i] {
            let ok = (0..i).all(|j| {
                let common = parts[i] & parts[j];
                p.restrict(sig, common) == p.restrict(chosen[j], common)
            });
            if ok {
                chosen.push(sig);
                let r = go(p, parts, options, chosen);
                chosen.pop();
                if r.is_some() {
                    return r;
                }
            }
        }
        None
    }
    go(p, parts, &options, &mut chosen)
}

/// Decomposition identity `val_G(s) = corr(s↾B_t) + Σ_i val_{G_i}(s)` at
/// every node of `td`, for every solution.
pub fn check_decomposition(
    p: &AdmissibleProblem,
    inst: &TwInstance,
    td: &TreeDecomposition,
    corr: &dyn Fn(&TwInstance, &TreeDecomposition, usize, u64) -> i64,
) -> Option<String> {
    for t in 0..td.num_nodes() {
        let bt = bag_mask(td, t);
        let subs: Vec<TwInstance> = td.neighbors(t).into_iter().map(|ti| inst.induced(component_mask(td, t, ti))).collect();
        for &s in p.solutions() {
            let lhs = p.value(inst, s);
            let rhs = corr(inst, td, t, p.restrict(s, bt)) + subs.iter().map(|g| p.value(g, s)).sum::<i64>();
            if lhs != rhs {
                return Some(format!("node {t}, solution {}: val = {lhs}, corr + parts = {rhs}", p.label(s)));
            }
        }
    }
    None
}

/// Exhaustive admissibility check on the given instances with the built-in
/// correction function.
pub fn verify_admissibility(p: &AdmissibleProblem, instances: &[TwInstance]) -> Result<Verdict> {
    verify_admissibility_with(p, instances, &|inst, td, t, sigma| p.corr(inst, td, t, sigma))
}

/// As [`verify_admissibility`] with a caller-supplied correction function.
///
/// Restriction nesting is checked for all `Y ⊆ X ⊆ [n]`; locality, gluing
/// (on the bag cover and on the cover `B_t, V(G_1), …` of every node, with
/// `[n] ∖ V(G)` added as one more part) and the decomposition identity on
/// every test decomposition of every instance.
pub fn verify_admissibility_with(
    p: &AdmissibleProblem,
    instances: &[TwInstance],
    corr: &dyn Fn(&TwInstance, &TreeDecomposition, usize, u64) -> i64,
) -> Result<Verdict> {
    let full: Subset = (1 << p.n) - 1;
    let mut nesting = None;
    'outer: for x in 0..=full {
        let mut y = x;
        loop {
            for &s in p.solutions() {
                if p.restrict(p.restrict(s, x), y) != p.restrict(s, y) {
                    nesting = Some(format!("s = {}, X = {:?}, Y = {:?}", p.label(s), subset_elems(x), subset_elems(y)));
                    break 'outer;
                }
            }
            if y == 0 {
                break;
            }
            y = (y - 1) & x;
        }
    }
    let mut locality = None;
    let mut gluing = None;
    let mut decomposition = None;
    for (idx, inst) in instances.iter().enumerate() {
        if inst.graph.n() != p.n {
            return Err(domain!("instance {idx} lives on [{}], problem on [{}]", inst.graph.n(), p.n));
        }
        let vg = inst.graph.vertex_mask();
        if locality.is_none() {
            let mut seen: alloc::collections::BTreeMap<u64, i64> = alloc::collections::BTreeMap::new();
            for &s in p.solutions() {
                let v = p.value(inst, s);
                let r = p.restrict(s, vg);
                if let Some(&w) = seen.get(&r) {
                    if w != v {
                        locality = Some(format!("instance {idx}: solutions agreeing on V(G) have values {w} and {v}"));
                        break;
                    }
                }
                seen.insert(r, v);
            }
        }
        for td in test_decompositions(&inst.graph)? {
            let outside = full & !vg;
            let with_outside = |mut parts: Vec<Subset>| {
                if outside != 0 {
                    parts.push(outside);
                }
                parts
            };
            if gluing.is_none() {
                let bags = with_outside((0..td.num_nodes()).map(|t| bag_mask(&td, t)).collect());
                gluing = check_gluing(p, &bags).map(|w| format!("instance {idx}: {w}"));
            }
            for t in 0..td.num_nodes() {
                if gluing.is_some() {
                    break;
                }
                let mut parts = vec![bag_mask(&td, t)];
                parts.extend(td.neighbors(t).into_iter().map(|ti| component_mask(&td, t, ti)));
                gluing = check_gluing(p, &with_outside(parts)).map(|w| format!("instance {idx}: {w}"));
            }
            if decomposition.is_none() {
                decomposition = check_decomposition(p, inst, &td, corr).map(|w| format!("instance {idx}: {w}"));
            }
        }
    }
    let mut v = Verdict::new();
    v.record("restriction", nesting);
    v.record("locality", locality);
    v.record("gluing", gluing);
    v.record("decomposition", decomposition);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_examples() {
        let is = AdmissibleProblem::new(TwProblemKind::IndependentSet, 4).unwrap();
        assert_eq!(is.restrict(0b1010, 0b0110), 0b0010);
        let m = AdmissibleProblem::new(TwProblemKind::Matching, 4).unwrap();
        assert_eq!(m.solutions().len(), 3);
        // {0-1, 2-3} restricted to {0} keeps 0-1.
        let s = 1 << m.edge_index(0, 1) | 1 << m.edge_index(2, 3);
        assert_eq!(m.restrict(s, 0b0001), 1 << m.edge_index(0, 1));
        assert_eq!(m.label(m.restrict(s, 0b0001)), "{0-1}");
    }

    #[test]
    fn edge_index_matches_pair_order() {
        let m = AdmissibleProblem::new(TwProblemKind::Matching, 6).unwrap();
        for (i, &(a, b)) in m.pairs.iter().enumerate() {
            assert_eq!(m.edge_index(a, b), i);
            assert_eq!(m.edge_index(b, a), i);
        }
        assert_eq!(m.solutions().len(), 15);
    }

    #[test]
    fn independent_set_admissible_on_small_graphs() {
        let p = AdmissibleProblem::new(TwProblemKind::IndependentSet, 5).unwrap();
        let insts: Vec<TwInstance> = [Graph::path(5), Graph::cycle(5)].into_iter().map(TwInstance::plain).collect();
        let v = verify_admissibility(&p, &insts).unwrap();
        assert!(v.accepted(), "{:?}", v.first_failure());
    }

    #[test]
    fn wrong_corr_rejected_at_decomposition() {
        let p = AdmissibleProblem::new(TwProblemKind::VertexCover, 4).unwrap();
        let insts = vec![TwInstance::plain(Graph::path(4))];
        let v = verify_admissibility_with(&p, &insts, &|i, td, t, s| p.corr(i, td, t, s) + 1).unwrap();
        assert_eq!(v.first_failure().unwrap().name, "decomposition");
    }

    #[test]
    fn matching_gluing_counterexample() {
        // 0 is matched to 3 by one part and to 2 by another; the parts only
        // meet where both agree.
        let p = AdmissibleProblem::new(TwProblemKind::Matching, 4).unwrap();
        let e = |a, b| 1u64 << p.edge_index(a, b);
        let parts = [0b1000, 0b0101, 0b0011, 0b0001];
        let w = check_gluing(&p, &parts).unwrap();
        assert!(w.contains("0 glued solutions"), "{w}");
        let inst = TwInstance::plain(Graph::on_all(4, [(0, 1), (0, 2)]).unwrap());
        let v = verify_admissibility(&p, &[inst]).unwrap();
        assert_eq!(v.first_failure().unwrap().name, "gluing");
        assert_eq!(p.restrict(e(0, 3) | e(1, 2), 0b1000), e(0, 3));
    }

    #[test]
    fn unique_games_counts_satisfied_edges() {
        let p = AdmissibleProblem::new(TwProblemKind::UniqueGames, 3).unwrap();
        let inst = TwInstance::with_swaps(Graph::path(3), vec![true, false]).unwrap();
        // Labels (1, 0, 0): edge 0-1 differs (swap ok), edge 1-2 equal (identity ok).
        assert_eq!(p.value(&inst, 0b001), 2);
        assert_eq!(p.optimum(&inst), 2);
    }
}
