//! MaxCUT to SparsestCut with a treewidth-2 supply graph, and the powering
//! operation that replaces every pair of the base graph by a scaled copy of
//! the previous level.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graph::{subset_contains, Graph, Subset};
use crate::matrix::Matrix;
use crate::problems::{MaxCutProblem, PairMap, SparsestCutInstance, SparsestCutProblem, WeightedGraph};
use crate::rational::Rational;
use crate::reduction::FractionalReductionRecord;
use crate::table::ProblemTable;
use crate::treewidth::{treewidth_exact, DEFAULT_TREEWIDTH_LIMIT};
use crate::verdict::Verdict;

/// Index of the distinguished vertex `u`.
pub const U: usize = 0;
/// Index of the distinguished vertex `v`.
pub const V: usize = 1;

/// Largest powered vertex count for which records enumerate every cut.
pub const MAX_ENUMERATED_VERTICES: usize = 16;

/// The base instance: vertices `u = 0`, `v = 1` and MaxCUT vertex `i` at
/// `i + 2`; `c(i, u) = c(i, v) = deg(i)/(2m)` and `d(i, j) = 1/m` on edges.
pub fn maxcut_to_sparsestcut_base(g: &Graph) -> Result<SparsestCutInstance> {
    let m = g.num_edges();
    if m == 0 {
        return Err(domain!("the MaxCUT instance has no edges"));
    }
    let n = g.n() + 2;
    let mut capacity = PairMap::new(n);
    let mut demand = PairMap::new(n);
    let two_m = Rational::from_int(2 * m as i64);
    for i in 0..g.n() {
        let c = Rational::from_int(g.degree(i) as i64) / &two_m;
        capacity.add(i + 2, U, c.clone())?;
        capacity.add(i + 2, V, c)?;
    }
    let dm = Rational::new(1, m as i64);
    for &(a, b) in g.edges() {
        demand.add(a + 2, b + 2, dm.clone())?;
    }
    SparsestCutInstance::new_unverified(demand, capacity, 2)
}

/// `s* = s ∪ {u}` on the base vertex set.
pub fn base_solution(s: Subset) -> Subset {
    s << 2 | 1 << U
}

/// Level-`l` instance with its level-1 base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PoweredInstance {
    pub level: usize,
    pub base: SparsestCutInstance,
    /// Number of vertices `N_l`.
    pub n: usize,
    /// Names built as `({x,y},w)` for the copy of `w` on the pair `{x, y}`.
    pub vertex_names: Vec<String>,
    pub capacity: PairMap,
    pub demand: PairMap,
}

impl PoweredInstance {
    pub fn instance(&self) -> Result<SparsestCutInstance> {
        SparsestCutInstance::new_unverified(self.demand.clone(), self.capacity.clone(), self.base.k)
    }
}

/// Pairs `{x, y}`, `x < y`, of the base vertex set in lexicographic order.
fn base_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            out.push((x, y));
        }
    }
    out
}

/// `N_l = N + C(N,2)(N_{l−1} − 2)` with `N_1 = N`.
pub fn powered_vertex_count(n: usize, l: usize) -> usize {
    let pairs = n * (n - 1) / 2;
    let mut count = n;
    for _ in 1..l {
        count = n + pairs * (count - 2);
    }
    count
}

/// The closed form `Σ_{i=1}^{l−1} C(N,2)^i (N−2) + 2` as written for the
/// powering construction.
pub fn stated_vertex_count(n: usize, l: usize) -> usize {
    let pairs = n * (n - 1) / 2;
    (1..l).map(|i| pairs.pow(i as u32) * (n - 2)).sum::<usize>() + 2
}

/// Vertex of the copy of `w` (a level-`l−1` vertex) on the pair with index
/// `p = (x, y)`: `u ↦ x`, `v ↦ y`, internal vertices numbered after the base.
fn copy_vertex(n: usize, inner: usize, p: usize, pair: (usize, usize), w: usize) -> usize {
    match w {
        U => pair.0,
        V => pair.1,
        _ => n + p * (inner - 2) + (w - 2),
    }
}

/// Powers `base` to level `l`. The copy on `{x, y}` identifies its `u` with
/// `min(x, y)` and its `v` with `max(x, y)`.
pub fn power_instance(base: &SparsestCutInstance, l: usize) -> Result<PoweredInstance> {
    if l == 0 {
        return Err(domain!("powering level starts at 1"));
    }
    let n = base.n;
    if n < 2 {
        return Err(domain!("the base needs the distinguished vertices u and v"));
    }
    let mut names: Vec<String> = (0..n)
        .map(|i| match i {
            U => "u".into(),
            V => "v".into(),
            _ => format!("{}", i - 1),
        })
        .collect();
    let base_names = names.clone();
    let mut cap = base.capacity.clone();
    let mut dem = base.demand.clone();
    let mut count = n;
    let pairs = base_pairs(n);
    for _ in 1..l {
        let total = n + pairs.len() * (count - 2);
        let mut c = PairMap::new(total);
        let mut d = PairMap::new(total);
        let mut new_names = base_names.clone();
        for (p, &(x, y)) in pairs.iter().enumerate() {
            for name in names.iter().skip(2) {
                new_names.push(format!("({{{},{}}},{name})", base_names[x], base_names[y]));
            }
            let c1 = base.capacity.get(x, y);
            if c1.is_zero() {
                continue;
            }
            for (a, b, w) in &cap.entries {
                let (s, t) = (copy_vertex(n, count, p, (x, y), *a), copy_vertex(n, count, p, (x, y), *b));
                c.add(s, t, w * &c1)?;
            }
            for (a, b, w) in &dem.entries {
                let (s, t) = (copy_vertex(n, count, p, (x, y), *a), copy_vertex(n, count, p, (x, y), *b));
                d.add(s, t, w * &c1)?;
            }
        }
        for (x, y, w) in &base.demand.entries {
            d.add(*x, *y, w.clone())?;
        }
        cap = c;
        dem = d;
        names = new_names;
        count = total;
    }
    Ok(PoweredInstance {
        level: l,
        base: base.clone(),
        n: count,
        vertex_names: names,
        capacity: cap,
        demand: dem,
    })
}

/// Powers a base cut (as a side vector over the base vertices) to level `l`.
pub fn power_solution(s1: &[bool], l: usize) -> Vec<bool> {
    let n = s1.len();
    let pairs = base_pairs(n);
    let mut prev = s1.to_vec();
    for _ in 1..l {
        let inner = prev.len();
        let mut next = s1.to_vec();
        for &(x, y) in &pairs {
            for w in 2..inner {
                let side = if s1[x] == s1[y] {
                    s1[x]
                } else if s1[x] == prev[U] {
                    prev[w]
                } else {
                    !prev[w]
                };
                next.push(side);
            }
        }
        prev = next;
    }
    prev
}

/// Side vector of a subset of `[n]`.
pub fn sides(s: Subset, n: usize) -> Vec<bool> {
    (0..n).map(|v| subset_contains(s, v)).collect()
}

fn separated_by(f: &PairMap, side: &[bool]) -> Rational {
    f.entries
        .iter()
        .filter(|(a, b, _)| side[*a] != side[*b])
        .map(|(_, _, w)| w)
        .sum()
}

/// `(val^n, val^d)` of a cut given as a side vector.
pub fn powered_parts(p: &PoweredInstance, side: &[bool]) -> (Rational, Rational) {
    (separated_by(&p.capacity, side), separated_by(&p.demand, side))
}

/// Minimum `val^n / val^d` over all cuts with positive separated demand.
/// Cuts and their complements are identified by fixing vertex 0 outside.
pub fn powered_optimum(p: &PoweredInstance) -> Result<Rational> {
    if p.n > MAX_ENUMERATED_VERTICES {
        return Err(Error::Capacity(format!("{} vertices exceed {MAX_ENUMERATED_VERTICES}", p.n)));
    }
    let mut best: Option<Rational> = None;
    for s in 0..1u64 << (p.n - 1) {
        let x = s << 1;
        let (num, den) = (p.capacity.separated(x), p.demand.separated(x));
        if den.is_positive() {
            let r = num / den;
            if best.as_ref().map_or(true, |b| r < *b) {
                best = Some(r);
            }
        }
    }
    best.ok_or_else(|| domain!("no cut separates positive demand"))
}

/// Normalized MaxCUT value `|δ(s)| / |E|`.
fn cut_fraction(g: &Graph, s: Subset) -> Rational {
    Rational::new(g.edges_cut(s) as i64, g.num_edges() as i64)
}

fn maxcut_opt(g: &Graph) -> Rational {
    (0..1u64 << g.n()).map(|s| cut_fraction(g, s)).max().unwrap_or_else(Rational::zero)
}

/// Checks `val^n(s*_l) = 1` and `val^d(s*_l) = l·val(s)` exactly, and, when
/// the powered instance is small enough to enumerate, the bound
/// `OPT(I*_l) ≥ 1/(1 + (l−1)·OPT(I))` by brute force.
pub fn verify_power_completeness(g: &Graph, s: Subset, l: usize) -> Result<Verdict> {
    let base = maxcut_to_sparsestcut_base(g)?;
    let p = power_instance(&base, l)?;
    let side = power_solution(&sides(base_solution(s), base.n), l);
    let (num, den) = powered_parts(&p, &side);
    let mut v = Verdict::new();
    v.record("numerator", (!num.is_one()).then(|| format!("val^n(s*_{l}) = {num}, expected 1")));
    let expected = Rational::from_int(l as i64) * cut_fraction(g, s);
    v.record(
        "denominator",
        (den != expected).then(|| format!("val^d(s*_{l}) = {den}, expected {expected}")),
    );
    if p.n <= MAX_ENUMERATED_VERTICES {
        let opt = powered_optimum(&p)?;
        let bound = Rational::one() / (Rational::one() + Rational::from_int(l as i64 - 1) * maxcut_opt(g));
        v.record("soundness", (opt < bound).then(|| format!("OPT(I*_{l}) = {opt} < {bound}")));
    }
    Ok(v)
}

/// Exact treewidth of the supply graph of a powered instance.
pub fn supply_treewidth(p: &PoweredInstance) -> Result<usize> {
    if p.n > DEFAULT_TREEWIDTH_LIMIT {
        return Err(Error::Capacity(format!("{} vertices exceed the treewidth limit", p.n)));
    }
    Ok(treewidth_exact(&p.capacity.support())?.0)
}

/// Fractional reduction from normalized MaxCUT on `[n]` (denominator 1) to
/// SparsestCut on the level-`l` powered instances, with constant source
/// guarantees `C1`, `S1`, `C2 = 1/(l·C1)`, `S2 = 1/(1 + (l−1)S1)` and
/// `M1n = C1`, `M2n = 0`, `M1d = 0`, `M2d = 1`.
pub fn maxcut_to_sparsestcut(
    instances: &[Graph],
    l: usize,
    c1: &Rational,
    s1: &Rational,
) -> Result<FractionalReductionRecord> {
    let n = instances.first().ok_or_else(|| domain!("no instances given"))?.n();
    if !c1.is_positive() {
        return Err(Error::Division(format!("C1 = {c1} must be positive")));
    }
    let powered: Vec<PoweredInstance> = instances
        .iter()
        .map(|g| {
            if g.n() != n {
                return Err(domain!("instances on different vertex sets"));
            }
            power_instance(&maxcut_to_sparsestcut_base(g)?, l)
        })
        .collect::<Result<_>>()?;
    let nl = powered[0].n;
    if nl > MAX_ENUMERATED_VERTICES {
        return Err(Error::Capacity(format!("{nl} powered vertices exceed {MAX_ENUMERATED_VERTICES}")));
    }
    let source = MaxCutProblem::new(n, true, instances.iter().cloned().map(WeightedGraph::unit).collect())?;
    let mut src = ProblemTable::from_problem(&source)?;
    let (rows, cols) = (src.num_instances(), src.num_solutions());
    src.denominators = Some(Matrix::filled(rows, cols, Rational::one()));

    let target = SparsestCutProblem::new(nl, 2, powered.iter().map(|p| p.instance()).collect::<Result<_>>()?)?;
    let tgt = ProblemTable::from_fractional(&target)?;
    let solution_map: Vec<usize> = (0..cols as u64)
        .map(|s| {
            let side = power_solution(&sides(base_solution(s), n + 2), l);
            side.iter().enumerate().filter(|(_, &b)| b).fold(0usize, |x, (v, _)| x | 1 << v)
        })
        .collect();
    let lr = Rational::from_int(l as i64);
    let c2 = Rational::one() / (&lr * c1);
    let s2 = Rational::one() / (Rational::one() + Rational::from_int(l as i64 - 1) * s1);
    Ok(FractionalReductionRecord {
        source: src,
        target: tgt,
        target_complete: true,
        target_opt: None,
        instance_map: (0..rows).collect(),
        solution_map,
        c1: vec![c1.clone(); rows],
        s1: vec![s1.clone(); rows],
        c2: vec![c2; rows],
        s2: vec![s2; rows],
        m1n: Matrix::filled(rows, cols, c1.clone()),
        m2n: Matrix::zeros(rows, cols),
        m1d: Matrix::zeros(rows, cols),
        m2d: Matrix::filled(rows, cols, Rational::one()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::reduction::verify_fractional_reduction;

    #[test]
    fn base_examples() {
        let tri = Graph::complete(3);
        let b = maxcut_to_sparsestcut_base(&tri).unwrap();
        assert_eq!(b.capacity.get(2, U), q(1, 3));
        assert_eq!(b.demand.total(), qi(1));
        assert_eq!(treewidth_exact(&b.capacity.support()).unwrap().0, 2);
        assert!(maxcut_to_sparsestcut_base(&Graph::empty(3)).is_err());
    }

    #[test]
    fn vertex_counts() {
        for n in 4..=5 {
            let g = Graph::path(n - 2);
            for l in 1..=3 {
                let p = power_instance(&maxcut_to_sparsestcut_base(&g).unwrap(), l).unwrap();
                assert_eq!(p.n, powered_vertex_count(n, l));
                assert_eq!(p.vertex_names.len(), p.n);
                assert_eq!(power_solution(&vec![false; n], l).len(), p.n);
            }
        }
        assert_eq!(powered_vertex_count(4, 2), 16);
        assert_eq!(stated_vertex_count(4, 2), 14);
    }

    #[test]
    fn level_one_is_identity() {
        let g = Graph::path(3);
        let b = maxcut_to_sparsestcut_base(&g).unwrap();
        let p = power_instance(&b, 1).unwrap();
        assert_eq!(p.capacity, b.capacity);
        assert_eq!(power_solution(&[true, false, true], 1), vec![true, false, true]);
    }

    #[test]
    fn completeness_single_edge() {
        let g = Graph::path(2);
        for l in 1..=2 {
            for s in 0..4 {
                let v = verify_power_completeness(&g, s, l).unwrap();
                assert!(v.accepted(), "l = {l}, s = {s}: {:?}", v.first_failure());
            }
        }
        let p = power_instance(&maxcut_to_sparsestcut_base(&g).unwrap(), 2).unwrap();
        assert!(supply_treewidth(&p).unwrap() <= 2);
    }

    #[test]
    fn triangle_identities_level_two() {
        let g = Graph::complete(3);
        for s in 0..8 {
            let v = verify_power_completeness(&g, s, 2).unwrap();
            assert!(v.accepted(), "s = {s}: {:?}", v.first_failure());
        }
    }

    #[test]
    fn fractional_record_verifies() {
        let red = maxcut_to_sparsestcut(&[Graph::path(2)], 2, &qi(1), &qi(1)).unwrap();
        let v = verify_fractional_reduction(&red).unwrap();
        assert!(v.accepted(), "{:?}", v.first_failure());
    }
}
