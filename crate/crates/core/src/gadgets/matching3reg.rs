//! Matching over `K_{2n}` reduces to Matching over the 3-regular graph
//! `D_{2n}`: every vertex `v` becomes an odd cycle `C^v` on the vertices
//! `[v, u]`, `u ≠ v`, and every edge `{u, v}` becomes `([u, v], [v, u])`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::problems::MatchingProblem;
use crate::rational::Rational;
use crate::reduction::ReductionRecord;
use crate::table::ProblemTable;

/// Order of the vertices `[v, u]` around each cycle `C^v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleOrder {
    /// `u` ascending, the default.
    Ascending,
    /// `u` descending, used to check order independence.
    Descending,
}

/// Vertex numbering of `D_{2n}`: `[v, u]` gets `v·(2n−1) + pos`, where
/// `pos` is the position of `u` around the cycle `C^v`.
#[derive(Clone, Debug)]
pub struct D2n {
    pub n: usize,
    pub order: CycleOrder,
    pub graph: Graph,
}

impl D2n {
    pub fn new(n: usize, order: CycleOrder) -> Result<Self> {
        if n < 2 {
            return Err(domain!("D_2n needs n >= 2, got {n}"));
        }
        if 2 * n * (2 * n - 1) > 64 {
            return Err(Error::Capacity(alloc::format!("D_{} has more than 64 vertices", 2 * n)));
        }
        let mut d = D2n {
            n,
            order,
            graph: Graph::empty(0),
        };
        let k = 2 * n;
        let mut edges = Vec::new();
        for v in 0..k {
            let cyc = d.cycle(v);
            for i in 0..cyc.len() {
                edges.push((cyc[i], cyc[(i + 1) % cyc.len()]));
            }
            for u in v + 1..k {
                edges.push((d.vertex(v, u), d.vertex(u, v)));
            }
        }
        d.graph = Graph::on_all(k * (k - 1), edges)?;
        Ok(d)
    }

    fn others(&self, v: usize) -> Vec<usize> {
        let mut us: Vec<usize> = (0..2 * self.n).filter(|&u| u != v).collect();
        if self.order == CycleOrder::Descending {
            us.reverse();
        }
        us
    }

    /// Index of `[v, u]`.
    pub fn vertex(&self, v: usize, u: usize) -> usize {
        let pos = self.others(v).iter().position(|&x| x == u).expect("u != v");
        v * (2 * self.n - 1) + pos
    }

    /// The vertices of `C^v` in cycle order.
    pub fn cycle(&self, v: usize) -> Vec<usize> {
        (0..2 * self.n - 1).map(|p| v * (2 * self.n - 1) + p).collect()
    }

    /// `H*`: the cycles of the vertices of `H` plus one cross edge per edge of `H`.
    pub fn map_instance(&self, h: &Graph) -> Graph {
        let mut verts = Vec::new();
        let mut edges = Vec::new();
        for &v in h.vertices() {
            let cyc = self.cycle(v);
            verts.extend(cyc.iter().copied());
            for i in 0..cyc.len() {
                edges.push((cyc[i], cyc[(i + 1) % cyc.len()]));
            }
        }
        for &(a, b) in h.edges() {
            edges.push((self.vertex(a, b), self.vertex(b, a)));
        }
        Graph::new(self.graph.n(), verts, edges).expect("subgraph of D_2n")
    }

    /// `M*`: the cross edges of `M` completed along each cycle.
    pub fn map_solution(&self, mate: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.graph.n()).collect();
        for v in 0..2 * self.n {
            let u = mate[v];
            let (x, y) = (self.vertex(v, u), self.vertex(u, v));
            out[x] = y;
            out[y] = x;
            // The rest of the odd cycle is a path starting after [v, u].
            let cyc = self.cycle(v);
            let start = cyc.iter().position(|&c| c == x).expect("on cycle");
            let len = cyc.len();
            for k in 0..(len - 1) / 2 {
                let a = cyc[(start + 1 + 2 * k) % len];
                let b = cyc[(start + 2 + 2 * k) % len];
                out[a] = b;
                out[b] = a;
            }
        }
        out
    }
}

/// The graph `D_{2n}` with cycles ordered by ascending `u`.
pub fn d2n_graph(n: usize) -> Result<Graph> {
    Ok(D2n::new(n, CycleOrder::Ascending)?.graph)
}

/// Largest `instances × perfect matchings` product for which the target
/// table is built over all perfect matchings of `D_{2n}`.
const FULL_TARGET_LIMIT: usize = 2_000_000;

/// Builds `D_{2n}` and the reduction record from Matching over all
/// subgraphs of `K_{2n}` with guarantees `C(H) = ⌊|V(H)|/2⌋ + (1−ε)/2` and
/// `S = OPT`, `M1 = 𝟙`, `M2 = 0`.
pub fn build_matching_3reg(n: usize, eps: &Rational) -> Result<(Graph, ReductionRecord)> {
    build_matching_3reg_ordered(n, eps, CycleOrder::Ascending)
}

pub fn build_matching_3reg_ordered(n: usize, eps: &Rational, order: CycleOrder) -> Result<(Graph, ReductionRecord)> {
    if n > 3 {
        let _ = D2n::new(n, order)?;
        return Err(Error::Capacity(alloc::format!(
            "the record enumerates all subgraphs of K_{}; supported for n <= 3",
            2 * n
        )));
    }
    let d = D2n::new(n, order)?;
    let source = MatchingProblem::all_subgraphs(Graph::complete(2 * n));
    let src = ProblemTable::from_problem(&source)?;
    let half = (Rational::one() - eps) / Rational::from_int(2);
    let guarantee = |h: &Graph| Rational::from_int((h.num_vertices() / 2) as i64) + &half;

    let images: Vec<Graph> = source.instances.iter().map(|h| d.map_instance(h)).collect();
    let sol_images: Vec<Vec<usize>> = source.matchings.iter().map(|m| d.map_solution(m)).collect();

    let host_pms = d.graph.perfect_matchings();
    let full = images.len().saturating_mul(host_pms.len()) <= FULL_TARGET_LIMIT;
    let target_problem = MatchingProblem {
        host: d.graph.clone(),
        instances: images.clone(),
        matchings: if full { host_pms.clone() } else { sol_images.clone() },
    };
    let tgt = ProblemTable::from_problem(&target_problem)?;
    let solution_map: Vec<usize> = if full {
        let index: BTreeMap<&Vec<usize>, usize> = host_pms.iter().enumerate().map(|(i, m)| (m, i)).collect();
        sol_images
            .iter()
            .map(|m| index.get(m).copied().ok_or_else(|| domain!("image is not a perfect matching of D_2n")))
            .collect::<Result<_>>()?
    } else {
        (0..sol_images.len()).collect()
    };
    let target_opt = if full {
        None
    } else {
        Some(optima_by_edge_masks(&d.graph, &images, &host_pms))
    };
    let target_optima: Vec<Rational> = match &target_opt {
        Some(o) => o.clone(),
        None => tgt.optima()?,
    };

    let (rows, cols) = (src.num_instances(), src.num_solutions());
    let record = ReductionRecord {
        c1: source.instances.iter().map(&guarantee).collect(),
        s1: src.optima()?,
        c2: images.iter().map(&guarantee).collect(),
        s2: target_optima,
        source: src,
        target: tgt,
        target_complete: full,
        target_opt,
        instance_map: (0..rows).collect(),
        solution_map,
        m1: Matrix::filled(rows, cols, Rational::one()),
        m2: Matrix::zeros(rows, cols),
    };
    Ok((d.graph, record))
}

fn optima_by_edge_masks(host: &Graph, images: &[Graph], pms: &[Vec<usize>]) -> Vec<Rational> {
    let index: BTreeMap<(usize, usize), usize> = host.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mask_of = |edges: &mut dyn Iterator<Item = (usize, usize)>| -> u128 {
        edges.fold(0u128, |m, e| m | 1u128 << index[&e])
    };
    let pm_masks: Vec<u128> = pms
        .iter()
        .map(|m| mask_of(&mut crate::graph::matching_edges(m).into_iter()))
        .collect();
    images
        .iter()
        .map(|h| {
            let hm = mask_of(&mut h.edges().iter().copied());
            let best = pm_masks.iter().map(|p| (p & hm).count_ones()).max().unwrap_or(0);
            Rational::from_int(best as i64)
        })
        .collect()
}

/// `val_{H*}(M*)` computed directly.
pub fn target_value(d: &D2n, h: &Graph, mate: &[usize]) -> usize {
    MatchingProblem::value(&d.map_instance(h), &d.map_solution(mate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::rational::qi;
    use crate::reduction::verify_reduction;

    #[test]
    fn d2n_is_cubic() {
        for n in 2..=4 {
            let g = d2n_graph(n).unwrap();
            assert_eq!(g.num_vertices(), 2 * n * (2 * n - 1));
            assert!(g.vertices().iter().all(|&v| g.degree(v) == 3));
        }
        assert!(d2n_graph(1).is_err());
    }

    #[test]
    fn solution_images_are_perfect_matchings() {
        let d = D2n::new(3, CycleOrder::Ascending).unwrap();
        for m in Graph::complete(6).perfect_matchings() {
            let img = d.map_solution(&m);
            assert!((0..img.len()).all(|v| img[v] != v && img[img[v]] == v && d.graph.has_edge(v, img[v])));
        }
    }

    #[test]
    fn value_examples() {
        let d = D2n::new(2, CycleOrder::Ascending).unwrap();
        let m = vec![1, 0, 3, 2];
        assert_eq!(target_value(&d, &Graph::complete(4), &m), 6);
        let single = Graph::new(4, [0, 1], [(0, 1)]).unwrap();
        assert_eq!(target_value(&d, &single, &m), 3);
    }

    #[test]
    fn record_verifies_for_both_orders() {
        for order in [CycleOrder::Ascending, CycleOrder::Descending] {
            let (_, red) = build_matching_3reg_ordered(2, &qi(0), order).unwrap();
            assert!(red.target_complete);
            let v = verify_reduction(&red).unwrap();
            assert!(v.accepted(), "{:?}", v.first_failure());
        }
    }
}
