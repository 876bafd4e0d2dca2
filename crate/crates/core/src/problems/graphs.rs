//! IndependentSet, VertexCover and MaxCUT: uniform over all graphs on `[n]`,
//! over induced subgraphs of a fixed graph, and weighted MaxCUT.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{subset_label, OptimizationProblem, Sense};
use crate::error::{domain, Result};
use crate::graph::{subset_contains, subset_elems, Graph, Subset};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GraphObjective {
    IndependentSet,
    VertexCover,
    MaxCut,
}

impl GraphObjective {
    pub fn sense(self) -> Sense {
        match self {
            GraphObjective::VertexCover => Sense::Min,
            _ => Sense::Max,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphObjective::IndependentSet => "IndependentSet",
            GraphObjective::VertexCover => "VertexCover",
            GraphObjective::MaxCut => "MaxCUT",
        }
    }
}

/// Uniform measures on a vertex set `x ⊆ [n]`:
/// IS `|X∩V(G)| − |E(G[X])|`, VC `|X∩V(G)| + |E(G∖X)|`, MaxCUT `|δ_G(X)|`.
pub fn graph_value(kind: GraphObjective, g: &Graph, x: Subset) -> i64 {
    let inside = (x & g.vertex_mask()).count_ones() as i64;
    match kind {
        GraphObjective::IndependentSet => inside - g.edges_inside(x) as i64,
        GraphObjective::VertexCover => {
            let uncovered = g
                .edges()
                .iter()
                .filter(|&&(a, b)| !subset_contains(x, a) && !subset_contains(x, b))
                .count();
            inside + uncovered as i64
        }
        GraphObjective::MaxCut => g.edges_cut(x) as i64,
    }
}

/// All graphs with vertex set contained in `[n]`, ordered by vertex mask and
/// then by edge mask.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for vmask in 0u64..(1u64 << n) {
        let vs = subset_elems(vmask);
        let pairs: Vec<(usize, usize)> = vs
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| vs[i + 1..].iter().map(move |&b| (a, b)))
            .collect();
        for emask in 0u64..(1u64 << pairs.len()) {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| emask >> k & 1 == 1)
                .map(|(_, &e)| e);
            out.push(Graph::new(n, vs.iter().copied(), edges).expect("valid by construction"));
        }
    }
    out
}

fn graph_label(g: &Graph) -> String {
    let es: Vec<String> = g.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
    format!("V{} E[{}]", subset_label(g.vertex_mask()), es.join(","))
}

/// IS / VC / MaxCUT with instances graphs on vertex subsets of `[n]` and
/// solutions all subsets of `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformGraphProblem {
    pub kind: GraphObjective,
    pub n: usize,
    pub instances: Vec<Graph>,
}

impl UniformGraphProblem {
    /// Every graph on a subset of `[n]`; only sensible for `n ≤ 5`.
    pub fn all(kind: GraphObjective, n: usize) -> Self {
        UniformGraphProblem {
            kind,
            n,
            instances: all_graphs(n),
        }
    }

    pub fn with_instances(kind: GraphObjective, n: usize, instances: Vec<Graph>) -> Result<Self> {
        if let Some(g) = instances.iter().find(|g| g.n() != n) {
            return Err(domain!("instance on [{}] given for n = {n}", g.n()));
        }
        Ok(UniformGraphProblem { kind, n, instances })
    }
}

impl OptimizationProblem for UniformGraphProblem {
    type Instance = Graph;
    type Solution = Subset;

    fn name(&self) -> String {
        format!("{}({})", self.kind.name(), self.n)
    }

    fn sense(&self) -> Sense {
        self.kind.sense()
    }

    fn instances(&self) -> Vec<Graph> {
        self.instances.clone()
    }

    fn solutions(&self) -> Vec<Subset> {
        (0..1u64 << self.n).collect()
    }

    fn measure(&self, g: &Graph, x: &Subset) -> Result<Rational> {
        if g.n() != self.n {
            return Err(domain!("graph lives on [{}], problem on [{}]", g.n(), self.n));
        }
        if *x >> self.n != 0 {
            return Err(domain!("solution {} is not a subset of [{}]", subset_label(*x), self.n));
        }
        Ok(Rational::from_int(graph_value(self.kind, g, *x)))
    }

    fn instance_label(&self, g: &Graph) -> String {
        graph_label(g)
    }

    fn solution_label(&self, x: &Subset) -> String {
        subset_label(*x)
    }
}

/// The non-uniform problems over a fixed graph `G`: instances are induced
/// subgraphs (given by vertex masks); IS solutions are independent sets of
/// `G`, VC solutions are vertex covers of `G`, MaxCUT solutions are all
/// subsets of `V(G)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedGraphProblem {
    pub kind: GraphObjective,
    pub graph: Graph,
}

impl OptimizationProblem for InducedGraphProblem {
    type Instance = Subset;
    type Solution = Subset;

    fn name(&self) -> String {
        format!("{}{{G}}", self.kind.name())
    }

    fn sense(&self) -> Sense {
        self.kind.sense()
    }

    fn instances(&self) -> Vec<Subset> {
        let vm = self.graph.vertex_mask();
        (0..1u64 << self.graph.n()).filter(|h| h & !vm == 0).collect()
    }

    fn solutions(&self) -> Vec<Subset> {
        let vm = self.graph.vertex_mask();
        (0..1u64 << self.graph.n())
            .filter(|x| x & !vm == 0)
            .filter(|&x| match self.kind {
                GraphObjective::IndependentSet => self.graph.is_independent(x),
                GraphObjective::VertexCover => self.graph.is_vertex_cover(x),
                GraphObjective::MaxCut => true,
            })
            .collect()
    }

    fn measure(&self, h: &Subset, x: &Subset) -> Result<Rational> {
        let vm = self.graph.vertex_mask();
        if h & !vm != 0 || x & !vm != 0 {
            return Err(domain!("instance or solution leaves V(G)"));
        }
        let v = match self.kind {
            GraphObjective::IndependentSet | GraphObjective::VertexCover => {
                let feasible = match self.kind {
                    GraphObjective::IndependentSet => self.graph.is_independent(*x),
                    _ => self.graph.is_vertex_cover(*x),
                };
                if !feasible {
                    return Err(domain!("{} is not feasible", subset_label(*x)));
                }
                (x & h).count_ones() as i64
            }
            GraphObjective::MaxCut => {
                let sub = self.graph.induced(&subset_elems(*h));
                sub.edges_cut(*x) as i64
            }
        };
        Ok(Rational::from_int(v))
    }

    fn instance_label(&self, h: &Subset) -> String {
        subset_label(*h)
    }

    fn solution_label(&self, x: &Subset) -> String {
        subset_label(*x)
    }
}

/// A graph with one nonnegative weight per edge (parallel to `graph.edges()`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub graph: Graph,
    pub weights: Vec<Rational>,
}

impl WeightedGraph {
    pub fn new(graph: Graph, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != graph.num_edges() {
            return Err(domain!("{} weights for {} edges", weights.len(), graph.num_edges()));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(domain!("negative edge weight"));
        }
        Ok(WeightedGraph { graph, weights })
    }

    pub fn unit(graph: Graph) -> Self {
        let weights = alloc::vec![Rational::one(); graph.num_edges()];
        WeightedGraph { graph, weights }
    }

    pub fn total_weight(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn cut_weight(&self, x: Subset) -> Rational {
        self.graph
            .edges()
            .iter()
            .zip(&self.weights)
            .filter(|(&(a, b), _)| subset_contains(x, a) != subset_contains(x, b))
            .map(|(_, w)| w)
            .sum()
    }
}

/// Weighted MaxCUT over an explicit instance list on `[n]`; with
/// `normalized` the measure is the cut fraction `w(δ(X)) / w(E)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxCutProblem {
    pub n: usize,
    pub normalized: bool,
    pub instances: Vec<WeightedGraph>,
}

impl MaxCutProblem {
    pub fn new(n: usize, normalized: bool, instances: Vec<WeightedGraph>) -> Result<Self> {
        for wg in &instances {
            if wg.graph.n() != n {
                return Err(domain!("instance on [{}] given for n = {n}", wg.graph.n()));
            }
            if normalized && !wg.total_weight().is_positive() {
                return Err(domain!("normalized MaxCUT needs positive total weight"));
            }
        }
        Ok(MaxCutProblem {
            n,
            normalized,
            instances,
        })
    }

    pub fn value(&self, wg: &WeightedGraph, x: Subset) -> Rational {
        let cut = wg.cut_weight(x);
        if self.normalized {
            cut / wg.total_weight()
        } else {
            cut
        }
    }
}

impl OptimizationProblem for MaxCutProblem {
    type Instance = WeightedGraph;
    type Solution = Subset;

    fn name(&self) -> String {
        format!("MaxCUT({})", self.n)
    }

    fn sense(&self) -> Sense {
        Sense::Max
    }

    fn instances(&self) -> Vec<WeightedGraph> {
        self.instances.clone()
    }

    fn solutions(&self) -> Vec<Subset> {
        (0..1u64 << self.n).collect()
    }

    fn measure(&self, wg: &WeightedGraph, x: &Subset) -> Result<Rational> {
        if wg.graph.n() != self.n || *x >> self.n != 0 {
            return Err(domain!("instance or solution outside [{}]", self.n));
        }
        Ok(self.value(wg, *x))
    }

    fn instance_label(&self, wg: &WeightedGraph) -> String {
        graph_label(&wg.graph)
    }

    fn solution_label(&self, x: &Subset) -> String {
        subset_label(*x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::subset_from;
    use crate::problems::brute_force_opt;
    use crate::rational::qi;

    #[test]
    fn spec_values() {
        let edge = Graph::on_all(2, [(0, 1)]).unwrap();
        let mc = UniformGraphProblem::all(GraphObjective::MaxCut, 2);
        assert_eq!(mc.measure(&edge, &subset_from([0])).unwrap(), qi(1));
        let is = UniformGraphProblem::all(GraphObjective::IndependentSet, 2);
        assert_eq!(is.measure(&edge, &subset_from([0, 1])).unwrap(), qi(1));
        let vc = UniformGraphProblem::all(GraphObjective::VertexCover, 2);
        assert_eq!(brute_force_opt(&vc, &edge).unwrap().0, qi(1));
        let c5 = UniformGraphProblem::with_instances(GraphObjective::MaxCut, 5, alloc::vec![Graph::cycle(5)]).unwrap();
        assert_eq!(brute_force_opt(&c5, &Graph::cycle(5)).unwrap().0, qi(4));
    }

    #[test]
    fn graph_counts() {
        assert_eq!(all_graphs(2).len(), 1 + 2 + 2);
        assert_eq!(all_graphs(4).len(), 113);
    }

    #[test]
    fn foreign_solution_rejected() {
        let p = UniformGraphProblem::all(GraphObjective::MaxCut, 2);
        assert!(p.measure(&Graph::path(2), &subset_from([3])).is_err());
        let ip = InducedGraphProblem {
            kind: GraphObjective::IndependentSet,
            graph: Graph::path(3),
        };
        assert!(ip.measure(&0b111, &0b011).is_err());
        assert_eq!(ip.measure(&0b111, &0b101).unwrap(), qi(2));
    }
}
