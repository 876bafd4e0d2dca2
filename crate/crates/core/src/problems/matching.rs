//! Matching over a fixed graph: instances are subgraphs, solutions are the
//! perfect matchings of the host graph.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{OptimizationProblem, Sense};
use crate::error::{domain, Result};
use crate::graph::{matching_edges, subset_elems, Graph};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingProblem {
    pub host: Graph,
    pub instances: Vec<Graph>,
    /// Perfect matchings of `host` as mate arrays.
    pub matchings: Vec<Vec<usize>>,
}

impl MatchingProblem {
    pub fn new(host: Graph, instances: Vec<Graph>) -> Result<Self> {
        for h in &instances {
            if h.n() != host.n()
                || h.vertices().iter().any(|&v| !host.has_vertex(v))
                || h.edges().iter().any(|&(a, b)| !host.has_edge(a, b))
            {
                return Err(domain!("instance is not a subgraph of the host graph"));
            }
        }
        let matchings = host.perfect_matchings();
        Ok(MatchingProblem {
            host,
            instances,
            matchings,
        })
    }

    /// All subgraphs: every vertex subset with every subset of its induced edges.
    pub fn all_subgraphs(host: Graph) -> Self {
        let mut instances = Vec::new();
        let vm = host.vertex_mask();
        for vmask in 0..1u64 << host.n() {
            if vmask & !vm != 0 {
                continue;
            }
            let vs = subset_elems(vmask);
            let es: Vec<(usize, usize)> = host
                .edges()
                .iter()
                .copied()
                .filter(|(a, b)| vs.contains(a) && vs.contains(b))
                .collect();
            for emask in 0u64..1 << es.len() {
                let chosen = es.iter().enumerate().filter(|(k, _)| emask >> k & 1 == 1).map(|(_, &e)| e);
                instances.push(Graph::new(host.n(), vs.iter().copied(), chosen).expect("subgraph"));
            }
        }
        Self::new(host, instances).expect("subgraphs of the host")
    }

    /// Spanning subgraphs: all vertices of the host, every edge subset.
    pub fn spanning_subgraphs(host: Graph) -> Self {
        let es = host.edges().to_vec();
        let instances = (0u64..1 << es.len())
            .map(|emask| {
                let chosen = es.iter().enumerate().filter(|(k, _)| emask >> k & 1 == 1).map(|(_, &e)| e);
                Graph::new(host.n(), host.vertices().iter().copied(), chosen).expect("subgraph")
            })
            .collect();
        Self::new(host, instances).expect("subgraphs of the host")
    }

    /// `|S ∩ E(H)|`.
    pub fn value(h: &Graph, mate: &[usize]) -> usize {
        matching_edges(mate).iter().filter(|&&(a, b)| h.has_edge(a, b)).count()
    }
}

pub(crate) fn edges_label(g: &Graph) -> String {
    let es: Vec<String> = g.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
    format!("V{:?} E[{}]", g.vertices(), es.join(","))
}

impl OptimizationProblem for MatchingProblem {
    type Instance = Graph;
    type Solution = Vec<usize>;

    fn name(&self) -> String {
        format!("Matching(host on {} vertices)", self.host.num_vertices())
    }

    fn sense(&self) -> Sense {
        Sense::Max
    }

    fn instances(&self) -> Vec<Graph> {
        self.instances.clone()
    }

    fn solutions(&self) -> Vec<Vec<usize>> {
        self.matchings.clone()
    }

    fn measure(&self, h: &Graph, mate: &Vec<usize>) -> Result<Rational> {
        if h.n() != self.host.n() || mate.len() != self.host.n() {
            return Err(domain!("instance or matching has the wrong vertex universe"));
        }
        let pm = self.host.vertices().iter().all(|&v| {
            let w = mate[v];
            w < mate.len() && w != v && mate[w] == v && self.host.has_edge(v, w)
        });
        if !pm {
            return Err(domain!("not a perfect matching of the host graph"));
        }
        Ok(Rational::from_int(Self::value(h, mate) as i64))
    }

    fn instance_label(&self, h: &Graph) -> String {
        edges_label(h)
    }

    fn solution_label(&self, mate: &Vec<usize>) -> String {
        let es: Vec<String> = matching_edges(mate).iter().map(|(a, b)| format!("{a}-{b}")).collect();
        format!("[{}]", es.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::brute_force_opt;
    use crate::rational::qi;

    #[test]
    fn k4_values() {
        let p = MatchingProblem::all_subgraphs(Graph::complete(4));
        assert_eq!(p.instances.len(), 113);
        let k4 = Graph::complete(4);
        for m in &p.matchings {
            assert_eq!(p.measure(&k4, m).unwrap(), qi(2));
        }
        assert_eq!(brute_force_opt(&p, &k4).unwrap().0, qi(2));
        assert_eq!(MatchingProblem::spanning_subgraphs(k4).instances.len(), 64);
    }

    #[test]
    fn rejects_non_matching() {
        let p = MatchingProblem::spanning_subgraphs(Graph::complete(4));
        assert!(p.measure(&Graph::complete(4), &alloc::vec![1, 0, 2, 3]).is_err());
    }
}
