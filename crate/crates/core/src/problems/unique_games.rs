//! Unique Games on Δ-regular bipartite graphs with partite sets `{0}×[n]`
//! and `{1}×[n]`. Vertex `(side, i)` has index `side·n + i`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{all_words, OptimizationProblem, Sense};
use crate::error::{domain, Result};
use crate::rational::Rational;

/// Edge between left vertex `(0, left)` and right vertex `(1, right)`.
/// `perm` is `π_{(0,left),(1,right)}`: the edge is correctly labeled when
/// `s(0,left) = perm[s(1,right)]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UgEdge {
    pub left: usize,
    pub right: usize,
    pub weight: Rational,
    pub perm: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UgInstance {
    pub n: usize,
    pub q: usize,
    pub delta: usize,
    pub edges: Vec<UgEdge>,
}

fn is_permutation(p: &[usize], q: usize) -> bool {
    let mut seen = vec![false; q];
    p.len() == q
        && p.iter().all(|&x| {
            if x >= q || seen[x] {
                false
            } else {
                seen[x] = true;
                true
            }
        })
}

pub(crate) fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

impl UgInstance {
    /// Builds from one permutation per edge (the reverse is its inverse).
    pub fn new(n: usize, q: usize, delta: usize, mut edges: Vec<UgEdge>) -> Result<Self> {
        edges.sort_by_key(|e| (e.left, e.right));
        let inst = UgInstance { n, q, delta, edges };
        inst.validate()?;
        Ok(inst)
    }

    /// Builds from directed permutation labels keyed by vertex indices
    /// (`side·n + i`); both directions of every edge must be present and
    /// satisfy `π_{i,j} = π_{j,i}^{-1}`.
    pub fn from_directed(
        n: usize,
        q: usize,
        delta: usize,
        weights: &[(usize, usize, Rational)],
        perms: &BTreeMap<(usize, usize), Vec<usize>>,
    ) -> Result<Self> {
        let mut edges = Vec::new();
        for &(i, j, ref w) in weights {
            let fwd = perms
                .get(&(i, n + j))
                .ok_or_else(|| domain!("missing permutation for ({i}, {})", n + j))?;
            let bwd = perms
                .get(&(n + j, i))
                .ok_or_else(|| domain!("missing permutation for ({}, {i})", n + j))?;
            if !is_permutation(fwd, q) || !is_permutation(bwd, q) {
                return Err(domain!("edge ({i}, {j}) carries a non-permutation"));
            }
            if invert(fwd) != *bwd {
                return Err(domain!("pi_(0,{i}),(1,{j}) is not the inverse of pi_(1,{j}),(0,{i})"));
            }
            edges.push(UgEdge {
                left: i,
                right: j,
                weight: w.clone(),
                perm: fwd.clone(),
            });
        }
        Self::new(n, q, delta, edges)
    }

    pub fn validate(&self) -> Result<()> {
        let mut deg = vec![0usize; 2 * self.n];
        let mut seen = BTreeMap::new();
        for e in &self.edges {
            if e.left >= self.n || e.right >= self.n {
                return Err(domain!("edge ({}, {}) outside [{}]", e.left, e.right, self.n));
            }
            if seen.insert((e.left, e.right), ()).is_some() {
                return Err(domain!("duplicate edge ({}, {})", e.left, e.right));
            }
            if e.weight.is_negative() {
                return Err(domain!("negative weight on edge ({}, {})", e.left, e.right));
            }
            if !is_permutation(&e.perm, self.q) {
                return Err(domain!("edge ({}, {}) carries a non-permutation", e.left, e.right));
            }
            deg[e.left] += 1;
            deg[self.n + e.right] += 1;
        }
        if let Some(v) = deg.iter().position(|&d| d != self.delta) {
            return Err(domain!("vertex {v} has degree {}, expected {}", deg[v], self.delta));
        }
        if !self.total_weight().is_positive() {
            return Err(domain!("total edge weight must be positive"));
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        2 * self.n
    }

    pub fn total_weight(&self) -> Rational {
        self.edges.iter().map(|e| &e.weight).sum()
    }

    /// `π_{a,b}` for vertex indices `a`, `b` joined by an edge.
    pub fn perm(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let (l, r, fwd) = if a < self.n { (a, b.checked_sub(self.n)?, true) } else { (b, a - self.n, false) };
        let e = self.edges.iter().find(|e| e.left == l && e.right == r)?;
        Some(if fwd { e.perm.clone() } else { invert(&e.perm) })
    }

    pub fn is_correct(&self, e: &UgEdge, s: &[usize]) -> bool {
        s[e.left] == e.perm[s[self.n + e.right]]
    }

    /// Weight of correctly labeled edges.
    pub fn correct_weight(&self, s: &[usize]) -> Rational {
        self.edges.iter().filter(|e| self.is_correct(e, s)).map(|e| &e.weight).sum()
    }

    pub fn value(&self, s: &[usize]) -> Rational {
        self.correct_weight(s) / self.total_weight()
    }

    /// Neighbours of vertex `v` (vertex indices) with the edge weights.
    pub fn neighbors(&self, v: usize) -> Vec<(usize, Rational)> {
        let mut out = Vec::new();
        for e in &self.edges {
            if v == e.left {
                out.push((self.n + e.right, e.weight.clone()));
            } else if v == self.n + e.right {
                out.push((e.left, e.weight.clone()));
            }
        }
        out
    }
}

/// The 16 unit-weight instances on `K_{2,2}` with `q = 2`: bit `e` of the
/// index picks the swap (set) or the identity (clear) on edge `e`, edges
/// ordered `(0,0), (0,1), (1,0), (1,1)`.
pub fn k22_family() -> Vec<UgInstance> {
    let perms = [vec![0, 1], vec![1, 0]];
    (0..16)
        .map(|mask: usize| {
            let edges = (0..4)
                .map(|e| UgEdge {
                    left: e / 2,
                    right: e % 2,
                    weight: Rational::one(),
                    perm: perms[(mask >> e) & 1].clone(),
                })
                .collect();
            UgInstance::new(2, 2, 2, edges).expect("K_{2,2} is 2-regular")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniqueGamesProblem {
    pub n: usize,
    pub q: usize,
    pub delta: usize,
    pub instances: Vec<UgInstance>,
}

impl UniqueGamesProblem {
    pub fn new(n: usize, q: usize, delta: usize, instances: Vec<UgInstance>) -> Result<Self> {
        if instances.iter().any(|i| i.n != n || i.q != q || i.delta != delta) {
            return Err(domain!("instance parameters differ from the problem's"));
        }
        Ok(UniqueGamesProblem { n, q, delta, instances })
    }
}

impl OptimizationProblem for UniqueGamesProblem {
    type Instance = UgInstance;
    type Solution = Vec<usize>;

    fn name(&self) -> String {
        format!("UniqueGames[{}]({}, {})", self.delta, self.n, self.q)
    }

    fn sense(&self) -> Sense {
        Sense::Max
    }

    fn instances(&self) -> Vec<UgInstance> {
        self.instances.clone()
    }

    fn solutions(&self) -> Vec<Vec<usize>> {
        all_words(2 * self.n, self.q)
    }

    fn measure(&self, inst: &UgInstance, s: &Vec<usize>) -> Result<Rational> {
        if s.len() != 2 * self.n || s.iter().any(|&x| x >= self.q) {
            return Err(domain!("labeling {s:?} is not a map into [{}]", self.q));
        }
        if inst.n != self.n || inst.q != self.q {
            return Err(domain!("foreign instance"));
        }
        Ok(inst.value(s))
    }

    fn instance_label(&self, inst: &UgInstance) -> String {
        let es: Vec<String> = inst
            .edges
            .iter()
            .map(|e| format!("({},{}):{}:{:?}", e.left, e.right, e.weight, e.perm))
            .collect();
        es.join(" ")
    }

    fn solution_label(&self, s: &Vec<usize>) -> String {
        s.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join("")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn square(q_: usize) -> Vec<UgEdge> {
        let id: Vec<usize> = (0..q_).collect();
        let mut sw = id.clone();
        sw.reverse();
        vec![
            UgEdge { left: 0, right: 0, weight: qi(1), perm: id.clone() },
            UgEdge { left: 0, right: 1, weight: qi(1), perm: sw.clone() },
            UgEdge { left: 1, right: 0, weight: qi(1), perm: id },
            UgEdge { left: 1, right: 1, weight: qi(1), perm: sw },
        ]
    }

    #[test]
    fn value_counts_correct_edges() {
        let i = UgInstance::new(2, 2, 2, square(2)).unwrap();
        // s(0,0)=0, s(0,1)=0, s(1,0)=0, s(1,1)=1
        assert_eq!(i.value(&[0, 0, 0, 1]), qi(1));
        assert_eq!(i.value(&[0, 0, 0, 0]), q(1, 2));
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut e = square(2);
        e.pop();
        assert!(UgInstance::new(2, 2, 2, e).is_err());
        let mut perms = BTreeMap::new();
        perms.insert((0, 1), vec![1, 0]);
        perms.insert((1, 0), vec![0, 1]);
        assert!(UgInstance::from_directed(1, 2, 1, &[(0, 0, qi(1))], &perms).is_err());
        perms.insert((1, 0), vec![1, 0]);
        assert!(UgInstance::from_directed(1, 2, 1, &[(0, 0, qi(1))], &perms).is_ok());
    }
}
