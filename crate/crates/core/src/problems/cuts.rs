//! SparsestCut (fractional) and BalancedSeparator.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{subset_label, FractionalProblem, OptimizationProblem, Sense};
use crate::error::{domain, Result};
use crate::graph::{subset_contains, Graph, Subset};
use crate::matrix::Matrix;
use crate::rational::{common_scale, Rational};
use crate::treewidth::treewidth_exact;

/// Nonnegative function on unordered pairs of `[n]`, stored sparsely as
/// sorted `(i, j, value)` triples with `i < j` and `value > 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairMap {
    pub n: usize,
    pub entries: Vec<(usize, usize, Rational)>,
}

impl PairMap {
    pub fn new(n: usize) -> Self {
        PairMap { n, entries: Vec::new() }
    }

    pub fn from_entries(n: usize, items: impl IntoIterator<Item = (usize, usize, Rational)>) -> Result<Self> {
        let mut m = PairMap::new(n);
        for (i, j, v) in items {
            m.add(i, j, v)?;
        }
        Ok(m)
    }

    fn key(i: usize, j: usize) -> (usize, usize) {
        (i.min(j), i.max(j))
    }

    fn position(&self, i: usize, j: usize) -> core::result::Result<usize, usize> {
        let k = Self::key(i, j);
        self.entries.binary_search_by(|(a, b, _)| (*a, *b).cmp(&k))
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        match self.position(i, j) {
            Ok(p) => self.entries[p].2.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Adds `v` to the value on `{i, j}`.
    pub fn add(&mut self, i: usize, j: usize, v: Rational) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(domain!("pair ({i}, {j}) is not an edge of K_{}", self.n));
        }
        if v.is_negative() {
            return Err(domain!("negative value {v} on ({i}, {j})"));
        }
        let (a, b) = Self::key(i, j);
        match self.position(a, b) {
            Ok(p) => self.entries[p].2 += v,
            Err(p) => {
                if !v.is_zero() {
                    self.entries.insert(p, (a, b, v));
                }
            }
        }
        Ok(())
    }

    /// `Σ_{i∈s, j∉s} f(i, j)`.
    pub fn separated(&self, s: Subset) -> Rational {
        self.entries
            .iter()
            .filter(|(a, b, _)| subset_contains(s, *a) != subset_contains(s, *b))
            .map(|(_, _, v)| v)
            .sum()
    }

    pub fn total(&self) -> Rational {
        self.entries.iter().map(|(_, _, v)| v).sum()
    }

    /// `[n]_f`: the graph on `[n]` of pairs with positive value.
    pub fn support(&self) -> Graph {
        Graph::on_all(self.n, self.entries.iter().map(|&(a, b, _)| (a, b))).expect("pairs are valid")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsestCutInstance {
    pub n: usize,
    pub demand: PairMap,
    pub capacity: PairMap,
    /// Bound `k` on the treewidth of the supply graph `[n]_c`.
    pub k: usize,
}

impl SparsestCutInstance {
    /// Checks `tw([n]_c) ≤ k` exactly (capacity error beyond 16 vertices).
    pub fn new(demand: PairMap, capacity: PairMap, k: usize) -> Result<Self> {
        let inst = Self::new_unverified(demand, capacity, k)?;
        let (w, _) = treewidth_exact(&inst.capacity.support())?;
        if w > k {
            return Err(domain!("supply graph has treewidth {w} > {k}"));
        }
        Ok(inst)
    }

    /// Skips the treewidth check (for instances too large for the exact DP).
    pub fn new_unverified(demand: PairMap, capacity: PairMap, k: usize) -> Result<Self> {
        if demand.n != capacity.n {
            return Err(domain!("demand on [{}], capacity on [{}]", demand.n, capacity.n));
        }
        Ok(SparsestCutInstance {
            n: demand.n,
            demand,
            capacity,
            k,
        })
    }

    /// `(val^n, val^d)`: separated capacity and separated demand.
    pub fn parts(&self, s: Subset) -> (Rational, Rational) {
        (self.capacity.separated(s), self.demand.separated(s))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsestCutProblem {
    pub n: usize,
    pub k: usize,
    pub instances: Vec<SparsestCutInstance>,
}

impl SparsestCutProblem {
    pub fn new(n: usize, k: usize, instances: Vec<SparsestCutInstance>) -> Result<Self> {
        if instances.iter().any(|i| i.n != n) {
            return Err(domain!("instance size differs from n = {n}"));
        }
        Ok(SparsestCutProblem { n, k, instances })
    }
}

impl FractionalProblem for SparsestCutProblem {
    type Instance = SparsestCutInstance;
    type Solution = Subset;

    fn name(&self) -> String {
        format!("SparsestCut({}, {})", self.n, self.k)
    }

    fn sense(&self) -> Sense {
        Sense::Min
    }

    fn instances(&self) -> Vec<SparsestCutInstance> {
        self.instances.clone()
    }

    fn solutions(&self) -> Vec<Subset> {
        (0..1u64 << self.n).collect()
    }

    fn measure_parts(&self, inst: &SparsestCutInstance, s: &Subset) -> Result<(Rational, Rational)> {
        if inst.n != self.n || *s >> self.n != 0 {
            return Err(domain!("instance or cut outside [{}]", self.n));
        }
        Ok(inst.parts(*s))
    }

    fn instance_label(&self, inst: &SparsestCutInstance) -> String {
        format!("c:{} d:{}", inst.capacity.entries.len(), inst.demand.entries.len())
    }

    fn solution_label(&self, s: &Subset) -> String {
        subset_label(*s)
    }
}

/// BalancedSeparator for a fixed ordered demand matrix `d`. Instances are
/// capacities on `E(K_n)`; solutions are the cuts separating at least `D/4`,
/// with `D = ½ Σ_{i,j} d(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedSeparatorProblem {
    pub n: usize,
    pub demand: Matrix,
    pub instances: Vec<PairMap>,
    pub balanced: Vec<Subset>,
}

impl BalancedSeparatorProblem {
    pub fn new(demand: Matrix, instances: Vec<PairMap>) -> Result<Self> {
        let n = demand.rows();
        if demand.cols() != n || !demand.is_nonnegative() {
            return Err(domain!("demand must be a nonnegative square matrix"));
        }
        if n > 24 {
            return Err(crate::error::Error::Capacity(format!("{n} vertices exceed the enumeration limit 24")));
        }
        if instances.iter().any(|c| c.n != n) {
            return Err(domain!("capacity on a different vertex count"));
        }
        let balanced = Self::balanced_cuts(&demand);
        Ok(BalancedSeparatorProblem {
            n,
            demand,
            instances,
            balanced,
        })
    }

    /// Cuts separating at least `D/4`. Demands are scaled to integers when
    /// they fit, so the `2^n` scan touches only the nonzero entries.
    fn balanced_cuts(d: &Matrix) -> Vec<Subset> {
        let n = d.rows();
        let mut pos = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && !d.get(i, j).is_zero() {
                    pos.push((i, j));
                    vals.push(d.get(i, j).clone());
                }
            }
        }
        let total = Self::total_demand_of(d);
        vals.push(total.clone());
        match common_scale(&vals) {
            Some((ints, _)) => {
                let target = ints[ints.len() - 1];
                (0..1u64 << n)
                    .filter(|&s| {
                        let sep: i128 = pos
                            .iter()
                            .zip(&ints)
                            .filter(|((i, j), _)| subset_contains(s, *i) && !subset_contains(s, *j))
                            .map(|(_, w)| w)
                            .sum();
                        4 * sep >= target
                    })
                    .collect()
            }
            None => {
                let quarter = total / Rational::from_int(4);
                (0..1u64 << n).filter(|&s| Self::separated_of(d, s) >= quarter).collect()
            }
        }
    }

    fn total_demand_of(d: &Matrix) -> Rational {
        let all: Rational = (0..d.rows()).flat_map(|i| d.row(i).iter()).sum();
        all / Rational::from_int(2)
    }

    fn separated_of(d: &Matrix, s: Subset) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..d.rows() {
            if !subset_contains(s, i) {
                continue;
            }
            for j in 0..d.cols() {
                if !subset_contains(s, j) && !d.get(i, j).is_zero() {
                    acc += d.get(i, j);
                }
            }
        }
        acc
    }

    pub fn total_demand(&self) -> Rational {
        Self::total_demand_of(&self.demand)
    }

    pub fn separated_demand(&self, s: Subset) -> Rational {
        Self::separated_of(&self.demand, s)
    }

    /// The demand graph `[n]_d` (pairs with positive demand in either order).
    pub fn demand_graph(&self) -> Graph {
        let mut es = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.demand.get(i, j).is_positive() || self.demand.get(j, i).is_positive() {
                    es.push((i, j));
                }
            }
        }
        Graph::on_all(self.n, es).expect("valid pairs")
    }
}

impl OptimizationProblem for BalancedSeparatorProblem {
    type Instance = PairMap;
    type Solution = Subset;

    fn name(&self) -> String {
        format!("BalancedSeparator({})", self.n)
    }

    fn sense(&self) -> Sense {
        Sense::Min
    }

    fn instances(&self) -> Vec<PairMap> {
        self.instances.clone()
    }

    fn solutions(&self) -> Vec<Subset> {
        self.balanced.clone()
    }

    fn measure(&self, c: &PairMap, s: &Subset) -> Result<Rational> {
        if c.n != self.n || *s >> self.n != 0 {
            return Err(domain!("capacity or cut outside [{}]", self.n));
        }
        if self.balanced.binary_search(s).is_err() {
            return Err(domain!("cut {} is not balanced", subset_label(*s)));
        }
        Ok(c.separated(*s))
    }

    fn solution_label(&self, s: &Subset) -> String {
        subset_label(*s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::subset_from;
    use crate::problems::{brute_force_opt_fractional, evaluate_fractional};
    use crate::rational::{q, qi};

    fn k3_ones() -> SparsestCutInstance {
        let all = [(0, 1, qi(1)), (0, 2, qi(1)), (1, 2, qi(1))];
        SparsestCutInstance::new(
            PairMap::from_entries(3, all.clone()).unwrap(),
            PairMap::from_entries(3, all).unwrap(),
            2,
        )
        .unwrap()
    }

    #[test]
    fn sparsest_examples() {
        let inst = k3_ones();
        let p = SparsestCutProblem::new(3, 2, alloc::vec![inst.clone()]).unwrap();
        assert_eq!(evaluate_fractional(&p, &inst, &0).unwrap(), (qi(0), qi(0)));
        assert_eq!(evaluate_fractional(&p, &inst, &subset_from([0])).unwrap(), (qi(2), qi(2)));
        assert_eq!(brute_force_opt_fractional(&p, &inst).unwrap().0, qi(1));
    }

    #[test]
    fn treewidth_bound_enforced() {
        let k4: Vec<_> = Graph::complete(4).edges().iter().map(|&(a, b)| (a, b, qi(1))).collect();
        let c = PairMap::from_entries(4, k4).unwrap();
        assert!(SparsestCutInstance::new(PairMap::new(4), c.clone(), 2).is_err());
        assert!(SparsestCutInstance::new(PairMap::new(4), c, 3).is_ok());
    }

    #[test]
    fn pair_map_accumulates() {
        let mut m = PairMap::new(3);
        m.add(2, 0, q(1, 2)).unwrap();
        m.add(0, 2, q(1, 2)).unwrap();
        assert_eq!(m.get(0, 2), qi(1));
        assert!(m.add(1, 1, qi(1)).is_err());
        assert!(m.add(0, 1, qi(-1)).is_err());
    }

    #[test]
    fn balanced_cuts() {
        let mut d = Matrix::zeros(2, 2);
        d.set(0, 1, qi(1));
        d.set(1, 0, qi(1));
        let p = BalancedSeparatorProblem::new(d, alloc::vec![PairMap::new(2)]).unwrap();
        assert_eq!(p.total_demand(), qi(1));
        assert_eq!(p.balanced, alloc::vec![1, 2]);
    }
}
