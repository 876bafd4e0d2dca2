//! Optimization problems with finite instance and solution enumerations,
//! exact measures and brute-force optima.

mod csp;
mod cuts;
mod graphs;
mod matching;
mod unique_games;

pub use csp::{Clause, CspInstance, CspProblem};
pub use cuts::{BalancedSeparatorProblem, PairMap, SparsestCutInstance, SparsestCutProblem};
pub use graphs::{
    all_graphs, graph_value, GraphObjective, InducedGraphProblem, MaxCutProblem,
    UniformGraphProblem, WeightedGraph,
};
pub use matching::MatchingProblem;
pub use unique_games::{k22_family, UgEdge, UgInstance, UniqueGamesProblem};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rational::Rational;

/// Optimization direction. `tau` is `+1` for maximization and `-1` for
/// minimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    pub fn tau(self) -> Rational {
        match self {
            Sense::Max => Rational::one(),
            Sense::Min => -Rational::one(),
        }
    }

    /// Whether `a` is strictly better than `b`.
    pub fn better(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Sense::Max => a > b,
            Sense::Min => a < b,
        }
    }

    /// `τ·a ≤ τ·b`, i.e. `a` is no better than `b`.
    pub fn no_better(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Sense::Max => a <= b,
            Sense::Min => a >= b,
        }
    }
}

/// A problem `(S, I, val)` whose instance and solution sets can be listed.
pub trait OptimizationProblem {
    type Instance: Clone + Debug;
    type Solution: Clone + Debug;

    fn name(&self) -> String;
    fn sense(&self) -> Sense;
    fn instances(&self) -> Vec<Self::Instance>;
    fn solutions(&self) -> Vec<Self::Solution>;
    /// `val_I(s)`. Fails with a domain error on foreign instances or solutions.
    fn measure(&self, instance: &Self::Instance, solution: &Self::Solution) -> Result<Rational>;

    fn instance_label(&self, instance: &Self::Instance) -> String {
        format!("{instance:?}")
    }

    fn solution_label(&self, solution: &Self::Solution) -> String {
        format!("{solution:?}")
    }
}

/// A problem whose measure is a ratio `val^n / val^d` with `val^d ≥ 0`.
pub trait FractionalProblem {
    type Instance: Clone + Debug;
    type Solution: Clone + Debug;

    fn name(&self) -> String;
    fn sense(&self) -> Sense;
    fn instances(&self) -> Vec<Self::Instance>;
    fn solutions(&self) -> Vec<Self::Solution>;
    /// `(val^n_I(s), val^d_I(s))`, never divided.
    fn measure_parts(
        &self,
        instance: &Self::Instance,
        solution: &Self::Solution,
    ) -> Result<(Rational, Rational)>;

    fn instance_label(&self, instance: &Self::Instance) -> String {
        format!("{instance:?}")
    }

    fn solution_label(&self, solution: &Self::Solution) -> String {
        format!("{solution:?}")
    }
}

pub fn evaluate<P: OptimizationProblem>(
    problem: &P,
    instance: &P::Instance,
    solution: &P::Solution,
) -> Result<Rational> {
    problem.measure(instance, solution)
}

pub fn evaluate_fractional<P: FractionalProblem>(
    problem: &P,
    instance: &P::Instance,
    solution: &P::Solution,
) -> Result<(Rational, Rational)> {
    problem.measure_parts(instance, solution)
}

/// Optimum by enumeration; ties go to the first solution in enumeration order.
pub fn brute_force_opt<P: OptimizationProblem>(
    problem: &P,
    instance: &P::Instance,
) -> Result<(Rational, P::Solution)> {
    let sense = problem.sense();
    let mut best: Option<(Rational, P::Solution)> = None;
    for s in problem.solutions() {
        let v = problem.measure(instance, &s)?;
        if best.as_ref().map_or(true, |(b, _)| sense.better(&v, b)) {
            best = Some((v, s));
        }
    }
    best.ok_or_else(|| domain!("{} has no feasible solutions", problem.name()))
}

/// Optimum ratio over solutions with positive denominator.
pub fn brute_force_opt_fractional<P: FractionalProblem>(
    problem: &P,
    instance: &P::Instance,
) -> Result<(Rational, P::Solution)> {
    let sense = problem.sense();
    let mut best: Option<(Rational, P::Solution)> = None;
    for s in problem.solutions() {
        let (num, den) = problem.measure_parts(instance, &s)?;
        if !den.is_positive() {
            continue;
        }
        let v = num / den;
        if best.as_ref().map_or(true, |(b, _)| sense.better(&v, b)) {
            best = Some((v, s));
        }
    }
    best.ok_or_else(|| domain!("{}: no solution has a positive denominator", problem.name()))
}

/// All words of length `len` over `[q]` in lexicographic order.
pub fn all_words(len: usize, q: usize) -> Vec<Vec<usize>> {
    let total = q.checked_pow(len as u32).expect("enumeration size overflows");
    let mut out = Vec::with_capacity(total);
    let mut w = alloc::vec![0usize; len];
    if q == 0 {
        return if len == 0 { alloc::vec![w] } else { out };
    }
    loop {
        out.push(w.clone());
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            w[i] += 1;
            if w[i] < q {
                break;
            }
            w[i] = 0;
        }
    }
}

/// `{a, b, c}` rendering of a vertex subset.
pub fn subset_label(s: crate::graph::Subset) -> String {
    let elems: Vec<String> = crate::graph::subset_elems(s)
        .into_iter()
        .map(|v| format!("{v}"))
        .collect();
    format!("{{{}}}", elems.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_are_lexicographic() {
        let w = all_words(2, 3);
        assert_eq!(w.len(), 9);
        assert_eq!(w[0], [0, 0]);
        assert_eq!(w[1], [0, 1]);
        assert_eq!(w[8], [2, 2]);
        assert_eq!(all_words(0, 2), alloc::vec![Vec::<usize>::new()]);
    }

    #[test]
    fn sense_helpers() {
        use crate::rational::qi;
        assert!(Sense::Max.better(&qi(2), &qi(1)));
        assert!(Sense::Min.better(&qi(1), &qi(2)));
        assert!(Sense::Min.no_better(&qi(2), &qi(2)));
        assert_eq!(Sense::Min.tau(), qi(-1));
    }
}
