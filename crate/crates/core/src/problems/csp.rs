//! Weighted constraint satisfaction problems over `[q]`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{all_words, OptimizationProblem, Sense};
use crate::error::{domain, Error, Result};
use crate::rational::{common_scale, Rational};

/// One weighted clause, given by its scope and the tuples that satisfy it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub weight: Rational,
    pub scope: Vec<usize>,
    /// Satisfying tuples over the scope, sorted; may be empty.
    pub satisfying: Vec<Vec<usize>>,
}

impl Clause {
    pub fn new(weight: Rational, scope: Vec<usize>, mut satisfying: Vec<Vec<usize>>) -> Self {
        satisfying.sort();
        satisfying.dedup();
        Clause {
            weight,
            scope,
            satisfying,
        }
    }

    pub fn is_satisfied(&self, assignment: &[usize]) -> bool {
        let local: Vec<usize> = self.scope.iter().map(|&v| assignment[v]).collect();
        self.satisfying.binary_search(&local).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CspInstance {
    pub num_variables: usize,
    pub q: usize,
    pub clauses: Vec<Clause>,
}

impl CspInstance {
    /// Validates weights, scopes and tuples; rejects zero total weight.
    pub fn new(num_variables: usize, q: usize, clauses: Vec<Clause>) -> Result<Self> {
        let inst = CspInstance {
            num_variables,
            q,
            clauses: clauses
                .into_iter()
                .map(|c| Clause::new(c.weight, c.scope, c.satisfying))
                .collect(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(domain!("alphabet size must be positive"));
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if c.weight.is_negative() {
                return Err(domain!("clause {i} has negative weight {}", c.weight));
            }
            if let Some(&v) = c.scope.iter().find(|&&v| v >= self.num_variables) {
                return Err(domain!("clause {i} uses variable {v} outside [{}]", self.num_variables));
            }
            for (a, &v) in c.scope.iter().enumerate() {
                if c.scope[..a].contains(&v) {
                    return Err(domain!("clause {i} repeats variable {v}"));
                }
            }
            for t in &c.satisfying {
                if t.len() != c.scope.len() || t.iter().any(|&x| x >= self.q) {
                    return Err(domain!("clause {i} has a malformed satisfying tuple {t:?}"));
                }
            }
        }
        if !self.total_weight().is_positive() {
            return Err(domain!("total clause weight must be positive"));
        }
        Ok(())
    }

    pub fn total_weight(&self) -> Rational {
        self.clauses.iter().map(|c| &c.weight).sum()
    }

    /// `Σ_i w_i C_i(s)` without normalization.
    pub fn satisfied_weight(&self, assignment: &[usize]) -> Rational {
        self.clauses
            .iter()
            .filter(|c| c.is_satisfied(assignment))
            .map(|c| &c.weight)
            .sum()
    }

    /// Weighted fraction of satisfied clauses.
    pub fn value(&self, assignment: &[usize]) -> Rational {
        self.satisfied_weight(assignment) / self.total_weight()
    }

    /// Exact optimum over all `q^N` assignments with the first optimal
    /// assignment in lexicographic order. Weights are scaled to integers so
    /// the scan does no rational arithmetic.
    pub fn optimum(&self, sense: Sense) -> Result<(Rational, Vec<usize>)> {
        let total = (self.q as u128).checked_pow(self.num_variables as u32);
        if total.map_or(true, |t| t > 1 << 24) {
            return Err(Error::Capacity(format!(
                "{}^{} assignments exceed 2^24",
                self.q, self.num_variables
            )));
        }
        let weights: Vec<Rational> = self.clauses.iter().map(|c| c.weight.clone()).collect();
        let (ints, lcm) = common_scale(&weights)
            .ok_or_else(|| Error::Capacity("clause weights overflow i128 after scaling".into()))?;
        let mut w = vec![0usize; self.num_variables];
        let mut local = Vec::new();
        let mut best: Option<(i128, Vec<usize>)> = None;
        loop {
            let mut acc = 0i128;
            for (c, &cw) in self.clauses.iter().zip(&ints) {
                local.clear();
                local.extend(c.scope.iter().map(|&v| w[v]));
                if c.satisfying.binary_search(&local).is_ok() {
                    acc += cw;
                }
            }
            let better = match &best {
                None => true,
                Some((b, _)) => match sense {
                    Sense::Max => acc > *b,
                    Sense::Min => acc < *b,
                },
            };
            if better {
                best = Some((acc, w.clone()));
            }
            let mut i = self.num_variables;
            loop {
                if i == 0 {
                    let (v, s) = best.expect("at least one assignment");
                    let tw: i128 = ints.iter().sum();
                    return Ok((Rational::from_bigints(v.into(), lcm)? / Rational::from_bigints(tw.into(), 1.into())?, s));
                }
                i -= 1;
                w[i] += 1;
                if w[i] < self.q {
                    break;
                }
                w[i] = 0;
            }
        }
    }

    pub fn check_assignment(&self, assignment: &[usize]) -> Result<()> {
        if assignment.len() != self.num_variables || assignment.iter().any(|&x| x >= self.q) {
            return Err(domain!("assignment {assignment:?} is not a map [{}] -> [{}]", self.num_variables, self.q));
        }
        Ok(())
    }
}

/// A CSP over a fixed variable set with an explicit list of instances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspProblem {
    pub name: String,
    pub num_variables: usize,
    pub q: usize,
    pub sense: Sense,
    pub instances: Vec<CspInstance>,
}

impl CspProblem {
    pub fn new(name: &str, num_variables: usize, q: usize, sense: Sense, instances: Vec<CspInstance>) -> Result<Self> {
        for inst in &instances {
            if inst.num_variables != num_variables || inst.q != q {
                return Err(domain!("instance has signature ({}, {}), problem ({num_variables}, {q})", inst.num_variables, inst.q));
            }
        }
        Ok(CspProblem {
            name: name.into(),
            num_variables,
            q,
            sense,
            instances,
        })
    }
}

impl OptimizationProblem for CspProblem {
    type Instance = CspInstance;
    type Solution = Vec<usize>;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn sense(&self) -> Sense {
        self.sense
    }

    fn instances(&self) -> Vec<CspInstance> {
        self.instances.clone()
    }

    fn solutions(&self) -> Vec<Vec<usize>> {
        all_words(self.num_variables, self.q)
    }

    fn measure(&self, inst: &CspInstance, s: &Vec<usize>) -> Result<Rational> {
        inst.check_assignment(s)?;
        if inst.num_variables != self.num_variables || inst.q != self.q {
            return Err(domain!("foreign instance"));
        }
        Ok(inst.value(s))
    }

    fn instance_label(&self, inst: &CspInstance) -> String {
        let cs: Vec<String> = inst
            .clauses
            .iter()
            .map(|c| format!("{}*{:?}", c.weight, c.scope))
            .collect();
        format!("[{}]", cs.join(" + "))
    }

    fn solution_label(&self, s: &Vec<usize>) -> String {
        s.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join("")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn xor2() -> CspInstance {
        CspInstance::new(
            2,
            2,
            vec![
                Clause::new(qi(1), vec![0, 1], vec![vec![0, 1], vec![1, 0]]),
                Clause::new(qi(3), vec![0], vec![vec![0]]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn weighted_fraction() {
        let i = xor2();
        assert_eq!(i.value(&[0, 1]), qi(1));
        assert_eq!(i.value(&[1, 0]), q(1, 4));
        assert_eq!(i.value(&[0, 0]), q(3, 4));
    }

    #[test]
    fn optimum_matches_enumeration() {
        let i = xor2();
        let p = CspProblem::new("xor2", 2, 2, Sense::Max, vec![i.clone()]).unwrap();
        let (v, w) = crate::problems::brute_force_opt(&p, &i).unwrap();
        assert_eq!(i.optimum(Sense::Max).unwrap(), (v, w));
        assert_eq!(i.optimum(Sense::Min).unwrap(), (qi(0), vec![1, 1]));
    }

    #[test]
    fn validation() {
        assert!(CspInstance::new(2, 2, vec![Clause::new(qi(0), vec![0], vec![])]).is_err());
        assert!(CspInstance::new(2, 2, vec![Clause::new(qi(1), vec![0, 0], vec![])]).is_err());
        assert!(CspInstance::new(2, 2, vec![Clause::new(q(-1, 2), vec![0], vec![])]).is_err());
        assert!(CspInstance::new(2, 2, vec![Clause::new(qi(1), vec![0], vec![vec![2]])]).is_err());
        // An empty predicate is allowed and never satisfied.
        let i = CspInstance::new(1, 2, vec![Clause::new(qi(1), vec![0], vec![])]).unwrap();
        assert_eq!(i.value(&[0]), qi(0));
    }
}
