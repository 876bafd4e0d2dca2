//! Materialized problems: every measure value over the enumerated instances
//! and solutions, with row labels for witnesses and serialization.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::matrix::Matrix;
use crate::problems::{FractionalProblem, OptimizationProblem, Sense};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemTable {
    pub name: String,
    pub sense: Sense,
    pub instances: Vec<String>,
    pub solutions: Vec<String>,
    /// `val_I(s)`, or the numerator `val^n_I(s)` of a fractional problem.
    pub values: Matrix,
    /// `val^d_I(s)` for fractional problems.
    pub denominators: Option<Matrix>,
}

impl ProblemTable {
    pub fn from_problem<P: OptimizationProblem>(p: &P) -> Result<Self> {
        let insts = p.instances();
        let sols = p.solutions();
        let mut values = Matrix::zeros(insts.len(), sols.len());
        for (i, inst) in insts.iter().enumerate() {
            for (j, s) in sols.iter().enumerate() {
                values.set(i, j, p.measure(inst, s)?);
            }
        }
        Ok(ProblemTable {
            name: p.name(),
            sense: p.sense(),
            instances: insts.iter().map(|i| p.instance_label(i)).collect(),
            solutions: sols.iter().map(|s| p.solution_label(s)).collect(),
            values,
            denominators: None,
        })
    }

    pub fn from_fractional<P: FractionalProblem>(p: &P) -> Result<Self> {
        let insts = p.instances();
        let sols = p.solutions();
        let mut values = Matrix::zeros(insts.len(), sols.len());
        let mut dens = Matrix::zeros(insts.len(), sols.len());
        for (i, inst) in insts.iter().enumerate() {
            for (j, s) in sols.iter().enumerate() {
                let (num, den) = p.measure_parts(inst, s)?;
                if den.is_negative() {
                    return Err(domain!("negative denominator at ({i}, {j})"));
                }
                values.set(i, j, num);
                dens.set(i, j, den);
            }
        }
        Ok(ProblemTable {
            name: p.name(),
            sense: p.sense(),
            instances: insts.iter().map(|i| p.instance_label(i)).collect(),
            solutions: sols.iter().map(|s| p.solution_label(s)).collect(),
            values,
            denominators: Some(dens),
        })
    }

    pub fn num_instances(&self) -> usize {
        self.values.rows()
    }

    pub fn num_solutions(&self) -> usize {
        self.values.cols()
    }

    pub fn is_fractional(&self) -> bool {
        self.denominators.is_some()
    }

    /// The measure as a number: `val`, or `val^n / val^d` when `val^d > 0`.
    pub fn ratio(&self, i: usize, j: usize) -> Option<Rational> {
        match &self.denominators {
            None => Some(self.values.get(i, j).clone()),
            Some(d) => {
                let den = d.get(i, j);
                den.is_positive().then(|| self.values.get(i, j) / den)
            }
        }
    }

    /// Optimum of row `i` and the first column attaining it.
    pub fn opt(&self, i: usize) -> Result<(Rational, usize)> {
        let mut best: Option<(Rational, usize)> = None;
        for j in 0..self.num_solutions() {
            if let Some(v) = self.ratio(i, j) {
                if best.as_ref().map_or(true, |(b, _)| self.sense.better(&v, b)) {
                    best = Some((v, j));
                }
            }
        }
        best.ok_or_else(|| domain!("instance {} has no solution with a defined value", self.instances[i]))
    }

    /// Optima of all rows.
    pub fn optima(&self) -> Result<Vec<Rational>> {
        (0..self.num_instances()).map(|i| self.opt(i).map(|o| o.0)).collect()
    }

    /// Keeps the listed instance rows, in the given order.
    pub fn select_instances(&self, rows: &[usize]) -> ProblemTable {
        ProblemTable {
            name: self.name.clone(),
            sense: self.sense,
            instances: rows.iter().map(|&i| self.instances[i].clone()).collect(),
            solutions: self.solutions.clone(),
            values: self.values.select_rows(rows),
            denominators: self.denominators.as_ref().map(|d| d.select_rows(rows)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::problems::{GraphObjective, UniformGraphProblem};
    use crate::rational::qi;

    #[test]
    fn optimum_of_rows() {
        let p = UniformGraphProblem::with_instances(
            GraphObjective::VertexCover,
            3,
            alloc::vec![Graph::path(3), Graph::complete(3)],
        )
        .unwrap();
        let t = ProblemTable::from_problem(&p).unwrap();
        assert_eq!(t.opt(0).unwrap(), (qi(1), 0b010));
        assert_eq!(t.opt(1).unwrap().0, qi(2));
    }
}
