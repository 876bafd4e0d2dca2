//! Slack matrices `τ(C(I) − val_I(s))` over the soundness-filtered instances,
//! and the two-block fractional variant.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::matrix::Matrix;
use crate::problems::{FractionalProblem, OptimizationProblem, Sense};
use crate::rational::Rational;
use crate::table::ProblemTable;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlackMatrix {
    /// Indices (into the problem's instance list) of the rows kept by the
    /// soundness filter `τ·OPT(I) ≤ τ·S(I)`.
    pub rows: Vec<usize>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub entries: Matrix,
    pub sense: Sense,
    pub completeness: Vec<Rational>,
    pub soundness: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalSlackMatrix {
    pub rows: Vec<usize>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `val^d_I(s)`.
    pub md: Matrix,
    /// `τ(C(I)·val^d_I(s) − val^n_I(s))`.
    pub mn: Matrix,
    pub sense: Sense,
    pub completeness: Vec<Rational>,
    pub soundness: Vec<Rational>,
}

impl FractionalSlackMatrix {
    /// `[Md; Mn]`, shape `2|rows| × |cols|`.
    pub fn stacked(&self) -> Matrix {
        let mut rows = self.md.to_rows();
        rows.extend(self.mn.to_rows());
        Matrix::from_rows(rows).unwrap_or_else(|_| Matrix::zeros(0, self.col_labels.len()))
    }
}

fn check_guarantee_lengths(t: &ProblemTable, c: &[Rational], s: &[Rational]) -> Result<()> {
    if c.len() != t.num_instances() || s.len() != t.num_instances() {
        return Err(domain!(
            "guarantees given for {} / {} instances, problem has {}",
            c.len(),
            s.len(),
            t.num_instances()
        ));
    }
    Ok(())
}

fn violation(t: &ProblemTable, i: usize, j: usize, v: &Rational) -> Error {
    Error::GuaranteeViolation {
        instance: t.instances[i].clone(),
        solution: t.solutions[j].clone(),
        value: v.to_string(),
    }
}

/// Rows with `τ·OPT(I) ≤ τ·S(I)`.
pub fn soundness_filter(t: &ProblemTable, s: &[Rational]) -> Result<Vec<usize>> {
    let mut rows = Vec::new();
    for (i, si) in s.iter().enumerate() {
        let (opt, _) = t.opt(i)?;
        if t.sense.no_better(&opt, si) {
            rows.push(i);
        }
    }
    Ok(rows)
}

/// Slack matrix of a materialized problem with per-instance guarantees.
pub fn slack_from_table(t: &ProblemTable, c: &[Rational], s: &[Rational]) -> Result<SlackMatrix> {
    if t.is_fractional() {
        return Err(domain!("fractional problem: use the fractional slack matrix"));
    }
    check_guarantee_lengths(t, c, s)?;
    let rows = soundness_filter(t, s)?;
    let tau = t.sense.tau();
    let mut entries = Matrix::zeros(rows.len(), t.num_solutions());
    for (r, &i) in rows.iter().enumerate() {
        for j in 0..t.num_solutions() {
            let v = &tau * &(&c[i] - t.values.get(i, j));
            if v.is_negative() {
                return Err(violation(t, i, j, &v));
            }
            entries.set(r, j, v);
        }
    }
    Ok(SlackMatrix {
        row_labels: rows.iter().map(|&i| t.instances[i].clone()).collect(),
        col_labels: t.solutions.clone(),
        completeness: rows.iter().map(|&i| c[i].clone()).collect(),
        soundness: rows.iter().map(|&i| s[i].clone()).collect(),
        rows,
        entries,
        sense: t.sense,
    })
}

/// Builds the slack matrix of `problem` with guarantees given as functions
/// of the instance.
pub fn build_slack_matrix<P: OptimizationProblem>(
    problem: &P,
    c: impl Fn(&P::Instance) -> Rational,
    s: impl Fn(&P::Instance) -> Rational,
) -> Result<SlackMatrix> {
    let t = ProblemTable::from_problem(problem)?;
    let insts = problem.instances();
    let cv: Vec<Rational> = insts.iter().map(&c).collect();
    let sv: Vec<Rational> = insts.iter().map(&s).collect();
    slack_from_table(&t, &cv, &sv)
}

pub fn fractional_slack_from_table(
    t: &ProblemTable,
    c: &[Rational],
    s: &[Rational],
) -> Result<FractionalSlackMatrix> {
    let den = t
        .denominators
        .as_ref()
        .ok_or_else(|| domain!("problem is not fractional"))?;
    check_guarantee_lengths(t, c, s)?;
    let rows = soundness_filter(t, s)?;
    let tau = t.sense.tau();
    let mut md = Matrix::zeros(rows.len(), t.num_solutions());
    let mut mn = Matrix::zeros(rows.len(), t.num_solutions());
    for (r, &i) in rows.iter().enumerate() {
        for j in 0..t.num_solutions() {
            let d = den.get(i, j);
            if d.is_negative() {
                return Err(violation(t, i, j, d));
            }
            let v = &tau * &(&(&c[i] * d) - t.values.get(i, j));
            if v.is_negative() {
                return Err(violation(t, i, j, &v));
            }
            md.set(r, j, d.clone());
            mn.set(r, j, v);
        }
    }
    Ok(FractionalSlackMatrix {
        row_labels: rows.iter().map(|&i| t.instances[i].clone()).collect(),
        col_labels: t.solutions.clone(),
        completeness: rows.iter().map(|&i| c[i].clone()).collect(),
        soundness: rows.iter().map(|&i| s[i].clone()).collect(),
        rows,
        md,
        mn,
        sense: t.sense,
    })
}

pub fn build_fractional_slack<P: FractionalProblem>(
    problem: &P,
    c: impl Fn(&P::Instance) -> Rational,
    s: impl Fn(&P::Instance) -> Rational,
) -> Result<FractionalSlackMatrix> {
    let t = ProblemTable::from_fractional(problem)?;
    let insts = problem.instances();
    let cv: Vec<Rational> = insts.iter().map(&c).collect();
    let sv: Vec<Rational> = insts.iter().map(&s).collect();
    fractional_slack_from_table(&t, &cv, &sv)
}

/// Slack matrix with `C = S = OPT` on every instance.
pub fn exact_slack(t: &ProblemTable) -> Result<SlackMatrix> {
    let opt = t.optima()?;
    slack_from_table(t, &opt, &opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::problems::{MatchingProblem, PairMap, SparsestCutInstance, SparsestCutProblem};
    use crate::rational::{q, qi};

    #[test]
    fn exact_guarantees_leave_a_zero_per_row() {
        let p = MatchingProblem::all_subgraphs(Graph::complete(4));
        let m = exact_slack(&ProblemTable::from_problem(&p).unwrap()).unwrap();
        assert_eq!(m.rows.len(), 113);
        for r in 0..m.entries.rows() {
            assert!(m.entries.row(r).iter().any(|x| x.is_zero()));
        }
    }

    #[test]
    fn matching_guarantee_entry() {
        let p = MatchingProblem::new(Graph::complete(4), alloc::vec![Graph::complete(4)]).unwrap();
        let eps = q(1, 2);
        let c = |h: &Graph| Rational::from_int((h.num_vertices() / 2) as i64) + (qi(1) - &eps) / qi(2);
        let m = build_slack_matrix(&p, c, |_| qi(2)).unwrap();
        assert!(m.entries.row(0).iter().all(|x| *x == q(1, 4)));
    }

    #[test]
    fn minimization_and_violation() {
        use crate::problems::{GraphObjective, UniformGraphProblem};
        let p = UniformGraphProblem::with_instances(GraphObjective::VertexCover, 2, alloc::vec![Graph::path(2)]).unwrap();
        let m = build_slack_matrix(&p, |_| qi(1), |_| qi(1)).unwrap();
        // val − C for minimization: {} leaves the edge uncovered (1), {0,1} costs 2.
        assert_eq!(m.entries.row(0), &[qi(0), qi(0), qi(0), qi(1)]);
        assert!(matches!(
            build_slack_matrix(&p, |_| qi(2), |_| qi(1)),
            Err(Error::GuaranteeViolation { .. })
        ));
    }

    #[test]
    fn fractional_k3() {
        let all = [(0, 1, qi(1)), (0, 2, qi(1)), (1, 2, qi(1))];
        let inst = SparsestCutInstance::new(
            PairMap::from_entries(3, all.clone()).unwrap(),
            PairMap::from_entries(3, all).unwrap(),
            2,
        )
        .unwrap();
        let p = SparsestCutProblem::new(3, 2, alloc::vec![inst]).unwrap();
        let m = build_fractional_slack(&p, |_| qi(1), |_| qi(1)).unwrap();
        assert_eq!(*m.mn.get(0, 1), qi(0));
        assert_eq!(*m.md.get(0, 0), qi(0));
        assert_eq!(m.stacked().rows(), 2);
        // For a minimization problem the completeness guarantee is a lower bound,
        // so a value above the true ratio is the invalid direction.
        assert!(build_fractional_slack(&p, |_| qi(2), |_| qi(1)).is_err());
        assert!(build_fractional_slack(&p, |_| q(1, 2), |_| qi(1)).is_ok());
    }
}
