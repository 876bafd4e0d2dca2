//! Reductions with distortion between optimization problems: exact
//! verification of the completeness and soundness conditions and the
//! constructive composition of factorizations along a reduction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};
use crate::factor::{nmf_upper_bound, trivial_factorization, verify_factorization, NonnegFactorization, RankOneFactor};
use crate::matrix::Matrix;
use crate::rational::Rational;
use crate::slack::{slack_from_table, SlackMatrix};
use crate::table::ProblemTable;
use crate::verdict::Verdict;

/// A reduction from `source` to `target` with per-instance guarantees.
///
/// The target table lists the image instances as rows. Its columns are
/// either all target solutions (`target_complete`) or only the images of
/// source solutions; in the latter case the builder supplies the exact
/// target optima in `target_opt`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReductionRecord {
    pub source: ProblemTable,
    pub target: ProblemTable,
    pub target_complete: bool,
    pub target_opt: Option<Vec<Rational>>,
    /// Source instance index to target row.
    pub instance_map: Vec<usize>,
    /// Source solution index to target column.
    pub solution_map: Vec<usize>,
    pub c1: Vec<Rational>,
    pub s1: Vec<Rational>,
    pub c2: Vec<Rational>,
    pub s2: Vec<Rational>,
    pub m1: Matrix,
    pub m2: Matrix,
}

/// Fractional reduction: numerator and denominator matrices for both terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FractionalReductionRecord {
    pub source: ProblemTable,
    pub target: ProblemTable,
    pub target_complete: bool,
    pub target_opt: Option<Vec<Rational>>,
    pub instance_map: Vec<usize>,
    pub solution_map: Vec<usize>,
    pub c1: Vec<Rational>,
    pub s1: Vec<Rational>,
    pub c2: Vec<Rational>,
    pub s2: Vec<Rational>,
    pub m1n: Matrix,
    pub m2n: Matrix,
    pub m1d: Matrix,
    pub m2d: Matrix,
}

/// Position of each label in `labels`, for building index maps.
pub fn label_index(labels: &[String]) -> BTreeMap<&str, usize> {
    labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
}

struct Common<'a> {
    source: &'a ProblemTable,
    target: &'a ProblemTable,
    target_complete: bool,
    target_opt: &'a Option<Vec<Rational>>,
    instance_map: &'a [usize],
    solution_map: &'a [usize],
    c1: &'a [Rational],
    s1: &'a [Rational],
    c2: &'a [Rational],
    s2: &'a [Rational],
}

impl Common<'_> {
    fn shape_failure(&self, matrices: &[(&str, &Matrix)]) -> Option<String> {
        let (n1, k1) = (self.source.num_instances(), self.source.num_solutions());
        let (n2, k2) = (self.target.num_instances(), self.target.num_solutions());
        if self.instance_map.len() != n1 || self.instance_map.iter().any(|&t| t >= n2) {
            return Some(format!("instance map must send {n1} source instances into {n2} target rows"));
        }
        if self.solution_map.len() != k1 || self.solution_map.iter().any(|&t| t >= k2) {
            return Some(format!("solution map must send {k1} source solutions into {k2} target columns"));
        }
        if self.c1.len() != n1 || self.s1.len() != n1 || self.c2.len() != n2 || self.s2.len() != n2 {
            return Some(format!("guarantee vectors have the wrong length"));
        }
        if !self.target_complete && self.target_opt.as_ref().map_or(true, |o| o.len() != n2) {
            return Some(format!("target lists only image solutions but no target optima are supplied"));
        }
        if self.source.is_fractional() != self.target.is_fractional() {
            return Some(format!("source and target disagree on being fractional"));
        }
        for (name, m) in matrices {
            if m.rows() != n1 || m.cols() != k1 {
                return Some(format!("{name} is {}x{}, expected {n1}x{k1}", m.rows(), m.cols()));
            }
        }
        None
    }

    fn target_optimum(&self, row: usize) -> Result<Rational> {
        if self.target_complete {
            Ok(self.target.opt(row)?.0)
        } else {
            Ok(self.target_opt.as_ref().expect("checked in shape")[row].clone())
        }
    }

    fn soundness_failure(&self) -> Result<Option<String>> {
        for i in 0..self.source.num_instances() {
            let (opt1, _) = self.source.opt(i)?;
            if !self.source.sense.no_better(&opt1, &self.s1[i]) {
                continue;
            }
            let t = self.instance_map[i];
            let opt2 = self.target_optimum(t)?;
            if !self.target.sense.no_better(&opt2, &self.s2[t]) {
                return Ok(Some(format!(
                    "instance {}: OPT = {opt1} meets S1 = {}, but its image {} has OPT = {opt2} beyond S2 = {}",
                    self.source.instances[i], self.s1[i], self.target.instances[t], self.s2[t]
                )));
            }
        }
        Ok(None)
    }
}

fn negativity(matrices: &[(&str, &Matrix)]) -> Option<String> {
    for (name, m) in matrices {
        if let Some((i, j)) = m.first_negative() {
            return Some(format!("{name}({i}, {j}) = {} < 0", m.get(i, j)));
        }
    }
    None
}

impl ReductionRecord {
    fn common(&self) -> Common<'_> {
        Common {
            source: &self.source,
            target: &self.target,
            target_complete: self.target_complete,
            target_opt: &self.target_opt,
            instance_map: &self.instance_map,
            solution_map: &self.solution_map,
            c1: &self.c1,
            s1: &self.s1,
            c2: &self.c2,
            s2: &self.s2,
        }
    }

    /// Slack matrix of the source with guarantees `(C1, S1)`.
    pub fn source_slack(&self) -> Result<SlackMatrix> {
        slack_from_table(&self.source, &self.c1, &self.s1)
    }

    /// Slack matrix of the target with guarantees `(C2, S2)`; needs all
    /// target solutions.
    pub fn target_slack(&self) -> Result<SlackMatrix> {
        if !self.target_complete {
            return Err(contract!("the target table lists only image solutions"));
        }
        slack_from_table(&self.target, &self.c2, &self.s2)
    }
}

/// Checks, in exact arithmetic and in this order: shape, nonnegativity of
/// `M1` and `M2`, the completeness identity for every source pair, and
/// soundness on every source instance passing the `S1` filter.
pub fn verify_reduction(red: &ReductionRecord) -> Result<Verdict> {
    let mut v = Verdict::new();
    let common = red.common();
    let mats = [("M1", &red.m1), ("M2", &red.m2)];
    let shape = common.shape_failure(&mats);
    let shape_ok = shape.is_none();
    v.record("shape", shape);
    if !shape_ok {
        return Ok(v);
    }
    v.record("nonnegativity", negativity(&mats));

    let (t1, t2) = (red.source.sense.tau(), red.target.sense.tau());
    let mut comp = None;
    'rows: for i in 0..red.source.num_instances() {
        let ti = red.instance_map[i];
        for j in 0..red.source.num_solutions() {
            let tj = red.solution_map[j];
            let lhs = &t1 * &(&red.c1[i] - red.source.values.get(i, j));
            let inner = &t2 * &(&red.c2[ti] - red.target.values.get(ti, tj));
            let rhs = &inner * red.m1.get(i, j) + red.m2.get(i, j);
            if lhs != rhs {
                comp = Some(format!(
                    "({}, {}): source slack {lhs} != target slack {inner} * {} + {}",
                    red.source.instances[i],
                    red.source.solutions[j],
                    red.m1.get(i, j),
                    red.m2.get(i, j)
                ));
                break 'rows;
            }
        }
    }
    v.record("completeness", comp);
    v.record("soundness", common.soundness_failure()?);
    Ok(v)
}

impl FractionalReductionRecord {
    fn common(&self) -> Common<'_> {
        Common {
            source: &self.source,
            target: &self.target,
            target_complete: self.target_complete,
            target_opt: &self.target_opt,
            instance_map: &self.instance_map,
            solution_map: &self.solution_map,
            c1: &self.c1,
            s1: &self.s1,
            c2: &self.c2,
            s2: &self.s2,
        }
    }
}

/// Fractional analogue of [`verify_reduction`]: shape, nonnegativity of the
/// four matrices, the numerator completeness identity, the denominator
/// identity and soundness.
pub fn verify_fractional_reduction(red: &FractionalReductionRecord) -> Result<Verdict> {
    let mut v = Verdict::new();
    let common = red.common();
    let mats = [("M1n", &red.m1n), ("M2n", &red.m2n), ("M1d", &red.m1d), ("M2d", &red.m2d)];
    let mut shape = common.shape_failure(&mats);
    if shape.is_none() && !red.source.is_fractional() {
        shape = Some(format!("a fractional reduction needs fractional problems"));
    }
    let shape_ok = shape.is_none();
    v.record("shape", shape);
    if !shape_ok {
        return Ok(v);
    }
    v.record("nonnegativity", negativity(&mats));

    let d1 = red.source.denominators.as_ref().expect("fractional");
    let d2 = red.target.denominators.as_ref().expect("fractional");
    let (t1, t2) = (red.source.sense.tau(), red.target.sense.tau());
    let mut comp = None;
    let mut den = None;
    for i in 0..red.source.num_instances() {
        let ti = red.instance_map[i];
        for j in 0..red.source.num_solutions() {
            let tj = red.solution_map[j];
            let at = |what: &str| format!("({}, {}) {what}", red.source.instances[i], red.source.solutions[j]);
            if comp.is_none() {
                let lhs = &t1 * &(&(&red.c1[i] * d1.get(i, j)) - red.source.values.get(i, j));
                let inner = &t2 * &(&(&red.c2[ti] * d2.get(ti, tj)) - red.target.values.get(ti, tj));
                let rhs = &inner * red.m1n.get(i, j) + red.m2n.get(i, j);
                if lhs != rhs {
                    comp = Some(at(&format!("numerator: {lhs} != {inner} * {} + {}", red.m1n.get(i, j), red.m2n.get(i, j))));
                }
            }
            if den.is_none() {
                let lhs = d1.get(i, j);
                let rhs = d2.get(ti, tj) * red.m1d.get(i, j) + red.m2d.get(i, j);
                if *lhs != rhs {
                    den = Some(at(&format!("denominator: {lhs} != {rhs}")));
                }
            }
        }
    }
    v.record("completeness", comp);
    v.record("denominator", den);
    v.record("soundness", common.soundness_failure()?);
    Ok(v)
}

/// Builds a factorization of the source slack matrix from factorizations
/// of the target slack matrix, `M1` and `M2`.
///
/// With `T = T̃ + a·𝟙` the split given by the target's uniform term, the
/// source slack is `(T̃ pulled back) ∘ M1 + diag(a*)·M1 + M2`. The first term
/// pairs every target factor with every nonnegative term of `F_M1`.
pub fn compose_factorizations(
    red: &ReductionRecord,
    f_target: &NonnegFactorization,
    f_m1: &NonnegFactorization,
    f_m2: &NonnegFactorization,
) -> Result<NonnegFactorization> {
    let vr = verify_reduction(red)?;
    if let Some(c) = vr.first_failure() {
        return Err(contract!("reduction does not verify: {}", c.name));
    }
    let target = red.target_slack()?;
    let v = verify_factorization(&target.entries, f_target);
    if let Some(c) = v.first_failure() {
        return Err(contract!("target factorization fails {}", c.name));
    }
    for (name, m, f) in [("M1", &red.m1, f_m1), ("M2", &red.m2, f_m2)] {
        if let Some(c) = verify_factorization(m, f).first_failure() {
            return Err(contract!("{name} factorization fails {}", c.name));
        }
    }
    let source = red.source_slack()?;
    let target_row: BTreeMap<usize, usize> = target.rows.iter().enumerate().map(|(r, &t)| (t, r)).collect();
    let mut rows_t = Vec::with_capacity(source.rows.len());
    for &i in &source.rows {
        let t = red.instance_map[i];
        match target_row.get(&t) {
            Some(&r) => rows_t.push(r),
            None => {
                return Err(contract!(
                    "image of {} is outside the target soundness filter",
                    red.source.instances[i]
                ))
            }
        }
    }
    let nrows = source.rows.len();
    let ncols = red.source.num_solutions();
    let zero = Rational::zero();
    let a_of = |r: usize| f_target.uniform.as_ref().map_or(&zero, |u| &u[r]);
    let m1_uniform: Option<&Vec<Rational>> = f_m1.uniform.as_ref().filter(|u| u.iter().any(|x| !x.is_zero()));

    let mut factors = Vec::new();
    // Pairs of target factors with nonnegative terms of F_M1.
    for tf in &f_target.factors {
        let pulled_col: Vec<Rational> = red.solution_map.iter().map(|&tj| tf.col[tj].clone()).collect();
        for mf in &f_m1.factors {
            factors.push(RankOneFactor {
                row: (0..nrows).map(|r| &tf.row[rows_t[r]] * &mf.row[source.rows[r]]).collect(),
                col: (0..ncols).map(|j| &pulled_col[j] * &mf.col[j]).collect(),
            });
        }
        if let Some(u) = m1_uniform {
            factors.push(RankOneFactor {
                row: (0..nrows).map(|r| &tf.row[rows_t[r]] * &u[source.rows[r]]).collect(),
                col: pulled_col.clone(),
            });
        }
    }
    // diag(a*)·M1.
    for mf in &f_m1.factors {
        factors.push(RankOneFactor {
            row: (0..nrows).map(|r| a_of(rows_t[r]) * &mf.row[source.rows[r]]).collect(),
            col: mf.col.clone(),
        });
    }
    // M2.
    for mf in &f_m2.factors {
        factors.push(RankOneFactor {
            row: source.rows.iter().map(|&i| mf.row[i].clone()).collect(),
            col: mf.col.clone(),
        });
    }
    let uniform = (0..nrows)
        .map(|r| {
            let i = source.rows[r];
            let mut u = f_m2.uniform.as_ref().map_or_else(Rational::zero, |x| x[i].clone());
            if let Some(u1) = &f_m1.uniform {
                u += a_of(rows_t[r]) * &u1[i];
            }
            u
        })
        .collect();
    let out = NonnegFactorization {
        rows: nrows,
        cols: ncols,
        factors,
        uniform: Some(uniform),
    };
    if let Some(c) = verify_factorization(&source.entries, &out).first_failure() {
        return Err(contract!("composed factorization fails {}: {}", c.name, c.witness.clone().unwrap_or_default()));
    }
    Ok(out)
}

/// `size(F_M2) + size(F_M1) + nnegFactors(F_M1)·fc`, the composition bound
/// with the witnesses' sizes substituted for the ranks.
pub fn size_bound_from_witnesses(
    f_m1: Option<&NonnegFactorization>,
    f_m2: Option<&NonnegFactorization>,
    fc_target_bound: usize,
) -> Result<usize> {
    let f1 = f_m1.ok_or_else(|| contract!("missing witness for M1"))?;
    let f2 = f_m2.ok_or_else(|| contract!("missing witness for M2"))?;
    Ok(f2.size() + f1.size() + f1.nonneg_terms() * fc_target_bound)
}

/// Small LP-factorization witness for `m`: zero for row-constant matrices,
/// otherwise the best of seeded NMF (with and without the row-minimum
/// uniform term) and the trivial factorization.
pub fn witness_factorization(m: &Matrix, seed: u64) -> Result<NonnegFactorization> {
    if let Some((i, j)) = m.first_negative() {
        return Err(domain!("witness requested for a matrix with negative entry ({i}, {j})"));
    }
    let trivial = trivial_factorization(m)?;
    if trivial.size() == 0 {
        return Ok(trivial);
    }
    let mut best = trivial;
    let mins: Vec<Rational> = (0..m.rows())
        .map(|i| m.row(i).iter().min().cloned().unwrap_or_else(Rational::zero))
        .collect();
    let rest = Matrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j) - &mins[i]);
    for r in 1..best.size() {
        for (target, shift) in [(m, false), (&rest, true)] {
            let out = nmf_upper_bound(target, r, 1500, seed)?;
            if let Some(mut f) = out.certified {
                if shift {
                    let u = f.uniform.take().unwrap_or_else(|| vec![Rational::zero(); m.rows()]);
                    f.uniform = Some(u.iter().zip(&mins).map(|(a, b)| a + b).collect());
                }
                let f = f.pruned();
                if verify_factorization(m, &f).accepted() && f.size() < best.size() {
                    best = f;
                }
            }
        }
        if best.size() <= r {
            break;
        }
    }
    Ok(best)
}

/// The composition bound with witnesses for `M1` and `M2` computed by
/// [`witness_factorization`].
pub fn reduction_size_bound(red: &ReductionRecord, fc_target_bound: usize, seed: u64) -> Result<usize> {
    let f1 = witness_factorization(&red.m1, seed)?;
    let f2 = witness_factorization(&red.m2, seed)?;
    size_bound_from_witnesses(Some(&f1), Some(&f2), fc_target_bound)
}

/// Exact size of the factorization produced by [`compose_factorizations`]
/// before pruning.
pub fn composed_size(f_target: &NonnegFactorization, f_m1: &NonnegFactorization, f_m2: &NonnegFactorization) -> usize {
    f_target.size() * f_m1.nonneg_terms() + f_m1.size() + f_m2.size()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::problems::{GraphObjective, Sense, UniformGraphProblem};
    use crate::rational::{q, qi};
    use crate::slack::exact_slack;

    fn table_1x1(v: i64, sense: Sense) -> ProblemTable {
        ProblemTable {
            name: "toy".into(),
            sense,
            instances: vec!["I".into()],
            solutions: vec!["s".into()],
            values: Matrix::from_rows(vec![vec![qi(v)]]).unwrap(),
            denominators: None,
        }
    }

    fn identity_record() -> ReductionRecord {
        let p = UniformGraphProblem::with_instances(
            GraphObjective::IndependentSet,
            3,
            vec![Graph::path(3), Graph::complete(3), Graph::empty(3)],
        )
        .unwrap();
        let t = ProblemTable::from_problem(&p).unwrap();
        let opt = t.optima().unwrap();
        let (n, k) = (t.num_instances(), t.num_solutions());
        ReductionRecord {
            source: t.clone(),
            target: t,
            target_complete: true,
            target_opt: None,
            instance_map: (0..n).collect(),
            solution_map: (0..k).collect(),
            c1: opt.clone(),
            s1: opt.clone(),
            c2: opt.clone(),
            s2: opt,
            m1: Matrix::filled(n, k, qi(1)),
            m2: Matrix::zeros(n, k),
        }
    }

    #[test]
    fn identity_reduction_accepts() {
        let red = identity_record();
        assert!(verify_reduction(&red).unwrap().accepted());
    }

    #[test]
    fn negative_m2_is_a_nonnegativity_failure() {
        let mut red = identity_record();
        red.m2.set(1, 2, qi(-1));
        let v = verify_reduction(&red).unwrap();
        assert_eq!(v.first_failure().unwrap().name, "nonnegativity");
    }

    #[test]
    fn weakening_soundness_keeps_acceptance() {
        let mut red = identity_record();
        for s in red.s1.iter_mut() {
            *s += qi(-1);
        }
        assert!(verify_reduction(&red).unwrap().accepted());
    }

    #[test]
    fn one_by_one_composition() {
        let red = ReductionRecord {
            source: table_1x1(0, Sense::Max),
            target: table_1x1(0, Sense::Max),
            target_complete: true,
            target_opt: None,
            instance_map: vec![0],
            solution_map: vec![0],
            c1: vec![qi(6)],
            s1: vec![qi(6)],
            c2: vec![qi(2)],
            s2: vec![qi(2)],
            m1: Matrix::from_rows(vec![vec![qi(3)]]).unwrap(),
            m2: Matrix::zeros(1, 1),
        };
        assert!(verify_reduction(&red).unwrap().accepted());
        let ft = trivial_factorization(&red.target_slack().unwrap().entries).unwrap();
        let f1 = trivial_factorization(&red.m1).unwrap();
        let f2 = trivial_factorization(&red.m2).unwrap();
        let f = compose_factorizations(&red, &ft, &f1, &f2).unwrap();
        assert_eq!(f.entry(0, 0), qi(6));
    }

    #[test]
    fn identity_composition_keeps_size() {
        let red = identity_record();
        let target = red.target_slack().unwrap();
        let ft = trivial_factorization(&target.entries).unwrap();
        let f1 = witness_factorization(&red.m1, 0).unwrap();
        let f2 = witness_factorization(&red.m2, 0).unwrap();
        assert_eq!((f1.size(), f1.nonneg_terms(), f2.size()), (0, 1, 0));
        let f = compose_factorizations(&red, &ft, &f1, &f2).unwrap();
        assert_eq!(f.size(), ft.size());
        assert!(verify_factorization(&exact_slack(&red.source).unwrap().entries, &f).accepted());
    }

    #[test]
    fn size_bounds() {
        let mut red = identity_record();
        assert_eq!(reduction_size_bound(&red, 7, 0).unwrap(), 7);
        let k = red.source.num_solutions();
        red.m1 = Matrix::from_fn(red.m1.rows(), k, |i, j| qi((i as i64 + 1) * (j as i64 + 1)));
        assert_eq!(reduction_size_bound(&red, 7, 0).unwrap(), 8);
        red.m1 = Matrix::filled(red.m1.rows(), k, q(3, 2));
        red.m2 = Matrix::filled(red.m1.rows(), k, qi(5));
        assert_eq!(reduction_size_bound(&red, 7, 0).unwrap(), 7);
        assert!(size_bound_from_witnesses(None, None, 7).is_err());
    }

    #[test]
    fn broken_target_factorization_is_a_contract_error() {
        let red = identity_record();
        let bad = NonnegFactorization {
            rows: 1,
            cols: 1,
            factors: vec![],
            uniform: None,
        };
        let f1 = witness_factorization(&red.m1, 0).unwrap();
        let f2 = witness_factorization(&red.m2, 0).unwrap();
        assert!(matches!(compose_factorizations(&red, &bad, &f1, &f2), Err(crate::Error::Contract(_))));
    }
}
