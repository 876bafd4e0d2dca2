//! The uniform LP: coordinates `x_{X,σ}` for `|X| ≤ k+1`, domain the affine
//! hull of the embedded solutions, inequalities `x ≥ 0`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{AdmissibleProblem, TwInstance, TwProblemKind};
use crate::error::{contract, domain, Error, Result};
use crate::graph::Subset;
use crate::linalg::{affine_hull, solve_linear_system, AffineHull, LinearSolution};
use crate::matrix::{dot, Matrix};
use crate::rational::Rational;
use crate::simplex::{simplex_exact, LpOutcome, Relation, StandardLp};
use crate::treewidth::treewidth_exact;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UniformLpModel {
    pub kind: TwProblemKind,
    pub n: usize,
    pub k: usize,
    /// `(X, σ)` ordered by `|X|`, then `X`, then `σ`.
    pub variables: Vec<(Subset, u64)>,
    /// Coordinates equal to 1 in `x^s`, per solution in the problem's order.
    pub embeddings: Vec<Vec<usize>>,
    pub hull: AffineHull,
}

impl UniformLpModel {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn embedding(&self, s: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.variables.len()];
        for &j in &self.embeddings[s] {
            x[j] = Rational::one();
        }
        x
    }

    pub fn dimension(&self) -> usize {
        self.hull.basis.len()
    }
}

fn index_sets(n: usize, max_size: usize) -> Vec<Subset> {
    let mut xs: Vec<Subset> = (0..1u64 << n).filter(|x| x.count_ones() as usize <= max_size).collect();
    xs.sort_by_key(|&x| (x.count_ones(), x));
    xs
}

/// `Σ_{|X| ≤ k+1} |𝒮_X|`, the number of coordinates of the model.
pub fn size_bound(p: &AdmissibleProblem, k: usize) -> usize {
    index_sets(p.n, k + 1).into_iter().map(|x| p.partial_solutions(x).len()).sum()
}

/// `Σ_{|X| < k} |𝒮_X|`, the closed form as stated; the model can exceed it.
pub fn closed_form_size_bound(p: &AdmissibleProblem, k: usize) -> usize {
    if k == 0 {
        return 0;
    }
    index_sets(p.n, k - 1).into_iter().map(|x| p.partial_solutions(x).len()).sum()
}

/// Builds the model for all graphs on `[n]` of treewidth at most `k`. The
/// graph does not enter: only the problem's solutions and restrictions do.
pub fn build_uniform_lp(p: &AdmissibleProblem, k: usize) -> Result<UniformLpModel> {
    let mut variables = Vec::new();
    for x in index_sets(p.n, k + 1) {
        variables.extend(p.partial_solutions(x).into_iter().map(|sig| (x, sig)));
    }
    let embeddings: Vec<Vec<usize>> = p
        .solutions()
        .iter()
        .map(|&s| {
            variables
                .iter()
                .enumerate()
                .filter(|(_, &(x, sig))| p.restrict(s, x) == sig)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut model = UniformLpModel {
        kind: p.kind,
        n: p.n,
        k,
        variables,
        embeddings,
        hull: AffineHull {
            offset: Vec::new(),
            basis: Vec::new(),
            basis_points: Vec::new(),
        },
    };
    let points: Vec<Vec<Rational>> = (0..p.solutions().len()).map(|s| model.embedding(s)).collect();
    model.hull = affine_hull(&points)?;
    Ok(model)
}

/// `w(x) = coeffs·x + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineObjective {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl AffineObjective {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs, x) + &self.constant
    }

    /// Equality as functions on the model's affine hull.
    pub fn agrees_on_hull(&self, other: &AffineObjective, hull: &AffineHull) -> bool {
        self.eval(&hull.offset) == other.eval(&hull.offset)
            && hull.basis.iter().all(|b| dot(&self.coeffs, b) == dot(&other.coeffs, b))
    }
}

/// The affine function with `w(x^s) = val_G(s)` for every solution, found
/// by solving the exact linear system over the embeddings; directions off
/// the hull get coefficient zero. The constant is absorbed by the
/// coordinate `x_{∅,∅} ≡ 1`.
pub fn build_objective(model: &UniformLpModel, p: &AdmissibleProblem, inst: &TwInstance) -> Result<AffineObjective> {
    if model.kind != p.kind || model.n != p.n || inst.graph.n() != p.n {
        return Err(domain!("model, problem and instance disagree on the universe"));
    }
    let (tw, _) = treewidth_exact(&inst.graph)?;
    if tw > model.k {
        return Err(domain!("instance has treewidth {tw} > {}", model.k));
    }
    let a = Matrix::from_fn(p.solutions().len(), model.num_variables(), |s, j| {
        Rational::from(i64::from(model.embeddings[s].binary_search(&j).is_ok()))
    });
    let vals: Vec<Rational> = p.solutions().iter().map(|&s| Rational::from(p.value(inst, s))).collect();
    let coeffs = match solve_linear_system(&a, &vals)? {
        LinearSolution::Unique(c) => c,
        LinearSolution::Underdetermined { particular, .. } => particular,
        LinearSolution::Inconsistent => {
            return Err(Error::Admissibility(format!(
                "no affine function on the model reproduces val for {} on {:?}",
                p.kind.name(),
                inst.graph.edges()
            )))
        }
    };
    Ok(AffineObjective {
        coeffs,
        constant: Rational::zero(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformLpSolution {
    pub value: Rational,
    pub point: Vec<Rational>,
    pub pivots: usize,
}

/// Optimizes `w` over `{x ∈ V : x ≥ 0}` with `x = offset + Σ_b y_b·basis_b`
/// and `y` free. Coordinates constant on `V` and repeated rows are dropped.
pub fn solve_uniform_lp(model: &UniformLpModel, w: &AffineObjective) -> Result<UniformLpSolution> {
    let hull = &model.hull;
    let d = hull.basis.len();
    let objective: Vec<Rational> = hull.basis.iter().map(|b| dot(&w.coeffs, b)).collect();
    let mut lp = StandardLp::new(model.kind.sense(), objective).with_free(vec![true; d]);
    let mut seen = BTreeSet::new();
    for j in 0..model.num_variables() {
        let row: Vec<Rational> = hull.basis.iter().map(|b| b[j].clone()).collect();
        if row.iter().all(Rational::is_zero) {
            continue;
        }
        if seen.insert((row.clone(), hull.offset[j].clone())) {
            lp.add(row, Relation::Ge, -hull.offset[j].clone());
        }
    }
    let sol = match simplex_exact(&lp)? {
        LpOutcome::Optimal(s) => s,
        other => return Err(contract!("uniform LP is {other:?}; the model is corrupt")),
    };
    let mut point = hull.offset.clone();
    for (b, y) in hull.basis.iter().zip(&sol.point) {
        if !y.is_zero() {
            for (p, v) in point.iter_mut().zip(b) {
                *p += y * v;
            }
        }
    }
    Ok(UniformLpSolution {
        value: w.eval(&point),
        point,
        pivots: sol.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::linalg::rank;
    use crate::rational::qi;

    fn lp_opt(kind: TwProblemKind, g: Graph, k: usize) -> Rational {
        let p = AdmissibleProblem::new(kind, g.n()).unwrap();
        let m = build_uniform_lp(&p, k).unwrap();
        let w = build_objective(&m, &p, &TwInstance::plain(g)).unwrap();
        solve_uniform_lp(&m, &w).unwrap().value
    }

    #[test]
    fn spec_examples() {
        assert_eq!(lp_opt(TwProblemKind::IndependentSet, Graph::path(4), 1), qi(2));
        assert_eq!(lp_opt(TwProblemKind::VertexCover, Graph::complete(3), 2), qi(2));
        assert_eq!(lp_opt(TwProblemKind::Matching, Graph::complete(4), 3), qi(2));
        assert_eq!(lp_opt(TwProblemKind::MaxCut, Graph::cycle(4), 2), qi(4));
    }

    #[test]
    fn embeddings_and_empty_graph() {
        let p = AdmissibleProblem::new(TwProblemKind::IndependentSet, 3).unwrap();
        let m = build_uniform_lp(&p, 1).unwrap();
        assert_eq!(m.num_variables(), size_bound(&p, 1));
        assert_eq!(m.variables[0], (0, 0));
        for e in &m.embeddings {
            assert_eq!(e[0], 0);
        }
        let distinct: BTreeSet<&Vec<usize>> = m.embeddings.iter().collect();
        assert_eq!(distinct.len(), 8);
        // Hull dimension equals the rank of the centered points.
        let pts: Vec<Vec<Rational>> = (0..8).map(|s| m.embedding(s)).collect();
        let centered = Matrix::from_fn(7, m.num_variables(), |i, j| &pts[i + 1][j] - &pts[0][j]);
        assert_eq!(m.dimension(), rank(&centered));
        let w = build_objective(&m, &p, &TwInstance::plain(Graph::empty(3))).unwrap();
        assert!(w.coeffs.iter().all(Rational::is_zero));
    }

    #[test]
    fn treewidth_above_k_rejected() {
        let p = AdmissibleProblem::new(TwProblemKind::MaxCut, 3).unwrap();
        let m = build_uniform_lp(&p, 1).unwrap();
        assert!(build_objective(&m, &p, &TwInstance::plain(Graph::complete(3))).is_err());
    }
}
