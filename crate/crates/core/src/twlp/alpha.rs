//! Nonnegative coefficients `α_{G,X,σ}` with
//! `τ[OPT(G) − val_G(s)] = Σ α_{G,X,σ}·χ(s↾X = σ)`, built recursively along a
//! rooted tree decomposition.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{bag_mask, component_mask, AdmissibleProblem, AffineObjective, TwInstance, UniformLpModel};
use crate::error::{contract, Result};
use crate::factor::{NonnegFactorization, RankOneFactor};
use crate::graph::{subset_elems, Subset};
use crate::matrix::Matrix;
use crate::rational::Rational;
use crate::treewidth::{validate_tree_decomposition, TreeDecomposition};
use crate::verdict::Verdict;

/// One contribution `α_{G', X, σ, A}`, made at tree node `node` for the
/// subgraph `G'` that the subtree below it decomposes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub node: usize,
    pub x: Subset,
    pub sigma: u64,
    pub a: Subset,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub root: usize,
    pub entries: Vec<AlphaEntry>,
}

impl AlphaTable {
    /// `α_{G,X,σ}`: contributions summed over nodes.
    pub fn totals(&self) -> BTreeMap<(Subset, u64), Rational> {
        let mut out: BTreeMap<(Subset, u64), Rational> = BTreeMap::new();
        for e in &self.entries {
            *out.entry((e.x, e.sigma)).or_insert_with(Rational::zero) += &e.value;
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Largest `|X|` carrying a nonzero coefficient.
    pub fn max_support_size(&self) -> usize {
        self.totals().keys().map(|(x, _)| x.count_ones() as usize).max().unwrap_or(0)
    }
}

/// Runs the recursion from `root` with `A = ∅` at the top, so that the
/// identity holds with `OPT(G)` on the left.
pub fn compute_alpha(p: &AdmissibleProblem, inst: &TwInstance, td: &TreeDecomposition, root: usize) -> Result<AlphaTable> {
    let v = validate_tree_decomposition(&inst.graph, td);
    if let Some(f) = v.first_failure() {
        return Err(contract!("invalid tree decomposition: {} ({})", f.name, f.witness.clone().unwrap_or_default()));
    }
    if root >= td.num_nodes() {
        return Err(contract!("root {root} outside the {} tree nodes", td.num_nodes()));
    }
    let mut entries = Vec::new();
    recurse(p, inst, td, root, None, 0, &mut entries);
    Ok(AlphaTable { root, entries })
}

fn recurse(
    p: &AdmissibleProblem,
    g: &TwInstance,
    td: &TreeDecomposition,
    t: usize,
    parent: Option<usize>,
    a: Subset,
    out: &mut Vec<AlphaEntry>,
) {
    let bt = bag_mask(td, t);
    for c in td.neighbors(t) {
        if Some(c) == parent {
            continue;
        }
        let sub = g.induced(component_mask(td, t, c));
        recurse(p, &sub, td, c, Some(t), bag_mask(td, c) & bt, out);
    }
    let tau = Rational::from(p.tau());
    for sigma in p.partial_solutions(bt) {
        let outer = p.conditional_optimum(g, a, p.restrict(sigma, a));
        let inner = p.conditional_optimum(g, bt, sigma);
        let (Some(outer), Some(inner)) = (outer, inner) else {
            continue;
        };
        let value = &tau * Rational::from(outer - inner);
        if !value.is_zero() {
            out.push(AlphaEntry {
                node: t,
                x: bt,
                sigma,
                a,
                value,
            });
        }
    }
}

/// Checks every coefficient is nonnegative and the identity holds exactly
/// for every solution.
pub fn verify_alpha(p: &AdmissibleProblem, inst: &TwInstance, alpha: &AlphaTable) -> Verdict {
    let mut v = Verdict::new();
    let negative = alpha.entries.iter().find(|e| e.value.is_negative()).map(|e| {
        format!("alpha at node {}, X = {:?}, sigma = {} is {}", e.node, subset_elems(e.x), p.label(e.sigma), e.value)
    });
    v.record("nonnegative", negative);
    let totals = alpha.totals();
    let opt = p.optimum(inst);
    let tau = p.tau();
    let mismatch = p.solutions().iter().find_map(|&s| {
        let lhs = Rational::from(tau * (opt - p.value(inst, s)));
        let rhs: Rational = totals
            .iter()
            .filter(|((x, sig), _)| p.restrict(s, *x) == *sig)
            .map(|(_, a)| a)
            .sum();
        (lhs != rhs).then(|| format!("solution {}: tau(OPT - val) = {lhs}, sum alpha chi = {rhs}", p.label(s)))
    });
    v.record("identity", mismatch);
    v
}

/// `w(x) = OPT − τ⁻¹ Σ α_{X,σ} x_{X,σ}` on the model's coordinates.
pub fn alpha_objective(
    model: &UniformLpModel,
    p: &AdmissibleProblem,
    inst: &TwInstance,
    alpha: &AlphaTable,
) -> Result<AffineObjective> {
    let index: BTreeMap<(Subset, u64), usize> = model.variables.iter().enumerate().map(|(j, &v)| (v, j)).collect();
    let mut coeffs = alloc::vec![Rational::zero(); model.num_variables()];
    let tau = Rational::from(p.tau());
    for ((x, sig), a) in alpha.totals() {
        let j = *index
            .get(&(x, sig))
            .ok_or_else(|| contract!("coordinate X = {:?} is not in the model (k = {})", subset_elems(x), model.k))?;
        coeffs[j] = -(&tau * &a);
    }
    Ok(AffineObjective {
        coeffs,
        constant: Rational::from(p.optimum(inst)),
    })
}

/// The exact slack matrix `τ[OPT(G) − val_G(s)]` (instances × solutions)
/// and its factorization with one rank-1 term `α_{·,X,σ} ⊗ χ(·↾X = σ)` per
/// coordinate carrying a nonzero coefficient.
pub fn alpha_factorization(
    p: &AdmissibleProblem,
    instances: &[TwInstance],
    alphas: &[AlphaTable],
) -> Result<(Matrix, NonnegFactorization)> {
    if instances.len() != alphas.len() {
        return Err(contract!("{} alpha tables for {} instances", alphas.len(), instances.len()));
    }
    let sols = p.solutions();
    let slack = Matrix::from_fn(instances.len(), sols.len(), |i, j| {
        Rational::from(p.tau() * (p.optimum(&instances[i]) - p.value(&instances[i], sols[j])))
    });
    let totals: Vec<BTreeMap<(Subset, u64), Rational>> = alphas.iter().map(AlphaTable::totals).collect();
    let mut keys: Vec<(Subset, u64)> = totals.iter().flat_map(|t| t.keys().copied()).collect();
    keys.sort_unstable();
    keys.dedup();
    let factors = keys
        .into_iter()
        .map(|key| RankOneFactor {
            row: totals.iter().map(|t| t.get(&key).cloned().unwrap_or_else(Rational::zero)).collect(),
            col: sols
                .iter()
                .map(|&s| Rational::from(i64::from(p.restrict(s, key.0) == key.1)))
                .collect(),
        })
        .collect();
    Ok((
        slack,
        NonnegFactorization {
            rows: instances.len(),
            cols: sols.len(),
            factors,
            uniform: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::super::{build_objective, build_uniform_lp, TwProblemKind};
    use super::*;
    use crate::factor::verify_factorization;
    use crate::graph::Graph;
    use crate::treewidth::treewidth_exact;
    use alloc::vec;

    fn check(kind: TwProblemKind, inst: TwInstance) {
        let p = AdmissibleProblem::new(kind, inst.graph.n()).unwrap();
        let (_, td) = treewidth_exact(&inst.graph).unwrap();
        for root in 0..td.num_nodes() {
            let alpha = compute_alpha(&p, &inst, &td, root).unwrap();
            let v = verify_alpha(&p, &inst, &alpha);
            assert!(v.accepted(), "{kind:?} root {root}: {:?}", v.first_failure());
        }
    }

    #[test]
    fn path_independent_set() {
        check(TwProblemKind::IndependentSet, TwInstance::plain(Graph::path(4)));
    }

    #[test]
    fn single_edge_unique_games() {
        let g = Graph::on_all(2, [(0, 1)]).unwrap();
        check(TwProblemKind::UniqueGames, TwInstance::with_swaps(g.clone(), vec![true]).unwrap());
        check(TwProblemKind::UniqueGames, TwInstance::with_swaps(g, vec![false]).unwrap());
    }

    #[test]
    fn single_bag_closed_form() {
        let p = AdmissibleProblem::new(TwProblemKind::VertexCover, 3).unwrap();
        let inst = TwInstance::plain(Graph::complete(3));
        let td = TreeDecomposition::trivial(&inst.graph);
        let alpha = compute_alpha(&p, &inst, &td, 0).unwrap();
        // With A = ∅: α_{B,σ} = τ[OPT − OPT_{s↾B = σ}] = val(σ) − 2.
        for e in &alpha.entries {
            assert_eq!(e.value, Rational::from(p.value(&inst, e.sigma) - 2));
        }
        assert!(verify_alpha(&p, &inst, &alpha).accepted());
    }

    #[test]
    fn objective_and_factorization_agree() {
        let p = AdmissibleProblem::new(TwProblemKind::MaxCut, 4).unwrap();
        let insts: Vec<TwInstance> = [Graph::cycle(4), Graph::path(4)].into_iter().map(TwInstance::plain).collect();
        let model = build_uniform_lp(&p, 2).unwrap();
        let mut alphas = Vec::new();
        for inst in &insts {
            let (_, td) = treewidth_exact(&inst.graph).unwrap();
            let alpha = compute_alpha(&p, inst, &td, 0).unwrap();
            let wa = alpha_objective(&model, &p, inst, &alpha).unwrap();
            let w = build_objective(&model, &p, inst).unwrap();
            assert!(wa.agrees_on_hull(&w, &model.hull));
            alphas.push(alpha);
        }
        let (m, f) = alpha_factorization(&p, &insts, &alphas).unwrap();
        assert!(verify_factorization(&m, &f).accepted());
    }

    #[test]
    fn invalid_decomposition_is_contract_error() {
        let p = AdmissibleProblem::new(TwProblemKind::IndependentSet, 3).unwrap();
        let inst = TwInstance::plain(Graph::path(3));
        let td = TreeDecomposition {
            bags: alloc::vec![alloc::vec![0, 1]],
            edges: alloc::vec![],
        };
        assert!(compute_alpha(&p, &inst, &td, 0).is_err());
    }
}
