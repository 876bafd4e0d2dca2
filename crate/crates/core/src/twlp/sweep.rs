//! The exhaustive check of one admissible problem over a graph family:
//! LP optimum against brute force, admissibility, and the α identity.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    build_objective, build_uniform_lp, compute_alpha, closed_form_size_bound, size_bound, solve_uniform_lp,
    test_decompositions, verify_admissibility, verify_alpha, AdmissibleProblem, TwInstance, TwProblemKind,
};
use crate::error::Result;
use crate::graph::Graph;
use crate::rational::Rational;
use crate::verdict::Verdict;

/// UniqueGames swap patterns per graph: all identity, all swap, alternating
/// by edge index.
pub fn ug_labelings(g: &Graph) -> Vec<Vec<bool>> {
    let m = g.num_edges();
    let mut out = alloc::vec![alloc::vec![false; m], alloc::vec![true; m], (0..m).map(|e| e % 2 == 1).collect()];
    out.dedup();
    out
}

/// The instances a graph contributes for `kind`, placed on `[n]` (Matching
/// pads odd `n` with an isolated vertex).
pub fn instances_for(kind: TwProblemKind, g: &Graph) -> Result<Vec<TwInstance>> {
    Ok(match kind {
        TwProblemKind::UniqueGames => ug_labelings(g)
            .into_iter()
            .map(|sw| TwInstance::with_swaps(g.clone(), sw))
            .collect::<Result<_>>()?,
        TwProblemKind::Matching if g.n() % 2 == 1 => {
            let n = g.n() + 1;
            alloc::vec![TwInstance::plain(Graph::on_all(n, g.edges().iter().copied())?)]
        }
        _ => alloc::vec![TwInstance::plain(g.clone())],
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub swaps: Vec<bool>,
    pub lp_opt: Rational,
    pub brute_force_opt: i64,
    pub alpha_passed: bool,
    pub max_alpha_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepReport {
    pub kind: TwProblemKind,
    pub k: usize,
    pub rows: Vec<SweepRow>,
    /// Per universe size: (model variables, `Σ_{|X|≤k+1}|𝒮_X|`, `Σ_{|X|<k}|𝒮_X|`).
    pub sizes: BTreeMap<usize, (usize, usize, usize)>,
    /// Largest `|X|` with a nonzero α over the whole sweep.
    pub max_alpha_size: usize,
    pub verdict: Verdict,
}

/// Runs every check on every instance derived from `graphs` with one model
/// per universe size. α is computed at every root of every test
/// decomposition.
pub fn sweep(kind: TwProblemKind, graphs: &[Graph], extra: &[TwInstance], k: usize) -> Result<SweepReport> {
    let mut by_n: BTreeMap<usize, Vec<TwInstance>> = BTreeMap::new();
    for g in graphs {
        for inst in instances_for(kind, g)? {
            by_n.entry(inst.graph.n()).or_default().push(inst);
        }
    }
    for inst in extra {
        by_n.entry(inst.graph.n()).or_default().push(inst.clone());
    }
    let mut rows = Vec::new();
    let mut sizes = BTreeMap::new();
    let (mut lp_fail, mut alpha_fail, mut size_fail): (Option<String>, Option<String>, Option<String>) =
        (None, None, None);
    let mut admissible = Verdict::new();
    for (&n, insts) in &by_n {
        let p = AdmissibleProblem::new(kind, n)?;
        let model = build_uniform_lp(&p, k)?;
        let bound = size_bound(&p, k);
        sizes.insert(n, (model.num_variables(), bound, closed_form_size_bound(&p, k)));
        if model.num_variables() > bound && size_fail.is_none() {
            size_fail = Some(format!("n = {n}: {} variables > {bound}", model.num_variables()));
        }
        let adm = verify_admissibility(&p, insts)?;
        if admissible.checks.is_empty() || (admissible.accepted() && !adm.accepted()) {
            admissible = adm;
        }
        for inst in insts {
            let w = build_objective(&model, &p, inst)?;
            let lp = solve_uniform_lp(&model, &w)?;
            let brute = p.optimum(inst);
            if lp.value != Rational::from(brute) && lp_fail.is_none() {
                lp_fail = Some(format!("n = {n}, edges {:?}: LP {} vs OPT {brute}", inst.graph.edges(), lp.value));
            }
            let mut ok = true;
            let mut max_size = 0;
            for td in test_decompositions(&inst.graph)? {
                for root in 0..td.num_nodes() {
                    let alpha = compute_alpha(&p, inst, &td, root)?;
                    max_size = max_size.max(alpha.max_support_size());
                    let v = verify_alpha(&p, inst, &alpha);
                    if let Some(f) = v.first_failure() {
                        ok = false;
                        if alpha_fail.is_none() {
                            alpha_fail = Some(format!(
                                "n = {n}, edges {:?}, root {root}: {} {}",
                                inst.graph.edges(),
                                f.name,
                                f.witness.clone().unwrap_or_default()
                            ));
                        }
                    }
                }
            }
            rows.push(SweepRow {
                n,
                edges: inst.graph.edges().to_vec(),
                swaps: inst.swaps.clone(),
                lp_opt: lp.value,
                brute_force_opt: brute,
                alpha_passed: ok,
                max_alpha_size: max_size,
            });
        }
    }
    let max_alpha_size = rows.iter().map(|r| r.max_alpha_size).max().unwrap_or(0);
    let mut verdict = Verdict::new();
    verdict.record("lp_equals_opt", lp_fail);
    verdict.extend("admissibility", admissible);
    verdict.record("alpha", alpha_fail);
    verdict.record("size_bound", size_fail);
    Ok(SweepReport {
        kind,
        k,
        rows,
        sizes,
        max_alpha_size,
        verdict,
    })
}
