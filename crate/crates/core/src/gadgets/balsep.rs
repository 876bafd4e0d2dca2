//! Unique Games to BalancedSeparator with a bounded-treewidth demand graph.
//!
//! UG vertex `v` (index `side·n + i`) becomes the block of `2^q` vertices
//! `(x, v)`, `x ∈ {±1}^q`, with index `v·2^q + mask(x)` where bit `k` of the
//! mask is set when `x_k = −1`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::graph::Subset;
use crate::matrix::Matrix;
use crate::problems::{subset_label, BalancedSeparatorProblem, PairMap, Sense, UgInstance, UniqueGamesProblem};
use crate::rational::{common_scale, Rational};
use crate::reduction::ReductionRecord;
use crate::table::ProblemTable;
use crate::verdict::Verdict;

fn block_size(q: usize) -> Result<usize> {
    if q == 0 || q > 8 {
        return Err(domain!("alphabet size {q} outside 1..=8"));
    }
    Ok(1 << q)
}

fn check_eps(eps: &Rational) -> Result<()> {
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(domain!("epsilon = {eps} must lie strictly between 0 and 1"));
    }
    Ok(())
}

/// `π(x)_k = x_{π(k)}` on masks.
fn act(perm: &[usize], x: usize) -> usize {
    perm.iter().enumerate().fold(0, |acc, (k, &p)| acc | ((x >> p) & 1) << k)
}

/// Demand matrix: `1/(2^{2q−1}·|V|)` between any two vertices of the same
/// block (diagonal included), zero across blocks. Total demand
/// `½ Σ_{i,j} d(i, j)` is 1.
pub fn balsep_demand(num_ug_vertices: usize, q: usize) -> Result<Matrix> {
    let b = block_size(q)?;
    let n = b * num_ug_vertices;
    let val = Rational::new(1, ((b * b / 2) * num_ug_vertices) as i64);
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i / b == j / b {
            val.clone()
        } else {
            Rational::zero()
        }
    }))
}

/// Capacities `w(i,j) ε^{(π(x)y)_−} (1−ε)^{(π(x)y)_+} / (2^q W)` for every UG
/// edge, joining the left block of `i` to the right block of `j`.
pub fn balsep_instance(ug: &UgInstance, eps: &Rational) -> Result<PairMap> {
    check_eps(eps)?;
    let b = block_size(ug.q)?;
    let mut cap = PairMap::new(b * ug.num_vertices());
    let scale = Rational::from_int(b as i64) * ug.total_weight();
    let keep = Rational::one() - eps;
    for e in &ug.edges {
        if e.weight.is_zero() {
            continue;
        }
        let base = &e.weight / &scale;
        let (vi, vj) = (e.left, ug.n + e.right);
        for x in 0..b {
            let px = act(&e.perm, x);
            for y in 0..b {
                let minus = (px ^ y).count_ones();
                let c = &base * &eps.pow(minus) * keep.pow(ug.q as u32 - minus);
                cap.add(vi * b + x, vj * b + y, c)?;
            }
        }
    }
    Ok(cap)
}

/// `s* = {(x, v) : x_{s(v)} = 1}`.
pub fn balsep_solution(s: &[usize], q: usize) -> Result<Subset> {
    let b = block_size(q)?;
    if b * s.len() > 64 {
        return Err(Error::Capacity(format!("{} vertices exceed 64", b * s.len())));
    }
    let mut out: Subset = 0;
    for (v, &label) in s.iter().enumerate() {
        for x in 0..b {
            if (x >> label) & 1 == 0 {
                out |= 1 << (v * b + x);
            }
        }
    }
    Ok(out)
}

/// Minimum separated capacity over the balanced cuts, computed over
/// integers after scaling every capacity by the common denominator.
pub fn balsep_optimum(problem: &BalancedSeparatorProblem, cap: &PairMap) -> Result<(Rational, Subset)> {
    let vals: Vec<Rational> = cap.entries.iter().map(|(_, _, w)| w.clone()).collect();
    let (ints, lcm) =
        common_scale(&vals).ok_or_else(|| Error::Capacity("capacity denominators overflow i128".into()))?;
    let mut best: Option<(i128, Subset)> = None;
    for &s in &problem.balanced {
        let cut: i128 = cap
            .entries
            .iter()
            .zip(&ints)
            .filter(|((a, b, _), _)| (s >> a & 1) != (s >> b & 1))
            .map(|(_, w)| w)
            .sum();
        if best.map_or(true, |(v, _)| cut < v) {
            best = Some((cut, s));
        }
    }
    let (v, s) = best.ok_or_else(|| domain!("no balanced cut"))?;
    Ok((Rational::from_bigints(v.into(), lcm)?, s))
}

/// Checks, for every labeling `s`, that `s*` separates demand exactly 1/2
/// and that `1/2 − val(s*) = (1/2 − ε)·val(s)`.
pub fn verify_balsep_completeness(ug: &UgInstance, eps: &Rational) -> Result<Verdict> {
    let cap = balsep_instance(ug, eps)?;
    let demand = balsep_demand(ug.num_vertices(), ug.q)?;
    let nonzero: Vec<(usize, usize, Rational)> = (0..demand.rows())
        .flat_map(|i| (0..demand.cols()).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && !demand.get(i, j).is_zero())
        .map(|(i, j)| (i, j, demand.get(i, j).clone()))
        .collect();
    let half = Rational::new(1, 2);
    let mut v = Verdict::new();
    let mut balance = None;
    let mut identity = None;
    let gap = &half - eps;
    for s in crate::problems::all_words(ug.num_vertices(), ug.q) {
        let star = balsep_solution(&s, ug.q)?;
        let sep: Rational = nonzero
            .iter()
            .filter(|(i, j, _)| (star >> i & 1) == 1 && (star >> j & 1) == 0)
            .map(|(_, _, w)| w)
            .sum();
        if balance.is_none() && sep != half {
            balance = Some(format!("labeling {s:?}: s* separates {sep}, expected 1/2"));
        }
        let lhs = &half - cap.separated(star);
        let rhs = &gap * ug.value(&s);
        if identity.is_none() && lhs != rhs {
            identity = Some(format!("labeling {s:?}: 1/2 - val(s*) = {lhs}, (1/2 - eps) val(s) = {rhs}"));
        }
    }
    v.record("balance", balance);
    v.record("completeness", identity);
    Ok(v)
}

/// The record with `C1 = 1 − δ`, `C2 = δ + ε`, `M1 = 2/(1−2ε)` and
/// `M2 = δ(1+2ε)/(1−2ε)`; soundness guarantees are supplied by the caller.
/// Target columns are the images of the source labelings and target optima
/// are exact minima over all balanced cuts.
pub fn ug_to_balsep(
    instances: &[UgInstance],
    eps: &Rational,
    delta: &Rational,
    s1: &Rational,
    s2: &Rational,
) -> Result<(BalancedSeparatorProblem, ReductionRecord)> {
    check_eps(eps)?;
    let first = instances.first().ok_or_else(|| domain!("no instances given"))?;
    let (n, q, d) = (first.n, first.q, first.delta);
    let one_minus = Rational::one() - Rational::from_int(2) * eps;
    if one_minus.is_zero() {
        return Err(Error::Division("epsilon = 1/2 makes 1 - 2 epsilon vanish".into()));
    }
    let source = UniqueGamesProblem::new(n, q, d, instances.to_vec())?;
    let src = ProblemTable::from_problem(&source)?;
    let caps = instances.iter().map(|i| balsep_instance(i, eps)).collect::<Result<Vec<_>>>()?;
    let target = BalancedSeparatorProblem::new(balsep_demand(2 * n, q)?, caps.clone())?;
    let labelings = crate::problems::all_words(2 * n, q);
    let images = labelings.iter().map(|s| balsep_solution(s, q)).collect::<Result<Vec<_>>>()?;
    let values = Matrix::from_fn(caps.len(), images.len(), |i, j| caps[i].separated(images[j]));
    let target_opt = caps
        .iter()
        .map(|c| balsep_optimum(&target, c).map(|(v, _)| v))
        .collect::<Result<Vec<_>>>()?;
    let table = ProblemTable {
        name: format!("BalancedSeparator({})", target.n),
        sense: Sense::Min,
        instances: caps.iter().enumerate().map(|(i, _)| format!("I*_{i}")).collect(),
        solutions: images.iter().map(|&s| subset_label(s)).collect(),
        values,
        denominators: None,
    };
    let (rows, cols) = (src.num_instances(), src.num_solutions());
    let m1 = Rational::from_int(2) / &one_minus;
    let m2 = delta * (Rational::one() + Rational::from_int(2) * eps) / &one_minus;
    let record = ReductionRecord {
        source: src,
        target: table,
        target_complete: false,
        target_opt: Some(target_opt),
        instance_map: (0..rows).collect(),
        solution_map: (0..cols).collect(),
        c1: vec![Rational::one() - delta; rows],
        s1: vec![s1.clone(); rows],
        c2: vec![delta + eps; rows],
        s2: vec![s2.clone(); rows],
        m1: Matrix::filled(rows, cols, m1),
        m2: Matrix::filled(rows, cols, m2),
    };
    Ok((target, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::k22_family;
    use crate::rational::{q, qi};
    use crate::reduction::verify_reduction;
    use crate::treewidth::treewidth_exact;

    #[test]
    fn demand_structure() {
        let d = balsep_demand(4, 2).unwrap();
        let p = BalancedSeparatorProblem::new(d, vec![]).unwrap();
        assert_eq!(p.total_demand(), qi(1));
        let g = p.demand_graph();
        assert_eq!(g.num_edges(), 4 * 6);
        assert_eq!(treewidth_exact(&g).unwrap().0, 3);
    }

    #[test]
    fn capacities_are_probabilities() {
        for ug in k22_family().iter().take(3) {
            assert_eq!(balsep_instance(ug, &q(1, 3)).unwrap().total(), qi(1));
        }
    }

    #[test]
    fn completeness_all_labelings() {
        for ug in k22_family() {
            for eps in [q(1, 4), q(1, 3), q(1, 2)] {
                let v = verify_balsep_completeness(&ug, &eps).unwrap();
                assert!(v.accepted(), "{:?}", v.first_failure());
            }
        }
    }

    #[test]
    fn record_verifies_and_half_is_degenerate() {
        let fam = k22_family();
        for delta in [qi(0), q(1, 10)] {
            let (_, red) = ug_to_balsep(&fam[..4], &q(1, 4), &delta, &qi(0), &qi(0)).unwrap();
            let v = verify_reduction(&red).unwrap();
            assert!(v.accepted(), "{:?}", v.first_failure());
        }
        assert!(matches!(ug_to_balsep(&fam, &q(1, 2), &qi(0), &qi(0), &qi(0)), Err(Error::Division(_))));
    }

    #[test]
    fn optimum_matches_rational_scan() {
        let fam = k22_family();
        let cap = balsep_instance(&fam[5], &q(1, 4)).unwrap();
        let p = BalancedSeparatorProblem::new(balsep_demand(4, 2).unwrap(), vec![cap.clone()]).unwrap();
        let oracle = p.balanced.iter().map(|&s| cap.separated(s)).min().unwrap();
        assert_eq!(balsep_optimum(&p, &cap).unwrap().0, oracle);
    }
}
