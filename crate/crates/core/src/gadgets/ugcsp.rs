//! Unique Games to 1F-CSP and to NotEqualCSP(Q).
//!
//! Both targets share the clause distribution: a vertex `v` by weighted
//! degree, `t` neighbours drawn independently from the conditional edge
//! distribution, a uniform string `x` and a uniform set `S ⊆ [q]` of size
//! `(1−ε)q`. Variables are `⟨v, z⟩`; the 1F-CSP takes `z ∈ {±1}^q` (encoded
//! over `{0, 1}` with `0 ↦ +1`), the NotEqualCSP takes coset
//! representatives `z ∈ Z_Q^q` with `z_0 = 0`. Permutations act by
//! `(π·z)_k = z_{π^{-1}(k)}`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::factor::{NonnegFactorization, RankOneFactor};
use crate::matrix::Matrix;
use crate::problems::{all_words, Clause, CspInstance, CspProblem, Sense, UgInstance, UniqueGamesProblem};
use crate::rational::Rational;
use crate::reduction::ReductionRecord;
use crate::table::ProblemTable;
use crate::verdict::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum UgCspKind {
    OneFree,
    NotEqual { modulus: usize },
}

/// Largest number of target variables accepted.
pub const MAX_TARGET_VARIABLES: usize = 24;

/// Variable layout and the fixed parts of the clause distribution.
#[derive(Clone, Debug)]
pub struct Layout {
    pub kind: UgCspKind,
    pub q: usize,
    pub num_vertices: usize,
    /// Alphabet of the target and of the strings `z`, `x`.
    pub base: usize,
    pub vars_per_vertex: usize,
    pub set_size: usize,
    strings: Vec<Vec<usize>>,
    sets: Vec<Vec<usize>>,
}

fn combinations(q: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << q)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..q).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

impl Layout {
    pub fn new(kind: UgCspKind, q: usize, num_vertices: usize, eps: &Rational) -> Result<Self> {
        if eps.is_negative() || *eps >= Rational::one() {
            return Err(domain!("epsilon = {eps} must lie in [0, 1)"));
        }
        let size = (Rational::one() - eps) * Rational::from(q);
        if !size.is_integer() {
            return Err(domain!("(1 - epsilon) q = {size} is not an integer"));
        }
        let set_size = size.numer().try_into().map_err(|_| domain!("set size {size} too large"))?;
        let (base, vars_per_vertex) = match kind {
            UgCspKind::OneFree => (2, 1usize << q),
            UgCspKind::NotEqual { modulus } => {
                if modulus < 2 || modulus < q {
                    return Err(domain!("modulus {modulus} must be at least max(2, q = {q})"));
                }
                (modulus, modulus.pow(q as u32 - 1))
            }
        };
        if num_vertices * vars_per_vertex > MAX_TARGET_VARIABLES {
            return Err(Error::Capacity(format!(
                "{} target variables exceed {MAX_TARGET_VARIABLES}",
                num_vertices * vars_per_vertex
            )));
        }
        Ok(Layout {
            kind,
            q,
            num_vertices,
            base,
            vars_per_vertex,
            set_size,
            strings: all_words(q, base),
            sets: combinations(q, set_size),
        })
    }

    pub fn num_variables(&self) -> usize {
        self.num_vertices * self.vars_per_vertex
    }

    /// Completeness floor: `1−ε` for 1F-CSP, `(1−ε)(1−1/q)` for NotEqualCSP.
    pub fn floor(&self, eps: &Rational) -> Rational {
        let keep = Rational::one() - eps;
        match self.kind {
            UgCspKind::OneFree => keep,
            UgCspKind::NotEqual { .. } => keep * (Rational::one() - Rational::new(1, self.q as i64)),
        }
    }

    /// Index of the variable standing for `⟨v, z⟩` and the shift `λ` with
    /// `⟨v, z⟩ = ⟨v, rep⟩ + λ` (always 0 for 1F-CSP).
    pub fn var(&self, v: usize, z: &[usize]) -> (usize, usize) {
        match self.kind {
            UgCspKind::OneFree => {
                let code = z.iter().enumerate().map(|(k, &b)| b << k).sum::<usize>();
                (v * self.vars_per_vertex + code, 0)
            }
            UgCspKind::NotEqual { modulus } => {
                let shift = z[0];
                let mut code = 0;
                for k in (1..self.q).rev() {
                    code = code * modulus + (z[k] + modulus - shift) % modulus;
                }
                (v * self.vars_per_vertex + code, shift)
            }
        }
    }

    /// The string `z` represented by variable index `code` within a vertex.
    fn representative(&self, code: usize) -> Vec<usize> {
        match self.kind {
            UgCspKind::OneFree => (0..self.q).map(|k| code >> k & 1).collect(),
            UgCspKind::NotEqual { modulus } => {
                let mut z = vec![0; self.q];
                let mut c = code;
                for zk in z.iter_mut().skip(1) {
                    *zk = c % modulus;
                    c /= modulus;
                }
                z
            }
        }
    }

    /// `s*(⟨v, z⟩) = z_{s(v)}`.
    pub fn solution(&self, s: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.num_variables());
        for &label in s {
            for code in 0..self.vars_per_vertex {
                out.push(self.representative(code)[label]);
            }
        }
        out
    }

    /// The clause `C(v, u_1, …, u_t, x, S)` with the given weight.
    pub fn clause(&self, ug: &UgInstance, v: usize, us: &[usize], x: &[usize], set: &[usize], weight: Rational) -> Result<Clause> {
        let mut same: BTreeMap<usize, bool> = BTreeMap::new();
        let mut conflict = false;
        let mut forbidden: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &u in us {
            let pi = ug.perm(v, u).ok_or_else(|| domain!("vertices {v} and {u} are not adjacent"))?;
            for z in &self.strings {
                let mut y = vec![0; self.q];
                for (m, &p) in pi.iter().enumerate() {
                    y[p] = z[m];
                }
                let (var, shift) = self.var(u, z);
                match self.kind {
                    UgCspKind::OneFree => {
                        let sign = if set.iter().all(|&k| y[k] == x[k]) {
                            Some(true)
                        } else if set.iter().all(|&k| y[k] != x[k]) {
                            Some(false)
                        } else {
                            None
                        };
                        if let Some(sign) = sign {
                            if *same.entry(var).or_insert(sign) != sign {
                                conflict = true;
                            }
                        }
                    }
                    UgCspKind::NotEqual { modulus } => {
                        if set.iter().all(|&k| y[k] == x[k]) {
                            forbidden.entry(var).or_default().insert((modulus - shift) % modulus);
                        }
                    }
                }
            }
        }
        Ok(match self.kind {
            UgCspKind::OneFree => {
                let scope: Vec<usize> = same.keys().copied().collect();
                let satisfying = if conflict {
                    Vec::new()
                } else {
                    (0..2)
                        .map(|b| same.values().map(|&eq| if eq { b } else { 1 - b }).collect())
                        .collect()
                };
                Clause::new(weight, scope, satisfying)
            }
            UgCspKind::NotEqual { .. } => {
                let scope: Vec<usize> = forbidden.keys().copied().collect();
                let satisfying = all_words(scope.len(), self.base)
                    .into_iter()
                    .filter(|w| forbidden.values().zip(w).all(|(f, a)| !f.contains(a)))
                    .collect();
                Clause::new(weight, scope, satisfying)
            }
        })
    }
}

/// Vertex tuples `(v, u_1, …, u_t)` with their probability under `μ_t`;
/// zero-probability tuples are omitted.
pub fn vertex_tuples(ug: &UgInstance, t: usize) -> Vec<(usize, Vec<usize>, Rational)> {
    let two_w = Rational::from_int(2) * ug.total_weight();
    let mut out = Vec::new();
    for v in 0..ug.num_vertices() {
        let nb = ug.neighbors(v);
        let wv: Rational = nb.iter().map(|(_, w)| w).sum();
        if wv.is_zero() {
            continue;
        }
        let pv = &wv / &two_w;
        for idx in all_words(t, nb.len()) {
            let p = idx.iter().fold(pv.clone(), |acc, &i| acc * (&nb[i].1 / &wv));
            if p.is_positive() {
                out.push((v, idx.iter().map(|&i| nb[i].0).collect(), p));
            }
        }
    }
    out
}

/// The target instance `I*`: one clause per `(v, u⃗, x, S)` weighted by its
/// probability.
pub fn ug_csp_instance(ug: &UgInstance, layout: &Layout, t: usize) -> Result<CspInstance> {
    let per = Rational::new(1, (layout.strings.len() * layout.sets.len()) as i64);
    let mut clauses = Vec::new();
    for (v, us, p) in vertex_tuples(ug, t) {
        let w = &p * &per;
        for x in &layout.strings {
            for set in &layout.sets {
                clauses.push(layout.clause(ug, v, &us, x, set, w.clone())?);
            }
        }
    }
    CspInstance::new(layout.num_variables(), layout.base, clauses)
}

/// One entry `M̃_{v,u⃗}(I, f)` of the correction matrix, with the probability
/// of its vertex tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionEntry {
    pub vertex: usize,
    pub neighbors: Vec<usize>,
    /// Distinct vertices of the tuple, ascending.
    pub domain: Vec<usize>,
    /// Labels on `domain`.
    pub labels: Vec<usize>,
    pub probability: Rational,
    pub value: Rational,
}

/// `M̃ = E_{x,S}[C(v, u⃗, x, S)[s*]] − floor·(Σ_i χ[s(v) = π_{v,u_i}(s(u_i))] − t + 1)`
/// for every tuple of positive probability and every labeling of its
/// distinct vertices.
pub fn correction_table(ug: &UgInstance, layout: &Layout, t: usize, eps: &Rational) -> Result<Vec<CorrectionEntry>> {
    let floor = layout.floor(eps);
    let trials = Rational::from((layout.strings.len() * layout.sets.len()) as i64);
    let offset = Rational::from(t as i64) - Rational::one();
    let mut out = Vec::new();
    for (v, us, p) in vertex_tuples(ug, t) {
        let domain: Vec<usize> = BTreeSet::from_iter(core::iter::once(v).chain(us.iter().copied()))
            .into_iter()
            .collect();
        let clauses: Vec<Clause> = layout
            .strings
            .iter()
            .flat_map(|x| layout.sets.iter().map(move |set| (x, set)))
            .map(|(x, set)| layout.clause(ug, v, &us, x, set, Rational::one()))
            .collect::<Result<_>>()?;
        let perms: Vec<Vec<usize>> = us.iter().map(|&u| ug.perm(v, u).expect("adjacent")).collect();
        for labels in all_words(domain.len(), layout.q) {
            let mut s = vec![0; ug.num_vertices()];
            for (&d, &l) in domain.iter().zip(&labels) {
                s[d] = l;
            }
            let star = layout.solution(&s);
            let sat = clauses.iter().filter(|c| c.is_satisfied(&star)).count();
            let correct = us.iter().zip(&perms).filter(|(&u, pi)| s[v] == pi[s[u]]).count();
            let value = Rational::from(sat as i64) / &trials - &floor * (Rational::from(correct as i64) - &offset);
            out.push(CorrectionEntry {
                vertex: v,
                neighbors: us.clone(),
                domain: domain.clone(),
                labels,
                probability: p.clone(),
                value,
            });
        }
    }
    Ok(out)
}

/// `E[M](I, s) = Σ P(v, u⃗)·M̃_{v,u⃗}(I, s↾{v, u⃗})`.
pub fn expected_correction(entries: &[CorrectionEntry], s: &[usize]) -> Rational {
    entries
        .iter()
        .filter(|e| e.domain.iter().zip(&e.labels).all(|(&d, &l)| s[d] == l))
        .map(|e| &e.probability * &e.value)
        .sum()
}

/// Checks the structural and completeness claims on one UG instance:
/// clause weights sum to 1, predicate shape, `M̃ ≥ 0`, and
/// `val(s*) = floor·(t·val(s) − t + 1) + E[M](s)` for every labeling. The
/// NotEqualCSP variant also checks the hard constraints on every `s*`.
pub fn verify_ug_csp_completeness(ug: &UgInstance, kind: UgCspKind, t: usize, eps: &Rational) -> Result<Verdict> {
    if t == 0 {
        return Err(domain!("t must be at least 1"));
    }
    let layout = Layout::new(kind, ug.q, ug.num_vertices(), eps)?;
    let inst = ug_csp_instance(ug, &layout, t)?;
    let entries = correction_table(ug, &layout, t, eps)?;
    let floor = layout.floor(eps);
    let tr = Rational::from(t as i64);
    let mut v = Verdict::new();
    let total = inst.total_weight();
    v.record("weights", (!total.is_one()).then(|| format!("clause weights sum to {total}")));
    let shape = inst.clauses.iter().enumerate().find_map(|(i, c)| match kind {
        UgCspKind::OneFree => (c.satisfying.len() != 2).then(|| format!("clause {i} has {} satisfying assignments", c.satisfying.len())),
        UgCspKind::NotEqual { .. } => {
            let allowed: Vec<BTreeSet<usize>> = (0..c.scope.len())
                .map(|k| c.satisfying.iter().map(|tup| tup[k]).collect())
                .collect();
            let product: usize = allowed.iter().map(|a| a.len()).product();
            (product != c.satisfying.len()).then(|| format!("clause {i} is not a conjunction of disequalities"))
        }
    });
    v.record("predicates", shape);
    let negative = entries
        .iter()
        .find(|e| e.value.is_negative())
        .map(|e| format!("M~ at v = {}, u = {:?}, labels {:?} is {}", e.vertex, e.neighbors, e.labels, e.value));
    v.record("correction_nonnegative", negative);
    let mut identity = None;
    let mut hard = None;
    for s in all_words(ug.num_vertices(), ug.q) {
        let star = layout.solution(&s);
        let lhs = inst.value(&star);
        let rhs = &floor * (&tr * ug.value(&s) - &tr + Rational::one()) + expected_correction(&entries, &s);
        if identity.is_none() && lhs != rhs {
            identity = Some(format!("labeling {s:?}: val(s*) = {lhs}, expected {rhs}"));
        }
        if let UgCspKind::NotEqual { modulus } = kind {
            if hard.is_none() {
                hard = hard_constraint_violation(&layout, modulus, &s, &star);
            }
        }
    }
    v.record("completeness", identity);
    if matches!(kind, UgCspKind::NotEqual { .. }) {
        v.record("hard_constraints", hard);
    }
    Ok(v)
}

/// Reads `⟨v, z⟩` for every `z ∈ Z_Q^q` through the substitution and checks
/// both `⟨v, z⟩ = z_{s(v)}` and `⟨v, z + λ𝟙⟩ = ⟨v, z⟩ + λ`.
fn hard_constraint_violation(layout: &Layout, modulus: usize, s: &[usize], star: &[usize]) -> Option<String> {
    let read = |v: usize, z: &[usize]| {
        let (var, shift) = layout.var(v, z);
        (star[var] + shift) % modulus
    };
    for (v, &label) in s.iter().enumerate() {
        for z in &layout.strings {
            let val = read(v, z);
            if val != z[label] {
                return Some(format!("<{v}, {z:?}> = {val}, expected {}", z[label]));
            }
            for lambda in 1..modulus {
                let zl: Vec<usize> = z.iter().map(|&a| (a + lambda) % modulus).collect();
                if read(v, &zl) != (val + lambda) % modulus {
                    return Some(format!("<{v}, {z:?} + {lambda}*1> breaks the hard constraint"));
                }
            }
        }
    }
    None
}

/// A UG→CSP reduction together with the rank-1 decomposition of its `M2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UgCspReduction {
    pub kind: UgCspKind,
    pub target: CspProblem,
    pub record: ReductionRecord,
    /// `M2 = Σ_{(v,u⃗,f)} [P(v,u⃗) M̃_{v,u⃗}(·, f) / (t·floor)] ⊗ χ(f = s↾{v,u⃗})`.
    pub correction: NonnegFactorization,
}

/// Builds the record with `C1 = 1 − ζ`, `C2 = floor·(1 − ζt)`,
/// `M1 = 1/(t·floor)` and `M2 = E[M]/(t·floor)`. The target table lists the
/// images `s*`; target optima are exact maxima over all assignments.
#[allow(clippy::too_many_arguments)]
pub fn ug_to_csp(
    instances: &[UgInstance],
    kind: UgCspKind,
    t: usize,
    eps: &Rational,
    zeta: &Rational,
    s1: &Rational,
    s2: &Rational,
) -> Result<UgCspReduction> {
    if t == 0 {
        return Err(domain!("t must be at least 1"));
    }
    let first = instances.first().ok_or_else(|| domain!("no instances given"))?;
    let (n, q, delta) = (first.n, first.q, first.delta);
    let layout = Layout::new(kind, q, 2 * n, eps)?;
    let floor = layout.floor(eps);
    let scale = Rational::from(t as i64) * &floor;
    if scale.is_zero() {
        return Err(Error::Division("t * floor vanishes".into()));
    }
    let source = UniqueGamesProblem::new(n, q, delta, instances.to_vec())?;
    let src = ProblemTable::from_problem(&source)?;
    let targets = instances.iter().map(|i| ug_csp_instance(i, &layout, t)).collect::<Result<Vec<_>>>()?;
    let name = match kind {
        UgCspKind::OneFree => String::from("1F-CSP"),
        UgCspKind::NotEqual { modulus } => format!("NotEqualCSP({modulus})"),
    };
    let target = CspProblem::new(&name, layout.num_variables(), layout.base, Sense::Max, targets.clone())?;
    let labelings = all_words(2 * n, q);
    let stars: Vec<Vec<usize>> = labelings.iter().map(|s| layout.solution(s)).collect();
    let values = Matrix::from_fn(targets.len(), stars.len(), |i, j| targets[i].value(&stars[j]));
    let target_opt = targets
        .iter()
        .map(|i| i.optimum(Sense::Max).map(|(v, _)| v))
        .collect::<Result<Vec<_>>>()?;
    let table = ProblemTable {
        name,
        sense: Sense::Max,
        instances: (0..targets.len()).map(|i| format!("I*_{i}")).collect(),
        solutions: stars.iter().map(|s| s.iter().map(|x| format!("{x}")).collect()).collect(),
        values,
        denominators: None,
    };

    let tables = instances
        .iter()
        .map(|i| correction_table(i, &layout, t, eps))
        .collect::<Result<Vec<_>>>()?;
    let rows = instances.len();
    let cols = labelings.len();
    let m2 = Matrix::from_fn(rows, cols, |i, j| expected_correction(&tables[i], &labelings[j]) / &scale);
    let mut keyed: BTreeMap<(usize, Vec<usize>, Vec<usize>), (Vec<usize>, Vec<Rational>)> = BTreeMap::new();
    for (i, table) in tables.iter().enumerate() {
        for e in table {
            let entry = keyed
                .entry((e.vertex, e.neighbors.clone(), e.labels.clone()))
                .or_insert_with(|| (e.domain.clone(), vec![Rational::zero(); rows]));
            entry.1[i] = &e.probability * &e.value / &scale;
        }
    }
    let factors = keyed
        .into_iter()
        .map(|((_, _, labels), (domain, row))| RankOneFactor {
            row,
            col: labelings
                .iter()
                .map(|s| {
                    if domain.iter().zip(&labels).all(|(&d, &l)| s[d] == l) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        })
        .collect();
    let correction = NonnegFactorization {
        rows,
        cols,
        factors,
        uniform: None,
    };
    let record = ReductionRecord {
        source: src,
        target: table,
        target_complete: false,
        target_opt: Some(target_opt),
        instance_map: (0..rows).collect(),
        solution_map: (0..cols).collect(),
        c1: vec![Rational::one() - zeta; rows],
        s1: vec![s1.clone(); rows],
        c2: vec![&floor * (Rational::one() - Rational::from(t as i64) * zeta); rows],
        s2: vec![s2.clone(); rows],
        m1: Matrix::filled(rows, cols, Rational::one() / &scale),
        m2,
    };
    Ok(UgCspReduction {
        kind,
        target,
        record,
        correction,
    })
}

/// UG → 1F-CSP.
pub fn ug_to_1fcsp(
    instances: &[UgInstance],
    t: usize,
    eps: &Rational,
    zeta: &Rational,
    s1: &Rational,
    s2: &Rational,
) -> Result<UgCspReduction> {
    ug_to_csp(instances, UgCspKind::OneFree, t, eps, zeta, s1, s2)
}

/// UG → NotEqualCSP(Q).
#[allow(clippy::too_many_arguments)]
pub fn ug_to_noteqcsp(
    instances: &[UgInstance],
    t: usize,
    eps: &Rational,
    modulus: usize,
    zeta: &Rational,
    s1: &Rational,
    s2: &Rational,
) -> Result<UgCspReduction> {
    ug_to_csp(instances, UgCspKind::NotEqual { modulus }, t, eps, zeta, s1, s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::verify_factorization;
    use crate::problems::k22_family;
    use crate::rational::{q, qi};
    use crate::reduction::verify_reduction;

    #[test]
    fn layout_sizes() {
        let l = Layout::new(UgCspKind::OneFree, 2, 4, &q(1, 2)).unwrap();
        assert_eq!((l.num_variables(), l.set_size), (16, 1));
        let l = Layout::new(UgCspKind::NotEqual { modulus: 2 }, 2, 4, &q(1, 2)).unwrap();
        assert_eq!(l.num_variables(), 8);
        assert!(Layout::new(UgCspKind::OneFree, 2, 4, &q(1, 3)).is_err());
        assert!(Layout::new(UgCspKind::NotEqual { modulus: 2 }, 3, 2, &q(2, 3)).is_err());
    }

    #[test]
    fn one_free_completeness() {
        for ug in k22_family().iter().step_by(3) {
            let v = verify_ug_csp_completeness(ug, UgCspKind::OneFree, 1, &q(1, 2)).unwrap();
            assert!(v.accepted(), "{:?}", v.first_failure());
        }
    }

    #[test]
    fn not_equal_completeness() {
        for ug in k22_family().iter().step_by(5) {
            for modulus in [2, 3] {
                let v = verify_ug_csp_completeness(ug, UgCspKind::NotEqual { modulus }, 1, &q(1, 2)).unwrap();
                assert!(v.accepted(), "Q = {modulus}: {:?}", v.first_failure());
            }
        }
    }

    #[test]
    fn solution_map_reads_the_label() {
        let l = Layout::new(UgCspKind::OneFree, 2, 4, &q(1, 2)).unwrap();
        let star = l.solution(&[1, 0, 0, 1]);
        // z = (+1, -1) is code 2: its coordinate 1 is -1, coordinate 0 is +1.
        assert_eq!(star[2], 1);
        assert_eq!(star[4 + 2], 0);
    }

    #[test]
    fn records_and_correction_factors() {
        let fam = k22_family();
        for kind in [UgCspKind::OneFree, UgCspKind::NotEqual { modulus: 2 }] {
            let red = ug_to_csp(&fam[..3], kind, 1, &q(1, 2), &qi(0), &qi(0), &qi(0)).unwrap();
            let v = verify_reduction(&red.record).unwrap();
            assert!(v.accepted(), "{kind:?}: {:?}", v.first_failure());
            assert!(red.correction.factors.len() <= 2 * 2 * 2 * 4);
            let f = verify_factorization(&red.record.m2, &red.correction);
            assert!(f.accepted(), "{kind:?}: {:?}", f.first_failure());
        }
    }
}
