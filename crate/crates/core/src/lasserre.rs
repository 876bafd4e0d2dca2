//! Conflict graphs of CSP instances and pseudoexpectations represented by
//! their values on low-degree products of base functions.
//!
//! Functions are value vectors over an enumerated solution set, so two
//! polynomials that agree as functions are the same element of the span.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigenvalues;
use crate::error::{contract, domain, Error, Result};
use crate::graph::{subset_contains, Graph, Subset};
use crate::linalg::{kernel, solve_linear_system, LinearSolution};
use crate::matrix::{dot, Matrix};
use crate::problems::{all_words, CspInstance};
use crate::rational::Rational;
use crate::verdict::Verdict;

/// Largest conflict graph whose independent sets are enumerated.
pub const MAX_CONFLICT_VERTICES: usize = 20;

/// Vertices are pairs `(i, s)` of a clause index and a satisfying tuple over
/// the clause scope; `(i, s) ~ (j, t)` when they disagree on a shared
/// variable. Each vertex carries the weight of its clause.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConflictGraph {
    pub graph: Graph,
    pub vertex_meaning: Vec<(usize, Vec<usize>)>,
    pub weights: Vec<Rational>,
}

fn conflicts(inst: &CspInstance, a: &(usize, Vec<usize>), b: &(usize, Vec<usize>)) -> bool {
    let (sa, sb) = (&inst.clauses[a.0].scope, &inst.clauses[b.0].scope);
    sa.iter()
        .zip(&a.1)
        .any(|(x, va)| sb.iter().position(|y| y == x).is_some_and(|p| b.1[p] != *va))
}

pub fn csp_to_conflict_graph(inst: &CspInstance) -> Result<ConflictGraph> {
    let meaning: Vec<(usize, Vec<usize>)> = inst
        .clauses
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.satisfying.iter().map(move |s| (i, s.clone())))
        .collect();
    if meaning.len() > 64 {
        return Err(Error::Capacity(format!("{} conflict vertices exceed 64", meaning.len())));
    }
    let mut edges = Vec::new();
    for a in 0..meaning.len() {
        for b in a + 1..meaning.len() {
            if conflicts(inst, &meaning[a], &meaning[b]) {
                edges.push((a, b));
            }
        }
    }
    Ok(ConflictGraph {
        graph: Graph::on_all(meaning.len(), edges)?,
        weights: meaning.iter().map(|(i, _)| inst.clauses[*i].weight.clone()).collect(),
        vertex_meaning: meaning,
    })
}

impl ConflictGraph {
    /// `t* = {(i, s) : s agrees with t}`.
    pub fn star(&self, inst: &CspInstance, t: &[usize]) -> Subset {
        self.vertex_meaning
            .iter()
            .enumerate()
            .filter(|(_, (i, s))| inst.clauses[*i].scope.iter().zip(s).all(|(&x, &v)| t[x] == v))
            .fold(0, |acc, (v, _)| acc | 1 << v)
    }

    /// Weighted size `Σ_{v ∈ X} w_v`.
    pub fn value(&self, x: Subset) -> Rational {
        self.weights
            .iter()
            .enumerate()
            .filter(|(v, _)| subset_contains(x, *v))
            .map(|(_, w)| w)
            .sum()
    }

    /// All independent sets in increasing numeric order of their masks.
    pub fn independent_sets(&self) -> Result<Vec<Subset>> {
        let n = self.graph.n();
        if n > MAX_CONFLICT_VERTICES {
            return Err(Error::Capacity(format!("{n} vertices exceed {MAX_CONFLICT_VERTICES}")));
        }
        let adj: Vec<Subset> = (0..n)
            .map(|v| self.graph.neighbors(v).iter().fold(0, |a, &u| a | 1 << u))
            .collect();
        let mut out = Vec::new();
        fn grow(v: usize, n: usize, cur: Subset, blocked: Subset, adj: &[Subset], out: &mut Vec<Subset>) {
            if v == n {
                out.push(cur);
                return;
            }
            grow(v + 1, n, cur, blocked, adj, out);
            if !subset_contains(blocked, v) {
                grow(v + 1, n, cur | 1 << v, blocked | adj[v], adj, out);
            }
        }
        grow(0, n, 0, 0, &adj, &mut out);
        out.sort_unstable();
        Ok(out)
    }

    pub fn maximal_independent_sets(&self) -> Result<Vec<Subset>> {
        let all = self.independent_sets()?;
        let n = self.graph.n();
        Ok(all
            .iter()
            .copied()
            .filter(|&s| (0..n).all(|v| subset_contains(s, v) || !self.graph.is_independent(s | 1 << v)))
            .collect())
    }
}

/// Checks, over all `q^N` assignments, that `t*` is independent and
/// `val_G(t*) = Σ_i w_i C_i(t)` (that is `m·val(t)` for unit weights), and
/// that every maximal independent set lies inside some `t*`.
pub fn verify_conflict_reduction(inst: &CspInstance) -> Result<Verdict> {
    let g = csp_to_conflict_graph(inst)?;
    let total = inst.total_weight();
    let mut indep = None;
    let mut identity = None;
    let mut stars = Vec::new();
    for t in all_words(inst.num_variables, inst.q) {
        let s = g.star(inst, &t);
        if indep.is_none() && !g.graph.is_independent(s) {
            indep = Some(format!("t = {t:?}: t* is not independent"));
        }
        let (lhs, rhs) = (g.value(s), &total * inst.value(&t));
        if identity.is_none() && lhs != rhs {
            identity = Some(format!("t = {t:?}: val_G(t*) = {lhs}, expected {rhs}"));
        }
        stars.push(s);
    }
    let containment = g
        .maximal_independent_sets()?
        .into_iter()
        .find(|&m| !stars.iter().any(|&s| m & !s == 0))
        .map(|m| format!("maximal independent set {} lies in no t*", crate::problems::subset_label(m)));
    let mut v = Verdict::new();
    v.record("independent", indep);
    v.record("identity", identity);
    v.record("containment", containment);
    Ok(v)
}

/// Indicators `X_{x_j = a}` over all assignments of `[q]^N` in
/// lexicographic order, listed by `(j, a)`.
pub fn assignment_indicators(num_variables: usize, q: usize) -> Vec<Vec<Rational>> {
    let words = all_words(num_variables, q);
    let mut out = Vec::new();
    for j in 0..num_variables {
        for a in 0..q {
            out.push(words.iter().map(|t| Rational::from(i64::from(t[j] == a))).collect());
        }
    }
    out
}

/// Indicators `Y_v` of the vertices of `[n]` over a list of vertex sets.
pub fn vertex_indicators(n: usize, sets: &[Subset]) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|v| sets.iter().map(|&s| Rational::from(i64::from(subset_contains(s, v)))).collect())
        .collect()
}

/// A product of base functions: the multiset of factor indices first found
/// to produce `values`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub factors: Vec<usize>,
    pub values: Vec<Rational>,
}

impl Monomial {
    pub fn degree(&self) -> usize {
        self.factors.len()
    }
}

/// Distinct products of at most `d` base functions, by increasing degree.
pub fn monomials(num_points: usize, base: &[Vec<Rational>], d: usize) -> Result<Vec<Monomial>> {
    if base.iter().any(|f| f.len() != num_points) {
        return Err(domain!("base functions must have {num_points} values"));
    }
    let mut seen: BTreeMap<Vec<Rational>, ()> = BTreeMap::new();
    let one = vec![Rational::one(); num_points];
    seen.insert(one.clone(), ());
    let mut out = vec![Monomial { factors: vec![], values: one }];
    let mut frontier = vec![0usize];
    for _ in 0..d {
        let mut next = Vec::new();
        for &m in &frontier {
            for (j, f) in base.iter().enumerate() {
                let values: Vec<Rational> = out[m].values.iter().zip(f).map(|(a, b)| a * b).collect();
                if seen.insert(values.clone(), ()).is_none() {
                    let mut factors = out[m].factors.clone();
                    factors.push(j);
                    factors.sort_unstable();
                    next.push(out.len());
                    out.push(Monomial { factors, values });
                }
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// A linear functional on the span `V` of the degree-`≤ d` products of the
/// base functions, given by its value on each deduplicated product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PseudoExpectation {
    pub num_points: usize,
    pub base: Vec<Vec<Rational>>,
    pub degree: usize,
    pub basis: Vec<Monomial>,
    pub values: Vec<Rational>,
}

impl PseudoExpectation {
    /// Assigns `value(m)` to every product `m` of degree at most `d`.
    pub fn from_functional(
        num_points: usize,
        base: Vec<Vec<Rational>>,
        degree: usize,
        mut value: impl FnMut(&Monomial) -> Result<Rational>,
    ) -> Result<Self> {
        let basis = monomials(num_points, &base, degree)?;
        let values = basis.iter().map(&mut value).collect::<Result<_>>()?;
        Ok(PseudoExpectation {
            num_points,
            base,
            degree,
            basis,
            values,
        })
    }

    fn span_matrix(&self) -> Matrix {
        Matrix::from_fn(self.num_points, self.basis.len(), |i, j| self.basis[j].values[i].clone())
    }

    /// `Ẽ(F)` for `F` in the span; writes `F` in the product basis and
    /// applies the stored values.
    pub fn eval(&self, f: &[Rational]) -> Result<Rational> {
        if f.len() != self.num_points {
            return Err(domain!("function has {} values, expected {}", f.len(), self.num_points));
        }
        let coeffs = match solve_linear_system(&self.span_matrix(), f)? {
            LinearSolution::Unique(c) => c,
            LinearSolution::Underdetermined { particular, .. } => particular,
            LinearSolution::Inconsistent => {
                return Err(contract!("function is not a polynomial of degree at most {} in the base", self.degree))
            }
        };
        Ok(dot(&coeffs, &self.values))
    }

    /// Moment matrix `Ẽ(m_i m_j)` over the products of degree `≤ ⌊d/2⌋`.
    pub fn moment_matrix(&self) -> Result<Matrix> {
        let half: Vec<&Monomial> = self.basis.iter().filter(|m| 2 * m.degree() <= self.degree).collect();
        let mut m = Matrix::zeros(half.len(), half.len());
        for i in 0..half.len() {
            for j in i..half.len() {
                let prod: Vec<Rational> = half[i].values.iter().zip(&half[j].values).map(|(a, b)| a * b).collect();
                let e = self.eval(&prod)?;
                m.set(i, j, e.clone());
                m.set(j, i, e);
            }
        }
        Ok(m)
    }

    /// Smallest eigenvalue of the moment matrix (Jacobi, error at most
    /// `tol·‖M‖_F`).
    pub fn min_moment_eigenvalue(&self, tol: f64) -> Result<f64> {
        let m = self.moment_matrix()?;
        let ev = symmetric_eigenvalues(&m.to_f64_rows(), tol)?;
        Ok(ev.first().copied().unwrap_or(0.0))
    }
}

/// `Ẽ(F) = Σ_s p(s) F(s)`.
pub fn pe_from_distribution(dist: &[Rational], base: Vec<Vec<Rational>>, degree: usize) -> Result<PseudoExpectation> {
    if dist.iter().any(Rational::is_negative) {
        return Err(domain!("distribution has a negative entry"));
    }
    let total: Rational = dist.iter().sum();
    if !total.is_one() {
        return Err(domain!("distribution sums to {total}, not 1"));
    }
    PseudoExpectation::from_functional(dist.len(), base, degree, |m| Ok(dot(dist, &m.values)))
}

/// Checks well-definedness (values vanish on linear relations among the
/// products), normalization, linearity on seeded random combinations, and
/// positivity of the moment matrix up to `tol`.
pub fn pe_verify(pe: &PseudoExpectation, tol: f64) -> Result<Verdict> {
    let mut v = Verdict::new();
    let relation = kernel(&pe.span_matrix())
        .into_iter()
        .find(|k| !dot(k, &pe.values).is_zero())
        .map(|k| format!("relation {k:?} among products has value {}", dot(&k, &pe.values)));
    v.record("well_defined", relation.clone());
    if relation.is_some() {
        return Ok(v);
    }
    let one = pe.eval(&vec![Rational::one(); pe.num_points])?;
    v.record("normalization", (!one.is_one()).then(|| format!("E(1) = {one}")));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut lin = None;
    let nb = pe.basis.len() as u32;
    for _ in 0..8 {
        let (a, b) = ((rng.next_u32() % nb) as usize, (rng.next_u32() % nb) as usize);
        let (ra, rb) = (
            Rational::new(i64::from(rng.next_u32() % 11) - 5, 3),
            Rational::new(i64::from(rng.next_u32() % 11) - 5, 2),
        );
        let f: Vec<Rational> = pe.basis[a]
            .values
            .iter()
            .zip(&pe.basis[b].values)
            .map(|(x, y)| &ra * x + &rb * y)
            .collect();
        let lhs = pe.eval(&f)?;
        let rhs = &ra * &pe.values[a] + &rb * &pe.values[b];
        if lin.is_none() && lhs != rhs {
            lin = Some(format!("E({ra} m{a} + {rb} m{b}) = {lhs}, expected {rhs}"));
        }
    }
    v.record("linearity", lin);
    let min = pe.min_moment_eigenvalue(tol)?;
    v.record("positivity", (min < -tol).then(|| format!("moment matrix eigenvalue {min:e} < -{tol:e}")));
    Ok(v)
}

/// `Ẽ_G(F) = Ẽ_I(F ∘ *)`, where `star[t]` is the index of the image of
/// solution `t` among the `num_points` target solutions and `base` are the
/// target base functions. Each target base function must pull back to a
/// polynomial of degree at most `k`, so the output has degree `⌊d/k⌋`.
pub fn pe_compose(
    pe: &PseudoExpectation,
    star: &[usize],
    num_points: usize,
    base: Vec<Vec<Rational>>,
    k: usize,
) -> Result<PseudoExpectation> {
    if k == 0 {
        return Err(domain!("k must be positive"));
    }
    if star.len() != pe.num_points || star.iter().any(|&s| s >= num_points) {
        return Err(contract!("solution map does not go from {} to {num_points} points", pe.num_points));
    }
    let pull = |f: &[Rational]| -> Vec<Rational> { star.iter().map(|&s| f[s].clone()).collect() };
    let low = PseudoExpectation {
        degree: k,
        basis: monomials(pe.num_points, &pe.base, k)?,
        values: Vec::new(),
        ..pe.clone()
    };
    for (j, f) in base.iter().enumerate() {
        let p = pull(f);
        if !matches!(solve_linear_system(&low.span_matrix(), &p)?, LinearSolution::Unique(_) | LinearSolution::Underdetermined { .. }) {
            return Err(contract!("base function {j} does not pull back to degree {k}"));
        }
    }
    PseudoExpectation::from_functional(num_points, base, pe.degree / k, |m| pe.eval(&pull(&m.values)))
}

/// Label for a monomial, e.g. `f0*f3`, or `1` for the constant.
pub fn monomial_label(m: &Monomial) -> String {
    if m.factors.is_empty() {
        return "1".into();
    }
    m.factors.iter().map(|j| format!("f{j}")).collect::<Vec<_>>().join("*")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Clause;
    use crate::rational::{q, qi};

    /// x0 ∨ x1, x1 ∨ x2, x0 ≠ x2 over {0, 1}.
    fn three_clauses() -> CspInstance {
        let or = vec![vec![0, 1], vec![1, 0], vec![1, 1]];
        CspInstance::new(
            3,
            2,
            vec![
                Clause::new(qi(1), vec![0, 1], or.clone()),
                Clause::new(qi(1), vec![1, 2], or),
                Clause::new(qi(1), vec![0, 2], vec![vec![0, 1], vec![1, 0]]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn conflict_graph_shape() {
        let inst = three_clauses();
        let g = csp_to_conflict_graph(&inst).unwrap();
        assert_eq!(g.graph.n(), 8);
        // (0, [0,1]) and (1, [0,1]) disagree on x1.
        assert!(g.graph.has_edge(0, 3));
        let v = verify_conflict_reduction(&inst).unwrap();
        assert!(v.accepted(), "{:?}", v.first_failure());
    }

    #[test]
    fn contradictory_clauses_are_adjacent() {
        let inst = CspInstance::new(
            2,
            2,
            vec![Clause::new(qi(1), vec![0], vec![vec![0]]), Clause::new(qi(1), vec![0, 1], vec![vec![1, 1]])],
        )
        .unwrap();
        let g = csp_to_conflict_graph(&inst).unwrap();
        assert!(g.graph.has_edge(0, 1));
    }

    #[test]
    fn point_mass_and_normalization() {
        let base = assignment_indicators(2, 2);
        let mut dist = vec![qi(0); 4];
        dist[2] = qi(1);
        let pe = pe_from_distribution(&dist, base.clone(), 2).unwrap();
        let f = vec![qi(3), qi(5), qi(7), qi(11)];
        // f is a polynomial of degree 2 in the indicators (any function on 2 bits is).
        assert_eq!(pe.eval(&f).unwrap(), qi(7));
        assert!(pe_verify(&pe, 1e-9).unwrap().accepted());
        assert!(pe_from_distribution(&[q(1, 2), q(1, 3), qi(0), qi(0)], base, 1).is_err());
    }

    #[test]
    fn rejects_bad_normalization_and_negative_moment() {
        let base = vec![vec![qi(1), qi(0)]];
        let pe = PseudoExpectation::from_functional(2, base, 2, |m| Ok(if m.degree() == 0 { qi(2) } else { qi(1) })).unwrap();
        assert_eq!(pe_verify(&pe, 1e-9).unwrap().first_failure().unwrap().name, "normalization");

        // Degree-2 polynomials in (f, g) are determined by these six points.
        let pts = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2)];
        let f: Vec<Rational> = pts.iter().map(|p| qi(p.0)).collect();
        let g: Vec<Rational> = pts.iter().map(|p| qi(p.1)).collect();
        let pe = PseudoExpectation::from_functional(6, vec![f, g], 2, |m| {
            Ok(match m.factors.as_slice() {
                [] => qi(1),
                [0, 0] => q(-1, 2),
                [1, 1] => q(1, 2),
                _ => qi(0),
            })
        })
        .unwrap();
        let min = pe.min_moment_eigenvalue(1e-12).unwrap();
        assert!((min + 0.5).abs() < 1e-9, "{min}");
        assert_eq!(pe_verify(&pe, 1e-9).unwrap().first_failure().unwrap().name, "positivity");
    }

    #[test]
    fn composition_on_conflict_graph() {
        let inst = three_clauses();
        let g = csp_to_conflict_graph(&inst).unwrap();
        let sets = g.independent_sets().unwrap();
        let words = all_words(3, 2);
        let star: Vec<usize> = words
            .iter()
            .map(|t| sets.binary_search(&g.star(&inst, t)).unwrap())
            .collect();
        let sat: Vec<bool> = words.iter().map(|t| inst.value(t).is_one()).collect();
        let count = sat.iter().filter(|&&b| b).count() as i64;
        let dist: Vec<Rational> = sat.iter().map(|&b| if b { q(1, count) } else { qi(0) }).collect();
        let pe_i = pe_from_distribution(&dist, assignment_indicators(3, 2), 4).unwrap();
        let pe_g = pe_compose(&pe_i, &star, sets.len(), vertex_indicators(g.graph.n(), &sets), 2).unwrap();
        assert_eq!(pe_g.degree, 2);
        let val_g: Vec<Rational> = sets.iter().map(|&s| g.value(s)).collect();
        let val_i: Vec<Rational> = words.iter().map(|t| inst.value(t)).collect();
        assert_eq!(pe_g.eval(&val_g).unwrap(), qi(3) * pe_i.eval(&val_i).unwrap());
        assert!(pe_verify(&pe_g, 1e-9).unwrap().accepted());

        // The pushforward distribution gives the same functional.
        let mut push = vec![qi(0); sets.len()];
        for (t, &s) in star.iter().enumerate() {
            push[s] += &dist[t];
        }
        let direct = pe_from_distribution(&push, vertex_indicators(g.graph.n(), &sets), 2).unwrap();
        assert_eq!(direct.values, pe_g.values);
    }

    #[test]
    fn identity_composition() {
        let base = assignment_indicators(2, 2);
        let dist = vec![q(1, 4); 4];
        let pe = pe_from_distribution(&dist, base.clone(), 2).unwrap();
        let same = pe_compose(&pe, &[0, 1, 2, 3], 4, base, 1).unwrap();
        assert_eq!(same, pe);
    }
}
