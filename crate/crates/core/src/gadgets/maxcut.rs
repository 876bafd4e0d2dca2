//! MaxXOR0(3) to MaxCUT through a per-clause gadget graph.
//!
//! Each possible clause `x_i + x_j + x_k = 0` owns a copy of the gadget; the
//! vertex `0` and the variable vertices are shared between copies. An
//! assignment `s` maps to the cut containing exactly the variables set to 1,
//! never `0`, and a maximum completion on the local vertices of every copy.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Error, Result};
use crate::graph::{Graph, Subset};
use crate::matrix::Matrix;
use crate::problems::{all_words, subset_label, CspInstance, CspProblem, Sense, WeightedGraph};
use crate::rational::Rational;
use crate::reduction::ReductionRecord;
use crate::table::ProblemTable;
use crate::verdict::Verdict;

/// Largest number of local vertices `validate_gadget` enumerates.
pub const MAX_LOCAL_VERTICES: usize = 12;

/// A gadget on four shared vertices `0, x_i, x_j, x_k` (in that order) and
/// some local vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GadgetTemplate {
    pub shared: Vec<String>,
    pub local: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub sat_cut: usize,
    pub unsat_cut: usize,
}

impl GadgetTemplate {
    pub fn total_edges(&self) -> usize {
        self.edges.len()
    }

    /// The 8-local, 20-edge gadget certified to cut 16 edges on satisfied
    /// clauses and 14 on unsatisfied ones. For every shared vertex `p` there
    /// are locals `y_p`, adjacent to the three other shared vertices, and
    /// `w_p`, adjacent to `p` and `y_p`.
    pub fn standard() -> Self {
        let shared = ["0", "xi", "xj", "xk"];
        let mut local = Vec::new();
        let mut edges = Vec::new();
        for p in shared {
            let (y, w) = (format!("y{p}"), format!("w{p}"));
            for o in shared.iter().filter(|&&o| o != p) {
                edges.push((y.clone(), o.to_string()));
            }
            edges.push((w.clone(), p.to_string()));
            edges.push((w.clone(), y.clone()));
            local.push(y);
            local.push(w);
        }
        GadgetTemplate {
            shared: shared.iter().map(|s| s.to_string()).collect(),
            local,
            edges,
            sat_cut: 16,
            unsat_cut: 14,
        }
    }

    /// Edges as index pairs, shared vertices first (0..4) then locals.
    fn indexed_edges(&self) -> core::result::Result<Vec<(usize, usize)>, String> {
        let mut index = BTreeMap::new();
        for (i, l) in self.shared.iter().chain(&self.local).enumerate() {
            if index.insert(l.as_str(), i).is_some() {
                return Err(format!("label {l} is used twice"));
            }
        }
        let mut out = Vec::new();
        for (a, b) in &self.edges {
            let (Some(&x), Some(&y)) = (index.get(a.as_str()), index.get(b.as_str())) else {
                return Err(format!("edge {a}-{b} uses an unknown label"));
            };
            if x == y {
                return Err(format!("loop at {a}"));
            }
            let e = (x.min(y), x.max(y));
            if out.contains(&e) {
                return Err(format!("edge {a}-{b} is listed twice"));
            }
            out.push(e);
        }
        Ok(out)
    }
}

/// Whether the shared assignment (bit `p` for `x_i, x_j, x_k`) satisfies the
/// clause `x_i + x_j + x_k = 0`.
fn even(assign: usize) -> bool {
    (assign & 7).count_ones() % 2 == 0
}

/// Best cut value and first maximizing local mask for one assignment of the
/// three variable vertices, with `0` outside the cut.
fn best_completion(edges: &[(usize, usize)], num_local: usize, assign: usize) -> (usize, u64) {
    let mut best: Option<(usize, u64)> = None;
    for mask in 0..1u64 << num_local {
        let side = |v: usize| -> bool {
            if v == 0 {
                false
            } else if v < 4 {
                assign >> (v - 1) & 1 == 1
            } else {
                mask >> (v - 4) & 1 == 1
            }
        };
        let cut = edges.iter().filter(|&&(a, b)| side(a) != side(b)).count();
        if best.map_or(true, |(b, _)| cut > b) {
            best = Some((cut, mask));
        }
    }
    best.expect("at least the empty completion")
}

/// Maximum completion cut for each of the 8 assignments of `x_i, x_j, x_k`.
pub fn gadget_profile(t: &GadgetTemplate) -> Result<[usize; 8]> {
    let edges = t.indexed_edges().map_err(|e| domain!("{e}"))?;
    if t.shared.len() != 4 {
        return Err(domain!("a gadget has four shared vertices"));
    }
    if t.local.len() > MAX_LOCAL_VERTICES {
        return Err(Error::Capacity(format!("{} local vertices exceed {MAX_LOCAL_VERTICES}", t.local.len())));
    }
    let mut out = [0; 8];
    for (a, o) in out.iter_mut().enumerate() {
        *o = best_completion(&edges, t.local.len(), a).0;
    }
    Ok(out)
}

/// Exhaustively checks that the maximum cut over all local completions is
/// `sat_cut` on satisfied clauses and `unsat_cut` on unsatisfied ones.
pub fn validate_gadget(t: &GadgetTemplate) -> Verdict {
    let mut v = Verdict::new();
    let mut shape = t.indexed_edges().err();
    if shape.is_none() && (t.shared.len() != 4 || t.shared[0] != "0") {
        shape = Some(format!("shared vertices must be [0, x_i, x_j, x_k], got {:?}", t.shared));
    }
    let ok = shape.is_none();
    v.record("shape", shape);
    let limit = (t.local.len() > MAX_LOCAL_VERTICES)
        .then(|| format!("{} local vertices exceed the limit {MAX_LOCAL_VERTICES}", t.local.len()));
    let ok = ok && limit.is_none();
    v.record("local_limit", limit);
    if !ok {
        return v;
    }
    let profile = gadget_profile(t).expect("shape checked");
    let mut sat = None;
    let mut unsat = None;
    for (a, &best) in profile.iter().enumerate() {
        let bits = format!("(x_i, x_j, x_k) = ({}, {}, {})", a & 1, a >> 1 & 1, a >> 2 & 1);
        if even(a) && best != t.sat_cut && sat.is_none() {
            sat = Some(format!("satisfying {bits}: maximum cut {best}, expected {}", t.sat_cut));
        }
        if !even(a) && best != t.unsat_cut && unsat.is_none() {
            unsat = Some(format!("violating {bits}: maximum cut {best}, expected {}", t.unsat_cut));
        }
    }
    v.record("satisfied_cut", sat);
    v.record("unsatisfied_cut", unsat);
    v
}

/// The union graph of all possible clause gadgets on `m` variables.
#[derive(Clone, Debug)]
pub struct GadgetUnion {
    pub m: usize,
    pub template: GadgetTemplate,
    /// Triples `i < j < k` in lexicographic order, one gadget each.
    pub triples: Vec<[usize; 3]>,
    pub graph: Graph,
    template_edges: Vec<(usize, usize)>,
    /// Local completion for each triple and each of its 8 assignments.
    completions: Vec<[u64; 8]>,
}

impl GadgetUnion {
    pub fn new(m: usize, template: &GadgetTemplate) -> Result<Self> {
        if let Some(c) = validate_gadget(template).first_failure() {
            return Err(contract!("gadget fails validation: {} ({})", c.name, c.witness.clone().unwrap_or_default()));
        }
        if template.sat_cut <= template.unsat_cut {
            return Err(contract!("the gadget must cut more edges on satisfied clauses"));
        }
        let mut triples = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    triples.push([i, j, k]);
                }
            }
        }
        let nl = template.local.len();
        let total = 1 + m + nl * triples.len();
        if total > 64 {
            return Err(Error::Capacity(format!("the gadget union on {m} variables has {total} > 64 vertices")));
        }
        let template_edges = template.indexed_edges().map_err(|e| contract!("{e}"))?;
        let mut u = GadgetUnion {
            m,
            template: template.clone(),
            triples,
            graph: Graph::empty(0),
            template_edges,
            completions: Vec::new(),
        };
        let mut edges = Vec::new();
        for g in 0..u.triples.len() {
            edges.extend(u.gadget_edges(g));
        }
        edges.sort_unstable();
        edges.dedup();
        u.graph = Graph::on_all(total, edges)?;
        let per_assign: Vec<u64> = (0..8).map(|a| best_completion(&u.template_edges, nl, a).1).collect();
        u.completions = vec![core::array::from_fn(|a| per_assign[a]); u.triples.len()];
        Ok(u)
    }

    /// Vertex of `0` is 0 and of `x_i` is `1 + i`; locals follow per gadget.
    fn vertex(&self, g: usize, local_index: usize) -> usize {
        if local_index == 0 {
            0
        } else if local_index < 4 {
            1 + self.triples[g][local_index - 1]
        } else {
            1 + self.m + g * self.template.local.len() + (local_index - 4)
        }
    }

    fn gadget_edges(&self, g: usize) -> Vec<(usize, usize)> {
        self.template_edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (self.vertex(g, a), self.vertex(g, b));
                (x.min(y), x.max(y))
            })
            .collect()
    }

    fn triple_index(&self, scope: &[usize]) -> Option<usize> {
        let mut t = [*scope.first()?, *scope.get(1)?, *scope.get(2)?];
        t.sort_unstable();
        self.triples.binary_search(&t).ok()
    }

    fn shared_assignment(&self, g: usize, s: &[usize]) -> usize {
        let [i, j, k] = self.triples[g];
        s[i] | s[j] << 1 | s[k] << 2
    }

    /// `G_I`: the gadgets of the clauses of `I`, each edge weighted by the
    /// total weight of the clauses whose gadget contains it.
    pub fn map_instance(&self, inst: &CspInstance) -> Result<WeightedGraph> {
        check_maxxor0(inst, self.m)?;
        let mut weights: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for c in &inst.clauses {
            let g = self.triple_index(&c.scope).expect("checked");
            for e in self.gadget_edges(g) {
                *weights.entry(e).or_insert_with(Rational::zero) += &c.weight;
            }
        }
        let mut verts: Vec<usize> = weights.keys().flat_map(|&(a, b)| [a, b]).collect();
        verts.sort_unstable();
        verts.dedup();
        let graph = Graph::new(self.graph.n(), verts, weights.keys().copied())?;
        WeightedGraph::new(graph, weights.into_values().collect())
    }

    /// `s*` for an assignment `s ∈ {0,1}^m`.
    pub fn map_solution(&self, s: &[usize]) -> Subset {
        let mut x: Subset = 0;
        for (i, &b) in s.iter().enumerate() {
            if b == 1 {
                x |= 1 << (1 + i);
            }
        }
        for g in 0..self.triples.len() {
            let mask = self.completions[g][self.shared_assignment(g, s)];
            for l in 0..self.template.local.len() {
                if mask >> l & 1 == 1 {
                    x |= 1 << self.vertex(g, 4 + l);
                }
            }
        }
        x
    }

    /// `max val_{G_I}`, computed by enumerating the variable vertices with
    /// `0` outside the cut and completing every gadget optimally.
    pub fn optimum(&self, wg: &WeightedGraph) -> Rational {
        let mut best: Option<Rational> = None;
        for s in all_words(self.m, 2) {
            let v = wg.cut_weight(self.map_solution(&s)) / wg.total_weight();
            if best.as_ref().map_or(true, |b| v > *b) {
                best = Some(v);
            }
        }
        best.unwrap_or_else(Rational::zero)
    }
}

fn check_maxxor0(inst: &CspInstance, m: usize) -> Result<()> {
    if inst.num_variables != m || inst.q != 2 {
        return Err(domain!("MaxXOR0(3) instance on {m} boolean variables expected"));
    }
    for c in &inst.clauses {
        if c.scope.len() != 3 {
            return Err(domain!("clause {:?} does not have three variables", c.scope));
        }
        let expected: Vec<Vec<usize>> = all_words(3, 2).into_iter().filter(|w| w.iter().sum::<usize>() % 2 == 0).collect();
        if c.satisfying != expected {
            return Err(domain!("clause {:?} is not x_i + x_j + x_k = 0", c.scope));
        }
    }
    Ok(())
}

/// Clause `x_i + x_j + x_k = 0` with weight `w`.
pub fn xor0_clause(w: Rational, scope: [usize; 3]) -> crate::problems::Clause {
    let sat = all_words(3, 2).into_iter().filter(|t| t.iter().sum::<usize>() % 2 == 0).collect();
    crate::problems::Clause::new(w, scope.to_vec(), sat)
}

/// Builds the gadget union `G` and the reduction record over `instances`
/// (all on the same `m` variables) with guarantees `C1 = 1 − ε`,
/// `S1 = 1/2 + δ` and their images `C2`, `S2`; `M1 = T/(sat − unsat)`,
/// `M2 = 0` where `T` is the number of gadget edges.
pub fn maxxor_to_maxcut(
    instances: &[CspInstance],
    template: &GadgetTemplate,
    eps: &Rational,
    delta: &Rational,
) -> Result<(Graph, ReductionRecord)> {
    let m = instances.first().ok_or_else(|| domain!("no instances given"))?.num_variables;
    let u = GadgetUnion::new(m, template)?;
    let source = CspProblem::new("MaxXOR0(3)", m, 2, Sense::Max, instances.to_vec())?;
    let src = ProblemTable::from_problem(&source)?;
    let words = all_words(m, 2);
    let images: Vec<WeightedGraph> = instances.iter().map(|i| u.map_instance(i)).collect::<Result<_>>()?;
    let sol_images: Vec<Subset> = words.iter().map(|s| u.map_solution(s)).collect();

    let (sat, unsat, total) = (
        Rational::from_int(template.sat_cut as i64),
        Rational::from_int(template.unsat_cut as i64),
        Rational::from_int(template.total_edges() as i64),
    );
    let gap = &sat - &unsat;
    let one = Rational::one();
    let c1 = &one - eps;
    let s1 = Rational::new(1, 2) + delta;
    let c2 = (&sat - &(eps * &gap)) / &total;
    let s2 = (&unsat + &(&gap * &s1)) / &total;
    let m1 = &total / &gap;

    let values = Matrix::from_fn(images.len(), sol_images.len(), |i, j| {
        images[i].cut_weight(sol_images[j]) / images[i].total_weight()
    });
    let target = ProblemTable {
        name: format!("MaxCUT(gadget union on {} vertices)", u.graph.num_vertices()),
        sense: Sense::Max,
        instances: images.iter().map(weighted_label).collect(),
        solutions: sol_images.iter().map(|&x| subset_label(x)).collect(),
        values,
        denominators: None,
    };
    let (rows, cols) = (src.num_instances(), src.num_solutions());
    let record = ReductionRecord {
        source: src,
        target,
        target_complete: false,
        target_opt: Some(images.iter().map(|wg| u.optimum(wg)).collect()),
        instance_map: (0..rows).collect(),
        solution_map: (0..cols).collect(),
        c1: vec![c1; rows],
        s1: vec![s1; rows],
        c2: vec![c2; rows],
        s2: vec![s2; rows],
        m1: Matrix::filled(rows, cols, m1),
        m2: Matrix::zeros(rows, cols),
    };
    Ok((u.graph, record))
}

fn weighted_label(wg: &WeightedGraph) -> String {
    let es: Vec<String> = wg
        .graph
        .edges()
        .iter()
        .zip(&wg.weights)
        .map(|((a, b), w)| format!("{a}-{b}:{w}"))
        .collect();
    format!("[{}]", es.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::reduction::verify_reduction;

    #[test]
    fn standard_gadget_certifies() {
        let t = GadgetTemplate::standard();
        assert_eq!(t.total_edges(), 20);
        let v = validate_gadget(&t);
        assert!(v.accepted(), "{:?}", v.first_failure());
        assert_eq!(gadget_profile(&t).unwrap(), [16, 14, 14, 16, 14, 16, 16, 14]);
    }

    #[test]
    fn damaged_gadgets_are_rejected() {
        let mut t = GadgetTemplate::standard();
        t.edges.pop();
        assert!(!validate_gadget(&t).accepted());
        let degenerate = GadgetTemplate {
            shared: ["0", "xi", "xj", "xk"].iter().map(|s| s.to_string()).collect(),
            local: vec![],
            edges: vec![],
            sat_cut: 0,
            unsat_cut: 0,
        };
        assert!(validate_gadget(&degenerate).accepted());
        let mut d2 = degenerate.clone();
        d2.sat_cut = 1;
        assert!(!validate_gadget(&d2).accepted());
    }

    #[test]
    fn one_clause_values() {
        let inst = CspInstance::new(3, 2, vec![xor0_clause(qi(1), [0, 1, 2])]).unwrap();
        let (g, red) = maxxor_to_maxcut(&[inst], &GadgetTemplate::standard(), &qi(0), &qi(0)).unwrap();
        assert_eq!(g.num_vertices(), 12);
        // s = 000 satisfies the clause; s = 100 does not.
        assert_eq!(*red.target.values.get(0, 0), q(16, 20));
        assert_eq!(*red.target.values.get(0, 4), q(14, 20));
        assert!(verify_reduction(&red).unwrap().accepted());
    }

    #[test]
    fn completeness_identity_with_eps() {
        let insts = vec![
            CspInstance::new(4, 2, vec![xor0_clause(qi(1), [0, 1, 2]), xor0_clause(qi(2), [1, 2, 3])]).unwrap(),
            CspInstance::new(4, 2, vec![xor0_clause(qi(1), [0, 2, 3])]).unwrap(),
        ];
        for eps in [qi(0), q(1, 4)] {
            let (_, red) = maxxor_to_maxcut(&insts, &GadgetTemplate::standard(), &eps, &q(1, 10)).unwrap();
            let v = verify_reduction(&red).unwrap();
            assert!(v.accepted(), "{:?}", v.first_failure());
        }
    }
}
