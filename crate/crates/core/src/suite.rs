//! The acceptance suite: nine end-to-end checks over the shipped small
//! instances. Each criterion returns a [`Verdict`] plus free-form notes;
//! timing is left to the caller since this crate has no clock.
//!
//! Some checks are known to fail for reasons analyzed in the project's
//! decision log. They are listed per criterion in `known_failures` so that
//! front ends can report them without treating them as regressions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::eigen::{symmetric_eigen_min, symmetric_eigenvalues};
use crate::error::Result;
use crate::factor::{nmf_upper_bound, trivial_factorization, verify_factorization};
use crate::gadgets::balsep::balsep_demand;
use crate::gadgets::matching3reg::target_value;
use crate::gadgets::maxcut::gadget_profile;
use crate::gadgets::sparsest::{powered_vertex_count, stated_vertex_count, supply_treewidth};
use crate::gadgets::{
    build_matching_3reg, maxcut_to_sparsestcut_base, maxxor_to_maxcut, power_instance, ug_to_csp,
    validate_gadget, verify_balsep_completeness, verify_power_completeness, verify_ug_csp_completeness, xor0_clause,
    CycleOrder, D2n, GadgetTemplate, GadgetUnion, UgCspKind,
};
use crate::graph::Graph;
use crate::lasserre::{
    assignment_indicators, csp_to_conflict_graph, pe_compose, pe_from_distribution, pe_verify, vertex_indicators,
    verify_conflict_reduction,
};
use crate::lp_proof::{check_lp_proof, factorization_from_lp_proof, lp_proof_from_factorization};
use crate::matrix::Matrix;
use crate::problems::{all_words, k22_family, BalancedSeparatorProblem, Clause, CspInstance, MatchingProblem, Sense};
use crate::rational::{q, qi, Rational};
use crate::reduction::{compose_factorizations, size_bound_from_witnesses, verify_reduction, witness_factorization};
use crate::simplex::{certify_optimal, simplex_exact, LpOutcome, Relation, StandardLp};
use crate::slack::exact_slack;
use crate::table::ProblemTable;
use crate::treewidth::treewidth_exact;
use crate::twlp::{sweep, tw_family, TwInstance, TwProblemKind};
use crate::verdict::Verdict;

/// What one criterion produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

pub struct Criterion {
    pub id: usize,
    /// Short name used by `--filter`.
    pub key: &'static str,
    pub title: &'static str,
    pub time_limit_secs: Option<u64>,
    /// Check names expected to fail; see the decision log.
    pub known_failures: &'static [&'static str],
    run: fn() -> Result<Outcome>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// Every failing check is listed in `known_failures`.
    KnownFail,
    Fail,
}

impl Criterion {
    pub fn run(&self) -> Result<Outcome> {
        (self.run)()
    }

    pub fn status(&self, v: &Verdict) -> Status {
        let mut failing = v.checks.iter().filter(|c| !c.passed).peekable();
        if failing.peek().is_none() {
            return Status::Pass;
        }
        if failing.all(|c| self.known_failures.contains(&c.name.as_str())) {
            Status::KnownFail
        } else {
            Status::Fail
        }
    }

    /// Matches on the key, the decimal id, or a substring of the key.
    pub fn matches(&self, filter: &str) -> bool {
        filter.is_empty() || self.key.contains(filter) || filter == format!("{}", self.id)
    }
}

pub static CRITERIA: [Criterion; 9] = [
    Criterion {
        id: 1,
        key: "matching3reg",
        title: "Matching to 3-regular Matching",
        time_limit_secs: Some(5),
        known_failures: &[],
        run: matching_3reg,
    },
    Criterion {
        id: 2,
        key: "maxcut-gadget",
        title: "MaxXOR0(3) to MaxCUT gadget",
        time_limit_secs: Some(10),
        known_failures: &[],
        run: maxcut_gadget,
    },
    Criterion {
        id: 3,
        key: "sparsest",
        title: "MaxCUT to SparsestCut powering",
        time_limit_secs: Some(60),
        known_failures: &["vertex_count_n2"],
        run: sparsest_powering,
    },
    Criterion {
        id: 4,
        key: "balsep",
        title: "Unique Games to BalancedSeparator",
        time_limit_secs: Some(10),
        known_failures: &[],
        run: balanced_separator,
    },
    Criterion {
        id: 5,
        key: "ugcsp",
        title: "Unique Games to 1F-CSP and NotEqualCSP",
        time_limit_secs: Some(30),
        known_failures: &[],
        run: ug_csp,
    },
    Criterion {
        id: 6,
        key: "lasserre",
        title: "Conflict graph and pseudoexpectation composition",
        time_limit_secs: Some(10),
        known_failures: &[],
        run: lasserre,
    },
    Criterion {
        id: 7,
        key: "twlp",
        title: "Uniform LP over treewidth <= 2",
        time_limit_secs: Some(300),
        known_failures: &["Matching.admissibility.gluing", "Matching.alpha"],
        run: uniform_lp,
    },
    Criterion {
        id: 8,
        key: "factorization",
        title: "Factorization theorem round trip",
        time_limit_secs: Some(60),
        known_failures: &[],
        run: factorization_round_trip,
    },
    Criterion {
        id: 9,
        key: "solvers",
        title: "Solver certification",
        time_limit_secs: None,
        known_failures: &[],
        run: solvers,
    },
];

pub fn select(filter: &str) -> Vec<&'static Criterion> {
    CRITERIA.iter().filter(|c| c.matches(filter)).collect()
}

fn first<T>(items: impl IntoIterator<Item = T>, mut bad: impl FnMut(&T) -> Option<String>) -> Option<String> {
    items.into_iter().find_map(|x| bad(&x))
}

fn first_instance_failure(verdicts: &[Verdict]) -> Option<String> {
    verdicts.iter().enumerate().find_map(|(i, r)| {
        r.first_failure()
            .map(|c| format!("instance {i}: {} {}", c.name, c.witness.clone().unwrap_or_default()))
    })
}

fn matching_3reg() -> Result<Outcome> {
    let mut v = Verdict::new();
    for n in [2usize, 3] {
        let d = D2n::new(n, CycleOrder::Ascending)?;
        let g = &d.graph;
        let want = 2 * n * (2 * n - 1);
        let bad = if g.num_vertices() != want {
            Some(format!("D_{} has {} vertices, expected {want}", 2 * n, g.num_vertices()))
        } else {
            first(g.vertices().iter().copied(), |&u| {
                (g.degree(u) != 3).then(|| format!("vertex {u} of D_{} has degree {}", 2 * n, g.degree(u)))
            })
        };
        v.record(&format!("d{}_cubic", 2 * n), bad);
    }
    let d = D2n::new(2, CycleOrder::Ascending)?;
    let src = MatchingProblem::spanning_subgraphs(Graph::complete(4));
    let pms = Graph::complete(4).perfect_matchings();
    let counts = (src.instances.len() != 64 || pms.len() != 3)
        .then(|| format!("{} spanning subgraphs and {} perfect matchings", src.instances.len(), pms.len()));
    v.record("enumeration", counts);
    let mut identity = None;
    for (i, h) in src.instances.iter().enumerate() {
        for (j, m) in pms.iter().enumerate() {
            let lhs = target_value(&d, h, m);
            let rhs = h.num_vertices() * (2 - 1) + MatchingProblem::value(h, m);
            if identity.is_none() && lhs != rhs {
                identity = Some(format!("H = {i}, M = {j}: val(H*, M*) = {lhs}, |V(H)|(n-1) + val = {rhs}"));
            }
        }
    }
    v.record("identity_n2", identity);
    let (_, red) = build_matching_3reg(2, &Rational::zero())?;
    v.extend("record", verify_reduction(&red)?);
    Ok(Outcome {
        verdict: v,
        notes: vec![format!("record: {} source instances", red.source.num_instances())],
    })
}

/// The two 3-variable MaxXOR0 instances used by the gadget criterion.
pub fn xor_instances() -> Result<Vec<CspInstance>> {
    Ok(vec![
        CspInstance::new(
            3,
            2,
            vec![xor0_clause(qi(1), [0, 1, 2]), xor0_clause(qi(2), [2, 0, 1]), xor0_clause(q(1, 2), [1, 2, 0])],
        )?,
        CspInstance::new(3, 2, vec![xor0_clause(qi(1), [0, 1, 2])])?,
    ])
}

fn maxcut_gadget() -> Result<Outcome> {
    let t = GadgetTemplate::standard();
    let mut v = Verdict::new();
    v.extend("validate", validate_gadget(&t));
    let (sat, unsat, total) = (t.sat_cut, t.unsat_cut, t.total_edges());
    v.record(
        "parameters",
        ((sat, unsat, total) != (16, 14, 20)).then(|| format!("(sat, unsat, total) = ({sat}, {unsat}, {total})")),
    );
    let insts = xor_instances()?;
    let u = GadgetUnion::new(3, &t)?;
    let ten = qi(10);
    let mut identity = None;
    for eps in [qi(0), q(1, 4)] {
        for inst in &insts {
            let wg = u.map_instance(inst)?;
            for s in all_words(3, 2) {
                let star = wg.cut_weight(u.map_solution(&s)) / wg.total_weight();
                let lhs = Rational::one() - &eps - inst.value(&s);
                let rhs = &ten * (q(4, 5) - &eps / &ten - star);
                if identity.is_none() && lhs != rhs {
                    identity = Some(format!("eps = {eps}, s = {s:?}: {lhs} vs {rhs}"));
                }
            }
        }
        let (_, red) = maxxor_to_maxcut(&insts, &t, &eps, &Rational::zero())?;
        v.extend(&format!("record_eps_{eps}"), verify_reduction(&red)?);
    }
    v.record("completeness_identity", identity);
    Ok(Outcome {
        verdict: v,
        notes: vec![format!("profile {:?}", gadget_profile(&t)?)],
    })
}

fn sparsest_powering() -> Result<Outcome> {
    let mut v = Verdict::new();
    let built = powered_vertex_count(4, 2);
    let stated = stated_vertex_count(4, 2);
    v.record(
        "vertex_count_n2",
        (built != 14).then(|| format!("the powering construction has N_2 = {built}; the stated count is {stated}")),
    );
    let g = Graph::path(2);
    let base = maxcut_to_sparsestcut_base(&g)?;
    let mut notes = Vec::new();
    for l in [1usize, 2] {
        let p = power_instance(&base, l)?;
        let tw = supply_treewidth(&p)?;
        v.record(&format!("supply_treewidth_l{l}"), (tw > 2).then(|| format!("treewidth {tw}")));
        for s in 0..1u64 << base.n {
            v.extend(&format!("l{l}_s{s}"), verify_power_completeness(&g, s, l)?);
        }
        notes.push(format!("l = {l}: {} vertices, supply treewidth {tw}", p.n));
    }
    Ok(Outcome { verdict: v, notes })
}

fn balanced_separator() -> Result<Outcome> {
    let mut v = Verdict::new();
    let p = BalancedSeparatorProblem::new(balsep_demand(4, 2)?, vec![])?;
    let total = p.total_demand();
    v.record("total_demand", (!total.is_one()).then(|| format!("total demand {total}")));
    let dg = p.demand_graph();
    let cliques = (dg.num_edges() != 4 * 6 || dg.vertices().iter().any(|&u| dg.degree(u) != 3))
        .then(|| format!("demand graph has {} edges", dg.num_edges()));
    v.record("disjoint_4_cliques", cliques);
    let tw = treewidth_exact(&dg)?.0;
    v.record("demand_treewidth", (tw != 3).then(|| format!("treewidth {tw}, expected 3")));
    for eps in [q(1, 4), q(1, 3)] {
        let fam = k22_family();
        let verdicts = fam.iter().map(|ug| verify_balsep_completeness(ug, &eps)).collect::<Result<Vec<_>>>()?;
        v.record(&format!("completeness_eps_{eps}"), first_instance_failure(&verdicts));
    }
    Ok(Outcome::from(v))
}

fn ug_csp() -> Result<Outcome> {
    let mut v = Verdict::new();
    let fam = k22_family();
    let eps = q(1, 2);
    let mut notes = Vec::new();
    for (label, kind) in [("1f", UgCspKind::OneFree), ("noteq", UgCspKind::NotEqual { modulus: 2 })] {
        let verdicts = fam
            .iter()
            .map(|ug| verify_ug_csp_completeness(ug, kind, 1, &eps))
            .collect::<Result<Vec<_>>>()?;
        v.record(&format!("{label}.completeness"), first_instance_failure(&verdicts));
        let red = ug_to_csp(&fam, kind, 1, &eps, &qi(0), &qi(0), &qi(0))?;
        let size = red.correction.factors.len();
        v.record(&format!("{label}.correction_size"), (size > 32).then(|| format!("{size} factors > 32")));
        v.extend(&format!("{label}.correction"), verify_factorization(&red.record.m2, &red.correction));
        v.extend(&format!("{label}.record"), verify_reduction(&red.record)?);
        notes.push(format!("{label}: {size} correction factors"));
    }
    Ok(Outcome { verdict: v, notes })
}

/// `x0 ∨ x1`, `x1 ∨ x2`, `x0 ≠ x2`.
pub fn three_clauses() -> Result<CspInstance> {
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
}

fn lasserre() -> Result<Outcome> {
    let inst = three_clauses()?;
    let mut v = Verdict::new();
    v.extend("conflict", verify_conflict_reduction(&inst)?);
    let g = csp_to_conflict_graph(&inst)?;
    let sets = g.independent_sets()?;
    let words = all_words(3, 2);
    let star: Vec<usize> = words
        .iter()
        .map(|t| sets.binary_search(&g.star(&inst, t)).unwrap_or(usize::MAX))
        .collect();
    if star.contains(&usize::MAX) {
        v.fail("star_independent", "some t* is not an independent set".into());
        return Ok(Outcome::from(v));
    }
    // Uniform over assignments weighted by the number of satisfied clauses.
    let weights: Vec<Rational> = words.iter().map(|t| inst.satisfied_weight(t) + qi(1)).collect();
    let total: Rational = weights.iter().sum();
    let dist: Vec<Rational> = weights.iter().map(|w| w / &total).collect();
    let pe_i = pe_from_distribution(&dist, assignment_indicators(3, 2), 4)?;
    let pe_g = pe_compose(&pe_i, &star, sets.len(), vertex_indicators(g.graph.n(), &sets), 2)?;
    let val_g: Vec<Rational> = sets.iter().map(|&s| g.value(s)).collect();
    let val_i: Vec<Rational> = words.iter().map(|t| inst.value(t)).collect();
    let (lhs, rhs) = (pe_g.eval(&val_g)?, qi(3) * pe_i.eval(&val_i)?);
    v.record("composed_value", (lhs != rhs).then(|| format!("E_G(val_G) = {lhs}, m E_I(val_I) = {rhs}")));
    v.extend("pe_verify", pe_verify(&pe_g, 1e-9)?);
    let min_eig = pe_g.min_moment_eigenvalue(1e-12)?;
    v.record("min_eigenvalue", (min_eig < -1e-9).then(|| format!("{min_eig:e}")));
    Ok(Outcome {
        verdict: v,
        notes: vec![format!("composed degree {}, min moment eigenvalue {min_eig:.3e}", pe_g.degree)],
    })
}

fn uniform_lp() -> Result<Outcome> {
    let graphs = tw_family(6, 2)?;
    let k4_subgraphs: Vec<TwInstance> = MatchingProblem::spanning_subgraphs(Graph::complete(4))
        .instances
        .into_iter()
        .filter(|h| treewidth_exact(h).map(|(w, _)| w <= 2).unwrap_or(false))
        .map(TwInstance::plain)
        .collect();
    let mut v = Verdict::new();
    let mut notes = vec![format!("{} graphs", graphs.len())];
    for kind in TwProblemKind::ALL {
        let extra: &[TwInstance] = if kind == TwProblemKind::Matching { &k4_subgraphs } else { &[] };
        let report = sweep(kind, &graphs, extra, 2)?;
        notes.push(format!(
            "{}: {} instances, max |X| with alpha != 0 is {}",
            kind.name(),
            report.rows.len(),
            report.max_alpha_size
        ));
        v.extend(kind.name(), report.verdict);
    }
    Ok(Outcome { verdict: v, notes })
}

fn factorization_round_trip() -> Result<Outcome> {
    let mut v = Verdict::new();
    let k4 = ProblemTable::from_problem(&MatchingProblem::all_subgraphs(Graph::complete(4)))?;
    let m = exact_slack(&k4)?.entries;
    let f = trivial_factorization(&m)?;
    let proof = lp_proof_from_factorization(&f, &m)?;
    v.extend("lp_proof", check_lp_proof(&proof, &m)?);
    let back = factorization_from_lp_proof(&proof)?;
    v.extend("round_trip", verify_factorization(&m, &back));
    let sizes = (f.size(), proof.size(), back.size());
    v.record(
        "sizes_nonincreasing",
        (sizes.1 > sizes.0 || sizes.2 > sizes.1).then(|| format!("factorization {} -> proof {} -> factorization {}", sizes.0, sizes.1, sizes.2)),
    );
    let (_, red) = build_matching_3reg(2, &Rational::zero())?;
    let target = red.target_slack()?;
    let ft = trivial_factorization(&target.entries)?;
    let f1 = witness_factorization(&red.m1, 0)?;
    let f2 = witness_factorization(&red.m2, 0)?;
    let composed = compose_factorizations(&red, &ft, &f1, &f2)?;
    v.extend("composed", verify_factorization(&red.source_slack()?.entries, &composed));
    let bound = size_bound_from_witnesses(Some(&f1), Some(&f2), ft.size())?;
    v.record(
        "composed_size",
        (composed.size() > bound).then(|| format!("size {} > bound {bound}", composed.size())),
    );
    Ok(Outcome {
        verdict: v,
        notes: vec![
            format!("K_4 slack {}x{}: sizes {sizes:?}", m.rows(), m.cols()),
            format!("composed size {} within bound {bound}", composed.size()),
        ],
    })
}

fn small(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as i64
}

fn sample_lps(rng: &mut ChaCha8Rng, count: usize) -> Vec<StandardLp> {
    (0..count)
        .map(|i| {
            let n = 3;
            let sense = if i % 2 == 0 { Sense::Max } else { Sense::Min };
            let mut lp = StandardLp::new(sense, (0..n).map(|_| qi(small(rng, -3, 3))).collect());
            for _ in 0..3 {
                let row: Vec<Rational> = (0..n).map(|_| qi(small(rng, 0, 3))).collect();
                lp.add(row, Relation::Le, qi(small(rng, 1, 6)));
            }
            let row: Vec<Rational> = (0..n).map(|_| qi(small(rng, 0, 2))).collect();
            lp.add(row, Relation::Ge, q(small(rng, 0, 2), 2));
            for j in 0..n {
                let mut e = vec![qi(0); n];
                e[j] = qi(1);
                lp.add(e, Relation::Le, qi(5));
            }
            lp
        })
        .collect()
}

fn solvers() -> Result<Outcome> {
    let mut v = Verdict::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let mut lps = Vec::new();
    let mut unit = StandardLp::new(Sense::Max, vec![qi(1)]);
    unit.add(vec![qi(1)], Relation::Le, qi(1));
    lps.push(unit);
    let mut square = StandardLp::new(Sense::Max, vec![qi(1), qi(1)]);
    square.add(vec![qi(1), qi(1)], Relation::Le, q(3, 2));
    square.add(vec![qi(1), qi(0)], Relation::Le, qi(1));
    square.add(vec![qi(0), qi(1)], Relation::Le, qi(1));
    lps.push(square);
    let mut beale = StandardLp::new(Sense::Max, vec![q(3, 4), qi(-150), q(1, 50), qi(-6)]);
    beale.add(vec![q(1, 4), qi(-60), q(-1, 25), qi(9)], Relation::Le, qi(0));
    beale.add(vec![q(1, 2), qi(-90), q(-1, 50), qi(3)], Relation::Le, qi(0));
    beale.add(vec![qi(0), qi(0), qi(1), qi(0)], Relation::Le, qi(1));
    lps.push(beale);
    lps.extend(sample_lps(&mut rng, 30));
    let mut solved = 0;
    let mut simplex_fail = None;
    for (i, lp) in lps.iter().enumerate() {
        match simplex_exact(lp)? {
            LpOutcome::Optimal(sol) => {
                solved += 1;
                if simplex_fail.is_none() && !certify_optimal(lp, &sol) {
                    simplex_fail = Some(format!("LP {i}: primal {} not certified by its duals", sol.value));
                }
            }
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded => {
                simplex_fail.get_or_insert_with(|| format!("LP {i} reported unbounded despite box constraints"));
            }
        }
    }
    v.record("simplex_strong_duality", simplex_fail);

    let tol = 1e-9;
    let mut eigen_fail = None;
    let id3: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let m = symmetric_eigen_min(&id3, 1e-12)?;
    if libm::fabs(m - 1.0) > tol {
        eigen_fail = Some(format!("identity: min eigenvalue {m}"));
    }
    let m = symmetric_eigen_min(&[vec![2.0, 0.0], vec![0.0, -1.0]], 1e-12)?;
    if libm::fabs(m + 1.0) > tol {
        eigen_fail.get_or_insert_with(|| format!("diag(2, -1): min eigenvalue {m}"));
    }
    for trial in 0..10 {
        let g: Vec<f64> = (0..12).map(|_| small(&mut rng, -30, 30) as f64 / 10.0).collect();
        let a: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| (0..3).map(|k| g[k * 4 + i] * g[k * 4 + j]).sum()).collect())
            .collect();
        let eig = symmetric_eigenvalues(&a, 1e-12)?;
        let trace: f64 = (0..4).map(|i| a[i][i]).sum();
        let sum: f64 = eig.iter().sum();
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tol || libm::fabs(trace - sum) > tol * (1.0 + libm::fabs(trace)) {
            eigen_fail.get_or_insert_with(|| format!("random PSD {trial}: min {min}, trace {trace} vs sum {sum}"));
        }
    }
    v.record("jacobi", eigen_fail);

    let mut nmf_fail = None;
    let mut worst = 0.0f64;
    for trial in 0..5 {
        let u: Vec<i64> = (0..3).map(|_| small(&mut rng, 1, 5)).collect();
        let w: Vec<i64> = (0..4).map(|_| small(&mut rng, 0, 5)).collect();
        let m = Matrix::from_fn(3, 4, |i, j| qi(u[i] * w[j]));
        let out = nmf_upper_bound(&m, 1, 500, 0)?;
        worst = worst.max(out.residual);
        if out.residual > 1e-6 {
            nmf_fail.get_or_insert_with(|| format!("rank-1 matrix {trial}: residual {}", out.residual));
        }
    }
    v.record("nmf_rank_one", nmf_fail);
    Ok(Outcome {
        verdict: v,
        notes: vec![format!("{} LPs ({solved} optimal), worst NMF residual {worst:.2e}", lps.len())],
    })
}

impl From<Verdict> for Outcome {
    fn from(verdict: Verdict) -> Self {
        Outcome {
            verdict,
            notes: Vec::new(),
        }
    }
}
