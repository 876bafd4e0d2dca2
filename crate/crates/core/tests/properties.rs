use proptest::prelude::*;

use reductio_core::eigen::symmetric_eigen_min;
use reductio_core::factor::{trivial_factorization, verify_factorization};
use reductio_core::gadgets::sparsest::powered_vertex_count;
use reductio_core::graph::Graph;
use reductio_core::lasserre::{assignment_indicators, pe_compose, pe_from_distribution, pe_verify};
use reductio_core::linalg::{affine_hull, rank};
use reductio_core::lp_proof::{factorization_from_lp_proof, lp_proof_from_factorization};
use reductio_core::matrix::Matrix;
use reductio_core::problems::Sense;
use reductio_core::rational::{q, Rational};
use reductio_core::simplex::{certify_optimal, simplex_exact, LpOutcome, Relation, StandardLp};
use reductio_core::treewidth::treewidth_exact;
use reductio_core::twlp::{
    build_objective, build_uniform_lp, solve_uniform_lp, AdmissibleProblem, TwInstance, TwProblemKind,
};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=12).prop_map(|(a, b)| q(a, b))
}

fn nonneg_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(0i64..5, rows * cols)
        .prop_map(move |v| Matrix::from_fn(rows, cols, |i, j| Rational::from(v[i * cols + j])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_field_laws(a in small_rational(), b in small_rational(), c in small_rational()) {
        prop_assert_eq!(&(&a + &b) * &c, &a * &c + &b * &c);
        prop_assert_eq!(&a - &a, Rational::zero());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
        let text = a.to_string();
        prop_assert_eq!(text.parse::<Rational>().unwrap(), a);
    }

    #[test]
    fn simplex_strong_duality(
        c in proptest::collection::vec(-3i64..=3, 3),
        rows in proptest::collection::vec((proptest::collection::vec(0i64..=3, 3), 1i64..=6), 1..4),
    ) {
        // Bounded: every variable is capped by 5.
        let mut lp = StandardLp::new(Sense::Max, c.iter().map(|&x| Rational::from(x)).collect());
        for (coeffs, rhs) in &rows {
            lp.add(coeffs.iter().map(|&x| Rational::from(x)).collect(), Relation::Le, Rational::from(*rhs));
        }
        for j in 0..3 {
            let mut e = vec![Rational::zero(); 3];
            e[j] = Rational::one();
            lp.add(e, Relation::Le, Rational::from(5));
        }
        match simplex_exact(&lp).unwrap() {
            LpOutcome::Optimal(sol) => prop_assert!(certify_optimal(&lp, &sol)),
            other => prop_assert!(false, "bounded feasible LP gave {:?}", other),
        }
    }

    #[test]
    fn trivial_factorization_verifies_and_round_trips(m in nonneg_matrix(3, 4)) {
        let f = trivial_factorization(&m).unwrap();
        prop_assert!(verify_factorization(&m, &f).accepted());
        let proof = lp_proof_from_factorization(&f, &m).unwrap();
        let back = factorization_from_lp_proof(&proof).unwrap();
        prop_assert!(verify_factorization(&m, &back).accepted());
        prop_assert!(back.size() <= proof.size());
    }

    #[test]
    fn hull_dimension_is_centered_rank(pts in proptest::collection::vec(proptest::collection::vec(-2i64..=2, 4), 1..6)) {
        let points: Vec<Vec<Rational>> = pts.iter().map(|p| p.iter().map(|&x| Rational::from(x)).collect()).collect();
        let hull = affine_hull(&points).unwrap();
        let centered = Matrix::from_fn(points.len(), 4, |i, j| &points[i][j] - &points[0][j]);
        prop_assert_eq!(hull.basis.len(), rank(&centered));
    }

    #[test]
    fn gram_matrices_are_psd(g in proptest::collection::vec(-3.0f64..3.0, 12)) {
        let m: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| (0..3).map(|k| g[k * 4 + i] * g[k * 4 + j]).sum()).collect())
            .collect();
        prop_assert!(symmetric_eigen_min(&m, 1e-12).unwrap() >= -1e-9);
    }

    #[test]
    fn distributions_give_valid_pseudoexpectations(w in proptest::collection::vec(0i64..4, 8)) {
        prop_assume!(w.iter().any(|&x| x > 0));
        let total: i64 = w.iter().sum();
        let dist: Vec<Rational> = w.iter().map(|&x| q(x, total)).collect();
        let pe = pe_from_distribution(&dist, assignment_indicators(3, 2), 2).unwrap();
        prop_assert!(pe_verify(&pe, 1e-9).unwrap().accepted());
        // Pushing forward along x ↦ x0 keeps positivity.
        let star: Vec<usize> = (0..8).map(|t| t / 4).collect();
        let base = vec![vec![Rational::zero(), Rational::one()]];
        let pushed = pe_compose(&pe, &star, 2, base, 1).unwrap();
        prop_assert!(pe_verify(&pushed, 1e-9).unwrap().accepted());
    }

    #[test]
    fn powered_count_recurrence(n in 2usize..7, l in 1usize..4) {
        let pairs = n * (n - 1) / 2;
        let prev = powered_vertex_count(n, l - 1).max(2);
        let expected = if l == 1 { n } else { n + pairs * (prev - 2) };
        prop_assert_eq!(powered_vertex_count(n, l), expected);
    }

    #[test]
    fn restriction_nests(s in 0u64..64, x in 0u64..64, y in 0u64..64) {
        for kind in [TwProblemKind::IndependentSet, TwProblemKind::Matching] {
            let p = AdmissibleProblem::new(kind, 6).unwrap();
            let sol = p.solutions()[s as usize % p.solutions().len()];
            let y = y & x;
            prop_assert_eq!(p.restrict(p.restrict(sol, x), y), p.restrict(sol, y));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn uniform_lp_matches_brute_force(mask in 0u32..1024, kind in 0usize..4) {
        let kind = TwProblemKind::ALL[kind];
        let pairs: Vec<(usize, usize)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        let edges: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let g = Graph::on_all(5, edges).unwrap();
        prop_assume!(treewidth_exact(&g).unwrap().0 <= 2);
        let p = AdmissibleProblem::new(kind, 5).unwrap();
        let model = build_uniform_lp(&p, 2).unwrap();
        let inst = TwInstance::plain(g);
        let w = build_objective(&model, &p, &inst).unwrap();
        prop_assert_eq!(solve_uniform_lp(&model, &w).unwrap().value, Rational::from(p.optimum(&inst)));
    }
}
