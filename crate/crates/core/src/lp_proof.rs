//! LP proofs of nonnegativity and the two constructive directions between
//! LP proofs and LP factorizations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::factor::{verify_factorization, NonnegFactorization, RankOneFactor};
use crate::matrix::{dot, Matrix};
use crate::problems::Sense;
use crate::rational::Rational;
use crate::simplex::{simplex_exact, LpOutcome, Relation, StandardLp};
use crate::verdict::Verdict;

/// `x ↦ gradient·x + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineFunction {
    pub gradient: Vec<Rational>,
    pub offset: Rational,
}

impl AffineFunction {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.gradient, x) + &self.offset
    }
}

/// A system `Ax ≤ b` with one point per solution and one affine function per
/// instance, meant to satisfy: containment `A x^s ≤ b`, exactness
/// `w_I(x^s) = M(I, s)` and nonnegativity of every `w_I` on the polyhedron.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpProof {
    pub dim: usize,
    pub constraints: Matrix,
    pub rhs: Vec<Rational>,
    pub points: Vec<Vec<Rational>>,
    pub functions: Vec<AffineFunction>,
}

impl LpProof {
    pub fn size(&self) -> usize {
        self.constraints.rows()
    }

    fn min_lp(&self, f: &AffineFunction) -> StandardLp {
        let mut lp = StandardLp::new(Sense::Min, f.gradient.clone()).with_free(vec![true; self.dim]);
        for k in 0..self.constraints.rows() {
            lp.add(self.constraints.row(k).to_vec(), Relation::Le, self.rhs[k].clone());
        }
        lp
    }
}

/// Machine-checks the three defining conditions against the matrix `m`.
pub fn check_lp_proof(proof: &LpProof, m: &Matrix) -> Result<Verdict> {
    let mut v = Verdict::new();
    let shape_ok = proof.constraints.cols() == proof.dim
        && proof.rhs.len() == proof.constraints.rows()
        && proof.points.len() == m.cols()
        && proof.functions.len() == m.rows()
        && proof.points.iter().all(|p| p.len() == proof.dim)
        && proof.functions.iter().all(|f| f.gradient.len() == proof.dim);
    v.record("shape", (!shape_ok).then(|| format!("proof dimensions do not match the {}x{} matrix", m.rows(), m.cols())));
    if !shape_ok {
        return Ok(v);
    }

    let mut containment = None;
    'c: for (s, x) in proof.points.iter().enumerate() {
        for k in 0..proof.constraints.rows() {
            let lhs = dot(proof.constraints.row(k), x);
            if lhs > proof.rhs[k] {
                containment = Some(format!("point {s} violates row {k}: {lhs} > {}", proof.rhs[k]));
                break 'c;
            }
        }
    }
    v.record("containment", containment);

    let mut exact = None;
    'e: for (i, f) in proof.functions.iter().enumerate() {
        for (s, x) in proof.points.iter().enumerate() {
            let w = f.eval(x);
            if w != *m.get(i, s) {
                exact = Some(format!("w_{i}(x^{s}) = {w} but M({i}, {s}) = {}", m.get(i, s)));
                break 'e;
            }
        }
    }
    v.record("exactness", exact);

    let mut nonneg = None;
    for (i, f) in proof.functions.iter().enumerate() {
        match simplex_exact(&proof.min_lp(f))? {
            LpOutcome::Optimal(sol) => {
                let min = sol.value + &f.offset;
                if min.is_negative() {
                    nonneg = Some(format!("w_{i} attains {min} < 0 on the polyhedron"));
                    break;
                }
            }
            LpOutcome::Unbounded => {
                nonneg = Some(format!("w_{i} is unbounded below on the polyhedron"));
                break;
            }
            LpOutcome::Infeasible => {
                nonneg = Some(format!("the polyhedron is empty"));
                break;
            }
        }
    }
    v.record("nonnegativity", nonneg);
    Ok(v)
}

/// The proof `x ≥ 0` in dimension `size(F)`, points the column factors and
/// `w_I(x) = u_I·x + γ_I` with `u_I` the row factors and `γ_I` the uniform term.
pub fn lp_proof_from_factorization(f: &NonnegFactorization, m: &Matrix) -> Result<LpProof> {
    let verdict = verify_factorization(m, f);
    if let Some(c) = verdict.first_failure() {
        return Err(contract!("factorization does not verify: {} ({})", c.name, c.witness.clone().unwrap_or_default()));
    }
    let r = f.size();
    let mut a = Matrix::zeros(r, r);
    for k in 0..r {
        a.set(k, k, -Rational::one());
    }
    let points = (0..f.cols)
        .map(|s| f.factors.iter().map(|x| x.col[s].clone()).collect())
        .collect();
    let functions = (0..f.rows)
        .map(|i| AffineFunction {
            gradient: f.factors.iter().map(|x| x.row[i].clone()).collect(),
            offset: f.uniform.as_ref().map_or_else(Rational::zero, |u| u[i].clone()),
        })
        .collect();
    let proof = LpProof {
        dim: r,
        constraints: a,
        rhs: vec![Rational::zero(); r],
        points,
        functions,
    };
    let check = check_lp_proof(&proof, m)?;
    if let Some(c) = check.first_failure() {
        return Err(contract!("constructed proof fails {}", c.name));
    }
    Ok(proof)
}

/// Farkas multipliers `u_I ≥ 0`, `γ_I ≥ 0` with `w_I(x) = u_I·(b − Ax) + γ_I`,
/// read from the duals of `min w_I(x) s.t. Ax ≤ b`; assembles one factor
/// per constraint row (zero rows dropped).
pub fn factorization_from_lp_proof(proof: &LpProof) -> Result<NonnegFactorization> {
    let rows_a = proof.constraints.rows();
    let mut u_all: Vec<Vec<Rational>> = Vec::with_capacity(proof.functions.len());
    let mut gammas = Vec::with_capacity(proof.functions.len());
    for (i, f) in proof.functions.iter().enumerate() {
        let sol = match simplex_exact(&proof.min_lp(f))? {
            LpOutcome::Optimal(sol) => sol,
            LpOutcome::Unbounded => return Err(Error::ProofInvalid(format!("w_{i} is unbounded below"))),
            LpOutcome::Infeasible => return Err(Error::ProofInvalid(format!("empty polyhedron"))),
        };
        let u: Vec<Rational> = sol.duals.iter().map(|d| -d).collect();
        let gamma = &f.offset + &sol.value;
        if u.iter().any(|x| x.is_negative()) || gamma.is_negative() {
            return Err(Error::ProofInvalid(format!("negative multiplier for w_{i} (gamma = {gamma})")));
        }
        // Farkas identity: Aᵀu = −gradient and u·b + γ = offset.
        for j in 0..proof.dim {
            let atu: Rational = (0..rows_a).map(|k| proof.constraints.get(k, j) * &u[k]).sum();
            if atu != -&f.gradient[j] {
                return Err(Error::ProofInvalid(format!("multipliers of w_{i} miss coordinate {j}")));
            }
        }
        if dot(&u, &proof.rhs) + &gamma != f.offset {
            return Err(Error::ProofInvalid(format!("multipliers of w_{i} miss the offset")));
        }
        u_all.push(u);
        gammas.push(gamma);
    }
    let mut factors = Vec::new();
    for k in 0..rows_a {
        let col: Vec<Rational> = proof
            .points
            .iter()
            .map(|x| &proof.rhs[k] - &dot(proof.constraints.row(k), x))
            .collect();
        if col.iter().any(|x| x.is_negative()) {
            return Err(Error::ProofInvalid(format!("a point violates constraint {k}")));
        }
        factors.push(RankOneFactor {
            row: u_all.iter().map(|u| u[k].clone()).collect(),
            col,
        });
    }
    Ok(NonnegFactorization {
        rows: proof.functions.len(),
        cols: proof.points.len(),
        factors,
        uniform: Some(gammas),
    }
    .pruned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn unit_interval_proof() {
        // 0 ≤ x ≤ 1, w(x) = 1 − x, points {0, 1}.
        let proof = LpProof {
            dim: 1,
            constraints: Matrix::from_rows(vec![vec![qi(-1)], vec![qi(1)]]).unwrap(),
            rhs: vec![qi(0), qi(1)],
            points: vec![vec![qi(0)], vec![qi(1)]],
            functions: vec![AffineFunction {
                gradient: vec![qi(-1)],
                offset: qi(1),
            }],
        };
        let m = Matrix::from_rows(vec![vec![qi(1), qi(0)]]).unwrap();
        assert!(check_lp_proof(&proof, &m).unwrap().accepted());
        let f = factorization_from_lp_proof(&proof).unwrap();
        assert!(f.size() <= 2);
        assert!(verify_factorization(&m, &f).accepted());
    }

    #[test]
    fn constant_function_goes_to_uniform_term() {
        let proof = LpProof {
            dim: 1,
            constraints: Matrix::from_rows(vec![vec![qi(-1)]]).unwrap(),
            rhs: vec![qi(0)],
            points: vec![vec![qi(0)], vec![qi(3)]],
            functions: vec![AffineFunction {
                gradient: vec![qi(0)],
                offset: qi(5),
            }],
        };
        let f = factorization_from_lp_proof(&proof).unwrap();
        assert_eq!(f.size(), 0);
        assert_eq!(f.uniform, Some(vec![qi(5)]));
    }

    #[test]
    fn size_zero_factorization_gives_constant_functions() {
        let m = Matrix::from_rows(vec![vec![qi(2), qi(2)]]).unwrap();
        let f = NonnegFactorization {
            rows: 1,
            cols: 2,
            factors: vec![],
            uniform: Some(vec![qi(2)]),
        };
        let p = lp_proof_from_factorization(&f, &m).unwrap();
        assert_eq!(p.dim, 0);
        assert_eq!(p.functions[0].offset, qi(2));
    }

    #[test]
    fn unbounded_function_is_rejected() {
        let proof = LpProof {
            dim: 1,
            constraints: Matrix::from_rows(vec![vec![qi(-1)]]).unwrap(),
            rhs: vec![qi(0)],
            points: vec![vec![qi(0)]],
            functions: vec![AffineFunction {
                gradient: vec![qi(-1)],
                offset: qi(0),
            }],
        };
        assert!(matches!(factorization_from_lp_proof(&proof), Err(Error::ProofInvalid(_))));
        let m = Matrix::from_rows(vec![vec![qi(0)]]).unwrap();
        let v = check_lp_proof(&proof, &m).unwrap();
        assert_eq!(v.first_failure().unwrap().name, "nonnegativity");
    }
}
