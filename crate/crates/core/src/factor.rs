//! Nonnegative and LP factorizations: exact verification, the rank lower
//! bound, trivial factorizations and a seeded NMF search whose output is
//! certified exactly after rounding.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::rank;
use crate::matrix::Matrix;
use crate::problems::Sense;
use crate::rational::Rational;
use crate::simplex::{simplex_exact, LpOutcome, Relation, StandardLp};
use crate::verdict::Verdict;

/// Default residual below which an NMF result is rounded and certified.
pub const NMF_TOLERANCE: f64 = 1e-6;
/// Largest denominator used when rounding NMF floats.
pub const NMF_MAX_DENOMINATOR: i64 = 1_000_000;

/// `row ⊗ col`: the rank-1 matrix with entries `row[i]·col[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneFactor {
    pub row: Vec<Rational>,
    pub col: Vec<Rational>,
}

/// `M = Σ_k row_k ⊗ col_k + u·𝟙ᵀ`. The uniform term does not count towards
/// the size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonnegFactorization {
    pub rows: usize,
    pub cols: usize,
    pub factors: Vec<RankOneFactor>,
    pub uniform: Option<Vec<Rational>>,
}

impl NonnegFactorization {
    pub fn size(&self) -> usize {
        self.factors.len()
    }

    /// Number of nonnegative rank-1 terms, counting a nonzero uniform term.
    pub fn nonneg_terms(&self) -> usize {
        self.factors.len() + usize::from(self.uniform.as_ref().is_some_and(|u| u.iter().any(|x| !x.is_zero())))
    }

    pub fn entry(&self, i: usize, j: usize) -> Rational {
        let mut v = match &self.uniform {
            Some(u) => u[i].clone(),
            None => Rational::zero(),
        };
        for f in &self.factors {
            if !f.row[i].is_zero() && !f.col[j].is_zero() {
                v += &f.row[i] * &f.col[j];
            }
        }
        v
    }

    pub fn reconstruct(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.entry(i, j))
    }

    /// Drops factors whose row or column vector vanishes.
    pub fn pruned(mut self) -> Self {
        self.factors
            .retain(|f| f.row.iter().any(|x| !x.is_zero()) && f.col.iter().any(|x| !x.is_zero()));
        if self.uniform.as_ref().is_some_and(|u| u.iter().all(|x| x.is_zero())) {
            self.uniform = None;
        }
        self
    }
}

/// Accepts iff every component is nonnegative and the factorization
/// reproduces `m` exactly; rejections name the first failing entry.
pub fn verify_factorization(m: &Matrix, f: &NonnegFactorization) -> Verdict {
    let mut v = Verdict::new();
    let shape = if f.rows != m.rows() || f.cols != m.cols() {
        Some(format!("factorization is {}x{}, matrix is {}x{}", f.rows, f.cols, m.rows(), m.cols()))
    } else if let Some(k) = f.factors.iter().position(|x| x.row.len() != f.rows || x.col.len() != f.cols) {
        Some(format!("factor {k} has mismatched vector lengths"))
    } else if f.uniform.as_ref().is_some_and(|u| u.len() != f.rows) {
        Some(format!("uniform term has length {}", f.uniform.as_ref().map_or(0, |u| u.len())))
    } else {
        None
    };
    let shape_ok = shape.is_none();
    v.record("shape", shape);
    if !shape_ok {
        return v;
    }

    let mut neg = None;
    'outer: for (k, x) in f.factors.iter().enumerate() {
        for (i, a) in x.row.iter().enumerate() {
            if a.is_negative() {
                neg = Some(format!("factor {k} row entry {i} = {a}"));
                break 'outer;
            }
        }
        for (j, b) in x.col.iter().enumerate() {
            if b.is_negative() {
                neg = Some(format!("factor {k} column entry {j} = {b}"));
                break 'outer;
            }
        }
    }
    if neg.is_none() {
        if let Some(u) = &f.uniform {
            if let Some(i) = u.iter().position(|x| x.is_negative()) {
                neg = Some(format!("uniform term entry {i} = {}", u[i]));
            }
        }
    }
    v.record("nonnegativity", neg);

    let mut ident = None;
    'rows: for i in 0..m.rows() {
        for j in 0..m.cols() {
            let rhs = f.entry(i, j);
            if *m.get(i, j) != rhs {
                ident = Some(format!("entry ({i}, {j}): matrix {} != factorization {rhs}", m.get(i, j)));
                break 'rows;
            }
        }
    }
    v.record("identity", ident);
    v
}

/// Rank over the rationals; `nnegrk M ≥ rank M` and `LPrk M ≥ rank M − 1`.
pub fn rank_lower_bound(m: &Matrix) -> usize {
    rank(m)
}

/// Factorization with uniform term the row minima and one factor per row
/// or per column of the remainder, whichever is smaller.
pub fn trivial_factorization(m: &Matrix) -> Result<NonnegFactorization> {
    if let Some((i, j)) = m.first_negative() {
        return Err(domain!("matrix entry ({i}, {j}) is negative"));
    }
    let (r, c) = (m.rows(), m.cols());
    let mins: Vec<Rational> = (0..r)
        .map(|i| m.row(i).iter().min().cloned().unwrap_or_else(Rational::zero))
        .collect();
    let rest = Matrix::from_fn(r, c, |i, j| m.get(i, j) - &mins[i]);
    let mut factors = Vec::new();
    if r <= c {
        for i in 0..r {
            let mut e = vec![Rational::zero(); r];
            e[i] = Rational::one();
            factors.push(RankOneFactor {
                row: e,
                col: rest.row(i).to_vec(),
            });
        }
    } else {
        for j in 0..c {
            let mut e = vec![Rational::zero(); c];
            e[j] = Rational::one();
            factors.push(RankOneFactor {
                row: rest.column(j),
                col: e,
            });
        }
    }
    Ok(NonnegFactorization {
        rows: r,
        cols: c,
        factors,
        uniform: Some(mins),
    }
    .pruned())
}

/// Result of [`nmf_upper_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmfOutcome {
    pub rank: usize,
    /// `rows × rank` float factor.
    pub w: Vec<Vec<f64>>,
    /// `rank × cols` float factor.
    pub h: Vec<Vec<f64>>,
    /// Frobenius norm of `M − WH`.
    pub residual: f64,
    /// Exact factorization obtained by rounding, present only when it
    /// verified exactly.
    pub certified: Option<NonnegFactorization>,
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn residual(m: &[Vec<f64>], w: &[Vec<f64>], h: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let p: f64 = (0..h.len()).map(|k| w[i][k] * h[k][j]).sum();
            s += (x - p) * (x - p);
        }
    }
    libm::sqrt(s)
}

fn multiplicative_updates(m: &[Vec<f64>], w: &mut [Vec<f64>], h: &mut [Vec<f64>], iters: usize) {
    const EPS: f64 = 1e-300;
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let r = h.len();
    for _ in 0..iters {
        // H ← H ∘ (WᵀM) / (WᵀWH)
        let mut wtw = vec![vec![0.0; r]; r];
        for a in 0..r {
            for b in 0..r {
                wtw[a][b] = (0..rows).map(|i| w[i][a] * w[i][b]).sum();
            }
        }
        for k in 0..r {
            for j in 0..cols {
                let num: f64 = (0..rows).map(|i| w[i][k] * m[i][j]).sum();
                let den: f64 = (0..r).map(|b| wtw[k][b] * h[b][j]).sum();
                h[k][j] *= num / (den + EPS);
            }
        }
        // W ← W ∘ (MHᵀ) / (WHHᵀ)
        let mut hht = vec![vec![0.0; r]; r];
        for a in 0..r {
            for b in 0..r {
                hht[a][b] = (0..cols).map(|j| h[a][j] * h[b][j]).sum();
            }
        }
        for i in 0..rows {
            for k in 0..r {
                let num: f64 = (0..cols).map(|j| m[i][j] * h[k][j]).sum();
                let den: f64 = (0..r).map(|b| w[i][b] * hht[b][k]).sum();
                w[i][k] *= num / (den + EPS);
            }
        }
    }
}

/// Seeded multiplicative-update NMF with rank `r`.
///
/// Runs three random restarts drawn from a ChaCha stream seeded with `seed`,
/// plus the exact column (resp. row) initialization when `r` is at least the
/// number of columns (resp. rows), keeps the lowest residual (first wins on
/// ties) and, when the residual is at most [`NMF_TOLERANCE`], attempts exact
/// certification by rounding. Deterministic in `(m, r, iters, seed)`.
pub fn nmf_upper_bound(m: &Matrix, r: usize, iters: usize, seed: u64) -> Result<NmfOutcome> {
    nmf_upper_bound_with_tol(m, r, iters, seed, NMF_TOLERANCE)
}

pub fn nmf_upper_bound_with_tol(m: &Matrix, r: usize, iters: usize, seed: u64, tol: f64) -> Result<NmfOutcome> {
    if r == 0 {
        return Err(domain!("NMF rank must be at least 1"));
    }
    if !m.is_nonnegative() {
        return Err(domain!("NMF input must be nonnegative"));
    }
    let mf = m.to_f64_rows();
    let (rows, cols) = (m.rows(), m.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = Vec::new();
    for _ in 0..3 {
        let w: Vec<Vec<f64>> = (0..rows).map(|_| (0..r).map(|_| uniform01(&mut rng)).collect()).collect();
        let h: Vec<Vec<f64>> = (0..r).map(|_| (0..cols).map(|_| uniform01(&mut rng)).collect()).collect();
        candidates.push((w, h));
    }
    if r >= cols {
        let w = (0..rows).map(|i| (0..r).map(|k| if k < cols { mf[i][k] } else { 0.0 }).collect()).collect();
        let h = (0..r).map(|k| (0..cols).map(|j| if k == j { 1.0 } else { 0.0 }).collect()).collect();
        candidates.push((w, h));
    }
    if r >= rows {
        let w = (0..rows).map(|i| (0..r).map(|k| if k == i { 1.0 } else { 0.0 }).collect()).collect();
        let h = (0..r).map(|k| if k < rows { mf[k].clone() } else { vec![0.0; cols] }).collect();
        candidates.push((w, h));
    }
    let mut best: Option<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> = None;
    for (mut w, mut h) in candidates {
        multiplicative_updates(&mf, &mut w, &mut h, iters);
        let res = residual(&mf, &w, &h);
        if best.as_ref().map_or(true, |(b, _, _)| res < *b) {
            best = Some((res, w, h));
        }
    }
    let (res, w, h) = best.expect("at least one candidate");
    let certified = if res <= tol { certify_rounded(m, &h)? } else { None };
    Ok(NmfOutcome {
        rank: r,
        w,
        h,
        residual: res,
        certified,
    })
}

/// Rounds the column factors `h` (rows normalized by their maximum) to
/// rationals, refits the row factors and a uniform term exactly by one LP
/// feasibility problem per matrix row, and verifies the result.
pub fn certify_rounded(m: &Matrix, h: &[Vec<f64>]) -> Result<Option<NonnegFactorization>> {
    let cols = m.cols();
    let mut hq: Vec<Vec<Rational>> = Vec::new();
    for row in h {
        let mx = row.iter().cloned().fold(0.0f64, f64::max);
        if mx <= 0.0 {
            continue;
        }
        let mut out = Vec::with_capacity(cols);
        for &x in row {
            let y = x / mx;
            let v = if y < 1e-9 {
                Rational::zero()
            } else {
                match Rational::approximate(y, NMF_MAX_DENOMINATOR) {
                    Some(v) => v,
                    None => return Ok(None),
                }
            };
            out.push(v);
        }
        hq.push(out);
    }
    let r = hq.len();
    let mut w_rows = Vec::with_capacity(m.rows());
    let mut uniform = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        // Variables: w_1..w_r, u; Σ_k w_k h_k(j) + u = M(i, j).
        let mut lp = StandardLp::new(Sense::Min, vec![Rational::zero(); r + 1]);
        for j in 0..cols {
            let mut coeffs: Vec<Rational> = hq.iter().map(|hk| hk[j].clone()).collect();
            coeffs.push(Rational::one());
            lp.add(coeffs, Relation::Eq, m.get(i, j).clone());
        }
        match simplex_exact(&lp)? {
            LpOutcome::Optimal(sol) => {
                uniform.push(sol.point[r].clone());
                w_rows.push(sol.point[..r].to_vec());
            }
            _ => return Ok(None),
        }
    }
    let factors = (0..r)
        .map(|k| RankOneFactor {
            row: w_rows.iter().map(|w| w[k].clone()).collect(),
            col: hq[k].clone(),
        })
        .collect();
    let f = NonnegFactorization {
        rows: m.rows(),
        cols,
        factors,
        uniform: Some(uniform),
    }
    .pruned();
    Ok(verify_factorization(m, &f).accepted().then_some(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn mat(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn verify_examples() {
        let m = mat(&[&[1, 2], &[2, 4]]);
        let f = NonnegFactorization {
            rows: 2,
            cols: 2,
            factors: vec![RankOneFactor {
                row: vec![qi(1), qi(2)],
                col: vec![qi(1), qi(2)],
            }],
            uniform: None,
        };
        assert!(verify_factorization(&m, &f).accepted());
        assert_eq!(f.size(), 1);

        let ones = mat(&[&[1, 1], &[1, 1]]);
        let u = NonnegFactorization {
            rows: 2,
            cols: 2,
            factors: vec![],
            uniform: Some(vec![qi(1), qi(1)]),
        };
        assert!(verify_factorization(&ones, &u).accepted());
        assert_eq!(u.size(), 0);

        let id = mat(&[&[1, 0], &[0, 1]]);
        let one = NonnegFactorization {
            rows: 2,
            cols: 2,
            factors: vec![RankOneFactor {
                row: vec![qi(1), qi(1)],
                col: vec![qi(1), qi(0)],
            }],
            uniform: None,
        };
        let v = verify_factorization(&id, &one);
        assert_eq!(v.first_failure().unwrap().name, "identity");
    }

    #[test]
    fn negative_component_rejected() {
        let m = mat(&[&[0]]);
        let f = NonnegFactorization {
            rows: 1,
            cols: 1,
            factors: vec![
                RankOneFactor { row: vec![qi(1)], col: vec![qi(-1)] },
                RankOneFactor { row: vec![qi(1)], col: vec![qi(1)] },
            ],
            uniform: None,
        };
        assert_eq!(verify_factorization(&m, &f).first_failure().unwrap().name, "nonnegativity");
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_lower_bound(&Matrix::zeros(3, 3)), 0);
        assert_eq!(rank_lower_bound(&mat(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank_lower_bound(&Matrix::identity(3)), 3);
    }

    #[test]
    fn trivial_verifies() {
        let m = mat(&[&[3, 1, 2], &[0, 5, 5], &[1, 1, 1], &[4, 0, 2]]);
        let f = trivial_factorization(&m).unwrap();
        assert!(verify_factorization(&m, &f).accepted());
        assert!(f.size() <= 3);
    }

    #[test]
    fn nmf_rank_one_and_identity() {
        let m = mat(&[&[3, 1], &[6, 2]]);
        let out = nmf_upper_bound(&m, 1, 500, 0).unwrap();
        assert!(out.residual <= 1e-6, "{}", out.residual);
        let cert = out.certified.expect("certified");
        assert!(verify_factorization(&m, &cert).accepted());

        let out = nmf_upper_bound(&Matrix::identity(2), 1, 500, 0).unwrap();
        assert!(out.residual > 0.5);
        assert!(out.certified.is_none());

        let m = mat(&[&[1, 0, 2], &[0, 3, 1]]);
        let out = nmf_upper_bound(&m, 2, 200, 7).unwrap();
        assert!(out.residual <= 1e-6);
        assert!(out.certified.is_some());
    }

    #[test]
    fn nmf_is_deterministic() {
        let m = mat(&[&[1, 2, 0], &[0, 1, 3], &[2, 2, 2]]);
        let a = nmf_upper_bound(&m, 2, 50, 11).unwrap();
        let b = nmf_upper_bound(&m, 2, 50, 11).unwrap();
        assert_eq!(a, b);
    }
}
