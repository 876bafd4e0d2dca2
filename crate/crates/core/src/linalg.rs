//! Exact Gaussian elimination: rank, linear systems, affine hulls.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::matrix::Matrix;
use crate::rational::Rational;

/// Reduced row echelon form of `rows` (in place); returns pivot columns.
fn rref_in_place(rows: &mut Vec<Vec<Rational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip().expect("nonzero pivot");
        if !inv.is_one() {
            for x in rows[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let pivot_row = rows[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len())
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                let d = &f * &pivot_row[j];
                row[j] -= d;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank over the rationals.
pub fn rank(m: &Matrix) -> usize {
    let mut rows = m.to_rows();
    rref_in_place(&mut rows, m.cols()).len()
}

/// Outcome of [`solve_linear_system`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearSolution {
    Unique(Vec<Rational>),
    Inconsistent,
    /// A particular solution (free variables set to zero) and a kernel basis.
    Underdetermined {
        particular: Vec<Rational>,
        kernel: Vec<Vec<Rational>>,
    },
}

/// Solves `A x = b` exactly.
pub fn solve_linear_system(a: &Matrix, b: &[Rational]) -> Result<LinearSolution> {
    if b.len() != a.rows() {
        return Err(domain!(
            "right-hand side has length {} but the matrix has {} rows",
            b.len(),
            a.rows()
        ));
    }
    let n = a.cols();
    let mut rows: Vec<Vec<Rational>> = (0..a.rows())
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(b[i].clone());
            r
        })
        .collect();
    let pivots = rref_in_place(&mut rows, n + 1);
    if pivots.last() == Some(&n) {
        return Ok(LinearSolution::Inconsistent);
    }
    let mut particular = vec![Rational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = rows[r][n].clone();
    }
    if pivots.len() == n {
        return Ok(LinearSolution::Unique(particular));
    }
    let mut is_pivot = vec![false; n];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut kernel = Vec::new();
    for f in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = vec![Rational::zero(); n];
        v[f] = Rational::one();
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = -&rows[r][f];
        }
        kernel.push(v);
    }
    Ok(LinearSolution::Underdetermined { particular, kernel })
}

/// Basis of the right kernel `{x : A x = 0}`.
pub fn kernel(a: &Matrix) -> Vec<Vec<Rational>> {
    match solve_linear_system(a, &vec![Rational::zero(); a.rows()]) {
        Ok(LinearSolution::Underdetermined { kernel, .. }) => kernel,
        _ => Vec::new(),
    }
}

/// Affine hull of a point set: `offset + span(basis)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineHull {
    pub offset: Vec<Rational>,
    /// Differences `p_j - offset` of the points listed in `basis_points`.
    pub basis: Vec<Vec<Rational>>,
    /// Index of the point that produced each basis vector.
    pub basis_points: Vec<usize>,
}

impl AffineHull {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Incremental echelon form used to test independence one vector at a time.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    /// Reduced vectors with their pivot column; each has a 1 at its pivot.
    rows: Vec<(usize, Vec<Rational>)>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows; returns the residual.
    pub fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (j, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    v[j] -= &f * x;
                }
            }
        }
        v
    }

    /// Inserts `v` if independent of the stored rows; reports whether it was.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[p].recip().expect("nonzero");
        for x in r.iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        self.rows.push((p, r));
        true
    }
}

/// Offset is the first point; the basis is a maximal independent set of
/// differences, chosen greedily in input order.
pub fn affine_hull(points: &[Vec<Rational>]) -> Result<AffineHull> {
    let Some(first) = points.first() else {
        return Err(domain!("affine hull of an empty point set"));
    };
    let dim = first.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(domain!("points of different dimensions"));
    }
    let mut ech = Echelon::new();
    let mut basis = Vec::new();
    let mut basis_points = Vec::new();
    for (k, p) in points.iter().enumerate().skip(1) {
        let d: Vec<Rational> = p.iter().zip(first).map(|(a, b)| a - b).collect();
        if ech.insert(&d) {
            basis.push(d);
            basis_points.push(k);
        }
    }
    Ok(AffineHull {
        offset: first.clone(),
        basis,
        basis_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Matrix::zeros(3, 2)), 0);
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(&Matrix::identity(3)), 3);
    }

    #[test]
    fn systems() {
        assert_eq!(
            solve_linear_system(&Matrix::identity(2), &[qi(3), q(1, 2)]).unwrap(),
            LinearSolution::Unique(vec![qi(3), q(1, 2)])
        );
        assert_eq!(
            solve_linear_system(&m(&[&[0]]), &[qi(1)]).unwrap(),
            LinearSolution::Inconsistent
        );
        match solve_linear_system(&m(&[&[1, 2], &[2, 4]]), &[qi(1), qi(2)]).unwrap() {
            LinearSolution::Underdetermined { particular, kernel } => {
                assert_eq!(particular, vec![qi(1), qi(0)]);
                assert_eq!(kernel, vec![vec![qi(-2), qi(1)]]);
            }
            other => panic!("{other:?}"),
        }
        assert!(solve_linear_system(&Matrix::identity(2), &[qi(1)]).is_err());
    }

    #[test]
    fn hulls() {
        let one = affine_hull(&[vec![qi(1), qi(2)]]).unwrap();
        assert_eq!(one.dimension(), 0);
        let line = affine_hull(&[vec![qi(0), qi(0)], vec![qi(1), qi(1)], vec![qi(2), qi(2)]]).unwrap();
        assert_eq!(line.dimension(), 1);
        assert_eq!(line.basis_points, vec![1]);
        assert!(affine_hull(&[]).is_err());
    }
}
