//! Cyclic Jacobi eigenvalues for symmetric float matrices.

use alloc::vec::Vec;

use crate::error::{domain, Result};

fn frobenius(m: &[Vec<f64>]) -> f64 {
    libm::sqrt(m.iter().flatten().map(|x| x * x).sum::<f64>())
}

fn off_diagonal(m: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if i != j {
                s += x * x;
            }
        }
    }
    libm::sqrt(s)
}

/// All eigenvalues, ascending. Rotations continue until the off-diagonal
/// Frobenius norm drops below `tol·‖M‖_F`; each returned eigenvalue is then
/// within `tol·‖M‖_F` of an exact one (Weyl's inequality).
pub fn symmetric_eigenvalues(m: &[Vec<f64>], tol: f64) -> Result<Vec<f64>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(domain!("matrix is not square"));
    }
    for i in 0..n {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-12 {
                return Err(domain!("matrix is not symmetric at ({i}, {j})"));
            }
        }
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let norm = frobenius(&a);
    let target = tol * norm;
    let mut sweeps = 0;
    while norm > 0.0 && off_diagonal(&a) > target && sweeps < 100 {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    Ok(ev)
}

/// Smallest eigenvalue; `0.0` for the empty matrix.
pub fn symmetric_eigen_min(m: &[Vec<f64>], tol: f64) -> Result<f64> {
    Ok(symmetric_eigenvalues(m, tol)?.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity_and_diagonal() {
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!((symmetric_eigen_min(&id, 1e-12).unwrap() - 1.0).abs() < 1e-9);
        let d = vec![vec![2.0, 0.0], vec![0.0, -1.0]];
        assert!((symmetric_eigen_min(&d, 1e-12).unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let ev = symmetric_eigenvalues(&m, 1e-14).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(symmetric_eigen_min(&[vec![0.0, 1.0], vec![0.0, 0.0]], 1e-9).is_err());
    }
}
