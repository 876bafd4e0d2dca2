//! Exact two-phase tableau simplex with Bland's rule.
//!
//! Constraints are normalized to `<=` rows (a `>=` row is negated, an equality
//! becomes a pair of opposite inequalities) and free variables are split into
//! a positive and a negative part. Dual multipliers are read off the reduced
//! costs of the slack columns and mapped back to the caller's rows.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::matrix::dot;
use crate::problems::Sense;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `sense c·x` subject to the constraints; variables are nonnegative unless
/// flagged free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardLp {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub free: Vec<bool>,
}

impl StandardLp {
    /// LP over nonnegative variables.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        StandardLp {
            sense,
            objective,
            constraints: Vec::new(),
            free: vec![false; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn with_free(mut self, free: Vec<bool>) -> Self {
        self.free = free;
        self
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.free.len() != n {
            return Err(domain!("free-variable flags have length {} for {n} variables", self.free.len()));
        }
        if let Some(k) = self.constraints.iter().position(|c| c.coeffs.len() != n) {
            return Err(domain!("constraint {k} has wrong length"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: Rational,
    pub point: Vec<Rational>,
    /// One multiplier per constraint, with `value = Σ rhs_k · dual_k`.
    pub duals: Vec<Rational>,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

struct Tableau {
    /// `m` rows of `ncols + 1` entries, the last being the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced-cost row `c_B B^{-1} A_j - c_j`, last entry the objective value.
    z: Vec<Rational>,
    basis: Vec<usize>,
    ncols: usize,
    pivots: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) {
        self.pivots += 1;
        let inv = self.rows[r][e].recip().expect("nonzero pivot element");
        if !inv.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let prow = self.rows[r].clone();
        let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[e].is_zero() {
                continue;
            }
            let f = row[e].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                row[j] -= d;
            }
        }
        if !self.z[e].is_zero() {
            let f = self.z[e].clone();
            for &j in &nz {
                let d = &f * &prow[j];
                self.z[j] -= d;
            }
        }
        self.basis[r] = e;
    }

    /// Bland's rule: lowest-index improving column, ties in the ratio test
    /// broken by lowest basic variable index.
    fn run(&mut self, allowed: &[bool]) -> Phase {
        let rhs = self.ncols;
        loop {
            let Some(e) = (0..self.ncols).find(|&j| allowed[j] && self.z[j].is_negative()) else {
                return Phase::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[i][rhs] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Phase::Unbounded,
                Some((r, _)) => self.pivot(r, e),
            }
        }
    }

    fn set_objective(&mut self, cost: &[Rational]) {
        let rhs = self.ncols;
        let mut z: Vec<Rational> = cost.iter().map(|c| -c).collect();
        z.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=rhs {
                if !self.rows[i][j].is_zero() {
                    z[j] += cb * &self.rows[i][j];
                }
            }
        }
        self.z = z;
    }
}

/// Solves the LP exactly. Infeasibility and unboundedness are outcomes, not errors.
pub fn simplex_exact(lp: &StandardLp) -> Result<LpOutcome> {
    lp.check()?;
    let n = lp.num_vars();

    // Column layout: for each variable its positive part, then a negative
    // part for free variables.
    let mut col_of = Vec::with_capacity(n);
    let mut nx = 0;
    for j in 0..n {
        col_of.push((nx, if lp.free[j] { Some(nx + 1) } else { None }));
        nx += if lp.free[j] { 2 } else { 1 };
    }

    // Normalized <= rows: (source constraint, sign applied to it).
    let mut rows_src: Vec<(usize, i32)> = Vec::new();
    for (k, c) in lp.constraints.iter().enumerate() {
        match c.relation {
            Relation::Le => rows_src.push((k, 1)),
            Relation::Ge => rows_src.push((k, -1)),
            Relation::Eq => {
                rows_src.push((k, 1));
                rows_src.push((k, -1));
            }
        }
    }
    let m = rows_src.len();
    let needs_art: Vec<bool> = rows_src
        .iter()
        .map(|&(k, s)| {
            let b = &lp.constraints[k].rhs;
            if s > 0 {
                b.is_negative()
            } else {
                b.is_positive()
            }
        })
        .collect();
    let nart = needs_art.iter().filter(|&&x| x).count();
    let slack0 = nx;
    let art0 = nx + m;
    let ncols = nx + m + nart;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_art = art0;
    for (i, &(k, s)) in rows_src.iter().enumerate() {
        let c = &lp.constraints[k];
        let mut row = vec![Rational::zero(); ncols + 1];
        let flip = if needs_art[i] { -1 } else { 1 };
        let sign = Rational::from_int((s * flip) as i64);
        for j in 0..n {
            let a = &c.coeffs[j];
            if a.is_zero() {
                continue;
            }
            let v = a * &sign;
            let (p, neg) = col_of[j];
            if let Some(q) = neg {
                row[q] = -&v;
            }
            row[p] = v;
        }
        row[slack0 + i] = Rational::from_int(flip as i64);
        row[ncols] = &c.rhs * &sign;
        if needs_art[i] {
            row[next_art] = Rational::one();
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(slack0 + i);
        }
        rows.push(row);
    }

    let mut tab = Tableau {
        rows,
        z: Vec::new(),
        basis,
        ncols,
        pivots: 0,
    };

    if nart > 0 {
        let mut cost = vec![Rational::zero(); ncols];
        for c in cost.iter_mut().skip(art0) {
            *c = -Rational::one();
        }
        tab.set_objective(&cost);
        let allowed = vec![true; ncols];
        tab.run(&allowed);
        if tab.z[ncols].is_negative() {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive zero-level artificials out of the basis. Every row has its
        // own slack column, so a non-artificial pivot always exists.
        for r in 0..m {
            if tab.basis[r] >= art0 {
                if let Some(e) = (0..art0).find(|&j| !tab.rows[r][j].is_zero()) {
                    tab.pivot(r, e);
                }
            }
        }
    }

    // Phase 2: maximize (or maximize the negated minimization objective).
    let mut cost = vec![Rational::zero(); ncols];
    for j in 0..n {
        let c = match lp.sense {
            Sense::Max => lp.objective[j].clone(),
            Sense::Min => -&lp.objective[j],
        };
        let (p, neg) = col_of[j];
        if let Some(q) = neg {
            cost[q] = -&c;
        }
        cost[p] = c;
    }
    tab.set_objective(&cost);
    let mut allowed = vec![true; ncols];
    for a in allowed.iter_mut().skip(art0) {
        *a = false;
    }
    if let Phase::Unbounded = tab.run(&allowed) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut xcols = vec![Rational::zero(); ncols];
    for (i, &b) in tab.basis.iter().enumerate() {
        xcols[b] = tab.rows[i][ncols].clone();
    }
    let point: Vec<Rational> = (0..n)
        .map(|j| {
            let (p, neg) = col_of[j];
            match neg {
                Some(q) => &xcols[p] - &xcols[q],
                None => xcols[p].clone(),
            }
        })
        .collect();
    let internal_value = tab.z[ncols].clone();

    // Row duals of the normalized <= system, then back to caller rows.
    let mut duals = vec![Rational::zero(); lp.constraints.len()];
    for (i, &(k, s)) in rows_src.iter().enumerate() {
        let y = &tab.z[slack0 + i];
        if y.is_zero() {
            continue;
        }
        if s > 0 {
            duals[k] += y;
        } else {
            duals[k] -= y;
        }
    }
    let (value, duals) = match lp.sense {
        Sense::Max => (internal_value, duals),
        Sense::Min => (-internal_value, duals.into_iter().map(|d| -d).collect()),
    };
    Ok(LpOutcome::Optimal(LpSolution {
        value,
        point,
        duals,
        pivots: tab.pivots,
    }))
}

/// Checks a claimed optimum: primal feasibility, objective value, dual sign
/// conditions, dual feasibility and `value = Σ rhs·dual` (strong duality).
pub fn certify_optimal(lp: &StandardLp, sol: &LpSolution) -> bool {
    let n = lp.num_vars();
    if sol.point.len() != n || sol.duals.len() != lp.constraints.len() {
        return false;
    }
    if dot(&lp.objective, &sol.point) != sol.value {
        return false;
    }
    for j in 0..n {
        if !lp.free[j] && sol.point[j].is_negative() {
            return false;
        }
    }
    // For max: y >= 0 on <=, y <= 0 on >=; for min the signs flip.
    let flip = matches!(lp.sense, Sense::Min);
    for (c, y) in lp.constraints.iter().zip(&sol.duals) {
        let lhs = dot(&c.coeffs, &sol.point);
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Ge => lhs >= c.rhs,
            Relation::Eq => lhs == c.rhs,
        };
        if !ok {
            return false;
        }
        let sign_ok = match (c.relation, flip) {
            (Relation::Eq, _) => true,
            (Relation::Le, false) | (Relation::Ge, true) => !y.is_negative(),
            (Relation::Ge, false) | (Relation::Le, true) => !y.is_positive(),
        };
        if !sign_ok {
            return false;
        }
    }
    for j in 0..n {
        let aty: Rational = lp
            .constraints
            .iter()
            .zip(&sol.duals)
            .map(|(c, y)| &c.coeffs[j] * y)
            .sum();
        let cj = &lp.objective[j];
        let ok = if lp.free[j] {
            aty == *cj
        } else if flip {
            aty <= *cj
        } else {
            aty >= *cj
        };
        if !ok {
            return false;
        }
    }
    let dual_value: Rational = lp
        .constraints
        .iter()
        .zip(&sol.duals)
        .map(|(c, y)| &c.rhs * y)
        .sum();
    dual_value == sol.value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn solve(lp: &StandardLp) -> LpOutcome {
        simplex_exact(lp).unwrap()
    }

    #[test]
    fn one_variable_bounded() {
        let mut lp = StandardLp::new(Sense::Max, vec![qi(1)]);
        lp.add(vec![qi(1)], Relation::Le, qi(1));
        let s = solve(&lp);
        let s = s.optimal().unwrap();
        assert_eq!(s.value, qi(1));
        assert_eq!(s.point, vec![qi(1)]);
        assert!(certify_optimal(&lp, s));
    }

    #[test]
    fn unbounded_and_infeasible() {
        let lp = StandardLp::new(Sense::Max, vec![qi(1)]);
        assert_eq!(solve(&lp), LpOutcome::Unbounded);
        let mut lp = StandardLp::new(Sense::Max, vec![qi(1)]);
        lp.add(vec![qi(1)], Relation::Ge, qi(2));
        lp.add(vec![qi(1)], Relation::Le, qi(1));
        assert_eq!(solve(&lp), LpOutcome::Infeasible);
    }

    #[test]
    fn two_variables_fractional_optimum() {
        let mut lp = StandardLp::new(Sense::Max, vec![qi(1), qi(1)]);
        lp.add(vec![qi(1), qi(1)], Relation::Le, q(3, 2));
        lp.add(vec![qi(1), qi(0)], Relation::Le, qi(1));
        lp.add(vec![qi(0), qi(1)], Relation::Le, qi(1));
        let out = solve(&lp);
        let s = out.optimal().unwrap();
        assert_eq!(s.value, q(3, 2));
        assert!(certify_optimal(&lp, s));
    }

    #[test]
    fn minimization_with_equalities_and_free_variables() {
        // min x - y  s.t. x + y = 2, y <= 3, x free, y >= 0
        let mut lp = StandardLp::new(Sense::Min, vec![qi(1), qi(-1)]).with_free(vec![true, false]);
        lp.add(vec![qi(1), qi(1)], Relation::Eq, qi(2));
        lp.add(vec![qi(0), qi(1)], Relation::Le, qi(3));
        let out = solve(&lp);
        let s = out.optimal().unwrap();
        assert_eq!(s.value, qi(-4));
        assert_eq!(s.point, vec![qi(-1), qi(3)]);
        assert!(certify_optimal(&lp, s));
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale's classic instance that cycles under the largest-coefficient rule.
        let mut lp = StandardLp::new(Sense::Max, vec![q(3, 4), qi(-150), q(1, 50), qi(-6)]);
        lp.add(vec![q(1, 4), qi(-60), q(-1, 25), qi(9)], Relation::Le, qi(0));
        lp.add(vec![q(1, 2), qi(-90), q(-1, 50), qi(3)], Relation::Le, qi(0));
        lp.add(vec![qi(0), qi(0), qi(1), qi(0)], Relation::Le, qi(1));
        let out = solve(&lp);
        let s = out.optimal().unwrap();
        assert_eq!(s.value, q(1, 20));
        assert!(certify_optimal(&lp, s));
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // max -x - y s.t. x + y >= 1, x - y <= -1/2
        let mut lp = StandardLp::new(Sense::Max, vec![qi(-1), qi(-1)]);
        lp.add(vec![qi(1), qi(1)], Relation::Ge, qi(1));
        lp.add(vec![qi(1), qi(-1)], Relation::Le, q(-1, 2));
        let out = solve(&lp);
        let s = out.optimal().unwrap();
        assert_eq!(s.value, qi(-1));
        assert!(certify_optimal(&lp, s));
    }
}
