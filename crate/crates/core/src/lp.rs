//! Small dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Solves `max c·x  s.t.  A x ≤ b,  x ≥ 0` for arbitrary signs of `b`. With
//! [`Rational`](crate::scalar::Rational) every pivot is exact, so optimality
//! and feasibility decisions carry no tolerance.

use alloc::vec::Vec;

use crate::scalar::{Scalar, Tolerance};

/// Hard cap on pivots. Bland's rule cannot cycle in exact arithmetic; the cap
/// only guards float mode against round-off loops.
pub const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("constraint row has {found} coefficients, expected {expected}")]
    RowLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    objective: Vec<S>,
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    pub value: S,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<S> {
    Optimal(LpSolution<S>),
    Infeasible,
    Unbounded,
    PivotLimit,
}

impl<S> LpOutcome<S> {
    pub fn optimal(self) -> Option<LpSolution<S>> {
        match self {
            LpOutcome::Optimal(sol) => Some(sol),
            _ => None,
        }
    }
}

impl<S: Scalar> LinearProgram<S> {
    /// A program maximizing `objective · x` over `x ≥ 0`.
    pub fn maximize(objective: Vec<S>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `coefficients · x ≤ bound`.
    pub fn add_le(&mut self, coefficients: Vec<S>, bound: S) -> Result<&mut Self, LpError> {
        if coefficients.len() != self.num_vars() {
            return Err(LpError::RowLength {
                expected: self.num_vars(),
                found: coefficients.len(),
            });
        }
        self.rows.push(coefficients);
        self.rhs.push(bound);
        Ok(self)
    }

    pub fn solve(&self, tol: &Tolerance<S>) -> LpOutcome<S> {
        let mut tableau = Tableau::build(self);
        let mut pivots = 0;

        if tableau.num_artificial > 0 {
            let phase_one: Vec<S> = (0..tableau.width())
                .map(|j| {
                    if tableau.is_artificial(j) {
                        -S::one()
                    } else {
                        S::zero()
                    }
                })
                .collect();
            match tableau.run(&phase_one, tol, &mut pivots) {
                Run::Optimal => {}
                // Phase one is bounded by construction.
                Run::Unbounded => return LpOutcome::Infeasible,
                Run::PivotLimit => return LpOutcome::PivotLimit,
            }
            let infeasibility = crate::scalar::sum(
                tableau
                    .basis
                    .iter()
                    .zip(&tableau.rhs)
                    .filter(|(b, _)| tableau.is_artificial(**b))
                    .map(|(_, v)| v.clone()),
            );
            if tol.is_positive(&infeasibility) {
                return LpOutcome::Infeasible;
            }
            tableau.drive_out_artificials(tol, &mut pivots);
        }
        tableau.allow_artificial = false;

        let mut phase_two: Vec<S> = (0..tableau.width()).map(|_| S::zero()).collect();
        for (j, c) in self.objective.iter().enumerate() {
            phase_two[j] = c.clone();
        }
        match tableau.run(&phase_two, tol, &mut pivots) {
            Run::Optimal => {}
            Run::Unbounded => return LpOutcome::Unbounded,
            Run::PivotLimit => return LpOutcome::PivotLimit,
        }

        let mut x: Vec<S> = (0..self.num_vars()).map(|_| S::zero()).collect();
        for (row, &var) in tableau.basis.iter().enumerate() {
            if var < self.num_vars() {
                x[var] = tableau.rhs[row].clone();
            }
        }
        let value = crate::model::dot(&self.objective, &x);
        LpOutcome::Optimal(LpSolution { x, value, pivots })
    }
}

enum Run {
    Optimal,
    Unbounded,
    PivotLimit,
}

/// Columns are ordered original variables, then one slack or surplus per row,
/// then artificials. That order is the index order Bland's rule uses.
struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    num_structural: usize,
    num_artificial: usize,
    allow_artificial: bool,
}

impl<S: Scalar> Tableau<S> {
    fn build(lp: &LinearProgram<S>) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars();
        let negative: Vec<bool> = lp.rhs.iter().map(|b| b.lt_zero()).collect();
        let num_artificial = negative.iter().filter(|&&neg| neg).count();
        let width = n + m + num_artificial;

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_artificial = n + m;
        for (r, (coeffs, b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
            let mut row: Vec<S> = (0..width).map(|_| S::zero()).collect();
            if negative[r] {
                for (j, a) in coeffs.iter().enumerate() {
                    row[j] = -a.clone();
                }
                row[n + r] = -S::one();
                row[next_artificial] = S::one();
                basis.push(next_artificial);
                next_artificial += 1;
                rhs.push(-b.clone());
            } else {
                row[..n].clone_from_slice(coeffs);
                row[n + r] = S::one();
                basis.push(n + r);
                rhs.push(b.clone());
            }
            rows.push(row);
        }
        Tableau {
            rows,
            rhs,
            basis,
            num_structural: n + m,
            num_artificial,
            allow_artificial: true,
        }
    }

    fn width(&self) -> usize {
        self.num_structural + self.num_artificial
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.num_structural
    }

    fn reduced_profits(&self, costs: &[S]) -> Vec<S> {
        let mut r = costs.to_vec();
        for (row, &var) in self.rows.iter().zip(&self.basis) {
            let cb = &costs[var];
            if cb.is_zero() {
                continue;
            }
            for (rj, t) in r.iter_mut().zip(row) {
                *rj = rj.clone() - cb.clone() * t.clone();
            }
        }
        r
    }

    fn pivot(&mut self, row: usize, col: usize, profits: Option<&mut Vec<S>>) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = v.clone() / p.clone();
        }
        self.rhs[row] = self.rhs[row].clone() / p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for k in 0..self.rows.len() {
            if k == row {
                continue;
            }
            let factor = self.rows[k][col].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, pv) in self.rows[k].iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * pv.clone();
            }
            self.rows[k][col] = S::zero();
            self.rhs[k] = self.rhs[k].clone() - factor * pivot_rhs.clone();
        }
        if let Some(r) = profits {
            let factor = r[col].clone();
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * pv.clone();
            }
            r[col] = S::zero();
        }
        self.basis[row] = col;
    }

    fn run(&mut self, costs: &[S], tol: &Tolerance<S>, pivots: &mut usize) -> Run {
        let mut profits = self.reduced_profits(costs);
        loop {
            let limit = if self.allow_artificial {
                self.width()
            } else {
                self.num_structural
            };
            // Bland: lowest-index improving column.
            let Some(col) = (0..limit).find(|&j| tol.is_positive(&profits[j])) else {
                return Run::Optimal;
            };
            // Bland: minimum ratio, ties broken by lowest basic variable index.
            let mut best: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[col];
                if !tol.is_positive(a) {
                    continue;
                }
                let ratio = self.rhs[i].clone() / a.clone();
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if tol.eq(&ratio, &br) {
                            if self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        } else if ratio < br {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((row, _)) = best else {
                return Run::Unbounded;
            };
            if *pivots >= MAX_PIVOTS {
                return Run::PivotLimit;
            }
            self.pivot(row, col, Some(&mut profits));
            *pivots += 1;
        }
    }

    /// After a successful phase one, replaces artificials that are still basic
    /// (at level zero) by structural columns, dropping rows that turn out to be
    /// linearly dependent.
    fn drive_out_artificials(&mut self, tol: &Tolerance<S>, pivots: &mut usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if !self.is_artificial(self.basis[i]) {
                i += 1;
                continue;
            }
            let replacement = (0..self.num_structural).find(|&j| !tol.is_zero(&self.rows[i][j]));
            match replacement {
                Some(col) => {
                    self.pivot(i, col, None);
                    *pivots += 1;
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.rhs.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use alloc::vec;

    type Q = Rational;

    fn r(v: i64) -> Q {
        Q::from_i64(v)
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::maximize(vec![r(3), r(5)]);
        lp.add_le(vec![r(1), r(0)], r(4)).unwrap();
        lp.add_le(vec![r(0), r(2)], r(12)).unwrap();
        lp.add_le(vec![r(3), r(2)], r(18)).unwrap();
        let sol = lp.solve(&Tolerance::exact()).optimal().unwrap();
        assert_eq!(sol.x, vec![r(2), r(6)]);
        assert_eq!(sol.value, r(36));
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // max -x - y, x + y ≥ 2 (as -x - y ≤ -2), x ≤ 3 → value -2
        let mut lp = LinearProgram::maximize(vec![r(-1), r(-1)]);
        lp.add_le(vec![r(-1), r(-1)], r(-2)).unwrap();
        lp.add_le(vec![r(1), r(0)], r(3)).unwrap();
        let sol = lp.solve(&Tolerance::exact()).optimal().unwrap();
        assert_eq!(sol.value, r(-2));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![r(1)]);
        lp.add_le(vec![r(1)], r(1)).unwrap();
        lp.add_le(vec![r(-1)], r(-2)).unwrap();
        assert_eq!(lp.solve(&Tolerance::exact()), LpOutcome::Infeasible);

        let mut lp = LinearProgram::maximize(vec![r(1), r(0)]);
        lp.add_le(vec![r(0), r(1)], r(1)).unwrap();
        assert_eq!(lp.solve(&Tolerance::exact()), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        // x + y = 2 written twice as pairs of inequalities.
        let mut lp = LinearProgram::maximize(vec![r(1), r(0)]);
        for _ in 0..2 {
            lp.add_le(vec![r(1), r(1)], r(2)).unwrap();
            lp.add_le(vec![r(-1), r(-1)], r(-2)).unwrap();
        }
        let sol = lp.solve(&Tolerance::exact()).optimal().unwrap();
        assert_eq!(sol.x, vec![r(2), r(0)]);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::maximize(vec![Q::ratio(3, 4), r(-150), Q::ratio(1, 50), r(-6)]);
        lp.add_le(vec![Q::ratio(1, 4), r(-60), Q::ratio(-1, 25), r(9)], r(0))
            .unwrap();
        lp.add_le(vec![Q::ratio(1, 2), r(-90), Q::ratio(-1, 50), r(3)], r(0))
            .unwrap();
        lp.add_le(vec![r(0), r(0), r(1), r(0)], r(1)).unwrap();
        let sol = lp.solve(&Tolerance::exact()).optimal().unwrap();
        assert_eq!(sol.value, Q::ratio(1, 20));
    }

    #[test]
    fn row_length_is_checked() {
        let mut lp = LinearProgram::maximize(vec![r(1), r(1)]);
        assert!(lp.add_le(vec![r(1)], r(1)).is_err());
    }

    #[test]
    fn float_mode_matches_exact() {
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.add_le(vec![1.0, 0.0], 4.0).unwrap();
        lp.add_le(vec![0.0, 2.0], 12.0).unwrap();
        lp.add_le(vec![3.0, 2.0], 18.0).unwrap();
        let sol = lp.solve(&Tolerance::new(1e-9)).optimal().unwrap();
        assert!((sol.value - 36.0).abs() < 1e-9);
    }
}
