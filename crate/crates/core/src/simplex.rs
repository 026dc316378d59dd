//! Dense two-phase primal simplex for small linear programs.
//!
//! Maximizes `c'x` over `x >= 0` subject to a handful of dense rows. The
//! entering column takes the steepest reduced cost (lowest index on ties);
//! the leaving row uses the lexicographic ratio test, so no basis ever
//! repeats and the heavily degenerate covering instances here cannot stall
//! the walk. Problem sizes stay in the hundreds of rows, so a full tableau
//! is the simplest thing that works.

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

/// `max objective' x  s.t.  constraints, x >= 0`.
#[derive(Clone, Debug)]
pub struct Problem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per constraint row, in the row orientation given by the
    /// caller (after internal sign normalization they are mapped back).
    pub duals: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimplexError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("simplex iteration limit {0} exceeded")]
    IterationLimit(usize),
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
pub const DEFAULT_PIVOT_LIMIT: usize = 200_000;

pub fn solve(problem: &Problem) -> Result<Solution, SimplexError> {
    solve_with_limit(problem, DEFAULT_PIVOT_LIMIT)
}

pub fn solve_with_limit(problem: &Problem, limit: usize) -> Result<Solution, SimplexError> {
    Tableau::build(problem).solve(problem, limit)
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Column basic in each row.
    basis: Vec<usize>,
    n_vars: usize,
    n_cols: usize,
    /// Per row: sign applied during normalization, index of its slack /
    /// surplus / artificial column, and that column's original orientation.
    row_sign: Vec<f64>,
    ref_col: Vec<usize>,
    ref_sign: Vec<f64>,
    first_artificial: usize,
}

impl Tableau {
    fn build(problem: &Problem) -> Self {
        let m = problem.constraints.len();
        let n = problem.objective.len();

        // Normalize rows to nonnegative rhs; a >=-row with zero rhs flips to
        // <= so it can start basic without an artificial.
        let mut rels = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(m);
        for c in &problem.constraints {
            debug_assert_eq!(c.coeffs.len(), n);
            let mut rel = c.rel;
            let sign = if c.rhs < 0.0 || (c.rhs == 0.0 && c.rel == Rel::Ge) {
                rel = match rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                    Rel::Eq => Rel::Eq,
                };
                -1.0
            } else {
                1.0
            };
            rels.push(rel);
            row_sign.push(sign);
        }

        let n_slack = rels.iter().filter(|r| **r != Rel::Eq).count();
        let n_artificial = rels.iter().filter(|r| **r != Rel::Le).count();
        let n_cols = n + n_slack + n_artificial;

        let mut rows = vec![vec![0.0; n_cols]; m];
        let mut rhs = vec![0.0; m];
        let mut basis = vec![0usize; m];
        let mut ref_col = vec![0usize; m];
        let mut ref_sign = vec![0.0f64; m];
        let mut next_slack = n;
        let mut next_artificial = n + n_slack;
        let first_artificial = n + n_slack;

        for (r, c) in problem.constraints.iter().enumerate() {
            for (j, &a) in c.coeffs.iter().enumerate() {
                rows[r][j] = row_sign[r] * a;
            }
            rhs[r] = row_sign[r] * c.rhs;
            match rels[r] {
                Rel::Le => {
                    rows[r][next_slack] = 1.0;
                    ref_col[r] = next_slack;
                    ref_sign[r] = 1.0;
                    basis[r] = next_slack;
                    next_slack += 1;
                }
                Rel::Ge => {
                    rows[r][next_slack] = -1.0;
                    ref_col[r] = next_slack;
                    ref_sign[r] = -1.0;
                    next_slack += 1;
                    rows[r][next_artificial] = 1.0;
                    basis[r] = next_artificial;
                    next_artificial += 1;
                }
                Rel::Eq => {
                    rows[r][next_artificial] = 1.0;
                    ref_col[r] = next_artificial;
                    ref_sign[r] = 1.0;
                    basis[r] = next_artificial;
                    next_artificial += 1;
                }
            }
        }

        Tableau {
            rows,
            rhs,
            basis,
            n_vars: n,
            n_cols,
            row_sign,
            ref_col,
            ref_sign,
            first_artificial,
        }
    }

    fn solve(mut self, problem: &Problem, limit: usize) -> Result<Solution, SimplexError> {
        let mut pivots = 0usize;

        if self.first_artificial < self.n_cols {
            // Phase 1: drive the artificial mass to zero.
            let mut costs = vec![0.0; self.n_cols];
            for c in costs.iter_mut().skip(self.first_artificial) {
                *c = -1.0;
            }
            let phase1 = self.run(&costs, self.n_cols, limit, &mut pivots)?;
            if phase1 < -1e-7 {
                return Err(SimplexError::Infeasible);
            }
        }

        // Phase 2: original objective; artificial columns may not re-enter.
        let mut costs = vec![0.0; self.n_cols];
        costs[..self.n_vars].copy_from_slice(&problem.objective);
        let objective = self.run(&costs, self.first_artificial, limit, &mut pivots)?;

        let mut x = vec![0.0; self.n_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_vars {
                x[b] = self.rhs[r];
            }
        }

        // Dual of row r: the reference column began as ref_sign * e_r with
        // zero cost, so its final reduced cost is -ref_sign * y_r; map back
        // through the row normalization sign.
        let reduced = self.reduced_costs(&costs);
        let duals = (0..self.rows.len())
            .map(|r| -self.ref_sign[r] * reduced[self.ref_col[r]] * self.row_sign[r])
            .collect();

        Ok(Solution {
            x,
            objective,
            duals,
            pivots,
        })
    }

    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let mut rc = costs.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for (c, a) in rc.iter_mut().zip(&self.rows[r]) {
                    *c -= cb * a;
                }
            }
        }
        rc
    }

    fn objective(&self, costs: &[f64]) -> f64 {
        self.basis
            .iter()
            .enumerate()
            .map(|(r, &b)| costs[b] * self.rhs[r])
            .sum()
    }

    /// Runs simplex iterations for the given costs, allowing entering columns
    /// below `enter_limit` only. Returns the objective value reached.
    ///
    /// Entering column: steepest reduced cost, lowest index on ties. Leaving
    /// row: lexicographic ratio test, the classic symbolic perturbation.
    /// Every pivot strictly decreases the lexicographic potential, so no
    /// basis repeats and degenerate plateaus cannot trap the walk.
    fn run(
        &mut self,
        costs: &[f64],
        enter_limit: usize,
        limit: usize,
        pivots: &mut usize,
    ) -> Result<f64, SimplexError> {
        loop {
            let rc = self.reduced_costs(costs);
            let mut entering: Option<usize> = None;
            for (j, &r) in rc.iter().enumerate().take(enter_limit) {
                if r > COST_TOL && entering.is_none_or(|p| r > rc[p]) {
                    entering = Some(j);
                }
            }
            let Some(col) = entering else {
                return Ok(self.objective(costs));
            };

            let Some(row) = self.lexicographic_ratio_test(col) else {
                return Err(SimplexError::Unbounded);
            };

            self.pivot(row, col);
            *pivots += 1;
            if *pivots > limit {
                return Err(SimplexError::IterationLimit(limit));
            }
        }
    }

    /// Leaving row for `col`: minimizes `rhs_r / a_r`, with ties resolved by
    /// the first differing component of the scaled tableau rows.
    fn lexicographic_ratio_test(&self, col: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for r in 0..self.rows.len() {
            let a = self.rows[r][col];
            if a <= PIVOT_TOL {
                continue;
            }
            let Some(b) = best else {
                best = Some(r);
                continue;
            };
            let ab = self.rows[b][col];
            let mut delta = self.rhs[r] / a - self.rhs[b] / ab;
            if delta.abs() <= PIVOT_TOL {
                for j in 0..self.n_cols {
                    let d = self.rows[r][j] / a - self.rows[b][j] / ab;
                    if d.abs() > PIVOT_TOL {
                        delta = d;
                        break;
                    }
                }
            }
            if delta < -PIVOT_TOL {
                best = Some(r);
            }
        }
        best
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.rows[row][col];
        for j in 0..self.n_cols {
            self.rows[row][j] *= inv;
        }
        self.rhs[row] *= inv;
        self.rows[row][col] = 1.0;
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.n_cols {
                self.rows[r][j] -= factor * self.rows[row][j];
            }
            self.rows[r][col] = 0.0;
            self.rhs[r] -= factor * self.rhs[row];
        }
        self.basis[row] = col;
    }
}
