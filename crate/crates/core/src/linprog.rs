//! Dense two-phase simplex for `min c·x  s.t.  A·x = b, x ≥ 0`.
//!
//! Phase 1 adds one artificial variable per row and minimises their sum;
//! phase 2 starts from the resulting basis with the original costs.
//! Entering columns follow Dantzig's most-negative reduced cost rule until
//! 50 consecutive degenerate pivots have been made, after which Bland's
//! smallest-index rule takes over until the next pivot that makes progress.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::dense;

/// Iteration cap applied when none is configured.
pub const DEFAULT_ITERATION_CAP: usize = 10_000;
/// Smallest tableau entry accepted as a pivot.
pub const PIVOT_TOL: f64 = 1e-9;
/// Primal feasibility tolerance (scaled by `1 + ‖b‖∞`) and dual tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const OPTIMALITY_TOL: f64 = 1e-7;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
pub const BLAND_AFTER: usize = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("basis not invertible")]
    BasisNotInvertible,
}

/// `min c·x` subject to `A·x = b`, `x ≥ 0`, with a dense row-major `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLp {
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl StandardFormLp {
    pub fn new(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self, LpError> {
        if a.len() != b.len() {
            return Err(LpError::Dimension("A has a different row count than b"));
        }
        if a.iter().any(|row| row.len() != c.len()) {
            return Err(LpError::Dimension("A has a different column count than c"));
        }
        if !c.iter().all(|v| v.is_finite()) {
            return Err(LpError::NonFinite("c"));
        }
        if !b.iter().all(|v| v.is_finite()) {
            return Err(LpError::NonFinite("b"));
        }
        if !a.iter().flatten().all(|v| v.is_finite()) {
            return Err(LpError::NonFinite("A"));
        }
        Ok(StandardFormLp { c, a, b })
    }

    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Copy with row `row` of `A` and `b` multiplied by `factor`.
    pub fn with_scaled_row(&self, row: usize, factor: f64) -> Self {
        let mut lp = self.clone();
        lp.a[row].iter_mut().for_each(|v| *v *= factor);
        lp.b[row] *= factor;
        lp
    }

    /// `‖A·x − b‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| (dot(row, x) - bi).abs())
            .fold(0.0, f64::max)
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration limit reached",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// `c·primal` when optimal; `-inf` when unbounded.
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Basic original variables, one per non-redundant row, ascending.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub iteration_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            iteration_cap: DEFAULT_ITERATION_CAP,
        }
    }
}

pub fn solve(lp: &StandardFormLp) -> LpSolution {
    solve_with(lp, &SolverConfig::default(), None)
}

/// Solves `lp`, optionally dumping every pivot and tableau to `trace`.
pub fn solve_with(lp: &StandardFormLp, config: &SolverConfig, trace: Option<&mut dyn Write>) -> LpSolution {
    Tableau::new(lp, config.iteration_cap, trace).run(lp)
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Tableau<'w> {
    n: usize,
    /// Row-major, `n + m` columns (originals then artificials) plus the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    iterations: usize,
    cap: usize,
    trace: Option<&'w mut dyn Write>,
}

impl<'w> Tableau<'w> {
    fn new(lp: &StandardFormLp, cap: usize, trace: Option<&'w mut dyn Write>) -> Self {
        let (n, m) = (lp.n_vars(), lp.n_constraints());
        let rows = (0..m)
            .map(|i| {
                let sign = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
                let mut row = Vec::with_capacity(n + m + 1);
                row.extend(lp.a[i].iter().map(|v| sign * v));
                row.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
                row.push(sign * lp.b[i]);
                row
            })
            .collect();
        Tableau {
            n,
            rows,
            basis: (n..n + m).collect(),
            iterations: 0,
            cap,
            trace,
        }
    }

    fn rhs(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len() - 1)
    }

    fn run(mut self, lp: &StandardFormLp) -> LpSolution {
        let n = self.n;
        let m = self.rows.len();
        let b_norm = lp.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));

        let phase1_cost: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
        match self.optimize(&phase1_cost, n + m, 1) {
            Outcome::IterationLimit => return self.finish(lp, LpStatus::IterationLimit),
            // Phase 1 is bounded below by zero.
            Outcome::Unbounded | Outcome::Optimal => {}
        }
        let rhs = self.rhs();
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&self.rows)
            .filter(|(&j, _)| j >= n)
            .map(|(_, r)| r[rhs].max(0.0))
            .sum();
        if infeasibility > FEASIBILITY_TOL * (1.0 + b_norm) {
            return self.finish(lp, LpStatus::Infeasible);
        }

        self.drive_out_artificials();

        match self.optimize(&lp.c, n, 2) {
            Outcome::Optimal => self.finish(lp, LpStatus::Optimal),
            Outcome::Unbounded => self.finish(lp, LpStatus::Unbounded),
            Outcome::IterationLimit => self.finish(lp, LpStatus::IterationLimit),
        }
    }

    fn drive_out_artificials(&mut self) {
        let n = self.n;
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < n {
                i += 1;
                continue;
            }
            let best = (0..n)
                .filter(|j| !self.basis.contains(j))
                .map(|j| (j, self.rows[i][j].abs()))
                .filter(|&(_, v)| v > PIVOT_TOL)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((j, _)) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    // Redundant row: every original column is zero here.
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn reduced_costs(&self, cost: &[f64], width: usize) -> Vec<f64> {
        let mut r: Vec<f64> = cost[..width].to_vec();
        for (row, &bj) in self.rows.iter().zip(&self.basis) {
            let cb = cost[bj];
            if cb != 0.0 {
                for (rj, v) in r.iter_mut().zip(row) {
                    *rj -= cb * v;
                }
            }
        }
        for &bj in &self.basis {
            if bj < width {
                r[bj] = 0.0;
            }
        }
        r
    }

    fn optimize(&mut self, cost: &[f64], width: usize, phase: u8) -> Outcome {
        let rhs = self.rhs();
        let mut degenerate_run = 0usize;
        loop {
            let reduced = self.reduced_costs(cost, width);
            let bland = degenerate_run >= BLAND_AFTER;
            let candidates = (0..width).filter(|&j| reduced[j] < -PIVOT_TOL && !self.basis.contains(&j));
            let entering = if bland {
                candidates.min()
            } else {
                candidates.min_by(|&a, &b| reduced[a].total_cmp(&reduced[b]))
            };
            let Some(e) = entering else {
                return Outcome::Optimal;
            };

            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[e];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = row[rhs].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[li]
                            } else {
                                a > self.rows[li][e]
                            }
                        } else {
                            ratio < lr
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
            let Some((l, ratio)) = leave else {
                return Outcome::Unbounded;
            };

            if self.iterations >= self.cap {
                return Outcome::IterationLimit;
            }
            if ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.write_trace(phase, e, l, ratio, bland);
            self.pivot(l, e);
            self.iterations += 1;
        }
    }

    fn pivot(&mut self, l: usize, e: usize) {
        let p = self.rows[l][e];
        self.rows[l].iter_mut().for_each(|v| *v /= p);
        self.rows[l][e] = 1.0;
        let pivot_row = self.rows[l].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == l {
                continue;
            }
            let f = row[e];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[e] = 0.0;
        }
        self.basis[l] = e;
    }

    fn write_trace(&mut self, phase: u8, e: usize, l: usize, ratio: f64, bland: bool) {
        let Some(out) = self.trace.as_deref_mut() else {
            return;
        };
        let rule = if bland { "bland" } else { "dantzig" };
        // Trace output is best effort.
        let _ = writeln!(
            out,
            "phase {phase} iter {}: enter x{e} leave row {l} (x{}) ratio {ratio:.6e} [{rule}]",
            self.iterations, self.basis[l]
        );
        for (row, bj) in self.rows.iter().zip(&self.basis) {
            let _ = write!(out, "  x{bj:<4}|");
            for v in row {
                let _ = write!(out, " {v:>11.4e}");
            }
            let _ = writeln!(out);
        }
    }

    fn finish(self, lp: &StandardFormLp, status: LpStatus) -> LpSolution {
        let rhs = self.rhs();
        let mut primal = vec![0.0; self.n];
        for (row, &bj) in self.rows.iter().zip(&self.basis) {
            if bj < self.n {
                primal[bj] = row[rhs].max(0.0);
            }
        }
        let mut basis: Vec<usize> = self.basis.iter().copied().filter(|&j| j < self.n).collect();
        basis.sort_unstable();
        let objective = match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => lp.objective_at(&primal),
        };
        LpSolution {
            status,
            objective,
            primal,
            basis,
            iterations: self.iterations,
        }
    }
}

/// Checks an optimal solution's certificate: primal feasibility, objective
/// consistency, and non-negative reduced costs for its basis.
///
/// Returns `Ok(false)` for any non-optimal status.
pub fn verify_optimality(lp: &StandardFormLp, sol: &LpSolution) -> Result<bool, LpError> {
    if sol.status != LpStatus::Optimal {
        return Ok(false);
    }
    if sol.primal.len() != lp.n_vars() {
        return Err(LpError::Dimension("primal length differs from n_vars"));
    }
    if sol.basis.iter().any(|&j| j >= lp.n_vars()) || sol.basis.len() > lp.n_constraints() {
        return Err(LpError::Dimension("basis does not fit the LP"));
    }
    let b_norm = lp.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if sol.primal.iter().any(|&v| v < -1e-9 || !v.is_finite()) {
        return Ok(false);
    }
    if lp.residual(&sol.primal) > FEASIBILITY_TOL * (1.0 + b_norm) {
        return Ok(false);
    }
    if (sol.objective - lp.objective_at(&sol.primal)).abs() > 1e-9 * (1.0 + sol.objective.abs()) {
        return Ok(false);
    }

    let columns: Vec<Vec<f64>> = sol
        .basis
        .iter()
        .map(|&j| lp.a.iter().map(|row| row[j]).collect())
        .collect();
    let rows = dense::independent_rows(&columns, 1e-11).ok_or(LpError::BasisNotInvertible)?;
    // Solve B_Rᵀ y = c_B on the independent rows; the rest are combinations of them.
    let bt: Vec<Vec<f64>> = sol
        .basis
        .iter()
        .map(|&j| rows.iter().map(|&r| lp.a[r][j]).collect())
        .collect();
    let cb: Vec<f64> = sol.basis.iter().map(|&j| lp.c[j]).collect();
    let y = dense::solve_square(bt, cb, 1e-13).ok_or(LpError::BasisNotInvertible)?;

    let dual_ok = (0..lp.n_vars()).all(|j| {
        let priced: f64 = rows.iter().zip(&y).map(|(&r, yr)| yr * lp.a[r][j]).sum();
        lp.c[j] - priced >= -OPTIMALITY_TOL
    });
    Ok(dual_ok)
}
