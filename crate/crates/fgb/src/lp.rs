//! Nonnegative covering linear programs and a dense simplex solver.
//!
//! Every complexity quantity and phase plan in this crate is the optimum of a
//! program `min <c,x> s.t. sum_{j in S_r} x_j >= b_r, x >= 0` with `c >= 0`.
//! The solver works on the packing dual `max <b,y> s.t. A'y <= c, y >= 0`,
//! whose slack basis is immediately feasible, and reads the covering primal
//! off the optimal reduced costs. Each solution therefore ships with a dual
//! certificate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for feasibility and duality-gap checks.
pub const DEFAULT_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;

/// One covering constraint: `sum_{j in support} x_j >= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverRow {
    pub support: Vec<usize>,
    pub threshold: f64,
}

/// A covering LP over `costs.len()` nonnegative variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringLp {
    costs: Vec<f64>,
    rows: Vec<CoverRow>,
}

impl CoveringLp {
    pub fn new(costs: Vec<f64>, rows: Vec<CoverRow>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::Model("no variables".into()));
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::Model("costs must be finite and nonnegative".into()));
        }
        let k = costs.len();
        for (r, row) in rows.iter().enumerate() {
            if row.support.is_empty() {
                return Err(Error::Model(format!("row {r} has empty support")));
            }
            if !(row.threshold.is_finite() && row.threshold > 0.0) {
                return Err(Error::Model(format!(
                    "row {r} threshold must be finite and positive"
                )));
            }
            if row.support.iter().any(|&j| j >= k) {
                return Err(Error::Model(format!("row {r} references unknown variable")));
            }
        }
        let mut rows = rows;
        for row in &mut rows {
            row.support.sort_unstable();
            row.support.dedup();
        }
        Ok(CoveringLp { costs, rows })
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn rows(&self) -> &[CoverRow] {
        &self.rows
    }

    fn row_sum(&self, row: &CoverRow, x: &[f64]) -> f64 {
        row.support.iter().map(|&j| x[j]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    /// The pivot cap was reached; the primal is feasible and the dual is a
    /// valid lower bound, but the gap may be as large as 4x.
    Approximate,
}

/// A primal/dual solution pair. The dual always satisfies
/// `dual_value <= true optimum <= value`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub primal: Vec<f64>,
    pub value: f64,
    pub dual: Vec<f64>,
    pub dual_value: f64,
    pub status: LpStatus,
}

/// Checks `x >= 0` and every row within multiplicative `slack_tol`.
pub fn verify_feasible(lp: &CoveringLp, x: &[f64], slack_tol: f64) -> Result<bool> {
    if x.len() != lp.num_vars() {
        return Err(Error::Model(format!(
            "solution has {} entries for {} variables",
            x.len(),
            lp.num_vars()
        )));
    }
    if x.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Ok(false);
    }
    Ok(lp
        .rows
        .iter()
        .all(|row| lp.row_sum(row, x) >= row.threshold * (1.0 - slack_tol)))
}

fn verify_dual(lp: &CoveringLp, y: &[f64], slack_tol: f64) -> Result<bool> {
    if y.len() != lp.rows.len() {
        return Err(Error::Model(format!(
            "dual has {} entries for {} rows",
            y.len(),
            lp.rows.len()
        )));
    }
    if y.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Ok(false);
    }
    let mut load = vec![0.0f64; lp.num_vars()];
    for (row, &yr) in lp.rows.iter().zip(y) {
        for &j in &row.support {
            load[j] += yr;
        }
    }
    Ok(load
        .iter()
        .zip(&lp.costs)
        .all(|(l, c)| *l <= c * (1.0 + slack_tol) + PIVOT_TOL))
}

/// `value - dual_value` after checking that both sides really are feasible.
pub fn weak_duality_gap(lp: &CoveringLp, sol: &LpSolution) -> Result<f64> {
    if !verify_feasible(lp, &sol.primal, DEFAULT_TOL)? {
        return Err(Error::Certificate("primal not feasible".into()));
    }
    if !verify_dual(lp, &sol.dual, DEFAULT_TOL)? {
        return Err(Error::Certificate("dual not feasible".into()));
    }
    Ok(sol.value - sol.dual_value)
}

/// Solves a covering LP to relative tolerance `tol`.
///
/// Rows touching a zero-cost variable are covered for free and removed before
/// the simplex runs, so instances like the full-information LP come out as
/// exactly zero. The returned primal is always feasible; `status` reports
/// whether optimality was certified.
pub fn solve_covering_lp(lp: &CoveringLp, tol: f64) -> Result<LpSolution> {
    let k = lp.num_vars();
    let free: Vec<bool> = lp.costs.iter().map(|c| *c == 0.0).collect();

    let mut primal = vec![0.0f64; k];
    let mut dual = vec![0.0f64; lp.rows.len()];

    // Rows with a zero-cost variable in their support cost nothing to cover.
    let mut kept: Vec<usize> = Vec::new();
    for (r, row) in lp.rows.iter().enumerate() {
        match row.support.iter().find(|&&j| free[j]) {
            Some(&j) => primal[j] = primal[j].max(row.threshold),
            None => kept.push(r),
        }
    }

    let status = if kept.is_empty() {
        LpStatus::Optimal
    } else {
        let _ = tol;
        let (x, y, st) = simplex_on_dual(lp, &kept)?;
        for (j, v) in x.into_iter().enumerate() {
            primal[j] = primal[j].max(v);
        }
        for (pos, &r) in kept.iter().enumerate() {
            dual[r] = y[pos];
        }
        st
    };

    // Numerical drift can leave a row a hair short; inflate multiplicatively.
    let mut scale: f64 = 1.0;
    for row in &lp.rows {
        let s = lp.row_sum(row, &primal);
        if s < row.threshold {
            scale = scale.max(row.threshold / s);
        }
    }
    if scale > 1.0 {
        for v in &mut primal {
            *v *= scale;
        }
    }

    let value: f64 = primal.iter().zip(&lp.costs).map(|(x, c)| x * c).sum();
    let dual_value: f64 = dual
        .iter()
        .zip(&lp.rows)
        .map(|(y, row)| y * row.threshold)
        .sum();
    Ok(LpSolution {
        primal,
        value,
        dual,
        dual_value,
        status,
    })
}

/// Primal simplex on `max <b,y> : A'y <= c, y >= 0` restricted to `kept`
/// rows, all of whose supports have strictly positive costs. Returns the
/// covering primal (simplex multipliers of the slack columns), the packing
/// vector y, and the status.
fn simplex_on_dual(lp: &CoveringLp, kept: &[usize]) -> Result<(Vec<f64>, Vec<f64>, LpStatus)> {
    let k = lp.num_vars();
    let m = kept.len();
    let ncols = m + k; // y variables then slacks
    let cap = 50 * (k + m) * (k + m);

    // tableau[i] = one constraint row (per primal variable j): A'y + s = c.
    let mut tab: Vec<Vec<f64>> = vec![vec![0.0; ncols + 1]; k];
    for (pos, &r) in kept.iter().enumerate() {
        for &j in &lp.rows[r].support {
            tab[j][pos] = 1.0;
        }
    }
    for j in 0..k {
        tab[j][m + j] = 1.0;
        tab[j][ncols] = lp.costs[j];
    }
    // Objective coefficients of the max problem; obj[] holds z_j - d_j.
    let mut obj: Vec<f64> = (0..=ncols)
        .map(|col| {
            if col < m {
                -lp.rows[kept[col]].threshold
            } else {
                0.0
            }
        })
        .collect();
    let mut basis: Vec<usize> = (0..k).map(|j| m + j).collect();

    let mut iterations = 0usize;
    let bland_after = 5 * (k + m);
    let status = loop {
        // Entering column: Dantzig at first, Bland once degeneracy is likely.
        let entering = if iterations < bland_after {
            let mut best = None;
            let mut best_val = -PIVOT_TOL;
            for (col, &o) in obj.iter().enumerate().take(ncols) {
                if o < best_val {
                    best_val = o;
                    best = Some(col);
                }
            }
            best
        } else {
            (0..ncols).find(|&col| obj[col] < -PIVOT_TOL)
        };
        let Some(entering) = entering else {
            break LpStatus::Optimal;
        };
        // Ratio test with Bland's tie-break on the basis index.
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..k {
            let a = tab[i][entering];
            if a > PIVOT_TOL {
                let ratio = tab[i][ncols] / a;
                let better = match leave {
                    None => true,
                    Some(prev) => {
                        ratio < best_ratio - PIVOT_TOL
                            || (ratio < best_ratio + PIVOT_TOL && basis[i] < basis[prev])
                    }
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            // The packing feasible region is bounded whenever supports have
            // positive costs; reaching this means the model was violated.
            return Err(Error::Model("unbounded packing dual".into()));
        };

        let pivot = tab[leave][entering];
        for v in tab[leave].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = tab[leave].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != leave {
                let factor = row[entering];
                if factor != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        let factor = obj[entering];
        for (v, p) in obj.iter_mut().zip(&pivot_row) {
            *v -= factor * p;
        }
        basis[leave] = entering;

        iterations += 1;
        if iterations >= cap {
            break LpStatus::Approximate;
        }
    };

    let mut y = vec![0.0f64; m];
    for (i, &b) in basis.iter().enumerate() {
        if b < m {
            y[b] = tab[i][ncols].max(0.0);
        }
    }
    // Multipliers of the slack columns are the covering primal.
    let x: Vec<f64> = (0..k).map(|j| obj[m + j].max(0.0)).collect();

    Ok((x, y, status))
}

/// Reference optimum by enumerating basic feasible solutions. Exponential;
/// restricted to at most 12 variables and 12 rows.
pub fn brute_force_value(lp: &CoveringLp) -> Result<f64> {
    let k = lp.num_vars();
    let m = lp.rows.len();
    if k > 12 || m > 12 {
        return Err(Error::Precondition(
            "brute force limited to 12 variables and 12 rows".into(),
        ));
    }
    if m == 0 {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    // A vertex of {Ax >= b, x >= 0} activates t rows and k - t sign
    // constraints for some t; enumerate all (rows, vars) index pairs.
    for t in 0..=m.min(k) {
        for rows_subset in subsets(m, t) {
            for vars_subset in subsets(k, t) {
                if let Some(x) = solve_square(lp, &rows_subset, &vars_subset) {
                    if x.iter().all(|v| *v >= -1e-9) {
                        let x: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
                        if verify_feasible(lp, &x, 1e-9)? {
                            let cost: f64 =
                                x.iter().zip(lp.costs()).map(|(a, c)| a * c).sum();
                            best = best.min(cost);
                        }
                    }
                }
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Model("no basic feasible solution found".into()))
    }
}

fn subsets(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(start: usize, n: usize, t: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == t {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, t, current, out);
            current.pop();
        }
    }
    rec(0, n, t, &mut current, &mut out);
    out
}

/// Solves `A[rows, vars] x = b[rows]` with the remaining variables at zero;
/// returns the full-length x, or None when the system is singular.
fn solve_square(lp: &CoveringLp, rows: &[usize], vars: &[usize]) -> Option<Vec<f64>> {
    let t = rows.len();
    let mut x = vec![0.0f64; lp.num_vars()];
    if t == 0 {
        return Some(x);
    }
    let mut a = vec![vec![0.0f64; t + 1]; t];
    for (ri, &r) in rows.iter().enumerate() {
        for (ci, &v) in vars.iter().enumerate() {
            if lp.rows()[r].support.binary_search(&v).is_ok() {
                a[ri][ci] = 1.0;
            }
        }
        a[ri][t] = lp.rows()[r].threshold;
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..t {
        let pivot_row = (col..t).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot_row);
        for row in 0..t {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for c2 in col..=t {
                        a[row][c2] -= f * a[col][c2];
                    }
                }
            }
        }
    }
    for (ci, &v) in vars.iter().enumerate() {
        x[v] = a[ci][t] / a[ci][ci];
    }
    Some(x)
}
