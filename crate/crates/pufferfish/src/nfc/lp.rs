// SPDX-License-Identifier: Apache-2.0

//! Dense two-phase simplex with Bland's rule. Meant for programs with a few
//! hundred variables at most.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;
const MAX_VARS: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Optimise c·x subject to A_ub x ≤ b_ub, A_eq x = b_eq, x ≥ 0 except for
/// the variables listed in `free`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub sense: Sense,
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub free: Vec<usize>,
}

impl LinearProgram {
    pub fn new(sense: Sense, c: Vec<f64>) -> Self {
        LinearProgram { sense, c, a_ub: vec![], b_ub: vec![], a_eq: vec![], b_eq: vec![], free: vec![] }
    }

    pub fn le(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
        self
    }

    pub fn eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn free_var(mut self, j: usize) -> Self {
        self.free.push(j);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; ±∞ when unbounded, NaN when infeasible.
    pub value: f64,
    pub x: Vec<f64>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    z: Vec<f64>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.z.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|x| *x /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                row.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
            }
        }
        let f = self.z[c];
        if f != 0.0 {
            self.z.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
        }
        self.basis[r] = c;
    }

    /// Reduced costs for maximising `cost` at the current basis.
    fn price(&mut self, cost: &[f64]) {
        let w = self.width();
        let mut z: Vec<f64> = cost.iter().copied().chain(std::iter::once(0.0)).collect();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for j in 0..=w {
                    z[j] -= cb * self.rows[i][j];
                }
            }
        }
        self.z = z;
    }

    /// Runs Bland pivots; Ok(false) means unbounded.
    fn optimise(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<bool> {
        let w = self.width();
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..w).find(|&j| allowed(j) && self.z[j] > TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > TOL {
                    let ratio = row[w] / row[c];
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - TOL || (ratio <= best + TOL && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return Ok(false),
            }
        }
        Err(Error::numeric("simplex pivot limit reached"))
    }
}

/// Solves `lp`; infeasible and unbounded programs are reported as statuses.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.c.len();
    if n == 0 || n > MAX_VARS {
        return Err(Error::validation(format!("LP must have 1..={MAX_VARS} variables, got {n}")));
    }
    if lp.a_ub.len() != lp.b_ub.len() || lp.a_eq.len() != lp.b_eq.len() {
        return Err(Error::validation("constraint rows and right-hand sides differ in count"));
    }
    if lp.a_ub.iter().chain(&lp.a_eq).any(|r| r.len() != n) || lp.free.iter().any(|&j| j >= n) {
        return Err(Error::validation("constraint width does not match the objective"));
    }
    // Column layout: original vars, negative parts of free vars, slacks, artificials.
    let nf = lp.free.len();
    let m_ub = lp.a_ub.len();
    let m = m_ub + lp.a_eq.len();
    let base = n + nf;
    let n_slack = m_ub;
    let art0 = base + n_slack;
    let sign = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut n_art = 0;
    for i in 0..m {
        let (src, rhs, slack) = if i < m_ub { (&lp.a_ub[i], lp.b_ub[i], Some(i)) } else { (&lp.a_eq[i - m_ub], lp.b_eq[i - m_ub], None) };
        let mut row = vec![0.0; art0 + m + 1];
        row[..n].copy_from_slice(src);
        for (k, &j) in lp.free.iter().enumerate() {
            row[n + k] = -src[j];
        }
        if let Some(s) = slack {
            row[base + s] = 1.0;
        }
        row[art0 + m] = rhs;
        if rhs < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        if slack.is_some() && rhs >= 0.0 {
            basis.push(base + i);
        } else {
            row[art0 + n_art] = 1.0;
            basis.push(art0 + n_art);
            n_art += 1;
        }
        rows.push(row);
    }
    // Trim unused artificial columns.
    let width = art0 + n_art;
    for row in rows.iter_mut() {
        let rhs = row[art0 + m];
        row.truncate(width);
        row.push(rhs);
    }
    let mut tab = Tableau { rows, basis, z: vec![0.0; width + 1] };

    if n_art > 0 {
        let cost: Vec<f64> = (0..width).map(|j| if j >= art0 { -1.0 } else { 0.0 }).collect();
        tab.price(&cost);
        tab.optimise(&|_| true)?;
        let infeas: f64 = tab.basis.iter().enumerate().filter(|(_, &b)| b >= art0).map(|(i, _)| tab.rows[i][width]).sum();
        if infeas > TOL * (1.0 + lp.b_ub.iter().chain(&lp.b_eq).map(|x| x.abs()).sum::<f64>()) {
            return Ok(LpSolution { status: LpStatus::Infeasible, value: f64::NAN, x: vec![] });
        }
        // Drive artificials out of the basis; drop rows that are redundant.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art0 {
                if let Some(j) = (0..art0).find(|&j| tab.rows[i][j].abs() > TOL) {
                    tab.pivot(i, j);
                } else {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }
    let mut cost = vec![0.0; width];
    for j in 0..n {
        cost[j] = sign * lp.c[j];
    }
    for (k, &j) in lp.free.iter().enumerate() {
        cost[n + k] = -sign * lp.c[j];
    }
    tab.price(&cost);
    if !tab.optimise(&|j| j < art0)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, value: sign * f64::INFINITY, x: vec![] });
    }
    let mut full = vec![0.0; width];
    for (i, &b) in tab.basis.iter().enumerate() {
        full[b] = tab.rows[i][width];
    }
    let mut x = full[..n].to_vec();
    for (k, &j) in lp.free.iter().enumerate() {
        x[j] -= full[n + k];
    }
    let value = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { status: LpStatus::Optimal, value, x })
}
