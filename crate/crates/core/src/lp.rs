//! Dense bounded-variable primal simplex with Bland's rule.
//!
//! Maximizes `c^T x` subject to linear rows and `lo <= x <= hi` (`hi` may be
//! `+inf`). Phase one minimizes the sum of artificial variables; phase two
//! optimizes the real objective from the feasible basis.

use thiserror::Error;

pub const PIVOT_TOL: f64 = 1e-10;
pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
pub const ITERATION_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex iteration cap of {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse row as `(variable, coefficient)` pairs.
    pub coefficients: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn le(coefficients: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self {
            coefficients,
            sense: Sense::Le,
            rhs,
        }
    }

    pub fn ge(coefficients: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self {
            coefficients,
            sense: Sense::Ge,
            rhs,
        }
    }

    pub fn eq(coefficients: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self {
            coefficients,
            sense: Sense::Eq,
            rhs,
        }
    }
}

/// Maximization program. Variables default to `[0, +inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::Malformed(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() || hi.is_nan() || lo > hi {
                return Err(LpError::Malformed(format!(
                    "variable {j} has bounds [{lo}, {hi}]"
                )));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed(
                "non-finite objective coefficient".into(),
            ));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i} has non-finite rhs")));
            }
            for &(j, a) in &row.coefficients {
                if j >= n || !a.is_finite() {
                    return Err(LpError::Malformed(format!(
                        "row {i} has bad entry ({j}, {a})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (&(lo, hi), &v) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - v).max(v - hi);
        }
        for row in &self.constraints {
            let lhs: f64 = row.coefficients.iter().map(|&(j, a)| a * x[j]).sum();
            let gap = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective at `values`; meaningful only when optimal.
    pub objective: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    upper: Vec<f64>,
    reduced: Vec<f64>,
    iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    fn value_of(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => 0.0,
            VarState::AtUpper => self.upper[j],
            VarState::Basic => {
                let r = self
                    .basis
                    .iter()
                    .position(|&b| b == j)
                    .expect("basic variable in basis");
                self.beta[r]
            }
        }
    }

    fn set_costs(&mut self, cost: &[f64]) {
        for j in 0..self.cols {
            let mut d = cost[j];
            for i in 0..self.rows {
                d -= cost[self.basis[i]] * self.at(i, j);
            }
            self.reduced[j] = if self.state[j] == VarState::Basic {
                0.0
            } else {
                d
            };
        }
    }

    fn run(&mut self) -> Result<PhaseEnd, LpError> {
        loop {
            self.iterations += 1;
            if self.iterations > ITERATION_CAP {
                return Err(LpError::IterationLimit(ITERATION_CAP));
            }
            let entering = (0..self.cols).find_map(|j| match self.state[j] {
                VarState::AtLower if self.reduced[j] > OPTIMALITY_TOL && self.upper[j] > 0.0 => {
                    Some((j, 1.0))
                }
                VarState::AtUpper if self.reduced[j] < -OPTIMALITY_TOL => Some((j, -1.0)),
                _ => None,
            });
            let Some((q, dir)) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let mut step = self.upper[q];
            let mut leave: Option<(usize, VarState)> = None;
            for i in 0..self.rows {
                let alpha = dir * self.at(i, q);
                let (limit, to) = if alpha > PIVOT_TOL {
                    (self.beta[i] / alpha, VarState::AtLower)
                } else if alpha < -PIVOT_TOL && self.upper[self.basis[i]].is_finite() {
                    (
                        (self.upper[self.basis[i]] - self.beta[i]) / -alpha,
                        VarState::AtUpper,
                    )
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                // Ties go to the bound flip, then to the lowest basic index.
                let better = limit < step - 1e-12
                    || matches!(leave, Some((r, _)) if limit <= step + 1e-12 && self.basis[i] < self.basis[r]);
                if better {
                    step = limit;
                    leave = Some((i, to));
                }
            }
            if step.is_infinite() {
                return Ok(PhaseEnd::Unbounded);
            }
            for i in 0..self.rows {
                self.beta[i] -= step * dir * self.at(i, q);
            }
            let Some((r, to)) = leave else {
                self.state[q] = if dir > 0.0 {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                };
                continue;
            };
            let entering_value = if dir > 0.0 {
                step
            } else {
                self.upper[q] - step
            };
            let old = self.basis[r];
            self.state[old] = to;
            self.state[q] = VarState::Basic;
            self.basis[r] = q;
            self.beta[r] = entering_value;
            self.pivot(r, q);
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.at(r, q);
        for j in 0..cols {
            self.a[r * cols + j] /= p;
        }
        let pivot_row: Vec<f64> = self.a[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, q);
            if f != 0.0 {
                let row = &mut self.a[i * cols..(i + 1) * cols];
                for (x, &pr) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
            }
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (d, &pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= f * pr;
            }
        }
        self.reduced[q] = 0.0;
    }
}

/// Solves `lp` to optimality or reports infeasibility/unboundedness.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    let m = lp.constraints.len();
    let lo: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();

    // Column layout: structural | one slack per inequality | artificials.
    let slack_rows: Vec<usize> = (0..m)
        .filter(|&i| lp.constraints[i].sense != Sense::Eq)
        .collect();
    let n_slack = slack_rows.len();
    let mut dense = vec![vec![0.0; n + n_slack]; m];
    let mut rhs = vec![0.0; m];
    for (i, row) in lp.constraints.iter().enumerate() {
        let mut b = row.rhs;
        for &(j, a) in &row.coefficients {
            dense[i][j] += a;
            b -= a * lo[j];
        }
        rhs[i] = b;
    }
    for (k, &i) in slack_rows.iter().enumerate() {
        dense[i][n + k] = if lp.constraints[i].sense == Sense::Le {
            1.0
        } else {
            -1.0
        };
    }
    let mut basis = vec![usize::MAX; m];
    for i in 0..m {
        if rhs[i] < 0.0 {
            rhs[i] = -rhs[i];
            for x in dense[i].iter_mut() {
                *x = -*x;
            }
        }
        if let Some(k) = slack_rows.iter().position(|&s| s == i) {
            if dense[i][n + k] == 1.0 {
                basis[i] = n + k;
            }
        }
    }
    let art_rows: Vec<usize> = (0..m).filter(|&i| basis[i] == usize::MAX).collect();
    let cols = n + n_slack + art_rows.len();
    let mut a = vec![0.0; m * cols];
    for i in 0..m {
        a[i * cols..i * cols + n + n_slack].copy_from_slice(&dense[i]);
    }
    for (k, &i) in art_rows.iter().enumerate() {
        a[i * cols + n + n_slack + k] = 1.0;
        basis[i] = n + n_slack + k;
    }
    let mut upper = vec![f64::INFINITY; cols];
    for j in 0..n {
        upper[j] = lp.bounds[j].1 - lo[j];
    }
    let mut state = vec![VarState::AtLower; cols];
    for &b in &basis {
        state[b] = VarState::Basic;
    }
    let mut t = Tableau {
        rows: m,
        cols,
        a,
        beta: rhs.clone(),
        basis,
        state,
        upper,
        reduced: vec![0.0; cols],
        iterations: 0,
    };

    let first_art = n + n_slack;
    if !art_rows.is_empty() {
        let mut cost = vec![0.0; cols];
        for c in cost.iter_mut().skip(first_art) {
            *c = -1.0;
        }
        t.set_costs(&cost);
        t.run()?;
        let infeasibility: f64 = (first_art..cols).map(|j| t.value_of(j)).sum();
        let scale = rhs.iter().fold(1.0f64, |acc, &b| acc.max(b.abs()));
        if infeasibility > FEASIBILITY_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: f64::NAN,
                values: extract(&t, &lo, n),
                iterations: t.iterations,
            });
        }
        for j in first_art..cols {
            t.upper[j] = 0.0;
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.objective);
    t.set_costs(&cost);
    let end = t.run()?;
    let values = extract(&t, &lo, n);
    let objective = lp.objective.iter().zip(&values).map(|(c, x)| c * x).sum();
    Ok(LpSolution {
        status: match end {
            PhaseEnd::Optimal => LpStatus::Optimal,
            PhaseEnd::Unbounded => LpStatus::Unbounded,
        },
        objective,
        values,
        iterations: t.iterations,
    })
}

fn extract(t: &Tableau, lo: &[f64], n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n)
        .map(|j| {
            lo[j]
                + if t.state[j] == VarState::AtUpper {
                    t.upper[j]
                } else {
                    0.0
                }
        })
        .collect();
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = lo[b] + t.beta[i];
        }
    }
    x
}
