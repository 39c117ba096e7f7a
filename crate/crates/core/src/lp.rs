//! Dense primal simplex for `max cᵀx  s.t.  A x ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The origin is feasible, so no phase one is needed. The tableau is kept in
//! condensed form: one row per basic variable and one column per nonbasic
//! variable, every pivot exchanging a row label with a column label. Slack
//! columns are never stored, which halves the work per pivot compared with
//! the full tableau.
//!
//! Entering columns are priced with Dantzig's rule. After a run of degenerate
//! pivots the solver switches to Bland's rule (lowest label enters, lowest
//! label leaves on ratio ties) until the objective moves again; Bland's rule
//! cannot cycle, so every degenerate run terminates.

use log::debug;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LpOptions {
    /// Reduced costs at or below this count as non-improving.
    pub optimality_tol: f64,
    /// Smallest admissible pivot element.
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_run: usize,
    /// Pivot budget; `None` means `50 · (m + n)`.
    pub max_iterations: Option<usize>,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            optimality_tol: 1e-12,
            pivot_tol: 1e-11,
            degenerate_run: 50,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Optimal multipliers of the `A x ≤ b` rows (nonnegative).
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Solves `max cᵀx s.t. A x ≤ b, x ≥ 0`. `a` is row-major `m × n`.
pub fn solve_max(c: &[f64], a: &[f64], b: &[f64], opts: &LpOptions) -> Result<LpSolution> {
    let n = c.len();
    let m = b.len();
    if a.len() != m * n {
        return Err(Error::Shape(format!("constraint matrix has {} entries, expected {m}x{n}", a.len())));
    }
    if let Some(bad) = b.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Parameter(format!("right-hand side must be finite and >= 0, got {bad}")));
    }
    if a.iter().chain(c).any(|v| !v.is_finite()) {
        return Err(Error::Parameter("LP data must be finite".into()));
    }

    let mut t = Tableau::new(c, a, b);
    let budget = opts.max_iterations.unwrap_or(50 * (m + n).max(1));
    let mut degenerate = 0usize;
    let mut iterations = 0usize;

    loop {
        let bland = degenerate >= opts.degenerate_run;
        let Some(s) = t.entering(bland, opts.optimality_tol) else {
            break;
        };
        if iterations >= budget {
            return Err(Error::Solver {
                reason: "simplex iteration budget exhausted".into(),
                iterations,
                residual: t.max_reduced_cost(),
            });
        }
        let Some(r) = t.leaving(s, bland, opts.pivot_tol) else {
            return Err(Error::Solver {
                reason: format!("objective unbounded along column {}", t.col_label[s]),
                iterations,
                residual: f64::INFINITY,
            });
        };
        if t.rhs(r) <= 0.0 {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        t.pivot(r, s);
        iterations += 1;
    }
    debug!("simplex finished after {iterations} pivots ({m}x{n})");

    let mut x = vec![0.0; n];
    let mut duals = vec![0.0; m];
    for (i, &label) in t.row_label.iter().enumerate() {
        if label < n {
            x[label] = t.rhs(i);
        }
    }
    for (j, &label) in t.col_label.iter().enumerate() {
        if label >= n {
            duals[label - n] = t.objective_coeff(j);
        }
    }
    Ok(LpSolution {
        x,
        duals,
        objective: t.rhs(m),
        iterations,
    })
}

/// Condensed tableau. Row `i < m` reads `basic_i = rhs_i − Σ_j T[i][j]·nonbasic_j`;
/// row `m` stores the negated reduced costs and the objective value.
struct Tableau {
    m: usize,
    n: usize,
    data: Vec<f64>,
    /// Variable index of each row; `0..n` are structural, `n..n+m` slacks.
    row_label: Vec<usize>,
    col_label: Vec<usize>,
    pivot_row: Vec<f64>,
}

impl Tableau {
    fn new(c: &[f64], a: &[f64], b: &[f64]) -> Self {
        let (m, n) = (b.len(), c.len());
        let w = n + 1;
        let mut data = vec![0.0; (m + 1) * w];
        for i in 0..m {
            data[i * w..i * w + n].copy_from_slice(&a[i * n..(i + 1) * n]);
            data[i * w + n] = b[i];
        }
        for j in 0..n {
            data[m * w + j] = -c[j];
        }
        Self {
            m,
            n,
            data,
            row_label: (n..n + m).collect(),
            col_label: (0..n).collect(),
            pivot_row: vec![0.0; w],
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.n + 1
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width() + self.n]
    }

    #[inline]
    fn objective_coeff(&self, j: usize) -> f64 {
        self.data[self.m * self.width() + j]
    }

    fn max_reduced_cost(&self) -> f64 {
        (0..self.n).map(|j| -self.objective_coeff(j)).fold(0.0, f64::max)
    }

    fn entering(&self, bland: bool, tol: f64) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.n {
            let d = -self.objective_coeff(j);
            if d <= tol {
                continue;
            }
            best = match best {
                None => Some(j),
                Some(k) if bland && self.col_label[j] < self.col_label[k] => Some(j),
                Some(k) if !bland && d > -self.objective_coeff(k) => Some(j),
                keep => keep,
            };
        }
        best
    }

    fn leaving(&self, s: usize, bland: bool, pivot_tol: f64) -> Option<usize> {
        let w = self.width();
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let p = self.data[i * w + s];
            if p <= pivot_tol {
                continue;
            }
            let ratio = self.rhs(i).max(0.0) / p;
            best = match best {
                None => Some((i, ratio)),
                Some((k, r)) => {
                    let tie = (ratio - r).abs() <= 1e-12 * r.abs().max(1e-300);
                    let better = if tie {
                        if bland {
                            self.row_label[i] < self.row_label[k]
                        } else {
                            p > self.data[k * w + s]
                        }
                    } else {
                        ratio < r
                    };
                    if better {
                        Some((i, ratio))
                    } else {
                        Some((k, r))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.width();
        let p = self.data[r * w + s];
        let inv = 1.0 / p;
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[s] = inv;
            self.pivot_row.copy_from_slice(row);
        }
        let pr = &self.pivot_row;
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            let f = row[s];
            if f == 0.0 {
                continue;
            }
            for (v, q) in row.iter_mut().zip(pr.iter()) {
                *v -= f * q;
            }
            row[s] = -f * inv;
        }
        std::mem::swap(&mut self.row_label[r], &mut self.col_label[s]);
    }
}
