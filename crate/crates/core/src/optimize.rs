//! Optimized sampling distributions.
//!
//! * Max-average with entropy regularization: maximize `S(p) + λ H[p]`. The
//!   maximizer is the Gibbs density `p*(x) ∝ exp(K̄(x) / λ)`.
//! * Max-min: maximize `min_y S(y)`, discretized into an LP on a uniform grid
//!   and solved with the dense simplex in [`crate::lp`].

use std::fmt;
use std::str::FromStr;

use crate::distribution::SamplingDistribution;
use crate::error::{Error, Result};
use crate::kernels::{transfer_potential, KernelSpec};
use crate::lp::{solve_max, LpOptions};
use crate::range::MagRange;
use crate::signal::{total_signal, CellQuadrature};

pub const DEFAULT_GRID: usize = 1000;
pub const DEFAULT_LAMBDA: f64 = 1.0;

/// Tolerance defining the max-min active set (`S(y) − t` below it).
pub const ACTIVE_SET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MaxAvgEntropy,
    MaxMin,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxavg" => Ok(Objective::MaxAvgEntropy),
            "maxmin" => Ok(Objective::MaxMin),
            other => Err(Error::Parameter(format!("unknown objective {other:?}; expected maxavg or maxmin"))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::MaxAvgEntropy => "maxavg",
            Objective::MaxMin => "maxmin",
        })
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationConfig {
    pub objective: Objective,
    /// Entropy weight; only used by the max-average objective.
    pub lambda: f64,
    pub grid_n: usize,
    pub range: MagRange,
    pub kernel: KernelSpec,
}

impl OptimizationConfig {
    pub fn max_avg(kernel: KernelSpec, lambda: f64) -> Self {
        Self {
            objective: Objective::MaxAvgEntropy,
            lambda,
            grid_n: DEFAULT_GRID,
            range: MagRange::default(),
            kernel,
        }
    }

    pub fn max_min(kernel: KernelSpec) -> Self {
        Self {
            objective: Objective::MaxMin,
            lambda: DEFAULT_LAMBDA,
            grid_n: DEFAULT_GRID,
            range: MagRange::default(),
            kernel,
        }
    }

    pub fn with_grid(mut self, grid_n: usize) -> Self {
        self.grid_n = grid_n;
        self
    }

    pub fn with_range(mut self, range: MagRange) -> Self {
        self.range = range;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 10 {
            return Err(Error::Parameter(format!("optimization grid needs at least 10 points, got {}", self.grid_n)));
        }
        if self.objective == Objective::MaxAvgEntropy {
            check_lambda(self.lambda)?;
        }
        self.kernel.check_covers(&self.range)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("lambda must be positive and finite, got {lambda}")))
    }
}

fn expect_objective(cfg: &OptimizationConfig, want: Objective) -> Result<()> {
    if cfg.objective == want {
        Ok(())
    } else {
        Err(Error::Parameter(format!("configuration is for {}, expected {want}", cfg.objective)))
    }
}

/// Gibbs density `exp(K̄(x)/λ)` evaluated at the midpoints of `grid_n` cells
/// and normalized to unit mass.
pub fn optimize_max_avg(cfg: &OptimizationConfig) -> Result<SamplingDistribution> {
    expect_objective(cfg, Objective::MaxAvgEntropy)?;
    cfg.validate()?;
    let mids = cfg.range.cell_midpoints(cfg.grid_n)?;
    let potentials = mids
        .iter()
        .map(|&x| transfer_potential(&cfg.kernel, &cfg.range, x))
        .collect::<Result<Vec<_>>>()?;
    // Shift by the maximum so the exponent never overflows; the constant
    // cancels in the normalization.
    let top = potentials.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = potentials.iter().map(|k| ((k - top) / cfg.lambda).exp()).collect();
    SamplingDistribution::from_density(cfg.range, weights)
}

/// `H[p] = −∫ p log p`, with `0 · log 0 = 0`. Exact for piecewise-constant
/// densities.
pub fn entropy(dist: &SamplingDistribution) -> Result<f64> {
    if !dist.is_density_only() {
        return Err(Error::Domain(
            "differential entropy is undefined for distributions with atoms".into(),
        ));
    }
    let cells = dist.density().expect("density-only");
    let h = dist.cell_width();
    Ok(-cells
        .iter()
        .filter(|p| **p > 0.0)
        .fold(0.0, |acc, p| acc + p * p.ln() * h))
}

/// `S(p) + λ H[p]` with `S(p)` the integrated (not averaged) signal.
pub fn regularized_objective(dist: &SamplingDistribution, cfg: &OptimizationConfig) -> Result<f64> {
    check_lambda(cfg.lambda)?;
    let h = entropy(dist)?;
    Ok(total_signal(dist, &cfg.kernel)? + cfg.lambda * h)
}

#[derive(Debug, Clone)]
pub struct MaxMinSolution {
    /// Density-only distribution on `grid_n` cells.
    pub distribution: SamplingDistribution,
    /// Worst-case signal over the evaluation grid.
    pub achieved_t: f64,
    /// Grid indices `j` with `S(y_j) − t < 1e-6`.
    pub active_set: Vec<usize>,
    /// `S(y_j)` on the evaluation grid `range.grid(grid_n)`.
    pub signal: Vec<f64>,
    pub certificate: LpCertificate,
}

/// Optimality evidence, recomputed from the kernel independently of the
/// simplex tableau.
#[derive(Debug, Clone, Copy)]
pub struct LpCertificate {
    /// `1 / t` from the primal side: `Σ u` with `B u ≥ 1`.
    pub primal_objective: f64,
    /// `Σ w` with `Bᵀ w ≤ 1`, `w ≥ 0`.
    pub dual_objective: f64,
    /// `max(0, 1 − min(B u))`.
    pub primal_infeasibility: f64,
    /// `max(0, max(Bᵀ w) − 1)`.
    pub dual_infeasibility: f64,
    /// Relative gap `|Σu − Σw| / Σw`.
    pub relative_gap: f64,
    pub iterations: usize,
}

impl LpCertificate {
    pub const TOLERANCE: f64 = 1e-6;

    pub fn is_optimal(&self) -> bool {
        self.primal_infeasibility <= Self::TOLERANCE
            && self.dual_infeasibility <= Self::TOLERANCE
            && self.relative_gap <= Self::TOLERANCE
    }
}

/// Signal operator on the uniform grid: `B[j][c]` is the signal at target
/// `y_j` from a unit mass spread uniformly over cell `c`, so that
/// `S(y_j) = Σ_c q_c · B[j][c]` for cell masses `q`, consistent with
/// [`crate::signal::accumulated_signal`].
fn signal_operator(kernel: &KernelSpec, range: &MagRange, grid_n: usize) -> Result<Vec<f64>> {
    let ys = range.grid(grid_n)?;
    let quad = CellQuadrature::new(range, grid_n)?;
    let inv_h = 1.0 / range.cell_width(grid_n);
    let mut b = Vec::with_capacity(grid_n * grid_n);
    let (mut scratch, mut row) = (Vec::new(), Vec::new());
    for &y in &ys {
        quad.kernel_row(kernel, y, &mut scratch, &mut row)?;
        b.extend(row.iter().map(|k| k * inv_h));
    }
    Ok(b)
}

/// Maximizes the worst-case signal on `grid_n` cells / `grid_n` targets.
///
/// With cell masses `q ≥ 0`, `Σ q = 1` the program is `max t s.t. B q ≥ t`.
/// Since `B > 0`, substituting `u = q / t` gives `min Σu s.t. B u ≥ 1`, whose
/// dual `max Σw s.t. Bᵀ w ≤ 1, w ≥ 0` has a feasible origin. The simplex
/// solves the dual; `u` is read from its optimal multipliers.
pub fn optimize_max_min(cfg: &OptimizationConfig) -> Result<MaxMinSolution> {
    optimize_max_min_with(cfg, &LpOptions::default())
}

pub fn optimize_max_min_with(cfg: &OptimizationConfig, opts: &LpOptions) -> Result<MaxMinSolution> {
    expect_objective(cfg, Objective::MaxMin)?;
    cfg.validate()?;
    let n = cfg.grid_n;
    let b = signal_operator(&cfg.kernel, &cfg.range, n)?;
    if let Some(bad) = b.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Validation(format!(
            "max-min requires a strictly positive kernel, found {bad}"
        )));
    }

    // Dual constraint rows are indexed by cell: A = Bᵀ.
    let mut a = vec![0.0; n * n];
    for j in 0..n {
        for c in 0..n {
            a[c * n + j] = b[j * n + c];
        }
    }
    let ones = vec![1.0; n];
    let lp = solve_max(&ones, &a, &ones, opts)?;

    let w = lp.x;
    let mut u = lp.duals;
    let most_negative = u.iter().copied().fold(0.0, f64::min);
    if most_negative < -1e-9 {
        return Err(Error::Solver {
            reason: "negative multiplier in final basis".into(),
            iterations: lp.iterations,
            residual: -most_negative,
        });
    }
    for v in &mut u {
        *v = v.max(0.0);
    }

    let certificate = certify(&b, n, &u, &w, lp.iterations);
    if !certificate.is_optimal() {
        return Err(Error::Solver {
            reason: format!("optimality certificate failed: {certificate:?}"),
            iterations: lp.iterations,
            residual: certificate
                .primal_infeasibility
                .max(certificate.dual_infeasibility)
                .max(certificate.relative_gap),
        });
    }

    let mass: f64 = u.iter().sum();
    let q: Vec<f64> = u.iter().map(|v| v / mass).collect();
    let signal: Vec<f64> = (0..n)
        .map(|j| b[j * n..(j + 1) * n].iter().zip(&q).fold(0.0, |acc, (k, p)| acc + k * p))
        .collect();
    let achieved_t = signal.iter().copied().fold(f64::INFINITY, f64::min);
    let active_set: Vec<usize> = signal
        .iter()
        .enumerate()
        .filter(|(_, s)| **s - achieved_t < ACTIVE_SET_TOL)
        .map(|(j, _)| j)
        .collect();

    let h = cfg.range.cell_width(n);
    let density: Vec<f64> = q.iter().map(|m| m / h).collect();
    let distribution = SamplingDistribution::from_density(cfg.range, density)?;
    Ok(MaxMinSolution {
        distribution,
        achieved_t,
        active_set,
        signal,
        certificate,
    })
}

fn certify(b: &[f64], n: usize, u: &[f64], w: &[f64], iterations: usize) -> LpCertificate {
    let bu_min = (0..n)
        .map(|j| b[j * n..(j + 1) * n].iter().zip(u).fold(0.0, |acc, (k, v)| acc + k * v))
        .fold(f64::INFINITY, f64::min);
    let mut btw = vec![0.0; n];
    for (j, wj) in w.iter().enumerate() {
        if *wj != 0.0 {
            for (acc, k) in btw.iter_mut().zip(&b[j * n..(j + 1) * n]) {
                *acc += wj * k;
            }
        }
    }
    let btw_max = btw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let primal_objective: f64 = u.iter().sum();
    let dual_objective: f64 = w.iter().sum();
    LpCertificate {
        primal_objective,
        dual_objective,
        primal_infeasibility: (1.0 - bu_min).max(0.0),
        dual_infeasibility: (btw_max - 1.0).max(0.0),
        relative_gap: (primal_objective - dual_objective).abs() / dual_objective.abs().max(f64::MIN_POSITIVE),
        iterations,
    }
}
