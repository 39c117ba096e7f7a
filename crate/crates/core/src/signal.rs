//! Accumulated training signal `S(y) = ∫ p(x) K(x, y) dx` and its summaries.
//!
//! Atoms contribute `w · K(x, y)` exactly. The density part is integrated cell
//! by cell with the trapezoid rule on the cell edges, so evaluation is linear
//! in the cell values and shares edge kernel values between neighbours.

use crate::distribution::SamplingDistribution;
use crate::error::{Error, Result};
use crate::kernels::{argmin, transfer_potential, KernelSpec};
use crate::range::{trapezoid, MagRange};

#[derive(Debug, Clone, PartialEq)]
pub struct SignalProfile {
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
    pub min_value: f64,
    pub argmin_y: f64,
    /// `∫ S(y) dy` over the range (trapezoid over `ys`).
    pub total: f64,
    /// `total / (b - a)`.
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSummary {
    pub min_value: f64,
    pub argmin_y: f64,
    pub total: f64,
    pub mean: f64,
}

impl SignalProfile {
    pub fn summary(&self) -> SignalSummary {
        SignalSummary {
            min_value: self.min_value,
            argmin_y: self.argmin_y,
            total: self.total,
            mean: self.mean,
        }
    }

    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "y_mpp,signal")?;
        for (y, s) in self.ys.iter().zip(&self.values) {
            writeln!(w, "{y},{s}")?;
        }
        Ok(())
    }
}

pub const SUMMARY_CSV_HEADER: &str = "strategy,min,argmin,total,mean";

impl SignalSummary {
    pub fn csv_row(&self, strategy: &str) -> String {
        format!(
            "{strategy},{},{},{},{}",
            self.min_value, self.argmin_y, self.total, self.mean
        )
    }
}

fn check_kernel(dist: &SamplingDistribution, kernel: &KernelSpec) -> Result<()> {
    kernel.check_covers(dist.range())
}

/// Density cells are integrated with the composite trapezoid rule on at least
/// this many sub-intervals over the whole range; coarse cells are subdivided.
pub const MIN_DENSITY_INTERVALS: usize = 1000;

/// Quadrature nodes for a density on `cells` equal cells: cell `c` spans
/// nodes `c·sub ..= (c+1)·sub`.
#[derive(Debug, Clone)]
pub(crate) struct CellQuadrature {
    nodes: Vec<f64>,
    sub: usize,
    step: f64,
}

impl CellQuadrature {
    pub(crate) fn new(range: &MagRange, cells: usize) -> Result<Self> {
        let sub = MIN_DENSITY_INTERVALS.div_ceil(cells.max(1)).max(1);
        let nodes = range.cell_edges(cells * sub)?;
        Ok(Self {
            step: range.cell_width(cells * sub),
            nodes,
            sub,
        })
    }

    /// `∫_cell f(x) dx` for every cell, given `f` at the nodes.
    pub(crate) fn integrate_cells(&self, at_nodes: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(at_nodes.windows(self.sub + 1).step_by(self.sub).map(|w| {
            let inner: f64 = w[1..self.sub].iter().sum();
            self.step * (0.5 * (w[0] + w[self.sub]) + inner)
        }));
    }

    /// Kernel integrated against each unit-density cell at target `y`.
    pub(crate) fn kernel_row(&self, kernel: &KernelSpec, y: f64, scratch: &mut Vec<f64>, out: &mut Vec<f64>) -> Result<()> {
        scratch.clear();
        for &x in &self.nodes {
            scratch.push(kernel.eval_unchecked(x, y)?);
        }
        self.integrate_cells(scratch, out);
        Ok(())
    }

    pub(crate) fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// `S(y)` at a single target magnification.
pub fn signal_at(dist: &SamplingDistribution, kernel: &KernelSpec, y: f64) -> Result<f64> {
    check_kernel(dist, kernel)?;
    dist.range().check_contains(y)?;
    let quad = density_quadrature(dist)?;
    signal_at_unchecked(dist, kernel, y, quad.as_ref(), &mut Scratch::default())
}

fn density_quadrature(dist: &SamplingDistribution) -> Result<Option<CellQuadrature>> {
    dist.density()
        .map(|cells| CellQuadrature::new(dist.range(), cells.len()))
        .transpose()
}

#[derive(Default)]
struct Scratch {
    nodes: Vec<f64>,
    row: Vec<f64>,
}

fn signal_at_unchecked(
    dist: &SamplingDistribution,
    kernel: &KernelSpec,
    y: f64,
    quad: Option<&CellQuadrature>,
    scratch: &mut Scratch,
) -> Result<f64> {
    let mut s = 0.0;
    for atom in dist.atoms() {
        s += atom.weight * kernel.eval_unchecked(atom.location, y)?;
    }
    if let (Some(cells), Some(quad)) = (dist.density(), quad) {
        quad.kernel_row(kernel, y, &mut scratch.nodes, &mut scratch.row)?;
        s += cells.iter().zip(&scratch.row).fold(0.0, |acc, (d, k)| acc + d * k);
    }
    Ok(s)
}

/// Tabulates `S(y)` on a uniform `grid_n`-point grid over the distribution's
/// range and fills in the summaries.
pub fn accumulated_signal(dist: &SamplingDistribution, kernel: &KernelSpec, grid_n: usize) -> Result<SignalProfile> {
    check_kernel(dist, kernel)?;
    let range = dist.range();
    let ys = range.grid(grid_n)?;
    let quad = density_quadrature(dist)?;
    let mut scratch = Scratch::default();
    let values = ys
        .iter()
        .map(|&y| signal_at_unchecked(dist, kernel, y, quad.as_ref(), &mut scratch))
        .collect::<Result<Vec<_>>>()?;
    Ok(profile_from_values(range, ys, values))
}

pub(crate) fn profile_from_values(range: &MagRange, ys: Vec<f64>, values: Vec<f64>) -> SignalProfile {
    let i = argmin(&values);
    let total = trapezoid(&ys, &values);
    SignalProfile {
        min_value: values[i],
        argmin_y: ys[i],
        total,
        mean: total / range.width(),
        ys,
        values,
    }
}

pub fn signal_summary(dist: &SamplingDistribution, kernel: &KernelSpec, grid_n: usize) -> Result<SignalSummary> {
    Ok(accumulated_signal(dist, kernel, grid_n)?.summary())
}

/// `S(p) = ∫ p(x) K̄(x) dx`, computed through transfer potentials rather than
/// by integrating the profile.
pub fn total_signal(dist: &SamplingDistribution, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(dist, kernel)?;
    let range = dist.range();
    let mut s = 0.0;
    for atom in dist.atoms() {
        if atom.weight > 0.0 {
            s += atom.weight * transfer_potential(kernel, range, atom.location)?;
        }
    }
    if let Some(cells) = dist.density() {
        let quad = CellQuadrature::new(range, cells.len())?;
        let potentials = quad
            .nodes()
            .iter()
            .map(|&x| transfer_potential(kernel, range, x))
            .collect::<Result<Vec<_>>>()?;
        let mut per_cell = Vec::with_capacity(cells.len());
        quad.integrate_cells(&potentials, &mut per_cell);
        s += cells.iter().zip(&per_cell).fold(0.0, |acc, (d, k)| acc + d * k);
    }
    Ok(s)
}

/// Checks that a distribution and a range agree, for callers combining the two.
pub fn check_same_range(dist: &SamplingDistribution, range: &MagRange) -> Result<()> {
    if dist.range() == range {
        Ok(())
    } else {
        Err(Error::Range(format!(
            "distribution is defined on {} but {} was requested",
            dist.range(),
            range
        )))
    }
}
