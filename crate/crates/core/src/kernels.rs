//! Magnification-similarity kernels and their transfer potentials.
//!
//! A kernel `K(x, y)` models how much training at magnification `x` helps the
//! representation at magnification `y`. Integrating it over all targets in the
//! range gives the transfer potential `K̄(x) = ∫ K(x, y) dy`, the total value
//! of one sample drawn at `x`.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::range::{trapezoid, MagRange};

/// Default number of quadrature intervals for kernels without a closed form.
pub const DEFAULT_QUADRATURE_INTERVALS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `1 / (1 + |x - y|)`
    AbsDistance,
    /// `(min(x, y) / max(x, y))^2`, the field-of-view overlap fraction.
    InfoOverlap,
    /// Samples on a rectangular grid, bilinearly interpolated.
    CustomTabulated(TabulatedKernel),
}

impl KernelSpec {
    /// Parses a kernel selector: `abs`, `info` or `custom:<path>`. Custom
    /// kernels are loaded from disk immediately.
    pub fn from_selector(selector: &str) -> Result<Self> {
        match selector {
            "abs" => Ok(KernelSpec::AbsDistance),
            "info" => Ok(KernelSpec::InfoOverlap),
            other => match other.strip_prefix("custom:") {
                Some(path) if !path.is_empty() => {
                    Ok(KernelSpec::CustomTabulated(TabulatedKernel::from_csv_path(path)?))
                }
                _ => Err(Error::Parameter(format!(
                    "unknown kernel {other:?}; expected abs, info or custom:<path>"
                ))),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::AbsDistance => "abs",
            KernelSpec::InfoOverlap => "info",
            KernelSpec::CustomTabulated(_) => "custom",
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        eval_kernel(self, x, y)
    }

    /// Kernel evaluation without argument checks, for inner loops over
    /// already-validated grids. Custom kernels still report range errors.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64, y: f64) -> Result<f64> {
        Ok(match self {
            KernelSpec::AbsDistance => 1.0 / (1.0 + (x - y).abs()),
            KernelSpec::InfoOverlap => {
                let r = x.min(y) / x.max(y);
                r * r
            }
            KernelSpec::CustomTabulated(t) => t.interpolate(x, y)?,
        })
    }

    /// Fails if the kernel is not defined on all of `range × range`.
    pub fn check_covers(&self, range: &MagRange) -> Result<()> {
        match self {
            KernelSpec::CustomTabulated(t) => t.check_covers(range),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::CustomTabulated(t) => match &t.origin {
                Some(p) => write!(f, "custom:{}", p.display()),
                None => write!(f, "custom:<memory>"),
            },
            k => f.write_str(k.name()),
        }
    }
}

/// Evaluates `K(x, y)`. Both magnifications must be positive and finite.
pub fn eval_kernel(spec: &KernelSpec, x: f64, y: f64) -> Result<f64> {
    for v in [x, y] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("magnification must be positive and finite, got {v}")));
        }
    }
    spec.eval_unchecked(x, y)
}

/// Kernel values on a rectangular `(x, y)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major: `values[i * ys.len() + j] = K(xs[i], ys[j])`.
    values: Vec<f64>,
    origin: Option<PathBuf>,
}

impl TabulatedKernel {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        for (axis, v) in [("x", &xs), ("y", &ys)] {
            if v.len() < 2 {
                return Err(Error::Validation(format!("tabulated kernel needs at least 2 {axis} nodes")));
            }
            if v.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                return Err(Error::Validation(format!("tabulated {axis} nodes must be positive and finite")));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!("tabulated {axis} nodes must be strictly increasing")));
            }
        }
        if values.len() != xs.len() * ys.len() {
            return Err(Error::Shape(format!(
                "expected {}x{} = {} kernel values, got {}",
                xs.len(),
                ys.len(),
                xs.len() * ys.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("tabulated kernel values must be finite".into()));
        }
        Ok(Self {
            xs,
            ys,
            values,
            origin: None,
        })
    }

    /// Tabulates `f` on the product grid `xs × ys`.
    pub fn from_fn(xs: Vec<f64>, ys: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(xs, ys, values)
    }

    /// Reads a CSV with header `x,y,value`. Every `(x, y)` pair of the product
    /// grid must appear exactly once; row order is free.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut t = Self::from_csv_reader(file, &path.display().to_string())?;
        t.origin = Some(path.to_path_buf());
        Ok(t)
    }

    pub fn from_csv_reader(reader: impl std::io::Read, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::parse(source_name, 1, e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "y", "value"] {
            return Err(Error::parse(source_name, 1, "expected header x,y,value"));
        }
        let mut triples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::parse(source_name, line, e.to_string()))?;
            if rec.len() != 3 {
                return Err(Error::parse(source_name, line, "expected 3 fields"));
            }
            let mut v = [0.0; 3];
            for (k, field) in rec.iter().enumerate() {
                v[k] = field
                    .parse()
                    .map_err(|_| Error::parse(source_name, line, format!("not a number: {field:?}")))?;
            }
            triples.push((line, v));
        }
        if triples.is_empty() {
            return Err(Error::parse(source_name, 1, "no kernel samples"));
        }

        let axis = |k: usize| {
            let mut a: Vec<f64> = triples.iter().map(|(_, v)| v[k]).collect();
            a.sort_by(f64::total_cmp);
            a.dedup();
            a
        };
        let xs = axis(0);
        let ys = axis(1);
        let mut values = vec![f64::NAN; xs.len() * ys.len()];
        for (line, [x, y, value]) in &triples {
            // Exact lookups: nodes come from the same parsed values.
            let i = xs.partition_point(|v| v < x);
            let j = ys.partition_point(|v| v < y);
            let slot = &mut values[i * ys.len() + j];
            if !slot.is_nan() {
                return Err(Error::parse(source_name, *line, format!("duplicate sample at ({x}, {y})")));
            }
            *slot = *value;
        }
        if let Some(missing) = values.iter().position(|v| v.is_nan()) {
            let (i, j) = (missing / ys.len(), missing % ys.len());
            return Err(Error::parse(
                source_name,
                1,
                format!("grid is not rectangular: no sample at ({}, {})", xs[i], ys[j]),
            ));
        }
        Self::new(xs, ys, values)
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn y_nodes(&self) -> &[f64] {
        &self.ys
    }

    /// Writes the table as `x,y,value` CSV.
    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "x,y,value")?;
        for (i, x) in self.xs.iter().enumerate() {
            for (j, y) in self.ys.iter().enumerate() {
                writeln!(w, "{x},{y},{}", self.values[i * self.ys.len() + j])?;
            }
        }
        Ok(())
    }

    fn check_covers(&self, range: &MagRange) -> Result<()> {
        let covers = |nodes: &[f64]| nodes[0] <= range.lower() && nodes[nodes.len() - 1] >= range.upper();
        if covers(&self.xs) && covers(&self.ys) {
            Ok(())
        } else {
            Err(Error::Range(format!(
                "tabulated kernel spans x [{}, {}], y [{}, {}] which does not cover [{}, {}]",
                self.xs[0],
                self.xs[self.xs.len() - 1],
                self.ys[0],
                self.ys[self.ys.len() - 1],
                range.lower(),
                range.upper()
            )))
        }
    }

    fn interpolate(&self, x: f64, y: f64) -> Result<f64> {
        let (i, tx) = locate(&self.xs, x).ok_or_else(|| {
            Error::Range(format!("x = {x} outside tabulated [{}, {}]", self.xs[0], self.xs[self.xs.len() - 1]))
        })?;
        let (j, ty) = locate(&self.ys, y).ok_or_else(|| {
            Error::Range(format!("y = {y} outside tabulated [{}, {}]", self.ys[0], self.ys[self.ys.len() - 1]))
        })?;
        let ny = self.ys.len();
        let v = |ii: usize, jj: usize| self.values[ii * ny + jj];
        let top = v(i, j) + ty * (v(i, j + 1) - v(i, j));
        let bottom = v(i + 1, j) + ty * (v(i + 1, j + 1) - v(i + 1, j));
        Ok(top + tx * (bottom - top))
    }
}

/// Index of the cell `[nodes[i], nodes[i+1]]` containing `q` and the local
/// coordinate in `[0, 1]`.
fn locate(nodes: &[f64], q: f64) -> Option<(usize, f64)> {
    let n = nodes.len();
    if !(q >= nodes[0] && q <= nodes[n - 1]) {
        return None;
    }
    let i = nodes.partition_point(|v| *v <= q).saturating_sub(1).min(n - 2);
    let t = (q - nodes[i]) / (nodes[i + 1] - nodes[i]);
    Some((i, t))
}

/// `K̄(x) = ∫_a^b K(x, y) dy`.
///
/// Built-in kernels use their closed forms; tabulated kernels use the
/// composite trapezoid rule over the table's `y` nodes inside the range,
/// which is exact for the bilinear interpolant.
pub fn transfer_potential(spec: &KernelSpec, range: &MagRange, x: f64) -> Result<f64> {
    range.check_contains(x)?;
    let (a, b) = (range.lower(), range.upper());
    match spec {
        KernelSpec::AbsDistance => Ok((1.0 + x - a).ln() + (1.0 + b - x).ln()),
        KernelSpec::InfoOverlap => Ok((x * x * x - a * a * a) / (3.0 * x * x) + x - x * x / b),
        KernelSpec::CustomTabulated(t) => {
            t.check_covers(range)?;
            let mut nodes = Vec::with_capacity(t.ys.len() + 2);
            nodes.push(a);
            nodes.extend(t.ys.iter().copied().filter(|&y| y > a && y < b));
            nodes.push(b);
            let values = nodes
                .iter()
                .map(|&y| t.interpolate(x, y))
                .collect::<Result<Vec<_>>>()?;
            Ok(trapezoid(&nodes, &values))
        }
    }
}

/// Transfer potential by composite trapezoid quadrature with `intervals`
/// uniform intervals, for any kernel.
pub fn transfer_potential_quadrature(spec: &KernelSpec, range: &MagRange, x: f64, intervals: usize) -> Result<f64> {
    range.check_contains(x)?;
    let ys = range.grid(intervals + 1)?;
    let values = ys
        .iter()
        .map(|&y| spec.eval_unchecked(x, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&ys, &values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferPotentialCurve {
    pub range: MagRange,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub argmax_x: f64,
    pub max_value: f64,
}

impl TransferPotentialCurve {
    /// Index of the smallest value; ties go to the smaller `x`.
    pub fn argmin_index(&self) -> usize {
        argmin(&self.values)
    }

    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "x_mpp,transfer_potential")?;
        for (x, v) in self.xs.iter().zip(&self.values) {
            writeln!(w, "{x},{v}")?;
        }
        Ok(())
    }
}

pub fn transfer_potential_curve(spec: &KernelSpec, range: &MagRange, grid_n: usize) -> Result<TransferPotentialCurve> {
    let xs = range.grid(grid_n)?;
    let values = xs
        .iter()
        .map(|&x| transfer_potential(spec, range, x))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Validation(format!("transfer potential must be positive, got {bad}")));
    }
    let i = argmax(&values);
    Ok(TransferPotentialCurve {
        range: *range,
        argmax_x: xs[i],
        max_value: values[i],
        xs,
        values,
    })
}

/// First index of the maximum (smallest `x` wins ties on an ascending grid).
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}
