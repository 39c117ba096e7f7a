//! Sampling distributions over magnifications: weighted atoms plus an optional
//! piecewise-constant density on equal cells.
//!
//! The text format is
//!
//! ```text
//! #msdist v1
//! range <a> <b>
//! atom <x> <w>            (zero or more)
//! density <n>             (optional)
//! <v_1> <v_2> ... <v_n>   (whitespace separated, may span lines)
//! ```
//!
//! Other lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::range::MagRange;

pub const FORMAT_MAGIC: &str = "#msdist v1";

const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    range: MagRange,
    atoms: Vec<Atom>,
    density: Option<Vec<f64>>,
}

impl SamplingDistribution {
    /// Builds a distribution and normalizes its total mass to one. Inputs whose
    /// mass is already within `1e-12` of one are kept bit-for-bit, so written
    /// files read back unchanged.
    pub fn new(range: MagRange, atoms: Vec<Atom>, density: Option<Vec<f64>>) -> Result<Self> {
        for atom in &atoms {
            if !(atom.weight.is_finite() && atom.weight >= 0.0) {
                return Err(Error::Validation(format!("atom weight must be finite and >= 0, got {}", atom.weight)));
            }
            if !atom.location.is_finite() {
                return Err(Error::Validation(format!("atom location must be finite, got {}", atom.location)));
            }
            range.check_contains(atom.location)?;
        }
        if let Some(cells) = &density {
            if cells.is_empty() {
                return Err(Error::Validation("density needs at least one cell".into()));
            }
            if let Some(bad) = cells.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::Validation(format!("density values must be finite and >= 0, got {bad}")));
            }
        }

        let mut dist = Self { range, atoms, density };
        let mass = dist.raw_mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Degenerate(format!("distribution has total mass {mass}")));
        }
        if (mass - 1.0).abs() <= 1e-12 {
            return Ok(dist);
        }
        for atom in &mut dist.atoms {
            atom.weight /= mass;
        }
        if let Some(cells) = &mut dist.density {
            for v in cells.iter_mut() {
                *v /= mass;
            }
        }
        debug_assert!((dist.raw_mass() - 1.0).abs() <= MASS_TOLERANCE);
        Ok(dist)
    }

    /// Equal-weight atoms at the given magnifications.
    pub fn discrete_uniform(range: MagRange, locations: &[f64]) -> Result<Self> {
        let atoms = locations
            .iter()
            .map(|&location| Atom { location, weight: 1.0 })
            .collect();
        Self::new(range, atoms, None)
    }

    /// Constant density over the whole range, tabulated on `cells` cells.
    pub fn continuous_uniform(range: MagRange, cells: usize) -> Result<Self> {
        Self::new(range, Vec::new(), Some(vec![1.0; cells]))
    }

    pub fn point_mass(range: MagRange, location: f64) -> Result<Self> {
        Self::new(range, vec![Atom { location, weight: 1.0 }], None)
    }

    pub fn from_density(range: MagRange, cells: Vec<f64>) -> Result<Self> {
        Self::new(range, Vec::new(), Some(cells))
    }

    pub fn range(&self) -> &MagRange {
        &self.range
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&[f64]> {
        self.density.as_deref()
    }

    pub fn is_density_only(&self) -> bool {
        self.density.is_some() && self.atoms.iter().all(|a| a.weight == 0.0)
    }

    pub fn cell_count(&self) -> usize {
        self.density.as_ref().map_or(0, Vec::len)
    }

    pub fn cell_width(&self) -> f64 {
        self.range.cell_width(self.cell_count().max(1))
    }

    /// Density value at `x` (the atom part is ignored). Cells are half-open
    /// `[l, r)` except the last, which includes `b`.
    pub fn density_at(&self, x: f64) -> f64 {
        let Some(cells) = &self.density else {
            return 0.0;
        };
        if !self.range.contains(x) {
            return 0.0;
        }
        let n = cells.len();
        let i = (((x - self.range.lower()) / self.range.width()) * n as f64).floor() as usize;
        cells[i.min(n - 1)]
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn density_mass(&self) -> f64 {
        let h = self.cell_width();
        self.density
            .as_ref()
            .map_or(0.0, |c| c.iter().fold(0.0, |acc, v| acc + v * h))
    }

    fn raw_mass(&self) -> f64 {
        self.atom_mass() + self.density_mass()
    }

    pub fn total_mass(&self) -> f64 {
        self.raw_mass()
    }

    /// `alpha * self + (1 - alpha) * other`. Both must share the range and the
    /// number of density cells (when both have densities).
    pub fn mix(&self, other: &Self, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Parameter(format!("mixture weight must be in [0, 1], got {alpha}")));
        }
        if self.range != other.range {
            return Err(Error::Range("mixture components have different ranges".into()));
        }
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom { weight: alpha * a.weight, ..*a })
            .collect();
        atoms.extend(other.atoms.iter().map(|a| Atom {
            weight: (1.0 - alpha) * a.weight,
            ..*a
        }));
        let density = match (&self.density, &other.density) {
            (None, None) => None,
            (Some(d), None) => Some(d.iter().map(|v| alpha * v).collect()),
            (None, Some(d)) => Some(d.iter().map(|v| (1.0 - alpha) * v).collect()),
            (Some(d1), Some(d2)) => {
                if d1.len() != d2.len() {
                    return Err(Error::Shape(format!(
                        "mixture densities have {} and {} cells",
                        d1.len(),
                        d2.len()
                    )));
                }
                Some(d1.iter().zip(d2).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect())
            }
        };
        Self::new(self.range, atoms, density)
    }

    /// Serializes to the `#msdist v1` text format. Extra comment lines (without
    /// the leading `# `) are emitted after the magic line.
    pub fn to_text(&self, comments: &[String]) -> String {
        let mut s = String::new();
        s.push_str(FORMAT_MAGIC);
        s.push('\n');
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "range {} {}", self.range.lower(), self.range.upper());
        for a in &self.atoms {
            let _ = writeln!(s, "atom {} {}", a.location, a.weight);
        }
        if let Some(cells) = &self.density {
            let _ = writeln!(s, "density {}", cells.len());
            for chunk in cells.chunks(8) {
                let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
                s.push_str(&line.join(" "));
                s.push('\n');
            }
        }
        s
    }

    pub fn parse_text(text: &str, source_name: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, l)) if l == FORMAT_MAGIC => {}
            Some((n, _)) => return Err(Error::parse(source_name, n, format!("expected {FORMAT_MAGIC:?}"))),
            None => return Err(Error::parse(source_name, 1, "empty distribution file")),
        }

        let mut range = None;
        let mut atoms = Vec::new();
        let mut density: Option<(usize, usize, Vec<f64>)> = None;

        let num = |line: usize, tok: &str| -> Result<f64> {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(source_name, line, format!("not a finite number: {tok:?}")))
        };

        for (line, raw) in lines {
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            if let Some((_, expected, cells)) = density.as_mut() {
                if cells.len() < *expected {
                    for tok in raw.split_whitespace() {
                        if cells.len() == *expected {
                            return Err(Error::parse(source_name, line, "more density values than declared"));
                        }
                        let v = num(line, tok)?;
                        if v < 0.0 {
                            return Err(Error::parse(source_name, line, format!("negative density value {v}")));
                        }
                        cells.push(v);
                    }
                    continue;
                }
            }
            let toks: Vec<&str> = raw.split_whitespace().collect();
            match toks.as_slice() {
                ["range", a, b] => {
                    if range.is_some() {
                        return Err(Error::parse(source_name, line, "duplicate range line"));
                    }
                    let r = MagRange::new(num(line, a)?, num(line, b)?)
                        .map_err(|e| Error::parse(source_name, line, e.to_string()))?;
                    range = Some(r);
                }
                ["atom", x, w] => {
                    let weight = num(line, w)?;
                    if weight < 0.0 {
                        return Err(Error::parse(source_name, line, format!("negative atom weight {weight}")));
                    }
                    atoms.push((line, Atom { location: num(line, x)?, weight }));
                }
                ["density", n] => {
                    if density.is_some() {
                        return Err(Error::parse(source_name, line, "duplicate density block"));
                    }
                    let n: usize = n
                        .parse()
                        .ok()
                        .filter(|n| *n > 0)
                        .ok_or_else(|| Error::parse(source_name, line, format!("bad cell count {n:?}")))?;
                    density = Some((line, n, Vec::with_capacity(n)));
                }
                _ => return Err(Error::parse(source_name, line, format!("unrecognized line {raw:?}"))),
            }
        }

        let last_line = text.lines().count().max(1);
        let range = range.ok_or_else(|| Error::parse(source_name, last_line, "missing range line"))?;
        for (line, atom) in &atoms {
            if !range.contains(atom.location) {
                return Err(Error::parse(
                    source_name,
                    *line,
                    format!("atom at {} outside range {range}", atom.location),
                ));
            }
        }
        let density = match density {
            Some((line, n, cells)) => {
                if cells.len() != n {
                    return Err(Error::parse(
                        source_name,
                        line,
                        format!("density declares {n} cells but {} values follow", cells.len()),
                    ));
                }
                Some(cells)
            }
            None => None,
        };
        if atoms.is_empty() && density.is_none() {
            return Err(Error::parse(source_name, last_line, "distribution has neither atoms nor density"));
        }
        Self::new(range, atoms.into_iter().map(|(_, a)| a).collect(), density)
            .map_err(|e| Error::parse(source_name, last_line, e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_text(&text, &path.display().to_string())
    }

    pub fn quantile_table(&self) -> InverseCdf {
        InverseCdf::new(self)
    }
}

/// Precomputed inverse CDF of a mixed atom/density distribution.
///
/// The support is split at every cell edge and atom location; each segment is
/// either an atom (zero width) or a slab of constant density.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    segments: Vec<Segment>,
    /// Cumulative mass at the end of each segment.
    cumulative: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Atom(f64),
    Slab { lo: f64, hi: f64 },
}

impl InverseCdf {
    fn new(dist: &SamplingDistribution) -> Self {
        let mut atoms: Vec<Atom> = dist.atoms.iter().copied().filter(|a| a.weight > 0.0).collect();
        atoms.sort_by(|p, q| p.location.total_cmp(&q.location));

        let mut pieces: Vec<(Segment, f64)> = Vec::new();
        let mut next_atom = 0;
        // Emits every pending atom located at or before `limit`.
        let push_atoms = |pieces: &mut Vec<(Segment, f64)>, next_atom: &mut usize, limit: f64| {
            while *next_atom < atoms.len() && atoms[*next_atom].location <= limit {
                let a = atoms[*next_atom];
                pieces.push((Segment::Atom(a.location), a.weight));
                *next_atom += 1;
            }
        };

        if let Some(cells) = &dist.density {
            let edges = dist.range.cell_edges(cells.len()).expect("nonempty density");
            for (i, &d) in cells.iter().enumerate() {
                let (lo, hi) = (edges[i], edges[i + 1]);
                push_atoms(&mut pieces, &mut next_atom, lo);
                let mut cursor = lo;
                // Atoms strictly inside the cell split the slab.
                while next_atom < atoms.len() && atoms[next_atom].location < hi {
                    let x = atoms[next_atom].location;
                    if d > 0.0 && x > cursor {
                        pieces.push((Segment::Slab { lo: cursor, hi: x }, d * (x - cursor)));
                    }
                    cursor = cursor.max(x);
                    push_atoms(&mut pieces, &mut next_atom, x);
                }
                if d > 0.0 && hi > cursor {
                    pieces.push((Segment::Slab { lo: cursor, hi }, d * (hi - cursor)));
                }
            }
        }
        push_atoms(&mut pieces, &mut next_atom, f64::INFINITY);

        let mut acc = 0.0;
        let mut segments = Vec::with_capacity(pieces.len());
        let mut cumulative = Vec::with_capacity(pieces.len());
        for (seg, mass) in pieces {
            if mass <= 0.0 {
                continue;
            }
            acc += mass;
            segments.push(seg);
            cumulative.push(acc);
        }
        Self { segments, cumulative }
    }

    /// Smallest `x` with `F(x) >= u`, for `u` in `[0, 1)`; `u` is scaled by
    /// the table's total mass so rounding in normalization cannot overrun.
    pub fn quantile(&self, u: f64) -> f64 {
        let total = *self.cumulative.last().expect("distribution has positive mass");
        let target = u.clamp(0.0, 1.0) * total;
        let i = self
            .cumulative
            .partition_point(|c| *c <= target)
            .min(self.segments.len() - 1);
        match self.segments[i] {
            Segment::Atom(x) => x,
            Segment::Slab { lo, hi } => {
                let start = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
                let mass = self.cumulative[i] - start;
                let frac = ((target - start) / mass).clamp(0.0, 1.0);
                (lo + frac * (hi - lo)).min(hi)
            }
        }
    }
}
