//! The magnification interval and the uniform grids laid over it.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Closed magnification interval `[a, b]` in microns per pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagRange {
    a: f64,
    b: f64,
}

impl MagRange {
    pub const STANDARD_LOWER: f64 = 0.25;
    pub const STANDARD_UPPER: f64 = 2.0;

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Parameter(format!("range bounds must be finite, got [{a}, {b}]")));
        }
        if a <= 0.0 {
            return Err(Error::Parameter(format!("range lower bound must be positive, got {a}")));
        }
        if a >= b {
            return Err(Error::Parameter(format!("range requires a < b, got [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    #[inline]
    pub fn lower(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub(crate) fn check_contains(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Range(format!("{x} mpp lies outside [{}, {}]", self.a, self.b)))
        }
    }

    /// `n` uniformly spaced points including both endpoints. The endpoints are
    /// exact; interior points are `a + i * (b - a) / (n - 1)`.
    pub fn grid(&self, n: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::Parameter(format!("grid needs at least 2 points, got {n}")));
        }
        let step = self.width() / (n - 1) as f64;
        let mut xs: Vec<f64> = (0..n).map(|i| self.a + i as f64 * step).collect();
        xs[n - 1] = self.b;
        Ok(xs)
    }

    /// Edges of `cells` equal cells (length `cells + 1`, endpoints exact).
    pub fn cell_edges(&self, cells: usize) -> Result<Vec<f64>> {
        if cells == 0 {
            return Err(Error::Parameter("need at least one cell".into()));
        }
        self.grid(cells + 1)
    }

    pub fn cell_width(&self, cells: usize) -> f64 {
        self.width() / cells as f64
    }

    pub fn cell_midpoints(&self, cells: usize) -> Result<Vec<f64>> {
        if cells == 0 {
            return Err(Error::Parameter("need at least one cell".into()));
        }
        let h = self.cell_width(cells);
        Ok((0..cells).map(|i| self.a + (i as f64 + 0.5) * h).collect())
    }
}

impl Default for MagRange {
    fn default() -> Self {
        Self {
            a: Self::STANDARD_LOWER,
            b: Self::STANDARD_UPPER,
        }
    }
}

impl fmt::Display for MagRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.a, self.b)
    }
}

/// Parses `a:b`.
impl FromStr for MagRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("range must look like <a>:<b>, got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("not a number in range {s:?}: {v:?}")))
        };
        MagRange::new(parse(a)?, parse(b)?)
    }
}

/// Composite trapezoid rule over tabulated `(xs, values)`, summed in ascending
/// index order.
pub fn trapezoid(xs: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), values.len());
    xs.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .fold(0.0, |acc, t| acc + t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_standard_range() {
        let r = MagRange::default();
        assert_eq!((r.lower(), r.upper()), (0.25, 2.0));
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(MagRange::new(0.0, 1.0).is_err());
        assert!(MagRange::new(-1.0, 1.0).is_err());
        assert!(MagRange::new(1.0, 1.0).is_err());
        assert!(MagRange::new(2.0, 1.0).is_err());
        assert!(MagRange::new(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn grid_has_exact_endpoints() {
        let r = MagRange::default();
        let g = r.grid(1001).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g[0], 0.25);
        assert_eq!(g[1000], 2.0);
        assert_eq!(g[500], 1.125);
        assert!(r.grid(1).is_err());
        assert_eq!(r.grid(2).unwrap(), vec![0.25, 2.0]);
    }

    #[test]
    fn parses_colon_syntax() {
        let r: MagRange = "0.5:1.5".parse().unwrap();
        assert_eq!((r.lower(), r.upper()), (0.5, 1.5));
        assert!("0.5-1.5".parse::<MagRange>().is_err());
        assert!("x:1".parse::<MagRange>().is_err());
        assert!("1.5:0.5".parse::<MagRange>().is_err());
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let xs = MagRange::new(1.0, 3.0).unwrap().grid(7).unwrap();
        let v: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((trapezoid(&xs, &v) - 10.0).abs() < 1e-12);
    }
}
