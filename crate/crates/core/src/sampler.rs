//! Continuous-magnification crop planning.
//!
//! A patch at target magnification `t` is synthesized from a source patch at a
//! standard magnification `s ≤ t` by cropping `round(output · t / s)` pixels
//! and resizing the crop to `output` pixels. The source is the largest
//! standard magnification whose crop still fits in the source patch, so crops
//! are always downsampled (or copied at `t = s`).

use std::io::{BufRead, Write};
use std::path::Path;

use crate::distribution::{InverseCdf, SamplingDistribution};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub const DEFAULT_STANDARD_MPPS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const DEFAULT_SOURCE_SIZE_PX: u32 = 512;
pub const DEFAULT_OUTPUT_SIZE_PX: u32 = 224;

/// RNG draws consumed per plan entry: target, x offset, y offset.
pub const DRAWS_PER_ENTRY: u64 = 3;

pub const PLAN_CSV_HEADER: &str =
    "index,target_mpp,source_mpp,source_size_px,crop_size_px,output_size_px,offset_x_frac,offset_y_frac";

#[derive(Debug, Clone, PartialEq)]
pub struct CropPlanEntry {
    pub index: u64,
    pub target_mpp: f64,
    pub source_mpp: f64,
    pub source_size_px: u32,
    pub crop_size_px: u32,
    pub output_size_px: u32,
    /// Crop corner as a fraction of the admissible offset `source − crop`.
    pub offset_x_frac: f64,
    pub offset_y_frac: f64,
    /// Counter of the RNG draw that produced `target_mpp`.
    pub draw_index: u64,
}

impl CropPlanEntry {
    /// Top-left corner of the crop in source pixels (round half up).
    pub fn offset_px(&self) -> (u32, u32) {
        let slack = (self.source_size_px - self.crop_size_px) as f64;
        let px = |frac: f64| ((frac * slack + 0.5).floor() as u32).min(self.source_size_px - self.crop_size_px);
        (px(self.offset_x_frac), px(self.offset_y_frac))
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.index,
            self.target_mpp,
            self.source_mpp,
            self.source_size_px,
            self.crop_size_px,
            self.output_size_px,
            self.offset_x_frac,
            self.offset_y_frac
        )
    }
}

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    distribution: SamplingDistribution,
    standard_mpps: Vec<f64>,
    source_size_px: u32,
    output_size_px: u32,
    rng_seed: u64,
}

impl SamplerConfig {
    /// Validates the configuration, including that every target in the
    /// distribution's range has an admissible source magnification.
    pub fn new(
        distribution: SamplingDistribution,
        standard_mpps: Vec<f64>,
        source_size_px: u32,
        output_size_px: u32,
        rng_seed: u64,
    ) -> Result<Self> {
        if standard_mpps.is_empty() {
            return Err(Error::Parameter("standard magnification set is empty".into()));
        }
        if standard_mpps.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Parameter("standard magnifications must be positive and finite".into()));
        }
        if standard_mpps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("standard magnifications must be strictly increasing".into()));
        }
        if output_size_px == 0 || source_size_px == 0 {
            return Err(Error::Parameter("patch sizes must be positive".into()));
        }
        if output_size_px > source_size_px {
            return Err(Error::Parameter(format!(
                "output size {output_size_px} exceeds source size {source_size_px}"
            )));
        }
        let cfg = Self {
            distribution,
            standard_mpps,
            source_size_px,
            output_size_px,
            rng_seed,
        };
        cfg.check_full_range()?;
        Ok(cfg)
    }

    /// Default standard set and patch sizes.
    pub fn with_defaults(distribution: SamplingDistribution, rng_seed: u64) -> Result<Self> {
        Self::new(
            distribution,
            DEFAULT_STANDARD_MPPS.to_vec(),
            DEFAULT_SOURCE_SIZE_PX,
            DEFAULT_OUTPUT_SIZE_PX,
            rng_seed,
        )
    }

    pub fn distribution(&self) -> &SamplingDistribution {
        &self.distribution
    }

    pub fn standard_mpps(&self) -> &[f64] {
        &self.standard_mpps
    }

    pub fn source_size_px(&self) -> u32 {
        self.source_size_px
    }

    pub fn output_size_px(&self) -> u32 {
        self.output_size_px
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// For each standard `s_k`, targets in `[s_k, s_{k+1})` (clipped to the
    /// range) use `s_k`; the crop grows with `t`, so checking the supremum of
    /// each segment suffices.
    fn check_full_range(&self) -> Result<()> {
        let range = self.distribution.range();
        let (a, b) = (range.lower(), range.upper());
        if self.standard_mpps[0] > a {
            return Err(Error::Feasibility { target_mpp: a });
        }
        let out = self.output_size_px as f64;
        let src = self.source_size_px as f64;
        for (k, &s) in self.standard_mpps.iter().enumerate() {
            if s > b {
                break;
            }
            match self.standard_mpps.get(k + 1) {
                Some(&next) if next <= b => {
                    if next <= a {
                        continue;
                    }
                    // round(out·t/s) ≤ src for all t < next
                    if out * next / s > src + 0.5 {
                        return Err(Error::Feasibility {
                            target_mpp: next.min(s * (src + 0.5) / out).max(a),
                        });
                    }
                }
                _ => {
                    if crop_size(out, b, s) > src {
                        return Err(Error::Feasibility { target_mpp: b });
                    }
                }
            }
        }
        Ok(())
    }
}

#[inline]
fn crop_size(output: f64, t: f64, s: f64) -> f64 {
    (output * t / s + 0.5).floor()
}

/// Picks `s = max{s' ∈ standards : s' ≤ t, round(output·t/s') ≤ source}` and
/// returns `(s, crop_size_px)`.
pub fn select_source(t: f64, standard_mpps: &[f64], source_size_px: u32, output_size_px: u32) -> Result<(f64, u32)> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("target magnification must be positive, got {t}")));
    }
    let out = output_size_px as f64;
    standard_mpps
        .iter()
        .rev()
        .filter(|&&s| s <= t)
        .map(|&s| (s, crop_size(out, t, s)))
        .find(|&(_, crop)| crop <= source_size_px as f64)
        .map(|(s, crop)| (s, crop.max(1.0) as u32))
        .ok_or(Error::Feasibility { target_mpp: t })
}

/// Inverse-CDF sampler for a distribution.
#[derive(Debug, Clone)]
pub struct TargetSampler {
    table: InverseCdf,
}

impl TargetSampler {
    pub fn new(dist: &SamplingDistribution) -> Self {
        Self {
            table: dist.quantile_table(),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.table.quantile(u)
    }

    pub fn draw(&self, rng: &mut SplitMix64) -> f64 {
        self.table.quantile(rng.next_unit())
    }
}

/// Draws one target magnification. Prefer [`TargetSampler`] for repeated draws.
pub fn draw_target_mpp(dist: &SamplingDistribution, rng: &mut SplitMix64) -> f64 {
    TargetSampler::new(dist).draw(rng)
}

/// Plans one crop for target `t`, drawing the two offsets from `rng`.
pub fn plan_crop(t: f64, cfg: &SamplerConfig, rng: &mut SplitMix64) -> Result<CropPlanEntry> {
    cfg.distribution.range().check_contains(t)?;
    let draw_index = rng.counter();
    let (source_mpp, crop_size_px) = select_source(t, &cfg.standard_mpps, cfg.source_size_px, cfg.output_size_px)?;
    let offset_x_frac = rng.next_unit();
    let offset_y_frac = rng.next_unit();
    Ok(CropPlanEntry {
        index: 0,
        target_mpp: t,
        source_mpp,
        source_size_px: cfg.source_size_px,
        crop_size_px,
        output_size_px: cfg.output_size_px,
        offset_x_frac,
        offset_y_frac,
        draw_index,
    })
}

/// Entry `i` uses draws `3i` (target), `3i + 1` and `3i + 2` (offsets).
pub fn plan_entry(cfg: &SamplerConfig, sampler: &TargetSampler, index: u64) -> Result<CropPlanEntry> {
    let mut rng = SplitMix64::at(cfg.rng_seed, index * DRAWS_PER_ENTRY);
    let t = sampler.draw(&mut rng);
    let mut entry = plan_crop(t, cfg, &mut rng)?;
    entry.index = index;
    entry.draw_index = index * DRAWS_PER_ENTRY;
    Ok(entry)
}

pub fn generate_plan(cfg: &SamplerConfig, n: usize) -> Result<Vec<CropPlanEntry>> {
    if n == 0 {
        return Err(Error::Parameter("plan needs at least one entry".into()));
    }
    let sampler = TargetSampler::new(&cfg.distribution);
    (0..n as u64).map(|i| plan_entry(cfg, &sampler, i)).collect()
}

pub fn write_plan_csv(entries: &[CropPlanEntry], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{PLAN_CSV_HEADER}")?;
    for e in entries {
        writeln!(w, "{}", e.csv_row())?;
    }
    Ok(())
}

pub fn read_plan_csv(r: impl BufRead, source_name: &str) -> Result<Vec<CropPlanEntry>> {
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == PLAN_CSV_HEADER => {}
        Some((_, Err(e))) => return Err(Error::parse(source_name, 1, e.to_string())),
        _ => return Err(Error::parse(source_name, 1, format!("expected header {PLAN_CSV_HEADER}"))),
    }
    let mut entries = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 8 {
            return Err(Error::parse(source_name, lineno, format!("expected 8 fields, got {}", f.len())));
        }
        let bad = |k: usize| Error::parse(source_name, lineno, format!("bad value {:?}", f[k]));
        let int = |k: usize| f[k].parse::<u64>().map_err(|_| bad(k));
        let px = |k: usize| f[k].parse::<u32>().map_err(|_| bad(k));
        let real = |k: usize| f[k].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(k));
        let index = int(0)?;
        let entry = CropPlanEntry {
            index,
            target_mpp: real(1)?,
            source_mpp: real(2)?,
            source_size_px: px(3)?,
            crop_size_px: px(4)?,
            output_size_px: px(5)?,
            offset_x_frac: real(6)?,
            offset_y_frac: real(7)?,
            draw_index: index * DRAWS_PER_ENTRY,
        };
        if entry.crop_size_px == 0 || entry.crop_size_px > entry.source_size_px || entry.output_size_px == 0 {
            return Err(Error::parse(source_name, lineno, "crop does not fit in the source patch"));
        }
        for frac in [entry.offset_x_frac, entry.offset_y_frac] {
            if !(0.0..=1.0).contains(&frac) {
                return Err(Error::parse(source_name, lineno, format!("offset fraction {frac} outside [0, 1]")));
            }
        }
        entries.push(entry);
    }
    Ok(entries)
}

pub fn read_plan_file(path: impl AsRef<Path>) -> Result<Vec<CropPlanEntry>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_plan_csv(std::io::BufReader::new(file), &path.display().to_string())
}
