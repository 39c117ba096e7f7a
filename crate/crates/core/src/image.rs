//! In-memory pixel arrays and crop-plan application.
//!
//! Raw file layout (little-endian): magic `MSIM`, `u32` height, `u32` width,
//! `u32` channels, then `height · width · channels` `f32` samples in
//! row-major HWC order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sampler::CropPlanEntry;

pub const RAW_MAGIC: &[u8; 4] = b"MSIM";

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::Shape(format!("empty image {height}x{width}x{channels}")));
        }
        if data.len() != height * width * channels {
            return Err(Error::Shape(format!(
                "{height}x{width}x{channels} image needs {} samples, got {}",
                height * width * channels,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, channels: usize, f: impl Fn(usize, usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self {
            height,
            width,
            channels,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn read_raw(mut r: impl Read) -> Result<Self> {
        let shape_err = |m: &str| Error::Shape(m.to_string());
        let mut header = [0u8; 16];
        r.read_exact(&mut header)
            .map_err(|_| shape_err("raw image shorter than its 16-byte header"))?;
        if &header[..4] != RAW_MAGIC {
            return Err(shape_err("raw image does not start with MSIM"));
        }
        let field = |k: usize| u32::from_le_bytes(header[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize;
        let (h, w, c) = (field(0), field(1), field(2));
        let count = h
            .checked_mul(w)
            .and_then(|v| v.checked_mul(c))
            .ok_or_else(|| shape_err("raw image dimensions overflow"))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::Shape(format!("reading raw image: {e}")))?;
        if bytes.len() != count * 4 {
            return Err(Error::Shape(format!(
                "raw image {h}x{w}x{c} needs {} payload bytes, found {}",
                count * 4,
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Self::new(h, w, c, data)
    }

    pub fn write_raw(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(RAW_MAGIC)?;
        for v in [self.height, self.width, self.channels] {
            w.write_all(&(v as u32).to_le_bytes())?;
        }
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_raw_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_raw(std::io::BufReader::new(file))
    }
}

/// Cuts the planned crop out of a square source patch and resizes it to the
/// output size with corner-aligned bilinear interpolation: output pixel `i`
/// samples crop coordinate `i · (crop − 1) / (output − 1)`.
pub fn apply_crop(image: &Image, entry: &CropPlanEntry) -> Result<Image> {
    let src = entry.source_size_px as usize;
    if image.height != src || image.width != src {
        return Err(Error::Shape(format!(
            "plan expects a {src}x{src} source, image is {}x{}",
            image.height, image.width
        )));
    }
    let crop = entry.crop_size_px as usize;
    let out = entry.output_size_px as usize;
    if crop == 0 || out == 0 || crop > src {
        return Err(Error::Shape(format!("crop {crop} / output {out} invalid for source {src}")));
    }
    let (ox, oy) = entry.offset_px();
    let (ox, oy) = (ox as usize, oy as usize);
    if ox + crop > src || oy + crop > src {
        return Err(Error::Shape("crop window exceeds the source patch".into()));
    }
    let ch = image.channels;

    if crop == out {
        return Ok(Image::from_fn(out, out, ch, |y, x, c| image.get(oy + y, ox + x, c)));
    }

    let coords: Vec<(usize, usize, f64)> = (0..out)
        .map(|i| {
            let pos = if out == 1 {
                (crop - 1) as f64 / 2.0
            } else {
                i as f64 * (crop - 1) as f64 / (out - 1) as f64
            };
            let lo = (pos.floor() as usize).min(crop - 1);
            let hi = (lo + 1).min(crop - 1);
            (lo, hi, pos - lo as f64)
        })
        .collect();

    Ok(Image::from_fn(out, out, ch, |y, x, c| {
        let (y0, y1, fy) = coords[y];
        let (x0, x1, fx) = coords[x];
        let px = |yy: usize, xx: usize| image.get(oy + yy, ox + xx, c) as f64;
        let top = px(y0, x0) + fx * (px(y0, x1) - px(y0, x0));
        let bottom = px(y1, x0) + fx * (px(y1, x1) - px(y1, x0));
        (top + fy * (bottom - top)) as f32
    }))
}
