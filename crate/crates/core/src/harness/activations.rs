//! Per-filter activation maps as grayscale images.

use std::path::{Path, PathBuf};

use crate::encoder::TrailBitmap;
use crate::recognizer::Network;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, one byte per pixel.
    pub pixels: Vec<u8>,
}

impl GrayImage {
    /// Binary PGM (P5).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm()).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// One image per filter of block `layer` (1-based). Values are min-max
/// normalized over the whole layer so filters stay comparable; a constant
/// layer maps to 0.
pub fn dump_activations(net: &Network, bitmap: &TrailBitmap, layer: usize) -> Result<Vec<GrayImage>> {
    let act = net.activations(bitmap, layer)?;
    let (c, h, w) = (act.shape()[0], act.shape()[1], act.shape()[2]);
    let v = act.values();
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let range = hi - lo;
    let scale = |x: f64| -> u8 {
        if range > 0.0 {
            ((x - lo) / range * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    };
    Ok((0..c)
        .map(|f| GrayImage {
            width: w,
            height: h,
            pixels: v[f * h * w..(f + 1) * h * w].iter().map(|&x| scale(x)).collect(),
        })
        .collect())
}

/// Writes `layer{L}_filter{F:02}.pgm` files into `dir`.
pub fn write_activations(images: &[GrayImage], layer: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    images
        .iter()
        .enumerate()
        .map(|(f, img)| {
            let p = dir.join(format!("layer{layer}_filter{f:02}.pgm"));
            img.write_pgm(&p)?;
            Ok(p)
        })
        .collect()
}
