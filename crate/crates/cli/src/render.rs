//! PNG heatmaps: one flat quad per grid cell on a diverging palette
//! symmetric about zero.

use std::io::Cursor;

use image::{ImageFormat, Rgb, RgbImage};

use crate::error::CliError;

const NEGATIVE: [f64; 3] = [33.0, 102.0, 172.0];
const MIDPOINT: [f64; 3] = [247.0, 247.0, 247.0];
const POSITIVE: [f64; 3] = [178.0, 24.0, 43.0];
const OVERLAY: Rgb<u8> = Rgb([20, 20, 20]);
const DASH: u32 = 6;

/// Colour of `v` with `±scale` mapped to the palette ends; a zero scale
/// renders everything at the midpoint colour.
pub fn diverging(v: f64, scale: f64) -> Rgb<u8> {
    let t = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let end = if t < 0.0 { NEGATIVE } else { POSITIVE };
    let a = t.abs();
    let mix = |k: usize| (MIDPOINT[k] + a * (end[k] - MIDPOINT[k])).round() as u8;
    Rgb([mix(0), mix(1), mix(2)])
}

/// Grid of `n1 × n2` values with `n1` (axis 1, horizontal) varying fastest.
/// Row 0 of the grid is drawn at the bottom of the image.
pub struct Heatmap<'a> {
    pub values: &'a [f64],
    pub n1: usize,
    pub n2: usize,
    /// Pixels per cell edge.
    pub cell: u32,
}

/// Dashed overlay at a fractional cell position (0 = left/bottom edge of the
/// first cell, `n` = right/top edge of the last).
#[derive(Debug, Clone, Copy)]
pub enum Overlay {
    Vertical(f64),
    Horizontal(f64),
}

impl Heatmap<'_> {
    pub fn render(&self, overlays: &[Overlay]) -> RgbImage {
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let (w, h) = (self.n1 as u32 * self.cell, self.n2 as u32 * self.cell);
        let mut img = RgbImage::from_fn(w, h, |x, y| {
            let i = (x / self.cell) as usize;
            let j = self.n2 - 1 - (y / self.cell) as usize;
            diverging(self.values[j * self.n1 + i], scale)
        });
        for o in overlays {
            match *o {
                Overlay::Vertical(pos) => {
                    let x = pixel(pos, self.cell, w);
                    for y in (0..h).filter(|y| (y / DASH) % 2 == 0) {
                        img.put_pixel(x, y, OVERLAY);
                    }
                }
                Overlay::Horizontal(pos) => {
                    let y = h - 1 - pixel(pos, self.cell, h);
                    for x in (0..w).filter(|x| (x / DASH) % 2 == 0) {
                        img.put_pixel(x, y, OVERLAY);
                    }
                }
            }
        }
        img
    }
}

fn pixel(pos: f64, cell: u32, extent: u32) -> u32 {
    ((pos * cell as f64).round().max(0.0) as u32).min(extent - 1)
}

/// Fractional cell position of coordinate `value` on an equally spaced axis
/// whose node `k` sits at the centre of cell `k`.
pub fn cell_position(samples: &[f64], value: f64) -> f64 {
    if samples.len() < 2 {
        return 0.5;
    }
    let step = (samples[samples.len() - 1] - samples[0]) / (samples.len() - 1) as f64;
    (value - samples[0]) / step + 0.5
}

pub fn png_bytes(img: &RgbImage) -> Result<Vec<u8>, CliError> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)
        .map_err(|e| CliError::Io(format!("png encoding: {e}")))?;
    Ok(buf.into_inner())
}
