//! Procedural textures and foreground assets for smoke runs and tests, so the
//! dataset pipeline can run without downloading matting or photo collections.

use std::path::{Path, PathBuf};

use rand::Rng;

use crate::dataset::{AssetCatalog, ForegroundEntry};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::{save_png, write_atomic, BitDepth};
use crate::rng::keyed_rng;

/// Multi-octave value noise with a fine per-pixel grain; values in `[0, 1]`.
pub fn texture(width: usize, height: usize, channels: usize, seed: u64) -> Result<Image<f64>> {
    let mut rng = keyed_rng(seed, "texture", &[]);
    let octaves: [(usize, f64); 4] = [(32, 0.35), (12, 0.3), (5, 0.2), (2, 0.15)];
    let mut grids = Vec::new();
    for &(cell, amp) in &octaves {
        let gw = width / cell + 2;
        let gh = height / cell + 2;
        let tint: Vec<f64> = (0..channels).map(|_| rng.random_range(0.6..1.0)).collect();
        let values: Vec<f64> = (0..gw * gh).map(|_| rng.random::<f64>()).collect();
        grids.push((cell, amp, gw, values, tint));
    }
    let grain: Vec<f64> = (0..width * height).map(|_| rng.random::<f64>() - 0.5).collect();
    Image::from_fn(width, height, channels, |x, y, c| {
        let mut v = 0.0;
        for (cell, amp, gw, values, tint) in &grids {
            let fx = x as f64 / *cell as f64;
            let fy = y as f64 / *cell as f64;
            let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
            let (tx, ty) = (smooth(fx - ix as f64), smooth(fy - iy as f64));
            let at = |i: usize, j: usize| values[j * gw + i];
            let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
            let bot = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
            v += amp * tint[c] * (top * (1.0 - ty) + bot * ty);
        }
        (0.1 + 0.8 * v + 0.08 * grain[y * width + x]).clamp(0.0, 1.0)
    })
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Anti-aliased ellipse matte (4×4 supersampled coverage).
pub fn ellipse_matte(width: usize, height: usize, cx: f64, cy: f64, rx: f64, ry: f64) -> Result<Image<f64>> {
    Image::from_fn(width, height, 1, |x, y, _| {
        let mut hits = 0;
        for sy in 0..4 {
            for sx in 0..4 {
                let px = x as f64 + (sx as f64 + 0.5) / 4.0 - 0.5;
                let py = y as f64 + (sy as f64 + 0.5) / 4.0 - 0.5;
                let d = ((px - cx) / rx).powi(2) + ((py - cy) / ry).powi(2);
                if d <= 1.0 {
                    hits += 1;
                }
            }
        }
        hits as f64 / 16.0
    })
}

/// Writes `n_fg` textured foregrounds with elliptical mattes, `n_bg` textured
/// backgrounds and a `catalog.toml` referencing them into `dir`. Returns the
/// catalog path.
pub fn write_desk_assets(dir: impl AsRef<Path>, n_fg: usize, n_bg: usize, size: usize, seed: u64) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut foregrounds = Vec::with_capacity(n_fg);
    for i in 0..n_fg {
        let mut rng = keyed_rng(seed, "asset-fg", &[i as u64]);
        let s = size as f64;
        let cx = s * rng.random_range(0.4..0.6);
        let cy = s * rng.random_range(0.4..0.6);
        let rx = s * rng.random_range(0.18..0.3);
        let ry = s * rng.random_range(0.18..0.3);
        let color = texture(size, size, 3, seed ^ (0x1000 + i as u64))?;
        let matte = ellipse_matte(size, size, cx, cy, rx, ry)?;
        let color_name = format!("fg_{i:03}.png");
        let matte_name = format!("fg_{i:03}_matte.png");
        save_png(&color, dir.join(&color_name), BitDepth::Eight)?;
        save_png(&matte, dir.join(&matte_name), BitDepth::Eight)?;
        foregrounds.push(ForegroundEntry {
            color: color_name.into(),
            matte: matte_name.into(),
        });
    }
    let mut backgrounds = Vec::with_capacity(n_bg);
    for j in 0..n_bg {
        let bg = texture(size, size, 3, seed ^ (0x2000 + j as u64))?;
        let name = format!("bg_{j:03}.png");
        save_png(&bg, dir.join(&name), BitDepth::Eight)?;
        backgrounds.push(PathBuf::from(name));
    }
    let catalog = AssetCatalog::new(foregrounds, backgrounds)?;
    let path = dir.join("catalog.toml");
    write_atomic(&path, catalog.to_toml()?.as_bytes())?;
    Ok(path)
}
