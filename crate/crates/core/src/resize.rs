//! Bilinear resampling and the crop helpers used by asset preparation.

use crate::error::{arg_err, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// Bilinear resize with pixel-centre alignment: output sample `x` reads the
/// source at `(x + 0.5)·(w_in / w_out) − 0.5`, clamped to the edge samples.
pub fn resize_bilinear<T: Scalar>(img: &Image<T>, new_w: usize, new_h: usize) -> Result<Image<T>> {
    if new_w == 0 || new_h == 0 {
        return arg_err(format!("target size must be positive, got {new_w}x{new_h}"));
    }
    if new_w == img.width() && new_h == img.height() {
        return Ok(img.clone());
    }
    let xs = sample_positions(img.width(), new_w);
    let ys = sample_positions(img.height(), new_h);
    Image::from_fn(new_w, new_h, img.channels(), |x, y, c| {
        let (x0, x1, fx) = xs[x];
        let (y0, y1, fy) = ys[y];
        let fx = T::lit(fx);
        let fy = T::lit(fy);
        let top = img.get(x0, y0, c) * (T::one() - fx) + img.get(x1, y0, c) * fx;
        let bottom = img.get(x0, y1, c) * (T::one() - fx) + img.get(x1, y1, c) * fx;
        top * (T::one() - fy) + bottom * fy
    })
}

fn sample_positions(n_in: usize, n_out: usize) -> Vec<(usize, usize, f64)> {
    let scale = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (n_in - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(n_in - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

pub fn crop<T: Scalar>(img: &Image<T>, x0: usize, y0: usize, w: usize, h: usize) -> Result<Image<T>> {
    if x0 + w > img.width() || y0 + h > img.height() {
        return arg_err(format!(
            "crop {w}x{h}+{x0}+{y0} exceeds {}x{}",
            img.width(),
            img.height()
        ));
    }
    Image::from_fn(w, h, img.channels(), |x, y, c| img.get(x0 + x, y0 + y, c))
}

/// Scales the shorter side to `size`, then centre-crops to `size × size`.
pub fn fit_square<T: Scalar>(img: &Image<T>, size: usize) -> Result<Image<T>> {
    if size == 0 {
        return arg_err("target size must be positive");
    }
    let (w, h) = (img.width(), img.height());
    let (sw, sh) = if w <= h {
        (size, ((h as f64 * size as f64 / w as f64).round() as usize).max(size))
    } else {
        (((w as f64 * size as f64 / h as f64).round() as usize).max(size), size)
    };
    let scaled = resize_bilinear(img, sw, sh)?;
    crop(&scaled, (sw - size) / 2, (sh - size) / 2, size, size)
}
