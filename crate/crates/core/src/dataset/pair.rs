use serde::{Deserialize, Serialize};

use crate::blur::gaussian_blur;
use crate::defocus::over;
use crate::error::{arg_err, Result};
use crate::guidance::{GuidanceMap, Level};
use crate::image::Image;
use crate::scalar::Scalar;

/// Blurred matte values within this distance of 0 or 1 count as exactly 0 or 1
/// when building guidance maps.
pub const GUIDANCE_EPS: f64 = 1e-6;

/// Which source holds the in-focus foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FocusSide {
    A,
    B,
}

/// A foreground colour surface premultiplied by its clear matte.
#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundAsset<T> {
    color: Image<T>,
    matte: Image<T>,
}

impl<T: Scalar> ForegroundAsset<T> {
    pub fn from_straight(color: &Image<T>, matte: Image<T>) -> Result<Self> {
        matte.ensure_single_channel("foreground matte")?;
        color.ensure_same_dims(&matte, "foreground colour vs matte")?;
        if matte.data().iter().any(|&a| a < T::zero() || a > T::one()) {
            return arg_err("foreground matte outside [0, 1]");
        }
        Ok(Self {
            color: color.clamp01().scale_by(&matte)?,
            matte,
        })
    }

    /// Premultiplied colour `FG^C`.
    pub fn color(&self) -> &Image<T> {
        &self.color
    }

    /// Clear matte `α^C`.
    pub fn matte(&self) -> &Image<T> {
        &self.matte
    }

    /// Converts the colour to `channels` channels. Replication and channel
    /// averaging both commute with premultiplication.
    pub fn with_channels(&self, channels: usize) -> Result<Self> {
        Ok(Self {
            color: self.color.with_channels(channels)?,
            matte: self.matte.clone(),
        })
    }
}

/// A multi-focus training pair with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionPair<T> {
    pub img_a: Image<T>,
    pub img_b: Image<T>,
    pub gt: Image<T>,
    pub matte_clear: Image<T>,
    pub matte_blur: Image<T>,
    pub gmap: GuidanceMap<T>,
    pub sigma: T,
    pub sigma_bg: T,
    pub fg_focused_in: FocusSide,
}

/// Builds a pair where foreground and background share one σ.
///
/// With `FG^B`, `BG^B`, `α^B` the σ-blurred foreground, background and matte:
///
/// ```text
/// S1 = FG^C + (1 − α^C)·BG^B     foreground in focus
/// S2 = FG^B + (1 − α^B)·BG^C     background in focus
/// GT = FG^C + (1 − α^C)·BG^C
/// ```
///
/// Source A is S1 unless `swap` is set.
pub fn generate_pair<T: Scalar>(fg: &ForegroundAsset<T>, bg: &Image<T>, sigma: T, swap: bool) -> Result<FusionPair<T>> {
    generate_pair_split(fg, bg, sigma, sigma, swap)
}

/// As [`generate_pair`] with independent foreground and background σ.
pub fn generate_pair_split<T: Scalar>(
    fg: &ForegroundAsset<T>,
    bg: &Image<T>,
    sigma_fg: T,
    sigma_bg: T,
    swap: bool,
) -> Result<FusionPair<T>> {
    fg.color.ensure_same_shape(bg, "foreground vs background")?;
    let fg_blur = gaussian_blur(&fg.color, sigma_fg)?;
    let matte_blur = gaussian_blur(&fg.matte, sigma_fg)?;
    let bg_blur = gaussian_blur(bg, sigma_bg)?;

    let fg_sharp = over(&fg.color, &fg.matte, &bg_blur)?;
    let bg_sharp = over(&fg_blur, &matte_blur, bg)?;
    let gt = over(&fg.color, &fg.matte, bg)?;

    let side = if swap { FocusSide::B } else { FocusSide::A };
    let gmap = make_guidance(&matte_blur, side)?;
    let (img_a, img_b) = if swap { (bg_sharp, fg_sharp) } else { (fg_sharp, bg_sharp) };
    Ok(FusionPair {
        img_a,
        img_b,
        gt,
        matte_clear: fg.matte.clone(),
        matte_blur,
        gmap,
        sigma: sigma_fg,
        sigma_bg,
        fg_focused_in: side,
    })
}

/// Three-level map from the blurred matte: the foreground side where
/// `α^B = 1`, the background side where `α^B = 0`, 0.5 in between. Equality
/// uses the tolerance [`GUIDANCE_EPS`].
pub fn make_guidance<T: Scalar>(matte_blur: &Image<T>, fg_focused_in: FocusSide) -> Result<GuidanceMap<T>> {
    matte_blur.ensure_single_channel("blurred matte")?;
    let eps = T::lit(GUIDANCE_EPS);
    if let Some(v) = matte_blur.data().iter().find(|&&a| a < -eps || a > T::one() + eps) {
        return arg_err(format!("blurred matte value {v} outside [0, 1]"));
    }
    let (fg_level, bg_level) = match fg_focused_in {
        FocusSide::A => (Level::A, Level::B),
        FocusSide::B => (Level::B, Level::A),
    };
    let w = matte_blur.width();
    GuidanceMap::from_fn(w, matte_blur.height(), |x, y| {
        let a = matte_blur.data()[y * w + x];
        if a >= T::one() - eps {
            fg_level
        } else if a <= eps {
            bg_level
        } else {
            Level::Band
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matte(v: &[f64]) -> Image<f64> {
        Image::from_vec(v.len(), 1, 1, v.to_vec()).unwrap()
    }

    #[test]
    fn guidance_levels() {
        let m = matte(&[0.0, 0.3, 1.0, 1.0 - 1e-7, 1e-7]);
        let g = make_guidance(&m, FocusSide::A).unwrap();
        assert_eq!(g.as_image().data(), &[0.0, 0.5, 1.0, 1.0, 0.0]);
        let g = make_guidance(&m, FocusSide::B).unwrap();
        assert_eq!(g.as_image().data(), &[1.0, 0.5, 0.0, 0.0, 1.0]);
        assert!(make_guidance(&matte(&[1.1]), FocusSide::A).is_err());
        assert!(make_guidance(&matte(&[-0.1]), FocusSide::A).is_err());
    }

    #[test]
    fn zero_sigma_pair_is_degenerate() {
        let color = Image::from_fn(10, 8, 3, |x, y, c| ((x + 2 * y + c) % 7) as f64 / 6.0).unwrap();
        let m = Image::from_fn(10, 8, 1, |x, _, _| if x < 5 { 1.0 } else { 0.25 }).unwrap();
        let fg = ForegroundAsset::from_straight(&color, m).unwrap();
        let bg = Image::from_fn(10, 8, 3, |x, y, _| ((x * y) % 5) as f64 / 4.0).unwrap();
        let p = generate_pair(&fg, &bg, 0.0, false).unwrap();
        assert_eq!(p.img_a, p.gt);
        assert_eq!(p.img_b, p.gt);
    }
}
