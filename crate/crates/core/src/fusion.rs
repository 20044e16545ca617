//! Guidance-map fusion.
//!
//! The initial result blends the sources with the guidance map; the boundary
//! map `1 − |2·g − 1|` is 1 on the 0.5 band and 0 elsewhere, so a correction
//! image only ever touches the band. Away from the band the output is decided
//! entirely by the focused source.

use std::path::Path;

use crate::error::{arg_err, Result};
use crate::guidance::GuidanceMap;
use crate::image::Image;
use crate::io::{load_png, save_png, BitDepth};
use crate::scalar::Scalar;

/// Where the boundary correction comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrectionSource<T> {
    /// No correction: the output is the initial fusion.
    Zero,
    /// A signed correction image with values in `[−1, 1]`.
    Image(Image<T>),
    /// Exact correction `GT − initial`, available for synthetic pairs.
    Oracle(Image<T>),
}

/// `g·A + (1 − g)·B`, per pixel and channel.
pub fn initial_fusion<T: Scalar>(a: &Image<T>, b: &Image<T>, gmap: &GuidanceMap<T>) -> Result<Image<T>> {
    a.ensure_same_shape(b, "initial_fusion sources")?;
    a.ensure_same_dims(gmap.as_image(), "initial_fusion guidance")?;
    let c = a.channels();
    let mut out = a.clone();
    for (p, &g) in gmap.as_image().data().iter().enumerate() {
        let ng = T::one() - g;
        for ch in 0..c {
            let i = p * c + ch;
            out.data_mut()[i] = g * a.data()[i] + ng * b.data()[i];
        }
    }
    Ok(out)
}

/// `1 − |2·g − 1|`.
pub fn boundary_map<T: Scalar>(gmap: &GuidanceMap<T>) -> Image<T> {
    gmap.as_image().map(|g| T::one() - (T::two() * g - T::one()).abs())
}

/// `clamp(initial + Bmap·C, 0, 1)` with `C` taken from `corr`.
pub fn final_fusion<T: Scalar>(
    a: &Image<T>,
    b: &Image<T>,
    gmap: &GuidanceMap<T>,
    corr: &CorrectionSource<T>,
) -> Result<Image<T>> {
    let ini = initial_fusion(a, b, gmap)?;
    let correction = match corr {
        CorrectionSource::Zero => return Ok(ini),
        CorrectionSource::Image(c) => {
            let c = c.with_channels(ini.channels())?;
            c.ensure_same_dims(&ini, "correction image")?;
            c
        }
        CorrectionSource::Oracle(gt) => {
            let gt = gt.with_channels(ini.channels())?;
            gt.ensure_same_dims(&ini, "oracle ground truth")?;
            gt.zip_map(&ini, |g, i| g - i)?
        }
    };
    let bmap = boundary_map(gmap);
    let c = ini.channels();
    let mut out = ini;
    for (p, &m) in bmap.data().iter().enumerate() {
        for ch in 0..c {
            let i = p * c + ch;
            let v = out.data()[i] + m * correction.data()[i];
            out.data_mut()[i] = v.max(T::zero()).min(T::one());
        }
    }
    Ok(out)
}

/// Builds an oracle correction source, rejecting a missing ground truth.
pub fn oracle_correction<T: Scalar>(gt: Option<Image<T>>) -> Result<CorrectionSource<T>> {
    match gt {
        Some(gt) => Ok(CorrectionSource::Oracle(gt)),
        None => arg_err("oracle correction requested without ground truth"),
    }
}

/// Loads a correction stored with a 0.5 bias: sample `s` decodes to `2·s − 1`.
pub fn load_correction<T: Scalar>(path: impl AsRef<Path>) -> Result<Image<T>> {
    let stored: Image<T> = load_png(path)?;
    Ok(stored.map(|s| T::two() * s - T::one()))
}

/// Stores a correction in `[−1, 1]` as 16-bit with a 0.5 bias.
pub fn save_correction<T: Scalar>(corr: &Image<T>, path: impl AsRef<Path>) -> Result<()> {
    let biased = corr.map(|c| (c + T::one()) * T::half());
    save_png(&biased, path, BitDepth::Sixteen)
}
