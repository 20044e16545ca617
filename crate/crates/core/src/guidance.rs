//! Three-level guidance maps: 1 where source A is in focus, 0 where source B
//! is, and 0.5 on the focused/defocused boundary band.
//!
//! Maps are stored as 8-bit grayscale PNGs with levels `{0, 128, 255}`.

use std::path::Path;

use serde::Serialize;

use crate::blur::box_sum;
use crate::error::{arg_err, Error, Result};
use crate::image::Image;
use crate::io::{encode_gray8, load_gray8, write_atomic};
use crate::scalar::Scalar;

pub const LEVEL_B: u8 = 0;
pub const LEVEL_BAND: u8 = 128;
pub const LEVEL_A: u8 = 255;
/// Stored values within this distance of a level snap to it.
pub const LEVEL_SNAP: u8 = 2;
const MAX_REPORTED: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceMap<T> {
    map: Image<T>,
}

impl<T: Scalar> GuidanceMap<T> {
    /// Accepts a single-channel image whose samples are exactly 0, 0.5 or 1.
    pub fn from_image(map: Image<T>) -> Result<Self> {
        map.ensure_single_channel("guidance map")?;
        let bad: Vec<(usize, usize, f64)> = map
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &v)| !is_level(v))
            .map(|(i, &v)| (i % map.width(), i / map.width(), v.as_f64()))
            .collect();
        if bad.is_empty() {
            Ok(Self { map })
        } else {
            Err(Error::Validation(off_level_message(bad.len(), &bad)))
        }
    }

    /// Snaps 8-bit levels (±[`LEVEL_SNAP`] of 0/128/255) to 0/0.5/1.
    pub fn from_levels(width: usize, height: usize, levels: &[u8]) -> Result<Self> {
        let report = GuidanceReport::from_levels(width, height, levels);
        if !report.off_level.is_empty() {
            return Err(Error::Validation(off_level_message(
                report.off_level_count,
                &report
                    .off_level
                    .iter()
                    .map(|p| (p.x, p.y, p.value as f64))
                    .collect::<Vec<_>>(),
            )));
        }
        let data = levels.iter().map(|&v| T::lit(snap(v).unwrap())).collect();
        Ok(Self {
            map: Image::from_vec(width, height, 1, data)?,
        })
    }

    /// Map built from a per-pixel level function.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Level) -> Result<Self> {
        let map = Image::from_fn(width, height, 1, |x, y, _| f(x, y).value())?;
        Ok(Self { map })
    }

    pub fn as_image(&self) -> &Image<T> {
        &self.map
    }

    pub fn into_image(self) -> Image<T> {
        self.map
    }

    pub fn width(&self) -> usize {
        self.map.width()
    }

    pub fn height(&self) -> usize {
        self.map.height()
    }

    pub fn level(&self, x: usize, y: usize) -> Level {
        Level::of(self.map.get(x, y, 0))
    }

    /// Exchanges the roles of A and B: 0 ↔ 1, band unchanged.
    pub fn swapped(&self) -> Self {
        Self {
            map: self.map.map(|v| T::one() - v),
        }
    }

    pub fn to_levels(&self) -> Vec<u8> {
        self.map
            .data()
            .iter()
            .map(|&v| Level::of(v).stored())
            .collect()
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for &v in self.map.data() {
            counts[Level::of(v) as usize] += 1;
        }
        counts
    }

    /// Band pixels that lack a 0 pixel or a 1 pixel within Chebyshev distance
    /// `radius`. Maps missing either the 0 or the 1 level are degenerate and
    /// report nothing.
    pub fn band_violations(&self, radius: usize) -> Vec<(usize, usize)> {
        let (w, h) = (self.width(), self.height());
        let counts = self.counts();
        if counts[Level::B as usize] == 0 || counts[Level::A as usize] == 0 {
            return Vec::new();
        }
        let levels: Vec<Level> = self.map.data().iter().map(|&v| Level::of(v)).collect();
        let near_b = dilate(&levels.iter().map(|&l| l == Level::B).collect::<Vec<_>>(), w, h, radius);
        let near_a = dilate(&levels.iter().map(|&l| l == Level::A).collect::<Vec<_>>(), w, h, radius);
        levels
            .iter()
            .enumerate()
            .filter(|&(i, &l)| l == Level::Band && !(near_a[i] && near_b[i]))
            .map(|(i, _)| (i % w, i / w))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    B = 0,
    Band = 1,
    A = 2,
}

impl Level {
    #[inline]
    pub fn value<T: Scalar>(self) -> T {
        match self {
            Level::B => T::zero(),
            Level::Band => T::half(),
            Level::A => T::one(),
        }
    }

    #[inline]
    pub fn stored(self) -> u8 {
        match self {
            Level::B => LEVEL_B,
            Level::Band => LEVEL_BAND,
            Level::A => LEVEL_A,
        }
    }

    /// Level of an already-validated sample.
    #[inline]
    fn of<T: Scalar>(v: T) -> Level {
        if v == T::zero() {
            Level::B
        } else if v == T::one() {
            Level::A
        } else {
            Level::Band
        }
    }
}

#[inline]
fn is_level<T: Scalar>(v: T) -> bool {
    v == T::zero() || v == T::half() || v == T::one()
}

fn snap(v: u8) -> Option<f64> {
    if v <= LEVEL_B + LEVEL_SNAP {
        Some(0.0)
    } else if v.abs_diff(LEVEL_BAND) <= LEVEL_SNAP {
        Some(0.5)
    } else if v >= LEVEL_A - LEVEL_SNAP {
        Some(1.0)
    } else {
        None
    }
}

fn off_level_message(count: usize, first: &[(usize, usize, f64)]) -> String {
    let listed: Vec<String> = first
        .iter()
        .take(MAX_REPORTED)
        .map(|(x, y, v)| format!("({x}, {y})={v}"))
        .collect();
    format!("{count} off-level guidance pixel(s), first: {}", listed.join(", "))
}

/// Square-window binary dilation with the window clipped at the borders.
fn dilate(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    let mut rows = vec![false; w * h];
    for y in 0..h {
        let row = &mask[y * w..(y + 1) * w];
        // prefix counts make each window test O(1)
        let mut prefix = vec![0usize; w + 1];
        for x in 0..w {
            prefix[x + 1] = prefix[x] + row[x] as usize;
        }
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r + 1).min(w);
            rows[y * w + x] = prefix[hi] > prefix[lo];
        }
    }
    let mut out = vec![false; w * h];
    for x in 0..w {
        let mut prefix = vec![0usize; h + 1];
        for y in 0..h {
            prefix[y + 1] = prefix[y] + rows[y * w + x] as usize;
        }
        for y in 0..h {
            let lo = y.saturating_sub(r);
            let hi = (y + r + 1).min(h);
            out[y * w + x] = prefix[hi] > prefix[lo];
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct OffLevelPixel {
    pub x: usize,
    pub y: usize,
    pub value: u8,
}

/// Result of checking a stored guidance map.
#[derive(Debug, Clone, Serialize)]
pub struct GuidanceReport {
    pub width: usize,
    pub height: usize,
    /// Pixel counts for levels 0, 0.5 and 1 (after snapping).
    pub counts: [usize; 3],
    pub off_level_count: usize,
    /// First offending pixels, at most ten.
    pub off_level: Vec<OffLevelPixel>,
    /// Band pixels without both a 0 and a 1 pixel nearby, when a radius was given.
    pub band_violation_count: Option<usize>,
}

impl GuidanceReport {
    pub fn from_levels(width: usize, height: usize, levels: &[u8]) -> Self {
        let mut counts = [0; 3];
        let mut off_level = Vec::new();
        let mut off_level_count = 0;
        for (i, &v) in levels.iter().enumerate() {
            match snap(v) {
                Some(l) => counts[(l * 2.0) as usize] += 1,
                None => {
                    off_level_count += 1;
                    if off_level.len() < MAX_REPORTED {
                        off_level.push(OffLevelPixel {
                            x: i % width,
                            y: i / width,
                            value: v,
                        });
                    }
                }
            }
        }
        Self {
            width,
            height,
            counts,
            off_level_count,
            off_level,
            band_violation_count: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.off_level_count == 0 && self.band_violation_count.unwrap_or(0) == 0
    }
}

/// Loads and validates an 8-bit guidance PNG; off-level pixels are a
/// validation error.
pub fn load_guidance<T: Scalar>(path: impl AsRef<Path>) -> Result<GuidanceMap<T>> {
    let (w, h, levels) = load_gray8(path)?;
    GuidanceMap::from_levels(w, h, &levels)
}

/// Validates a stored guidance PNG without failing on off-level pixels.
/// With `band_radius`, the band is also checked against the 0/1 regions.
pub fn validate_guidance(path: impl AsRef<Path>, band_radius: Option<usize>) -> Result<GuidanceReport> {
    let (w, h, levels) = load_gray8(path)?;
    let mut report = GuidanceReport::from_levels(w, h, &levels);
    if let (Some(r), 0) = (band_radius, report.off_level_count) {
        let map = GuidanceMap::<f64>::from_levels(w, h, &levels)?;
        report.band_violation_count = Some(map.band_violations(r).len());
    }
    Ok(report)
}

pub fn save_guidance<T: Scalar>(map: &GuidanceMap<T>, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &encode_guidance(map)?)
}

pub fn encode_guidance<T: Scalar>(map: &GuidanceMap<T>) -> Result<Vec<u8>> {
    encode_gray8(map.width(), map.height(), map.to_levels())
}

/// Parameters of the focus-measure estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EstimateParams {
    /// Side of the square window summing squared Laplacian responses (odd).
    pub window: usize,
    /// Pixels within this Chebyshev distance of a 0/1 transition become 0.5.
    pub band_radius: usize,
    /// Radius of the square majority filter removing speckle.
    pub majority_radius: usize,
}

impl Default for EstimateParams {
    fn default() -> Self {
        Self {
            window: 9,
            band_radius: 6,
            majority_radius: 7,
        }
    }
}

/// Classical stand-in for a learned guidance estimator.
///
/// Focus measure is the windowed energy of the 4-neighbour Laplacian of the
/// grayscale image. A pixel goes to A (1) only where A's measure is strictly
/// larger; ties go to B (0). A majority filter then removes speckle and every
/// pixel within `band_radius` of a 0/1 transition becomes 0.5. Band pixels
/// that end up farther than `2·band_radius + 1` from either decided side are
/// reassigned, so the band always separates a 0 region from a 1 region.
pub fn estimate_guidance<T: Scalar>(a: &Image<T>, b: &Image<T>, params: EstimateParams) -> Result<GuidanceMap<T>> {
    a.ensure_same_dims(b, "estimate_guidance")?;
    if params.window.is_multiple_of(2) || params.window == 0 {
        return arg_err(format!("window must be odd and positive, got {}", params.window));
    }
    let (w, h) = (a.width(), a.height());
    let fa = focus_measure(a, params.window / 2);
    let fb = focus_measure(b, params.window / 2);
    let decision = fa.zip_map(&fb, |x, y| if x > y { T::one() } else { T::zero() })?;

    let votes = box_sum(&decision, params.majority_radius);
    let half = T::from_usize((2 * params.majority_radius + 1).pow(2)).unwrap() * T::half();
    let cleaned: Vec<bool> = votes.data().iter().map(|&v| v > half).collect();

    let r = params.band_radius;
    let near_a = dilate(&cleaned, w, h, r);
    let near_b = dilate(&cleaned.iter().map(|&v| !v).collect::<Vec<_>>(), w, h, r);
    let mut levels: Vec<Level> = (0..w * h)
        .map(|i| {
            if near_a[i] && near_b[i] {
                Level::Band
            } else if cleaned[i] {
                Level::A
            } else {
                Level::B
            }
        })
        .collect();

    // Regions thinner than the band are swallowed by it; such band pixels
    // have no decided pixel of one side within the band width and are handed
    // to the other side. Reassigning only adds 0/1 pixels, so one pass leaves
    // every band pixel within 2r + 1 of both a 0 and a 1.
    let reach = 2 * r + 1;
    let has_a = dilate(&levels.iter().map(|&l| l == Level::A).collect::<Vec<_>>(), w, h, reach);
    let has_b = dilate(&levels.iter().map(|&l| l == Level::B).collect::<Vec<_>>(), w, h, reach);
    for (i, l) in levels.iter_mut().enumerate() {
        if *l == Level::Band {
            *l = match (has_a[i], has_b[i]) {
                (true, true) => Level::Band,
                (false, true) => Level::B,
                (true, false) => Level::A,
                (false, false) if cleaned[i] => Level::A,
                (false, false) => Level::B,
            };
        }
    }
    GuidanceMap::from_fn(w, h, |x, y| levels[y * w + x])
}

/// Windowed sum of squared 4-neighbour Laplacian responses (reflect-101).
pub fn focus_measure<T: Scalar>(img: &Image<T>, window_radius: usize) -> Image<T> {
    let g = img.to_gray();
    let (w, h) = (g.width(), g.height());
    let four = T::lit(4.0);
    let lap = Image::from_fn(w, h, 1, |x, y, _| {
        let at = |dx: isize, dy: isize| {
            let sx = crate::blur::reflect101(x as isize + dx, w);
            let sy = crate::blur::reflect101(y as isize + dy, h);
            g.get(sx, sy, 0)
        };
        let l = at(-1, 0) + at(1, 0) + at(0, -1) + at(0, 1) - four * at(0, 0);
        l * l
    })
    .expect("valid dimensions");
    box_sum(&lap, window_radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_snapping() {
        let m = GuidanceMap::<f64>::from_levels(6, 1, &[0, 2, 126, 130, 253, 255]).unwrap();
        assert_eq!(m.as_image().data(), &[0.0, 0.0, 0.5, 0.5, 1.0, 1.0]);
        assert_eq!(m.to_levels(), vec![0, 0, 128, 128, 255, 255]);
        let err = GuidanceMap::<f64>::from_levels(3, 1, &[0, 64, 255]).unwrap_err();
        assert!(matches!(err, Error::Validation(ref s) if s.contains("(1, 0)=64")));
    }

    #[test]
    fn report_lists_first_ten() {
        let levels: Vec<u8> = (0..30).map(|i| if i % 2 == 0 { 64 } else { 0 }).collect();
        let r = GuidanceReport::from_levels(30, 1, &levels);
        assert_eq!(r.off_level_count, 15);
        assert_eq!(r.off_level.len(), 10);
        assert!(!r.is_valid());
    }

    #[test]
    fn from_image_rejects_soft_values() {
        let img = Image::<f64>::from_vec(2, 1, 1, vec![0.5, 0.3]).unwrap();
        assert!(GuidanceMap::from_image(img).is_err());
        let ok = Image::<f64>::from_vec(3, 1, 1, vec![0.5, 0.0, 1.0]).unwrap();
        let m = GuidanceMap::from_image(ok).unwrap();
        assert_eq!(m.swapped().as_image().data(), &[0.5, 1.0, 0.0]);
    }

    #[test]
    fn identical_inputs_tie_to_b() {
        let img = Image::<f64>::from_fn(20, 20, 1, |x, y, _| ((x * 7 + y * 3) % 5) as f64 / 4.0).unwrap();
        let m = estimate_guidance(&img, &img, EstimateParams::default()).unwrap();
        assert_eq!(m.counts(), [400, 0, 0]);
    }

    #[test]
    fn band_violation_check() {
        // 0 0 .5 .5 .5 1
        let m = GuidanceMap::<f64>::from_levels(6, 1, &[0, 0, 128, 128, 128, 255]).unwrap();
        assert!(m.band_violations(3).is_empty());
        assert_eq!(m.band_violations(2), vec![(2, 0), (4, 0)]);
        assert_eq!(m.band_violations(1), vec![(2, 0), (3, 0), (4, 0)]);
        let degenerate = GuidanceMap::<f64>::from_levels(3, 1, &[0, 128, 128]).unwrap();
        assert!(degenerate.band_violations(0).is_empty());
    }

    #[test]
    fn dilation_clips_at_borders() {
        let mask = [true, false, false, false, false];
        assert_eq!(dilate(&mask, 5, 1, 2), vec![true, true, true, false, false]);
    }
}
