//! No-reference fusion quality metrics and the batch evaluation harness.
//!
//! For an `M × N` grayscale image `I(m, n)` (row `m`, column `n`):
//!
//! * LIF: `(2/MN)·Σ min{p, 1 − p}` with `p = sin(π/2·(1 − I/I_max))`; lower is better.
//! * AG: `1/((M−1)(N−1))·Σ ¼·sqrt(∂_m I² + ∂_n I²)` with forward differences.
//! * MSD: `1/((M−1)(N−1))·sqrt(Σ (I − Ī)²)` with `Ī` the mean of the whole image.
//! * GLD: `1/((M−1)(N−1))·Σ (|I(m,n) − I(m+1,n)| + |I(m,n) − I(m,n+1)|)`.
//!
//! AG, MSD and GLD sum over `m < M−1`, `n < N−1` and are higher-is-better.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::image::Image;
use crate::io::load_png;
use crate::scalar::Scalar;

/// LIF value plus a flag raised when the image is all zero (value defined as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lif<T> {
    pub value: T,
    pub zero_image: bool,
}

fn gray_input<'a, T: Scalar>(img: &'a Image<T>, what: &str, min_side: usize) -> Result<&'a Image<T>> {
    img.ensure_single_channel(what)?;
    if img.width() < min_side || img.height() < min_side {
        return arg_err(format!(
            "{what} needs at least {min_side}x{min_side} pixels, got {}x{}",
            img.width(),
            img.height()
        ));
    }
    Ok(img)
}

fn interior_norm<T: Scalar>(img: &Image<T>) -> T {
    T::from_usize((img.width() - 1) * (img.height() - 1)).unwrap()
}

/// LIF with `I_max` taken as the image's own maximum.
pub fn lif<T: Scalar>(img: &Image<T>) -> Result<Lif<T>> {
    let img = gray_input(img, "LIF", 1)?;
    let i_max = img.data().iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    if i_max == T::zero() {
        log::warn!("LIF of an all-zero image is undefined; reporting 0");
        return Ok(Lif {
            value: T::zero(),
            zero_image: true,
        });
    }
    Ok(Lif {
        value: lif_sum(img, i_max),
        zero_image: false,
    })
}

/// LIF against a fixed peak intensity, e.g. the top of the dynamic range.
pub fn lif_with_max<T: Scalar>(img: &Image<T>, i_max: T) -> Result<T> {
    let img = gray_input(img, "LIF", 1)?;
    if !(i_max > T::zero() && i_max.is_finite()) {
        return arg_err(format!("LIF peak intensity must be positive, got {i_max}"));
    }
    Ok(lif_sum(img, i_max))
}

fn lif_sum<T: Scalar>(img: &Image<T>, i_max: T) -> T {
    let half_pi = T::FRAC_PI_2();
    let sum = img.data().iter().fold(T::zero(), |acc, &v| {
        let p = (half_pi * (T::one() - v / i_max)).sin();
        acc + p.min(T::one() - p)
    });
    let mn = T::from_usize(img.pixel_count()).unwrap();
    T::two() / mn * sum
}

pub fn ag<T: Scalar>(img: &Image<T>) -> Result<T> {
    let img = gray_input(img, "AG", 2)?;
    let quarter = T::lit(0.25);
    let mut sum = T::zero();
    for m in 0..img.height() - 1 {
        for n in 0..img.width() - 1 {
            let v = img.get(n, m, 0);
            let dm = img.get(n, m + 1, 0) - v;
            let dn = img.get(n + 1, m, 0) - v;
            sum = sum + quarter * (dm * dm + dn * dn).sqrt();
        }
    }
    Ok(sum / interior_norm(img))
}

pub fn msd<T: Scalar>(img: &Image<T>) -> Result<T> {
    let img = gray_input(img, "MSD", 2)?;
    // Deviations are taken about the first pixel first, so constant images give exactly 0.
    let origin = img.data()[0];
    let mean = img.data().iter().fold(T::zero(), |a, &v| a + (v - origin)) / T::from_usize(img.pixel_count()).unwrap();
    let mut sum = T::zero();
    for m in 0..img.height() - 1 {
        for n in 0..img.width() - 1 {
            let d = img.get(n, m, 0) - origin - mean;
            sum = sum + d * d;
        }
    }
    Ok(sum.sqrt() / interior_norm(img))
}

pub fn gld<T: Scalar>(img: &Image<T>) -> Result<T> {
    let img = gray_input(img, "GLD", 2)?;
    let mut sum = T::zero();
    for m in 0..img.height() - 1 {
        for n in 0..img.width() - 1 {
            let v = img.get(n, m, 0);
            sum = sum + (v - img.get(n, m + 1, 0)).abs() + (v - img.get(n + 1, m, 0)).abs();
        }
    }
    Ok(sum / interior_norm(img))
}

/// Reference-based PSNR (peak 1) over pixels where `mask` is nonzero.
/// Returns infinity when the masked pixels match exactly.
pub fn psnr_masked<T: Scalar>(img: &Image<T>, reference: &Image<T>, mask: Option<&Image<T>>) -> Result<f64> {
    img.ensure_same_shape(reference, "psnr")?;
    let c = img.channels();
    let mut sse = 0.0;
    let mut n = 0usize;
    for (i, (&a, &b)) in img.data().iter().zip(reference.data()).enumerate() {
        if let Some(m) = mask {
            if m.data()[i / c] == T::zero() {
                continue;
            }
        }
        let d = (a - b).as_f64();
        sse += d * d;
        n += 1;
    }
    if n == 0 {
        return arg_err("psnr mask selects no pixels");
    }
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (n as f64 / sse).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricValues {
    pub ag: f64,
    pub lif: f64,
    pub msd: f64,
    pub gld: f64,
}

impl MetricValues {
    /// All four metrics of an image, converted to grayscale by channel mean
    /// and multiplied by `scale` (e.g. 255 for an 8-bit intensity range).
    pub fn compute<T: Scalar>(img: &Image<T>, scale: f64) -> Result<(Self, bool)> {
        let g = img.to_gray().map(|v| v * T::lit(scale));
        let lif = lif(&g)?;
        Ok((
            Self {
                ag: ag(&g)?.as_f64(),
                lif: lif.value.as_f64(),
                msd: msd(&g)?.as_f64(),
                gld: gld(&g)?.as_f64(),
            },
            lif.zero_image,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct WinCounts {
    pub ag: usize,
    pub lif: usize,
    pub msd: usize,
    pub gld: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub id: String,
    pub method: String,
    #[serde(flatten)]
    pub values: MetricValues,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub images: usize,
    pub mean: MetricValues,
    /// Images on which this method strictly beats every other method. Only
    /// meaningful with two or more methods.
    pub wins: WinCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputError {
    pub id: String,
    pub method: String,
    pub path: Option<PathBuf>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_image: Vec<ImageMetrics>,
    pub methods: Vec<MethodSummary>,
    pub errors: Vec<InputError>,
    /// False when any input could not be evaluated.
    pub ok: bool,
}

/// One method's images, keyed by an id shared across methods (typically the
/// file name).
#[derive(Debug, Clone)]
pub struct MethodInput {
    pub label: String,
    pub files: Vec<(String, PathBuf)>,
}

impl MethodInput {
    /// Every `.png` directly inside `dir`, sorted by file name.
    pub fn from_dir(label: impl Into<String>, dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut files = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| crate::error::Error::io(dir, e))? {
            let path = entry.map_err(|e| crate::error::Error::io(dir, e))?.path();
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
                let id = path.file_name().unwrap().to_string_lossy().into_owned();
                files.push((id, path));
            }
        }
        files.sort();
        Ok(Self {
            label: label.into(),
            files,
        })
    }

    pub fn from_files(label: impl Into<String>, paths: impl IntoIterator<Item = PathBuf>) -> Self {
        let mut files: Vec<(String, PathBuf)> = paths
            .into_iter()
            .map(|p| (p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(), p))
            .collect();
        files.sort();
        Self {
            label: label.into(),
            files,
        }
    }
}

/// Loads and evaluates every file. Unreadable inputs are recorded in
/// `errors` and skipped.
pub fn evaluate_batch(methods: &[MethodInput], scale: f64) -> MetricsReport {
    let jobs: Vec<(&str, &str, &Path)> = methods
        .iter()
        .flat_map(|m| m.files.iter().map(move |(id, p)| (m.label.as_str(), id.as_str(), p.as_path())))
        .collect();
    let results: Vec<std::result::Result<ImageMetrics, InputError>> = jobs
        .par_iter()
        .map(|&(method, id, path)| {
            load_png::<f64>(path)
                .and_then(|img| MetricValues::compute(&img, scale))
                .map(|(values, zero)| ImageMetrics {
                    id: id.to_string(),
                    method: method.to_string(),
                    values,
                    warnings: zero_warning(zero),
                })
                .map_err(|e| InputError {
                    id: id.to_string(),
                    method: method.to_string(),
                    path: Some(path.to_path_buf()),
                    message: e.to_string(),
                })
        })
        .collect();
    let labels: Vec<String> = methods.iter().map(|m| m.label.clone()).collect();
    assemble(&labels, results)
}

/// Evaluates in-memory images given as `(id, method, image)`.
pub fn evaluate_images<T: Scalar>(items: &[(String, String, Image<T>)], scale: f64) -> MetricsReport {
    let mut labels: Vec<String> = Vec::new();
    for (_, m, _) in items {
        if !labels.contains(m) {
            labels.push(m.clone());
        }
    }
    let results = items
        .par_iter()
        .map(|(id, method, img)| {
            MetricValues::compute(img, scale)
                .map(|(values, zero)| ImageMetrics {
                    id: id.clone(),
                    method: method.clone(),
                    values,
                    warnings: zero_warning(zero),
                })
                .map_err(|e| InputError {
                    id: id.clone(),
                    method: method.clone(),
                    path: None,
                    message: e.to_string(),
                })
        })
        .collect();
    assemble(&labels, results)
}

fn zero_warning(zero: bool) -> Vec<String> {
    if zero {
        vec!["all-zero image: LIF undefined, reported as 0".to_string()]
    } else {
        Vec::new()
    }
}

fn assemble(labels: &[String], results: Vec<std::result::Result<ImageMetrics, InputError>>) -> MetricsReport {
    let mut per_image = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(m) => per_image.push(m),
            Err(e) => errors.push(e),
        }
    }

    let mut methods: Vec<MethodSummary> = labels
        .iter()
        .map(|label| {
            let rows: Vec<&MetricValues> = per_image.iter().filter(|r| &r.method == label).map(|r| &r.values).collect();
            let n = rows.len();
            let mean = if n == 0 {
                MetricValues::default()
            } else {
                let mut s = MetricValues::default();
                for r in &rows {
                    s.ag += r.ag;
                    s.lif += r.lif;
                    s.msd += r.msd;
                    s.gld += r.gld;
                }
                let nf = n as f64;
                MetricValues {
                    ag: s.ag / nf,
                    lif: s.lif / nf,
                    msd: s.msd / nf,
                    gld: s.gld / nf,
                }
            };
            MethodSummary {
                method: label.clone(),
                images: n,
                mean,
                wins: WinCounts::default(),
            }
        })
        .collect();

    if labels.len() >= 2 {
        let mut ids: Vec<&str> = per_image.iter().map(|r| r.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        for id in ids {
            let rows: Vec<(usize, &MetricValues)> = labels
                .iter()
                .enumerate()
                .filter_map(|(k, l)| per_image.iter().find(|r| r.id == id && &r.method == l).map(|r| (k, &r.values)))
                .collect();
            if rows.len() != labels.len() {
                continue;
            }
            let winner = |key: fn(&MetricValues) -> f64, higher: bool| -> Option<usize> {
                rows.iter().map(|&(k, _)| k).find(|&k| {
                    let me = key(rows.iter().find(|r| r.0 == k).unwrap().1);
                    rows.iter()
                        .filter(|r| r.0 != k)
                        .all(|r| if higher { me > key(r.1) } else { me < key(r.1) })
                })
            };
            if let Some(k) = winner(|v| v.ag, true) {
                methods[k].wins.ag += 1;
            }
            if let Some(k) = winner(|v| v.lif, false) {
                methods[k].wins.lif += 1;
            }
            if let Some(k) = winner(|v| v.msd, true) {
                methods[k].wins.msd += 1;
            }
            if let Some(k) = winner(|v| v.gld, true) {
                methods[k].wins.gld += 1;
            }
        }
    }

    let ok = errors.is_empty();
    MetricsReport {
        per_image,
        methods,
        errors,
        ok,
    }
}

impl MetricsReport {
    /// Plain-text table: per-image rows, then per-method means and win counts.
    pub fn to_table(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "{:<28} {:<14} {:>10} {:>10} {:>10} {:>10}", "image", "method", "AG", "LIF", "MSD", "GLD");
        for r in &self.per_image {
            let v = &r.values;
            let _ = writeln!(
                s,
                "{:<28} {:<14} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
                r.id, r.method, v.ag, v.lif, v.msd, v.gld
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14} {:>6} {:>14} {:>14} {:>14} {:>14}", "method", "n", "AG (wins)", "LIF (wins)", "MSD (wins)", "GLD (wins)");
        for m in &self.methods {
            let _ = writeln!(
                s,
                "{:<14} {:>6} {:>9.5} ({:>2}) {:>9.5} ({:>2}) {:>9.5} ({:>2}) {:>9.5} ({:>2})",
                m.method, m.images, m.mean.ag, m.wins.ag, m.mean.lif, m.wins.lif, m.mean.msd, m.wins.msd, m.mean.gld, m.wins.gld
            );
        }
        for e in &self.errors {
            let _ = writeln!(s, "error: {} [{}]: {}", e.id, e.method, e.message);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_zero() {
        let img = Image::<f64>::filled(6, 5, 1, 0.4).unwrap();
        assert_eq!(ag(&img).unwrap(), 0.0);
        assert_eq!(msd(&img).unwrap(), 0.0);
        assert_eq!(gld(&img).unwrap(), 0.0);
        assert_eq!(lif(&img).unwrap().value, 0.0);
    }

    #[test]
    fn mid_gray_lif() {
        let mut img = Image::<f64>::filled(4, 4, 1, 0.3).unwrap();
        img.set(0, 0, 0, 0.6);
        // one pixel at I_max, 15 at I_max/2
        let want = 2.0 / 16.0 * 15.0 * (1.0 - std::f64::consts::FRAC_1_SQRT_2);
        assert!((lif(&img).unwrap().value - want).abs() < 1e-12);
    }

    #[test]
    fn zero_image_lif_flagged() {
        let img = Image::<f64>::new(3, 3, 1).unwrap();
        let l = lif(&img).unwrap();
        assert!(l.zero_image);
        assert_eq!(l.value, 0.0);
    }

    #[test]
    fn ramp_closed_forms() {
        let c = 0.03;
        let img = Image::<f64>::from_fn(9, 7, 1, |n, _, _| c * n as f64).unwrap();
        assert!((ag(&img).unwrap() - c / 4.0).abs() < 1e-15);
        assert!((gld(&img).unwrap() - c).abs() < 1e-15);
    }

    #[test]
    fn degenerate_sizes_rejected() {
        let row = Image::<f64>::filled(5, 1, 1, 0.1).unwrap();
        assert!(ag(&row).is_err());
        assert!(msd(&row).is_err());
        assert!(gld(&row).is_err());
        let rgb = Image::<f64>::filled(5, 5, 3, 0.1).unwrap();
        assert!(ag(&rgb).is_err());
    }

    #[test]
    fn psnr_infinite_on_exact_match() {
        let a = Image::<f64>::filled(3, 3, 1, 0.2).unwrap();
        assert_eq!(psnr_masked(&a, &a, None).unwrap(), f64::INFINITY);
        let b = a.map(|v| v + 0.1);
        assert!((psnr_masked(&b, &a, None).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn single_image_report() {
        let img = Image::<f64>::from_fn(5, 5, 1, |x, y, _| ((x + y) % 3) as f64 / 2.0).unwrap();
        let r = evaluate_images(&[("a".to_string(), "m".to_string(), img)], 1.0);
        assert_eq!(r.per_image.len(), 1);
        assert_eq!(r.methods[0].mean, r.per_image[0].values);
        assert!(r.ok);
    }
}
