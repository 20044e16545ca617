//! Gaussian kernels and separable convolution with reflect-101 borders.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{arg_err, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// Truncated, renormalised 1-D Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel<T> {
    sigma: T,
    radius: usize,
    taps: Vec<T>,
}

impl<T: Scalar> GaussianKernel<T> {
    /// Kernel with radius `ceil(3σ)` (at least 1 when σ > 0). σ = 0 gives the
    /// identity kernel `[1]`.
    pub fn new(sigma: T) -> Result<Self> {
        if !sigma.is_finite() || sigma < T::zero() {
            return arg_err(format!("sigma must be finite and non-negative, got {sigma}"));
        }
        if sigma == T::zero() {
            return Ok(Self {
                sigma,
                radius: 0,
                taps: vec![T::one()],
            });
        }
        let s = sigma.as_f64();
        let radius = ((3.0 * s).ceil() as usize).max(1);
        // Taps are computed in f64 regardless of T so that f32 kernels are the
        // correctly rounded f64 kernel.
        let raw: Vec<f64> = (0..=2 * radius)
            .map(|i| {
                let d = i as f64 - radius as f64;
                (-d * d / (2.0 * s * s)).exp()
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        let taps = raw.into_iter().map(|w| T::lit(w / sum)).collect();
        Ok(Self { sigma, radius, taps })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    pub fn is_identity(&self) -> bool {
        self.radius == 0
    }
}

/// Reflect-101 (mirror without repeating the edge sample) index mapping for
/// any offset, including offsets more than one period outside `[0, n)`.
#[inline]
pub fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// Separable Gaussian blur: a horizontal pass followed by a vertical pass,
/// reflect-101 at the borders. σ = 0 returns a copy.
pub fn gaussian_blur<T: Scalar>(img: &Image<T>, sigma: T) -> Result<Image<T>> {
    let kernel = GaussianKernel::new(sigma)?;
    Ok(convolve_separable(img, &kernel))
}

pub fn convolve_separable<T: Scalar>(img: &Image<T>, kernel: &GaussianKernel<T>) -> Image<T> {
    if kernel.is_identity() {
        return img.clone();
    }
    let tmp = horizontal_pass(img, kernel.taps());
    vertical_pass(&tmp, kernel.taps())
}

fn horizontal_pass<T: Scalar>(img: &Image<T>, taps: &[T]) -> Image<T> {
    let (w, c) = (img.width(), img.channels());
    let r = (taps.len() / 2) as isize;
    let src = img.data();
    let mut out = img.clone();
    out.data_mut()
        .par_chunks_mut(w * c)
        .enumerate()
        .for_each(|(y, row)| {
            let srow = &src[y * w * c..(y + 1) * w * c];
            for x in 0..w {
                for ch in 0..c {
                    let mut acc = T::zero();
                    for (k, &t) in taps.iter().enumerate() {
                        let sx = reflect101(x as isize + k as isize - r, w);
                        acc = acc + t * srow[sx * c + ch];
                    }
                    row[x * c + ch] = acc;
                }
            }
        });
    out
}

fn vertical_pass<T: Scalar>(img: &Image<T>, taps: &[T]) -> Image<T> {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let r = (taps.len() / 2) as isize;
    let stride = w * c;
    let src = img.data();
    let mut out = img.clone();
    out.data_mut()
        .par_chunks_mut(stride)
        .enumerate()
        .for_each(|(y, row)| {
            row.fill(T::zero());
            for (k, &t) in taps.iter().enumerate() {
                let sy = reflect101(y as isize + k as isize - r, h);
                let srow = &src[sy * stride..(sy + 1) * stride];
                for (o, &s) in row.iter_mut().zip(srow) {
                    *o = *o + t * s;
                }
            }
        });
    out
}

/// Sum over a `(2·radius+1)²` square window with reflect-101 borders.
pub fn box_sum<T: Scalar>(img: &Image<T>, radius: usize) -> Image<T> {
    let taps = vec![T::one(); 2 * radius + 1];
    let tmp = horizontal_pass(img, &taps);
    vertical_pass(&tmp, &taps)
}

/// Additive zero-mean Gaussian noise, the optional `n(x, y)` term of the
/// one-parameter model. Output is not clamped.
pub fn add_noise<T: Scalar, R: Rng + ?Sized>(img: &Image<T>, stddev: f64, rng: &mut R) -> Result<Image<T>> {
    if !stddev.is_finite() || stddev < 0.0 {
        return arg_err(format!("noise stddev must be finite and non-negative, got {stddev}"));
    }
    if stddev == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, stddev).expect("valid normal");
    Ok(img.map(|v| v + T::lit(normal.sample(rng))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_shape() {
        let k = GaussianKernel::<f64>::new(1.0).unwrap();
        assert_eq!(k.radius(), 3);
        assert_eq!(k.taps().len(), 7);
        assert!((k.taps().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for i in 0..3 {
            assert_eq!(k.taps()[i], k.taps()[6 - i]);
        }
        assert_eq!(GaussianKernel::<f64>::new(0.1).unwrap().radius(), 1);
        assert_eq!(GaussianKernel::<f64>::new(2.5).unwrap().radius(), 8);
        assert_eq!(GaussianKernel::<f64>::new(0.0).unwrap().taps(), &[1.0]);
        assert!(GaussianKernel::<f64>::new(-1.0).is_err());
        assert!(GaussianKernel::<f64>::new(f64::NAN).is_err());
    }

    #[test]
    fn reflect101_mapping() {
        let got: Vec<usize> = (-5..9).map(|i| reflect101(i, 4)).collect();
        assert_eq!(got, vec![1, 2, 3, 2, 1, 0, 1, 2, 3, 2, 1, 0, 1, 2]);
        assert_eq!(reflect101(-7, 1), 0);
        assert_eq!(reflect101(3, 2), 1);
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let img = Image::<f64>::filled(5, 4, 3, 0.37).unwrap();
        // radius 24 wraps several times around a 5x4 image
        let out = gaussian_blur(&img, 8.0).unwrap();
        assert!(out.max_abs_diff(&img).unwrap() < 1e-14);
        let imgf = Image::<f32>::filled(7, 7, 1, 0.5).unwrap();
        let outf = gaussian_blur(&imgf, 1.5).unwrap();
        assert!(outf.max_abs_diff(&imgf).unwrap() < 1e-6);
    }

    #[test]
    fn zero_sigma_is_copy_and_negative_rejected() {
        let img = Image::<f64>::from_fn(4, 3, 1, |x, y, _| (x * 7 + y) as f64 / 30.0).unwrap();
        assert_eq!(gaussian_blur(&img, 0.0).unwrap(), img);
        assert!(gaussian_blur(&img, -0.5).is_err());
    }

    #[test]
    fn box_sum_counts_window() {
        let img = Image::<f64>::filled(6, 5, 1, 1.0).unwrap();
        let s = box_sum(&img, 2);
        assert!(s.data().iter().all(|&v| v == 25.0));
    }

    #[test]
    fn zero_noise_is_identity() {
        let img = Image::<f64>::filled(2, 2, 1, 0.5).unwrap();
        let mut rng = rand::rng();
        assert_eq!(add_noise(&img, 0.0, &mut rng).unwrap(), img);
        assert!(add_noise(&img, -1.0, &mut rng).is_err());
    }
}
