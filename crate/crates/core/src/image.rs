//! Planar-interleaved floating-point image container.
//!
//! Samples are stored row-major with channels interleaved, so the sample for
//! `(x, y, c)` lives at `(y * width + x) * channels + c`. Values are nominally
//! in `[0, 1]` but the container itself only enforces finiteness.

use crate::error::{arg_err, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Scalar> Image<T> {
    /// A zero-filled image. `channels` must be 1 or 3.
    pub fn new(width: usize, height: usize, channels: usize) -> Result<Self> {
        Self::filled(width, height, channels, T::zero())
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: T) -> Result<Self> {
        check_shape(width, height, channels)?;
        if !value.is_finite() {
            return arg_err("fill value must be finite");
        }
        Ok(Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        })
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        check_shape(width, height, channels)?;
        if data.len() != width * height * channels {
            return arg_err(format!(
                "sample count {} does not match {width}x{height}x{channels}",
                data.len()
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return arg_err(format!("non-finite sample at index {i}"));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y, c)` for every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        check_shape(width, height, channels)?;
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::from_vec(width, height, channels, data)
    }

    /// Assembles an image from single-channel planes.
    pub fn from_planes(planes: &[Image<T>]) -> Result<Self> {
        let Some(first) = planes.first() else {
            return arg_err("no planes given");
        };
        for p in planes {
            if p.channels != 1 || p.width != first.width || p.height != first.height {
                return arg_err("planes must be single-channel with identical dimensions");
            }
        }
        Self::from_fn(first.width, first.height, planes.len(), |x, y, c| {
            planes[c].get(x, y, 0)
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.data[self.index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: T) {
        let i = self.index(x, y, c);
        self.data[i] = v;
    }

    /// All channels of pixel `(x, y)`.
    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[T] {
        let i = self.index(x, y, 0);
        &self.data[i..i + self.channels]
    }

    pub fn same_dims(&self, other: &Image<T>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn same_shape(&self, other: &Image<T>) -> bool {
        self.same_dims(other) && self.channels == other.channels
    }

    pub fn ensure_same_shape(&self, other: &Image<T>, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            arg_err(format!(
                "{what}: shape {} does not match {}",
                self.shape_str(),
                other.shape_str()
            ))
        }
    }

    pub fn ensure_same_dims(&self, other: &Image<T>, what: &str) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            arg_err(format!(
                "{what}: dimensions {}x{} do not match {}x{}",
                self.width, self.height, other.width, other.height
            ))
        }
    }

    pub fn ensure_single_channel(&self, what: &str) -> Result<()> {
        if self.channels == 1 {
            Ok(())
        } else {
            arg_err(format!("{what}: expected a single-channel image, got {} channels", self.channels))
        }
    }

    pub fn shape_str(&self) -> String {
        format!("{}x{}x{}", self.width, self.height, self.channels)
    }

    /// Single-channel plane `c`.
    pub fn plane(&self, c: usize) -> Image<T> {
        assert!(c < self.channels, "channel {c} out of range");
        let data = self
            .data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect();
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// Grayscale by unweighted channel mean. Single-channel images are cloned.
    pub fn to_gray(&self) -> Image<T> {
        if self.channels == 1 {
            return self.clone();
        }
        let n = T::from_usize(self.channels).unwrap();
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px.iter().fold(T::zero(), |a, &v| a + v) / n)
            .collect();
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// Converts to `channels` (1 or 3). Gray is replicated to RGB; RGB is
    /// averaged to gray.
    pub fn with_channels(&self, channels: usize) -> Result<Image<T>> {
        match (self.channels, channels) {
            (a, b) if a == b => Ok(self.clone()),
            (3, 1) => Ok(self.to_gray()),
            (1, 3) => Ok(Image {
                width: self.width,
                height: self.height,
                channels: 3,
                data: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
            }),
            (a, b) => arg_err(format!("cannot convert {a} channels to {b}")),
        }
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Image<T> {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise combination of two identically shaped images.
    pub fn zip_map(&self, other: &Image<T>, mut f: impl FnMut(T, T) -> T) -> Result<Image<T>> {
        self.ensure_same_shape(other, "zip_map")?;
        Ok(Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Multiplies every channel by the co-located sample of a single-channel
    /// `weight` image.
    pub fn scale_by(&self, weight: &Image<T>) -> Result<Image<T>> {
        weight.ensure_single_channel("scale_by weight")?;
        self.ensure_same_dims(weight, "scale_by")?;
        let c = self.channels;
        let mut out = self.clone();
        for (px, &w) in out.data.chunks_exact_mut(c).zip(&weight.data) {
            for v in px {
                *v = *v * w;
            }
        }
        Ok(out)
    }

    pub fn clamp01(&self) -> Image<T> {
        self.map(|v| v.max(T::zero()).min(T::one()))
    }

    pub fn min_max(&self) -> (T, T) {
        self.data
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn max_abs_diff(&self, other: &Image<T>) -> Result<T> {
        self.ensure_same_shape(other, "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Converts the sample type.
    pub fn cast<U: Scalar>(&self) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| U::lit(v.as_f64())).collect(),
        }
    }
}

fn check_shape(width: usize, height: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return arg_err(format!("image dimensions must be positive, got {width}x{height}"));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::Argument(format!("unsupported channel count {channels}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Image::<f64>::new(0, 3, 1).is_err());
        assert!(Image::<f64>::new(3, 3, 2).is_err());
        assert!(Image::<f64>::from_vec(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(Image::<f64>::from_vec(1, 1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn layout_is_interleaved() {
        let img = Image::<f64>::from_fn(3, 2, 3, |x, y, c| (100 * y + 10 * x + c) as f64).unwrap();
        assert_eq!(img.get(2, 1, 1), 121.0);
        assert_eq!(img.pixel(1, 0), &[10.0, 11.0, 12.0]);
        assert_eq!(img.plane(2).data(), &[2.0, 12.0, 22.0, 102.0, 112.0, 122.0]);
        let back = Image::from_planes(&[img.plane(0), img.plane(1), img.plane(2)]).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn gray_is_channel_mean() {
        let img = Image::<f64>::from_vec(1, 1, 3, vec![0.0, 0.3, 0.9]).unwrap();
        assert!((img.to_gray().get(0, 0, 0) - 0.4).abs() < 1e-15);
        let rgb = img.to_gray().with_channels(3).unwrap();
        assert_eq!(rgb.channels(), 3);
    }
}
