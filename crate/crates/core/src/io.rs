//! 8/16-bit PNG I/O and atomic file writes.
//!
//! Samples map linearly to `[0, 1]` by dividing by `2^bits - 1`. No gamma or
//! colour-space conversion is applied in either direction.

use std::io::{Cursor, Write};
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::{arg_err, Error, Result};
use crate::image::Image;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum BitDepth {
    #[serde(rename = "8")]
    Eight,
    #[default]
    #[serde(rename = "16")]
    Sixteen,
}

impl BitDepth {
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            8 => Ok(BitDepth::Eight),
            16 => Ok(BitDepth::Sixteen),
            other => arg_err(format!("unsupported bit depth {other}; expected 8 or 16")),
        }
    }

    pub fn max_value(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

pub fn load_png<T: Scalar>(path: impl AsRef<Path>) -> Result<Image<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let decoded = image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let scale8 = |v: u8| T::lit(v as f64 / 255.0);
    let scale16 = |v: u16| T::lit(v as f64 / 65535.0);
    let (channels, data): (usize, Vec<T>) = match decoded {
        DynamicImage::ImageLuma8(b) => (1, b.into_raw().into_iter().map(scale8).collect()),
        DynamicImage::ImageRgb8(b) => (3, b.into_raw().into_iter().map(scale8).collect()),
        DynamicImage::ImageLuma16(b) => (1, b.into_raw().into_iter().map(scale16).collect()),
        DynamicImage::ImageRgb16(b) => (3, b.into_raw().into_iter().map(scale16).collect()),
        other => {
            return Err(Error::format(
                path,
                format!("unsupported PNG layout {:?}; expected 8/16-bit gray or RGB", other.color()),
            ))
        }
    };
    Image::from_vec(w, h, channels, data).map_err(|e| Error::format(path, e.to_string()))
}

/// Raw 8-bit grayscale samples, without normalisation.
pub fn load_gray8(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let decoded = image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })?;
    match decoded {
        DynamicImage::ImageLuma8(b) => Ok((b.width() as usize, b.height() as usize, b.into_raw())),
        other => Err(Error::format(
            path,
            format!("expected an 8-bit grayscale PNG, found {:?}", other.color()),
        )),
    }
}

/// Quantises `v` (clamped to `[0, 1]`) to an integer level.
#[inline]
pub fn quantize(v: f64, depth: BitDepth) -> u16 {
    (v.clamp(0.0, 1.0) * depth.max_value()).round() as u16
}

/// Encodes an image as PNG bytes. Values are clamped to `[0, 1]`.
pub fn encode_png<T: Scalar>(img: &Image<T>, depth: BitDepth) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let dynamic = match (img.channels(), depth) {
        (1, BitDepth::Eight) => DynamicImage::ImageLuma8(
            ImageBuffer::<Luma<u8>, _>::from_raw(w, h, quantized(img, depth, |v| v as u8)).unwrap(),
        ),
        (3, BitDepth::Eight) => DynamicImage::ImageRgb8(
            ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, quantized(img, depth, |v| v as u8)).unwrap(),
        ),
        (1, BitDepth::Sixteen) => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(w, h, quantized(img, depth, |v| v)).unwrap(),
        ),
        (3, BitDepth::Sixteen) => DynamicImage::ImageRgb16(
            ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, quantized(img, depth, |v| v)).unwrap(),
        ),
        (c, _) => return arg_err(format!("cannot encode {c}-channel image as PNG")),
    };
    encode_dynamic(&dynamic)
}

pub fn encode_gray8(width: usize, height: usize, levels: Vec<u8>) -> Result<Vec<u8>> {
    let buf = ImageBuffer::<Luma<u8>, _>::from_raw(width as u32, height as u32, levels)
        .ok_or_else(|| Error::Argument("gray8 buffer size mismatch".into()))?;
    encode_dynamic(&DynamicImage::ImageLuma8(buf))
}

fn encode_dynamic(img: &DynamicImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).map_err(|source| Error::Codec {
        path: "<memory>".into(),
        source,
    })?;
    Ok(out.into_inner())
}

fn quantized<T: Scalar, U>(img: &Image<T>, depth: BitDepth, f: impl Fn(u16) -> U) -> Vec<U> {
    img.data().iter().map(|v| f(quantize(v.as_f64(), depth))).collect()
}

pub fn save_png<T: Scalar>(img: &Image<T>, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    write_atomic(path, &encode_png(img, depth)?)
}

/// Writes via a temporary file in the destination directory, then renames.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
