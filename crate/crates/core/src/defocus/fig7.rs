//! Three overlapping objects at three depths in front of a textured backdrop.
//!
//! Object 1 is nearest and occludes the lower-left of object 2; object 2
//! occludes the left part of object 3. Focusing on one object leaves the
//! layers in front of it blurred by the near σ and those behind it (including
//! the backdrop) blurred by the far σ.

use super::scene::{Layer, Scene};
use crate::error::{arg_err, Result};
use crate::image::Image;
use crate::scalar::Scalar;

pub const FIG7_SIZE: usize = 256;
pub const FIG7_NEAR_SIGMA: f64 = 4.0;
pub const FIG7_FAR_SIGMA: f64 = 2.0;

/// Half-open pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    /// Chebyshev distance from `(x, y)` to the nearest pixel inside the rectangle.
    pub fn distance(&self, x: usize, y: usize) -> usize {
        let dx = if x < self.x0 {
            self.x0 - x
        } else if x >= self.x1 {
            x + 1 - self.x1
        } else {
            0
        };
        let dy = if y < self.y0 {
            self.y0 - y
        } else if y >= self.y1 {
            y + 1 - self.y1
        } else {
            0
        };
        dx.max(dy)
    }
}

/// Object rectangles, front to back.
pub const FIG7_OBJECTS: [Rect; 3] = [
    Rect { x0: 24, y0: 120, x1: 104, y1: 232 },
    Rect { x0: 72, y0: 72, x1: 176, y1: 184 },
    Rect { x0: 128, y0: 40, x1: 224, y1: 200 },
];

const FIG7_COLORS: [[f64; 3]; 3] = [
    [0.85, 0.20, 0.15],
    [0.95, 0.85, 0.20],
    [0.20, 0.55, 0.80],
];

/// Per-layer σ for a given focus: zero for the focused layer, `near` for the
/// layers in front of it, `far` for those behind (the backdrop is layer 4).
pub fn fig7_sigmas(focus_layer: usize, near: f64, far: f64) -> Result<[f64; 4]> {
    if !(1..=3).contains(&focus_layer) {
        return arg_err(format!("focus layer must be 1, 2 or 3, got {focus_layer}"));
    }
    let mut s = [0.0; 4];
    for (i, v) in s.iter_mut().enumerate() {
        let n = i + 1;
        *v = match n.cmp(&focus_layer) {
            std::cmp::Ordering::Less => near,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => far,
        };
    }
    Ok(s)
}

/// The fixture with the default σ values.
pub fn make_fig7_scene<T: Scalar>(focus_layer: usize) -> Result<Scene<T>> {
    make_fig7_scene_with(focus_layer, FIG7_NEAR_SIGMA, FIG7_FAR_SIGMA)
}

pub fn make_fig7_scene_with<T: Scalar>(focus_layer: usize, near: f64, far: f64) -> Result<Scene<T>> {
    let sigmas = fig7_sigmas(focus_layer, near, far)?;
    fig7_scene_with_sigmas(sigmas.map(T::lit))
}

/// All four layers in focus.
pub fn fig7_all_in_focus<T: Scalar>() -> Result<Scene<T>> {
    fig7_scene_with_sigmas([T::zero(); 4])
}

pub fn fig7_scene_with_sigmas<T: Scalar>(sigmas: [T; 4]) -> Result<Scene<T>> {
    let n = FIG7_SIZE;
    let mut layers = Vec::with_capacity(4);
    for (k, rect) in FIG7_OBJECTS.iter().enumerate() {
        let matte = Image::from_fn(n, n, 1, |x, y, _| if rect.contains(x, y) { T::one() } else { T::zero() })?;
        let color = FIG7_COLORS[k];
        let surface = Image::from_fn(n, n, 3, |x, y, c| {
            if rect.contains(x, y) {
                T::lit(color[c])
            } else {
                T::zero()
            }
        })?;
        layers.push(Layer::new(surface, matte, sigmas[k])?);
    }
    layers.push(Layer::opaque(&fig7_backdrop(n)?, sigmas[3])?);
    Scene::new(layers)
}

/// Low-contrast checkerboard over a diagonal gradient.
fn fig7_backdrop<T: Scalar>(n: usize) -> Result<Image<T>> {
    Image::from_fn(n, n, 3, |x, y, c| {
        let check = if ((x / 16) + (y / 16)) % 2 == 0 { 0.0 } else { 0.12 };
        let grad = 0.15 * (x + y) as f64 / (2 * n) as f64;
        let base = [0.30, 0.36, 0.28][c];
        T::lit(base + check + grad)
    })
}
