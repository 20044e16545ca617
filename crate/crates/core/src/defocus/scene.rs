use crate::error::{arg_err, Result};
use crate::image::Image;
use crate::scalar::Scalar;

const PREMULT_SLACK: f64 = 1e-9;

/// One surface parallel to the focal plane: a premultiplied colour surface,
/// its clear (in-focus) matte and the blur it receives.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    surface: Image<T>,
    matte: Image<T>,
    sigma: T,
}

impl<T: Scalar> Layer<T> {
    /// `surface` must already be premultiplied by `matte`.
    pub fn new(surface: Image<T>, matte: Image<T>, sigma: T) -> Result<Self> {
        matte.ensure_single_channel("layer matte")?;
        surface.ensure_same_dims(&matte, "layer surface vs matte")?;
        if !sigma.is_finite() || sigma < T::zero() {
            return arg_err(format!("layer sigma must be finite and non-negative, got {sigma}"));
        }
        if let Some(i) = matte.data().iter().position(|&a| a < T::zero() || a > T::one()) {
            return arg_err(format!("matte value {} at sample {i} outside [0, 1]", matte.data()[i]));
        }
        let slack = T::lit(PREMULT_SLACK);
        let c = surface.channels();
        for (p, (px, &a)) in surface.data().chunks_exact(c).zip(matte.data()).enumerate() {
            if px.iter().any(|&v| v > a + slack) {
                return arg_err(format!(
                    "surface not premultiplied at pixel ({}, {}): {:?} exceeds matte {a}",
                    p % surface.width(),
                    p / surface.width(),
                    px
                ));
            }
        }
        Ok(Self { surface, matte, sigma })
    }

    /// Premultiplies a straight-colour image by its matte.
    pub fn from_color(color: &Image<T>, matte: Image<T>, sigma: T) -> Result<Self> {
        matte.ensure_single_channel("layer matte")?;
        let surface = color.clamp01().scale_by(&matte)?;
        Self::new(surface, matte, sigma)
    }

    /// Fully opaque layer (matte ≡ 1).
    pub fn opaque(color: &Image<T>, sigma: T) -> Result<Self> {
        let matte = Image::filled(color.width(), color.height(), 1, T::one())?;
        Self::new(color.clamp01(), matte, sigma)
    }

    pub fn surface(&self) -> &Image<T> {
        &self.surface
    }

    pub fn matte(&self) -> &Image<T> {
        &self.matte
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn with_sigma(&self, sigma: T) -> Result<Self> {
        Self::new(self.surface.clone(), self.matte.clone(), sigma)
    }

    pub fn is_opaque(&self) -> bool {
        self.matte.data().iter().all(|&a| a == T::one())
    }
}

/// Layers ordered front to back: index 0 is nearest the camera.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    layers: Vec<Layer<T>>,
}

impl<T: Scalar> Scene<T> {
    pub fn new(layers: Vec<Layer<T>>) -> Result<Self> {
        let Some(first) = layers.first() else {
            return arg_err("a scene needs at least one layer");
        };
        for (i, l) in layers.iter().enumerate().skip(1) {
            if !l.surface.same_shape(&first.surface) {
                return arg_err(format!(
                    "layer {} surface {} does not match layer 1 surface {}",
                    i + 1,
                    l.surface.shape_str(),
                    first.surface.shape_str()
                ));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn width(&self) -> usize {
        self.layers[0].surface.width()
    }

    pub fn height(&self) -> usize {
        self.layers[0].surface.height()
    }

    pub fn channels(&self) -> usize {
        self.layers[0].surface.channels()
    }

    /// The same scene with every σ set to zero.
    pub fn all_in_focus(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    sigma: T::zero(),
                    ..l.clone()
                })
                .collect(),
        }
    }

    pub fn with_sigmas(&self, sigmas: &[T]) -> Result<Self> {
        if sigmas.len() != self.layers.len() {
            return arg_err(format!("expected {} sigmas, got {}", self.layers.len(), sigmas.len()));
        }
        let layers = self
            .layers
            .iter()
            .zip(sigmas)
            .map(|(l, &s)| l.with_sigma(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }
}

/// Boundary line `a·x + b·y + c = 0` with `x` the column and `y` the row of a
/// pixel centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> Line<T> {
    /// Step function `u(a·x + b·y + c)` with `u(0) = 1`, so pixels on the line
    /// belong to side A.
    #[inline]
    pub fn side_a(&self, x: usize, y: usize) -> bool {
        let xf = T::from_usize(x).unwrap();
        let yf = T::from_usize(y).unwrap();
        self.a * xf + self.b * yf + self.c >= T::zero()
    }
}

/// Two images spliced along a straight boundary, each side blurred by its own σ.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLineScene<T> {
    image_a: Image<T>,
    image_b: Image<T>,
    line: Line<T>,
    sigma_a: T,
    sigma_b: T,
}

impl<T: Scalar> BoundaryLineScene<T> {
    pub fn new(image_a: Image<T>, image_b: Image<T>, line: Line<T>, sigma_a: T, sigma_b: T) -> Result<Self> {
        image_a.ensure_same_shape(&image_b, "boundary scene f_A vs f_B")?;
        if line.a == T::zero() && line.b == T::zero() {
            return arg_err("boundary line needs (a, b) != (0, 0)");
        }
        for s in [sigma_a, sigma_b] {
            if !s.is_finite() || s < T::zero() {
                return arg_err(format!("sigma must be finite and non-negative, got {s}"));
            }
        }
        Ok(Self {
            image_a,
            image_b,
            line,
            sigma_a,
            sigma_b,
        })
    }

    pub fn image_a(&self) -> &Image<T> {
        &self.image_a
    }

    pub fn image_b(&self) -> &Image<T> {
        &self.image_b
    }

    pub fn line(&self) -> Line<T> {
        self.line
    }

    pub fn sigma_a(&self) -> T {
        self.sigma_a
    }

    pub fn sigma_b(&self) -> T {
        self.sigma_b
    }

    /// Single-channel indicator of side A.
    pub fn mask_a(&self) -> Image<T> {
        let line = self.line;
        Image::from_fn(self.image_a.width(), self.image_a.height(), 1, |x, y, _| {
            if line.side_a(x, y) {
                T::one()
            } else {
                T::zero()
            }
        })
        .expect("dimensions already validated")
    }

    /// The equivalent two-layer scene: side A in front (half-plane matte),
    /// `f_B` as an opaque backdrop.
    pub fn to_scene(&self) -> Result<Scene<T>> {
        let mask = self.mask_a();
        let front = Layer::from_color(&self.image_a, mask, self.sigma_a)?;
        let back = Layer::opaque(&self.image_b, self.sigma_b)?;
        Scene::new(vec![front, back])
    }
}
