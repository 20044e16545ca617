//! Multi-focus image fusion toolkit.
//!
//! * [`defocus`] renders scenes under three defocus models, including the
//!   layered α-matte model where a blurred foreground spreads over whatever
//!   lies behind it.
//! * [`dataset`] turns foreground/matte assets and backgrounds into
//!   multi-focus training pairs with ground truth and guidance maps.
//! * [`guidance`] estimates or loads three-level guidance maps.
//! * [`fusion`] fuses a source pair from a guidance map, with a pluggable
//!   correction on the focused/defocused boundary band.
//! * [`losses`] provides the training losses with analytic gradients.
//! * [`metrics`] computes the AG, LIF, MSD and GLD no-reference metrics.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the default `f64` sample type used by the file-level pipeline.

pub mod blur;
pub mod dataset;
pub mod defocus;
pub mod error;
pub mod fusion;
pub mod guidance;
pub mod image;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod resize;
pub mod rng;
pub mod scalar;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use image::Image;
pub use scalar::Scalar;

/// Default double-precision image.
pub type ImageF = Image<f64>;
/// Single-precision image.
pub type ImageF32 = Image<f32>;
pub type GaussianKernelF = blur::GaussianKernel<f64>;
pub type LayerF = defocus::Layer<f64>;
pub type SceneF = defocus::Scene<f64>;
pub type GuidanceMapF = guidance::GuidanceMap<f64>;
