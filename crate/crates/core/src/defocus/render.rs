//! The three defocus renderers: space-invariant blur, per-side blur along a
//! straight boundary, and the layered α-matte model.

use rayon::prelude::*;

use super::scene::{BoundaryLineScene, Layer, Scene};
use crate::blur::gaussian_blur;
use crate::error::Result;
use crate::image::Image;
use crate::scalar::Scalar;

/// Space-invariant defocus: the whole image blurred by one σ.
pub fn render_one_param<T: Scalar>(img: &Image<T>, sigma: T) -> Result<Image<T>> {
    gaussian_blur(img, sigma)
}

/// Space-invariant defocus applied region by region: every pixel takes the
/// all-in-focus image blurred with the σ of the layer visible there, weighted
/// by the in-focus visibility of each layer. Pixels of an in-focus layer are
/// left untouched, whatever their neighbours do.
pub fn render_one_param_scene<T: Scalar>(scene: &Scene<T>) -> Result<Image<T>> {
    let clear = render_alpha_matte(&scene.all_in_focus())?;
    let blurred = scene
        .layers()
        .par_iter()
        .map(|l| gaussian_blur(&clear.image, l.sigma()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Image::new(scene.width(), scene.height(), scene.channels())?;
    let c = scene.channels();
    for (weight, img) in clear.mattes.iter().zip(&blurred) {
        for (p, &w) in weight.data().iter().enumerate() {
            for ch in 0..c {
                let i = p * c + ch;
                out.data_mut()[i] = out.data()[i] + w * img.data()[i];
            }
        }
    }
    Ok(out)
}

/// `I = (f_A·u) ⊗ G(σ_A) + (f_B·(1 − u)) ⊗ G(σ_B)`.
pub fn render_two_param<T: Scalar>(scene: &BoundaryLineScene<T>) -> Result<Image<T>> {
    let mask = scene.mask_a();
    let inv = mask.map(|u| T::one() - u);
    let side_a = scene.image_a().scale_by(&mask)?;
    let side_b = scene.image_b().scale_by(&inv)?;
    let (a, b) = rayon::join(
        || gaussian_blur(&side_a, scene.sigma_a()),
        || gaussian_blur(&side_b, scene.sigma_b()),
    );
    a?.zip_map(&b?, |x, y| x + y)
}

/// The two-parameter splice generalised to a layered scene: each layer's
/// in-focus visible contribution is blurred independently and summed, without
/// any occlusion interaction between the blurred pieces.
pub fn render_two_param_scene<T: Scalar>(scene: &Scene<T>) -> Result<Image<T>> {
    let clear = render_alpha_matte(&scene.all_in_focus())?;
    let pieces = clear
        .contributions
        .par_iter()
        .zip(scene.layers())
        .map(|(piece, l)| gaussian_blur(piece, l.sigma()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Image::new(scene.width(), scene.height(), scene.channels())?;
    for piece in &pieces {
        out = out.zip_map(piece, |a, b| a + b)?;
    }
    Ok(out)
}

/// Output of the layered renderer, including every intermediate per layer.
#[derive(Debug, Clone)]
pub struct AlphaMatteRender<T> {
    /// Final image `I = Σ I_n`.
    pub image: Image<T>,
    /// Blurred premultiplied surfaces `S_n`.
    pub surfaces: Vec<Image<T>>,
    /// Blurred mattes before occlusion, `α_n⁰`.
    pub pre_mattes: Vec<Image<T>>,
    /// Effective mattes after occlusion by the layers in front, `α_n`.
    pub mattes: Vec<Image<T>>,
    /// Per-layer contributions `I_n = (1 − Σ_{t<n} α_t)·S_n`.
    pub contributions: Vec<Image<T>>,
}

/// Layered α-matte rendering.
///
/// Each layer's surface and matte are blurred by its own σ (the blurs run in
/// parallel); the occlusion fold then walks front to back, keeping the running
/// coverage `Σ_{t<n} α_t`.
pub fn render_alpha_matte<T: Scalar>(scene: &Scene<T>) -> Result<AlphaMatteRender<T>> {
    let blurred = scene
        .layers()
        .par_iter()
        .map(|l| -> Result<(Image<T>, Image<T>)> {
            Ok((gaussian_blur(l.surface(), l.sigma())?, gaussian_blur(l.matte(), l.sigma())?))
        })
        .collect::<Result<Vec<_>>>()?;

    let (w, h, c) = (scene.width(), scene.height(), scene.channels());
    let mut coverage = vec![T::zero(); w * h];
    let mut image = Image::new(w, h, c)?;
    let mut out = AlphaMatteRender {
        image: image.clone(),
        surfaces: Vec::with_capacity(blurred.len()),
        pre_mattes: Vec::with_capacity(blurred.len()),
        mattes: Vec::with_capacity(blurred.len()),
        contributions: Vec::with_capacity(blurred.len()),
    };

    for (surface, pre) in blurred {
        let mut alpha = Image::new(w, h, 1)?;
        let mut contrib = Image::new(w, h, c)?;
        for (p, covered) in coverage.iter_mut().enumerate() {
            let visible = T::one() - *covered;
            let a = pre.data()[p] * visible;
            alpha.data_mut()[p] = a;
            for ch in 0..c {
                let i = p * c + ch;
                let v = visible * surface.data()[i];
                contrib.data_mut()[i] = v;
                image.data_mut()[i] = image.data()[i] + v;
            }
            *covered = *covered + a;
        }
        out.surfaces.push(surface);
        out.pre_mattes.push(pre);
        out.mattes.push(alpha);
        out.contributions.push(contrib);
    }
    out.image = image;
    Ok(out)
}

/// Two-surface special case `I = S_FG + (1 − α_FG)·S_BG`, the form used for
/// dataset generation. The background matte is ignored.
pub fn compose_two_surface<T: Scalar>(fg: &Layer<T>, bg: &Layer<T>) -> Result<Image<T>> {
    fg.surface().ensure_same_shape(bg.surface(), "foreground vs background surface")?;
    let s_fg = gaussian_blur(fg.surface(), fg.sigma())?;
    let a_fg = gaussian_blur(fg.matte(), fg.sigma())?;
    let s_bg = gaussian_blur(bg.surface(), bg.sigma())?;
    over(&s_fg, &a_fg, &s_bg)
}

/// Premultiplied "over": `front + (1 − alpha)·back`.
pub fn over<T: Scalar>(front: &Image<T>, alpha: &Image<T>, back: &Image<T>) -> Result<Image<T>> {
    front.ensure_same_shape(back, "over")?;
    alpha.ensure_single_channel("over alpha")?;
    front.ensure_same_dims(alpha, "over alpha")?;
    let c = front.channels();
    let mut out = front.clone();
    for (p, &a) in alpha.data().iter().enumerate() {
        let t = T::one() - a;
        for ch in 0..c {
            let i = p * c + ch;
            out.data_mut()[i] = front.data()[i] + t * back.data()[i];
        }
    }
    Ok(out)
}
