//! TOML scene descriptions consumed by `simulate`.
//!
//! A layered scene lists surfaces front to back:
//!
//! ```toml
//! [[layer]]
//! surface = "fg.png"
//! matte = "fg_matte.png"   # omit for an opaque layer
//! sigma = 3.0
//! premultiplied = false    # default: surface is straight colour
//!
//! [[layer]]
//! surface = "bg.png"
//! sigma = 0.0
//! ```
//!
//! A boundary-line scene splices two images along `a·x + b·y + c = 0`:
//!
//! ```toml
//! [boundary]
//! image_a = "a.png"
//! image_b = "b.png"
//! a = 1.0
//! b = 0.0
//! c = -128.0
//! sigma_a = 3.0
//! sigma_b = 0.0
//! ```
//!
//! Relative paths resolve against the directory holding the scene file.

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use super::scene::{BoundaryLineScene, Layer, Line, Scene};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::load_png;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[serde(default)]
    layer: Vec<Spanned<LayerDoc>>,
    boundary: Option<Spanned<BoundaryDoc>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    surface: Spanned<String>,
    matte: Option<Spanned<String>>,
    sigma: Spanned<f64>,
    #[serde(default)]
    premultiplied: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryDoc {
    image_a: Spanned<String>,
    image_b: Spanned<String>,
    a: f64,
    b: f64,
    c: f64,
    sigma_a: Spanned<f64>,
    sigma_b: Spanned<f64>,
}

#[derive(Debug, Clone)]
pub enum SceneSpec {
    Layered(Scene<f64>),
    Boundary(BoundaryLineScene<f64>),
}

impl SceneSpec {
    /// The layered equivalent (a boundary scene becomes front A over opaque B).
    pub fn to_layered(&self) -> Result<Scene<f64>> {
        match self {
            SceneSpec::Layered(s) => Ok(s.clone()),
            SceneSpec::Boundary(b) => b.to_scene(),
        }
    }
}

pub fn load_scene_file(path: impl AsRef<Path>) -> Result<SceneSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scene(&text, path, &base)
}

/// Parses scene text; `origin` is used in error messages, `base` to resolve
/// relative image paths.
pub fn parse_scene(text: &str, origin: &Path, base: &Path) -> Result<SceneSpec> {
    let ctx = Ctx { text, origin, base };
    let doc: SceneDoc = toml::from_str(text).map_err(|e| ctx.err(e.span(), e.message()))?;

    match (doc.layer.is_empty(), doc.boundary) {
        (false, Some(b)) => Err(ctx.err(Some(b.span()), "a scene has either [[layer]] entries or a [boundary] table, not both")),
        (true, None) => Err(ctx.err(None, "scene defines no [[layer]] entries and no [boundary] table")),
        (true, Some(b)) => {
            let span = b.span();
            let b = b.into_inner();
            let sigma_a = ctx.sigma(&b.sigma_a)?;
            let sigma_b = ctx.sigma(&b.sigma_b)?;
            let image_a = ctx.image(&b.image_a)?;
            let image_b = ctx.image(&b.image_b)?;
            let (image_a, image_b) = unify_channels(image_a, image_b).map_err(|e| ctx.err(Some(span.clone()), e.to_string()))?;
            let line = Line { a: b.a, b: b.b, c: b.c };
            BoundaryLineScene::new(image_a, image_b, line, sigma_a, sigma_b)
                .map(SceneSpec::Boundary)
                .map_err(|e| ctx.err(Some(span), e.to_string()))
        }
        (false, None) => {
            let mut raw = Vec::with_capacity(doc.layer.len());
            for entry in &doc.layer {
                let l = entry.get_ref();
                let sigma = ctx.sigma(&l.sigma)?;
                let surface = ctx.image(&l.surface)?;
                let matte = match &l.matte {
                    Some(m) => Some((ctx.image(m)?.to_gray(), m.span())),
                    None => None,
                };
                raw.push((entry.span(), surface, matte, sigma, l.premultiplied));
            }
            let channels = raw.iter().map(|r| r.1.channels()).max().unwrap_or(1);
            let mut layers = Vec::with_capacity(raw.len());
            for (span, surface, matte, sigma, premultiplied) in raw {
                let surface = surface.with_channels(channels).map_err(|e| ctx.err(Some(span.clone()), e.to_string()))?;
                let layer = match matte {
                    None => Layer::opaque(&surface, sigma),
                    Some((m, _)) if premultiplied => Layer::new(surface, m, sigma),
                    Some((m, _)) => Layer::from_color(&surface, m, sigma),
                };
                layers.push(layer.map_err(|e| ctx.err(Some(span), e.to_string()))?);
            }
            let first = doc.layer[0].span();
            Scene::new(layers)
                .map(SceneSpec::Layered)
                .map_err(|e| ctx.err(Some(first), e.to_string()))
        }
    }
}

fn unify_channels(a: Image<f64>, b: Image<f64>) -> Result<(Image<f64>, Image<f64>)> {
    let c = a.channels().max(b.channels());
    Ok((a.with_channels(c)?, b.with_channels(c)?))
}

struct Ctx<'a> {
    text: &'a str,
    origin: &'a Path,
    base: &'a Path,
}

impl Ctx<'_> {
    fn line_of(&self, span: Option<Range<usize>>) -> usize {
        match span {
            Some(s) => self.text[..s.start.min(self.text.len())].matches('\n').count() + 1,
            None => 1,
        }
    }

    fn err(&self, span: Option<Range<usize>>, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_path_buf(),
            line: self.line_of(span),
            message: message.into(),
        }
    }

    fn sigma(&self, s: &Spanned<f64>) -> Result<f64> {
        let v = *s.get_ref();
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(self.err(Some(s.span()), format!("sigma must be finite and non-negative, got {v}")))
        }
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn image(&self, p: &Spanned<String>) -> Result<Image<f64>> {
        load_png(self.resolve(p.get_ref()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{save_png, BitDepth};

    fn write_pngs(dir: &Path) {
        let a = Image::<f64>::filled(8, 6, 3, 0.8).unwrap();
        let b = Image::<f64>::filled(8, 6, 1, 0.2).unwrap();
        let m = Image::<f64>::from_fn(8, 6, 1, |x, _, _| if x < 4 { 1.0 } else { 0.0 }).unwrap();
        save_png(&a, dir.join("a.png"), BitDepth::Sixteen).unwrap();
        save_png(&b, dir.join("b.png"), BitDepth::Sixteen).unwrap();
        save_png(&m, dir.join("m.png"), BitDepth::Eight).unwrap();
    }

    #[test]
    fn parses_layered_scene() {
        let dir = tempfile::tempdir().unwrap();
        write_pngs(dir.path());
        let text = "[[layer]]\nsurface = \"a.png\"\nmatte = \"m.png\"\nsigma = 1.5\n\n[[layer]]\nsurface = \"b.png\"\nsigma = 0\n";
        let SceneSpec::Layered(s) = parse_scene(text, Path::new("s.toml"), dir.path()).unwrap() else {
            panic!("expected layered scene");
        };
        assert_eq!(s.len(), 2);
        assert_eq!(s.channels(), 3);
        assert_eq!(s.layers()[0].sigma(), 1.5);
        assert!(s.layers()[1].is_opaque());
    }

    #[test]
    fn parses_boundary_scene() {
        let dir = tempfile::tempdir().unwrap();
        write_pngs(dir.path());
        let text = "[boundary]\nimage_a = \"a.png\"\nimage_b = \"b.png\"\na = 1.0\nb = 0.0\nc = -4.0\nsigma_a = 2.0\nsigma_b = 0.0\n";
        let spec = parse_scene(text, Path::new("s.toml"), dir.path()).unwrap();
        assert!(matches!(spec, SceneSpec::Boundary(_)));
        assert_eq!(spec.to_layered().unwrap().len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        write_pngs(dir.path());
        let bad_sigma = "[[layer]]\nsurface = \"a.png\"\n\nsigma = -2.0\n";
        match parse_scene(bad_sigma, Path::new("s.toml"), dir.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let syntax = "[[layer]]\nsurface = \"a.png\"\nsigma = = 1\n";
        match parse_scene(syntax, Path::new("s.toml"), dir.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let unknown = "[[layer]]\nsurface = \"a.png\"\nsigma = 1\nblur = 3\n";
        assert!(matches!(
            parse_scene(unknown, Path::new("s.toml"), dir.path()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_scene("", Path::new("s.toml"), dir.path()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn missing_image_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let text = "[[layer]]\nsurface = \"nope.png\"\nsigma = 1\n";
        let err = parse_scene(text, Path::new("s.toml"), dir.path()).unwrap_err();
        assert_eq!(err.kind(), crate::error::ErrorKind::Io);
    }
}
