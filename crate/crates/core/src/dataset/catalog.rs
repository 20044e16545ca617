use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForegroundEntry {
    /// Straight (non-premultiplied) colour image.
    pub color: PathBuf,
    /// Matte of the same dimensions.
    pub matte: PathBuf,
}

/// Foreground/matte assets and background images.
///
/// In TOML form:
///
/// ```toml
/// backgrounds = ["bg/000.png", "bg/001.png"]
///
/// [[foreground]]
/// color = "fg/000.png"
/// matte = "fg/000_matte.png"
/// ```
///
/// Relative paths are resolved against the catalog's base directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetCatalog {
    pub backgrounds: Vec<PathBuf>,
    #[serde(rename = "foreground")]
    pub foregrounds: Vec<ForegroundEntry>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl AssetCatalog {
    pub fn new(foregrounds: Vec<ForegroundEntry>, backgrounds: Vec<PathBuf>) -> Result<Self> {
        let c = Self {
            backgrounds,
            foregrounds,
            base_dir: PathBuf::new(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let catalog: AssetCatalog = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(1),
            message: e.message().to_string(),
        })?;
        catalog.validate()?;
        Ok(catalog.with_base_dir(path.parent().map(Path::to_path_buf).unwrap_or_default()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Argument(format!("catalog serialisation: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.foregrounds.is_empty() {
            return arg_err("asset catalog has no foregrounds");
        }
        if self.backgrounds.is_empty() {
            return arg_err("asset catalog has no backgrounds");
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
