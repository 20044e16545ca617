use serde::{Deserialize, Serialize};

use super::catalog::AssetCatalog;
use crate::error::{arg_err, Result};

pub const MIN_OUT_SIZE: usize = 64;
pub const MIN_SIGMA: f64 = 0.5;
pub const MAX_SIGMA: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    /// Side of the square output images.
    pub out_size: usize,
    /// Backgrounds drawn (without replacement) for each foreground.
    pub backgrounds_per_fg: usize,
    /// Uniform σ range `[min, max]` in pixels.
    pub sigma_range: (f64, f64),
    /// When set, the background σ is drawn independently from this range;
    /// otherwise foreground and background share one σ.
    pub bg_sigma_range: Option<(f64, f64)>,
    /// Probability that the in-focus-foreground image becomes source B.
    pub swap_probability: f64,
    pub seed: u64,
    /// Standard deviation of additive Gaussian noise on the sources; `None` disables it.
    pub noise: Option<f64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            out_size: 512,
            backgrounds_per_fg: 20,
            sigma_range: (1.0, 5.0),
            bg_sigma_range: None,
            swap_probability: 0.5,
            seed: 0,
            noise: None,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return arg_err(format!("{name} [{lo}, {hi}] is not a valid range"));
    }
    if lo < MIN_SIGMA {
        return arg_err(format!("{name} minimum {lo} is below {MIN_SIGMA}"));
    }
    if hi > MAX_SIGMA {
        return arg_err(format!("{name} maximum {hi} exceeds {MAX_SIGMA}"));
    }
    Ok(())
}

impl GenConfig {
    /// Checks the configuration against itself and against the catalog it
    /// will run on. No files are touched.
    pub fn validate(&self, catalog: &AssetCatalog) -> Result<()> {
        catalog.validate()?;
        if self.out_size < MIN_OUT_SIZE {
            return arg_err(format!("out_size {} is below {MIN_OUT_SIZE}", self.out_size));
        }
        check_range("sigma_range", self.sigma_range)?;
        if let Some(r) = self.bg_sigma_range {
            check_range("bg_sigma_range", r)?;
        }
        if !(0.0..=1.0).contains(&self.swap_probability) {
            return arg_err(format!("swap_probability {} outside [0, 1]", self.swap_probability));
        }
        if self.backgrounds_per_fg == 0 {
            return arg_err("backgrounds_per_fg must be at least 1");
        }
        if self.backgrounds_per_fg > catalog.backgrounds.len() {
            return arg_err(format!(
                "backgrounds_per_fg {} exceeds the {} available backgrounds",
                self.backgrounds_per_fg,
                catalog.backgrounds.len()
            ));
        }
        if let Some(n) = self.noise {
            if !(n.is_finite() && n >= 0.0) {
                return arg_err(format!("noise stddev {n} must be finite and non-negative"));
            }
        }
        Ok(())
    }

    pub fn contains_sigma(&self, sigma: f64) -> bool {
        sigma >= self.sigma_range.0 && sigma <= self.sigma_range.1
    }
}
