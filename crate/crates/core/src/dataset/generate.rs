use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::catalog::{AssetCatalog, ForegroundEntry};
use super::config::GenConfig;
use super::pair::{generate_pair_split, FocusSide, ForegroundAsset, FusionPair};
use crate::blur::add_noise;
use crate::error::{Error, Result};
use crate::guidance::encode_guidance;
use crate::image::Image;
use crate::io::{encode_png, load_png, write_atomic, BitDepth};
use crate::resize::{fit_square, resize_bilinear};
use crate::rng::keyed_rng;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything random about one pair, drawn before any image work.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairPlan {
    pub id: String,
    pub fg_index: usize,
    pub pair_index: usize,
    pub bg_index: usize,
    pub sigma: f64,
    pub sigma_bg: f64,
    pub swap: bool,
}

/// Number of pairs the configuration produces on the catalog.
pub fn planned_pair_count(catalog: &AssetCatalog, cfg: &GenConfig) -> Result<usize> {
    cfg.validate(catalog)?;
    Ok(catalog.foregrounds.len() * cfg.backgrounds_per_fg)
}

/// Draws backgrounds, σ and swap flags for every pair.
///
/// Backgrounds for foreground `i` are sampled without replacement from a
/// generator keyed by `(seed, i)`; σ and the swap flag come from a generator
/// keyed by `(seed, i, j)`. Plans therefore do not depend on evaluation order.
pub fn plan_dataset(catalog: &AssetCatalog, cfg: &GenConfig) -> Result<Vec<PairPlan>> {
    cfg.validate(catalog)?;
    let mut plans = Vec::with_capacity(catalog.foregrounds.len() * cfg.backgrounds_per_fg);
    for fg in 0..catalog.foregrounds.len() {
        let mut pick = keyed_rng(cfg.seed, "backgrounds", &[fg as u64]);
        let chosen = sample(&mut pick, catalog.backgrounds.len(), cfg.backgrounds_per_fg);
        for (j, bg) in chosen.into_iter().enumerate() {
            let mut rng = keyed_rng(cfg.seed, "pair", &[fg as u64, j as u64]);
            let sigma = rng.random_range(cfg.sigma_range.0..=cfg.sigma_range.1);
            let swap = rng.random_bool(cfg.swap_probability);
            let sigma_bg = match cfg.bg_sigma_range {
                Some((lo, hi)) => rng.random_range(lo..=hi),
                None => sigma,
            };
            plans.push(PairPlan {
                id: format!("{fg:04}_{j:03}"),
                fg_index: fg,
                pair_index: j,
                bg_index: bg,
                sigma,
                sigma_bg,
                swap,
            });
        }
    }
    Ok(plans)
}

/// Loads a foreground, scales its shorter side to `size`, centre-crops to a
/// square and premultiplies by the matte.
pub fn prepare_foreground(catalog: &AssetCatalog, entry: &ForegroundEntry, size: usize) -> Result<ForegroundAsset<f64>> {
    let color_path = catalog.resolve(&entry.color);
    let matte_path = catalog.resolve(&entry.matte);
    let color: Image<f64> = load_png(&color_path)?;
    let matte = load_png::<f64>(&matte_path)?.to_gray();
    if !color.same_dims(&matte) {
        return Err(Error::format(
            &matte_path,
            format!(
                "matte is {}x{} but colour image is {}x{}",
                matte.width(),
                matte.height(),
                color.width(),
                color.height()
            ),
        ));
    }
    let color = fit_square(&color, size)?;
    let matte = fit_square(&matte, size)?.clamp01();
    ForegroundAsset::from_straight(&color, matte)
}

/// Loads a background and resizes it to `size × size`.
pub fn prepare_background(catalog: &AssetCatalog, path: &Path, size: usize) -> Result<Image<f64>> {
    let img: Image<f64> = load_png(catalog.resolve(path))?;
    resize_bilinear(&img, size, size)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: String,
    /// Paths relative to the dataset root.
    pub a: PathBuf,
    pub b: PathBuf,
    pub gt: PathBuf,
    pub matte: PathBuf,
    pub gmap: PathBuf,
    pub sigma: f64,
    pub sigma_bg: f64,
    pub swap: bool,
    pub fg_focused_in: FocusSide,
    pub fg_color: PathBuf,
    pub fg_matte: PathBuf,
    pub background: PathBuf,
    /// SHA-256 over the bytes of a, b, gt, matte and gmap, in that order.
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairError {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: GenConfig,
    pub planned: usize,
    pub pairs: Vec<PairRecord>,
    pub errors: Vec<PairError>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Generates every planned pair into `out_dir/pairs/<id>/` and writes
/// `out_dir/manifest.json`. Pairs run in parallel; a pair whose assets cannot
/// be read or written is recorded in `errors` and skipped.
pub fn generate_dataset(catalog: &AssetCatalog, cfg: &GenConfig, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    let plans = plan_dataset(catalog, cfg)?;
    std::fs::create_dir_all(out_dir.join("pairs")).map_err(|e| Error::io(out_dir, e))?;

    let results: Vec<std::result::Result<PairRecord, PairError>> = plans
        .par_iter()
        .map(|plan| {
            build_and_write(catalog, cfg, plan, out_dir).map_err(|e| {
                log::warn!("pair {} failed: {e}", plan.id);
                PairError {
                    id: plan.id.clone(),
                    message: e.to_string(),
                }
            })
        })
        .collect();

    let mut manifest = Manifest {
        config: cfg.clone(),
        planned: plans.len(),
        pairs: Vec::with_capacity(plans.len()),
        errors: Vec::new(),
    };
    for r in results {
        match r {
            Ok(rec) => manifest.pairs.push(rec),
            Err(e) => manifest.errors.push(e),
        }
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write_atomic(out_dir.join(MANIFEST_FILE), json.as_bytes())?;
    Ok(manifest)
}

fn build_and_write(catalog: &AssetCatalog, cfg: &GenConfig, plan: &PairPlan, out_dir: &Path) -> Result<PairRecord> {
    let entry = &catalog.foregrounds[plan.fg_index];
    let bg_path = &catalog.backgrounds[plan.bg_index];
    let fg = prepare_foreground(catalog, entry, cfg.out_size)?;
    let bg = prepare_background(catalog, bg_path, cfg.out_size)?;

    let channels = fg.color().channels().max(bg.channels());
    let fg = fg.with_channels(channels)?;
    let bg = bg.with_channels(channels)?;
    let mut pair = generate_pair_split(&fg, &bg, plan.sigma, plan.sigma_bg, plan.swap)?;
    if let Some(std) = cfg.noise {
        add_source_noise(&mut pair, std, cfg.seed, plan)?;
    }

    let rel = PathBuf::from("pairs").join(&plan.id);
    let dir = out_dir.join(&rel);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let files = [
        ("a.png", encode_png(&pair.img_a, BitDepth::Sixteen)?),
        ("b.png", encode_png(&pair.img_b, BitDepth::Sixteen)?),
        ("gt.png", encode_png(&pair.gt, BitDepth::Sixteen)?),
        ("matte.png", encode_png(&pair.matte_clear, BitDepth::Sixteen)?),
        ("gmap.png", encode_guidance(&pair.gmap)?),
    ];
    let mut hasher = Sha256::new();
    for (name, bytes) in &files {
        hasher.update(bytes);
        write_atomic(dir.join(name), bytes)?;
    }
    Ok(PairRecord {
        id: plan.id.clone(),
        a: rel.join("a.png"),
        b: rel.join("b.png"),
        gt: rel.join("gt.png"),
        matte: rel.join("matte.png"),
        gmap: rel.join("gmap.png"),
        sigma: plan.sigma,
        sigma_bg: plan.sigma_bg,
        swap: plan.swap,
        fg_focused_in: pair.fg_focused_in,
        fg_color: entry.color.clone(),
        fg_matte: entry.matte.clone(),
        background: bg_path.clone(),
        checksum: hex::encode(hasher.finalize()),
    })
}

fn add_source_noise(pair: &mut FusionPair<f64>, std: f64, seed: u64, plan: &PairPlan) -> Result<()> {
    let mut rng = keyed_rng(seed, "noise", &[plan.fg_index as u64, plan.pair_index as u64]);
    pair.img_a = add_noise(&pair.img_a, std, &mut rng)?.clamp01();
    pair.img_b = add_noise(&pair.img_b, std, &mut rng)?.clamp01();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog(n_fg: usize, n_bg: usize) -> AssetCatalog {
        AssetCatalog::new(
            (0..n_fg)
                .map(|i| ForegroundEntry {
                    color: format!("fg{i}.png").into(),
                    matte: format!("fg{i}_m.png").into(),
                })
                .collect(),
            (0..n_bg).map(|j| format!("bg{j}.png").into()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn full_scale_plan() {
        let c = catalog(200, 1200);
        let cfg = GenConfig::default();
        assert_eq!(planned_pair_count(&c, &cfg).unwrap(), 4000);
        let plans = plan_dataset(&c, &cfg).unwrap();
        assert_eq!(plans.len(), 4000);
        for fg in 0..200 {
            let mut bgs: Vec<usize> = plans[fg * 20..(fg + 1) * 20].iter().map(|p| p.bg_index).collect();
            bgs.sort();
            bgs.dedup();
            assert_eq!(bgs.len(), 20, "backgrounds drawn without replacement");
        }
        assert!(plans.iter().all(|p| cfg.contains_sigma(p.sigma) && p.sigma == p.sigma_bg));
        let swaps = plans.iter().filter(|p| p.swap).count();
        assert!((1800..2200).contains(&swaps), "swap rate {swaps}/4000");
    }

    #[test]
    fn plans_are_seeded() {
        let c = catalog(3, 5);
        let cfg = GenConfig {
            backgrounds_per_fg: 2,
            seed: 11,
            ..GenConfig::default()
        };
        assert_eq!(plan_dataset(&c, &cfg).unwrap(), plan_dataset(&c, &cfg).unwrap());
        let other = GenConfig { seed: 12, ..cfg.clone() };
        assert_ne!(plan_dataset(&c, &cfg).unwrap(), plan_dataset(&c, &other).unwrap());
    }

    #[test]
    fn config_limits() {
        let c = catalog(2, 3);
        let ok = GenConfig {
            backgrounds_per_fg: 3,
            ..GenConfig::default()
        };
        assert!(ok.validate(&c).is_ok());
        for bad in [
            GenConfig { backgrounds_per_fg: 4, ..ok.clone() },
            GenConfig { out_size: 63, ..ok.clone() },
            GenConfig { sigma_range: (0.4, 2.0), ..ok.clone() },
            GenConfig { sigma_range: (1.0, 10.5), ..ok.clone() },
            GenConfig { sigma_range: (3.0, 2.0), ..ok.clone() },
            GenConfig { swap_probability: 1.5, ..ok.clone() },
            GenConfig { noise: Some(-1.0), ..ok.clone() },
            GenConfig { bg_sigma_range: Some((0.1, 1.0)), ..ok.clone() },
        ] {
            assert!(bad.validate(&c).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn split_sigma_plans_differ() {
        let c = catalog(2, 3);
        let cfg = GenConfig {
            backgrounds_per_fg: 3,
            bg_sigma_range: Some((1.0, 5.0)),
            ..GenConfig::default()
        };
        let plans = plan_dataset(&c, &cfg).unwrap();
        assert!(plans.iter().any(|p| p.sigma != p.sigma_bg));
    }

    #[test]
    fn missing_assets_are_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let c = catalog(1, 2).with_base_dir(dir.path());
        let cfg = GenConfig {
            backgrounds_per_fg: 2,
            out_size: 64,
            ..GenConfig::default()
        };
        let m = generate_dataset(&c, &cfg, dir.path().join("out")).unwrap();
        assert_eq!(m.planned, 2);
        assert!(m.pairs.is_empty());
        assert_eq!(m.errors.len(), 2);
        assert!(dir.path().join("out").join(MANIFEST_FILE).exists());
    }
}
