use std::path::PathBuf;

use focusfuse::blur::gaussian_blur;
use focusfuse::dataset::{
    generate_dataset, generate_pair, plan_dataset, planned_pair_count, prepare_background, prepare_foreground,
    AssetCatalog, FocusSide, ForegroundAsset, ForegroundEntry, GenConfig, MANIFEST_FILE,
};
use focusfuse::fusion::initial_fusion;
use focusfuse::guidance::{load_guidance, Level};
use focusfuse::io::load_png;
use focusfuse::synth::{ellipse_matte, texture, write_desk_assets};
use focusfuse::ImageF;
use proptest::prelude::*;

const N: usize = 48;

fn asset(seed: u64) -> (ForegroundAsset<f64>, ImageF) {
    let color = texture(N, N, 3, seed).unwrap();
    let matte = ellipse_matte(N, N, 24.0, 24.0, 14.0 + (seed % 5) as f64, 13.0).unwrap();
    let fg = ForegroundAsset::from_straight(&color, matte).unwrap();
    (fg, texture(N, N, 3, seed + 1000).unwrap())
}

/// `front + (1 − alpha)·back`, written out per sample.
fn composite(front: &ImageF, alpha: &ImageF, back: &ImageF) -> ImageF {
    ImageF::from_fn(N, N, 3, |x, y, c| front.get(x, y, c) + (1.0 - alpha.get(x, y, 0)) * back.get(x, y, c)).unwrap()
}

#[test]
fn pair_matches_compositing_formulas() {
    let (fg, bg) = asset(3);
    let sigma = 2.5;
    let p = generate_pair(&fg, &bg, sigma, false).unwrap();
    let fg_b = gaussian_blur(fg.color(), sigma).unwrap();
    let a_b = gaussian_blur(fg.matte(), sigma).unwrap();
    let bg_b = gaussian_blur(&bg, sigma).unwrap();
    assert!(p.img_a.max_abs_diff(&composite(fg.color(), fg.matte(), &bg_b)).unwrap() < 1e-12);
    assert!(p.img_b.max_abs_diff(&composite(&fg_b, &a_b, &bg)).unwrap() < 1e-12);
    assert!(p.gt.max_abs_diff(&composite(fg.color(), fg.matte(), &bg)).unwrap() < 1e-12);
    assert_eq!(p.fg_focused_in, FocusSide::A);
}

#[test]
fn zero_sigma_pair_is_three_identical_images() {
    let (fg, bg) = asset(4);
    let p = generate_pair(&fg, &bg, 0.0, false).unwrap();
    assert_eq!(p.img_a, p.gt);
    assert_eq!(p.img_b, p.gt);
}

#[test]
fn guidance_reproduces_ground_truth_off_band() {
    let (fg, bg) = asset(5);
    for swap in [false, true] {
        let p = generate_pair(&fg, &bg, 3.0, swap).unwrap();
        let ini = initial_fusion(&p.img_a, &p.img_b, &p.gmap).unwrap();
        for y in 0..N {
            for x in 0..N {
                if p.gmap.level(x, y) == Level::Band {
                    continue;
                }
                for c in 0..3 {
                    let d = (ini.get(x, y, c) - p.gt.get(x, y, c)).abs();
                    assert!(d < 1e-5, "({x}, {y}) swap {swap}: {d}");
                }
            }
        }
        let [zeros, band, ones] = p.gmap.counts();
        assert!(zeros > 0 && band > 0 && ones > 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn swap_exchanges_sources_and_inverts_map(seed in 0u64..500, sigma in 0.5f64..6.0) {
        let (fg, bg) = asset(seed);
        let p = generate_pair(&fg, &bg, sigma, false).unwrap();
        let q = generate_pair(&fg, &bg, sigma, true).unwrap();
        prop_assert_eq!(&p.img_a, &q.img_b);
        prop_assert_eq!(&p.img_b, &q.img_a);
        prop_assert_eq!(&p.gt, &q.gt);
        prop_assert_eq!(&p.gmap.swapped(), &q.gmap);
        prop_assert_eq!(q.fg_focused_in, FocusSide::B);
    }

    #[test]
    fn pair_images_stay_in_unit_range(seed in 0u64..500, sigma in 0.0f64..8.0) {
        let (fg, bg) = asset(seed);
        let p = generate_pair(&fg, &bg, sigma, seed % 2 == 0).unwrap();
        for img in [&p.img_a, &p.img_b, &p.gt] {
            let (lo, hi) = img.min_max();
            prop_assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12);
        }
        // Every band pixel has a partially covered blurred matte.
        for y in 0..N {
            for x in 0..N {
                let a = p.matte_blur.get(x, y, 0);
                let band = p.gmap.level(x, y) == Level::Band;
                prop_assert_eq!(band, a > 1e-6 && a < 1.0 - 1e-6);
            }
        }
    }
}

fn fake_catalog(n_fg: usize, n_bg: usize) -> AssetCatalog {
    AssetCatalog::new(
        (0..n_fg)
            .map(|i| ForegroundEntry {
                color: format!("fg/{i}.png").into(),
                matte: format!("fg/{i}_alpha.png").into(),
            })
            .collect(),
        (0..n_bg).map(|j| PathBuf::from(format!("bg/{j}.jpg"))).collect(),
    )
    .unwrap()
}

#[test]
fn full_scale_configuration_predicts_4000_pairs() {
    let catalog = fake_catalog(200, 1000);
    let cfg = GenConfig::default();
    assert_eq!(cfg.backgrounds_per_fg, 20);
    assert_eq!(cfg.sigma_range, (1.0, 5.0));
    assert_eq!(planned_pair_count(&catalog, &cfg).unwrap(), 4000);
    assert!(planned_pair_count(&fake_catalog(200, 19), &cfg).is_err());
}

#[test]
fn desk_scale_dataset_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let catalog_path = write_desk_assets(dir.path().join("assets"), 3, 2, 96, 9).unwrap();
    let catalog = AssetCatalog::load(&catalog_path).unwrap();
    let cfg = GenConfig {
        out_size: 64,
        backgrounds_per_fg: 2,
        seed: 17,
        ..GenConfig::default()
    };
    let out = dir.path().join("out");
    let manifest = generate_dataset(&catalog, &cfg, &out).unwrap();
    assert_eq!(manifest.pairs.len(), 6);
    assert!(manifest.errors.is_empty());
    assert!(out.join(MANIFEST_FILE).exists());

    // Re-derive every pair from the assets and compare with the stored files.
    let plans = plan_dataset(&catalog, &cfg).unwrap();
    let quantum = 0.5 / 65535.0 + 1e-12;
    for (rec, plan) in manifest.pairs.iter().zip(&plans) {
        assert_eq!(rec.id, plan.id);
        assert!(cfg.contains_sigma(rec.sigma));
        let fg = prepare_foreground(&catalog, &catalog.foregrounds[plan.fg_index], 64).unwrap();
        let bg = prepare_background(&catalog, &catalog.backgrounds[plan.bg_index], 64).unwrap();
        let p = generate_pair(&fg, &bg, rec.sigma, rec.swap).unwrap();
        for (stored, fresh) in [(&rec.a, &p.img_a), (&rec.b, &p.img_b), (&rec.gt, &p.gt), (&rec.matte, &p.matte_clear)] {
            let img: ImageF = load_png(out.join(stored)).unwrap();
            assert!(img.max_abs_diff(fresh).unwrap() <= quantum, "{}", stored.display());
        }
        let gmap = load_guidance::<f64>(out.join(&rec.gmap)).unwrap();
        assert_eq!(gmap, p.gmap);
    }
}

#[test]
fn generation_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = AssetCatalog::load(write_desk_assets(dir.path().join("assets"), 2, 3, 80, 2).unwrap()).unwrap();
    let cfg = GenConfig {
        out_size: 64,
        backgrounds_per_fg: 2,
        seed: 5,
        noise: Some(0.01),
        ..GenConfig::default()
    };
    let run = |threads: usize, name: &str| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let out = dir.path().join(name);
        pool.install(|| generate_dataset(&catalog, &cfg, &out).unwrap());
        out
    };
    let a = run(1, "one");
    let b = run(4, "four");
    let manifest_a = std::fs::read(a.join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest_a, std::fs::read(b.join(MANIFEST_FILE)).unwrap());
    let m: serde_json::Value = serde_json::from_slice(&manifest_a).unwrap();
    for pair in m["pairs"].as_array().unwrap() {
        let rel = pair["a"].as_str().unwrap();
        assert_eq!(std::fs::read(a.join(rel)).unwrap(), std::fs::read(b.join(rel)).unwrap());
    }
}
