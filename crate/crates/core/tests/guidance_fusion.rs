use focusfuse::dataset::{generate_pair, ForegroundAsset};
use focusfuse::fusion::{boundary_map, final_fusion, initial_fusion, CorrectionSource};
use focusfuse::guidance::{
    estimate_guidance, load_guidance, save_guidance, validate_guidance, EstimateParams, GuidanceMap, Level,
};
use focusfuse::io::encode_gray8;
use focusfuse::rng::keyed_rng;
use focusfuse::synth::{ellipse_matte, texture};
use focusfuse::{GuidanceMapF, ImageF, ImageF32};
use proptest::prelude::*;
use rand::Rng;

fn random_image(seed: u64, w: usize, h: usize, c: usize) -> ImageF {
    let mut rng = keyed_rng(seed, "fusion-test", &[]);
    ImageF::from_fn(w, h, c, |_, _, _| rng.random::<f64>()).unwrap()
}

fn random_gmap(seed: u64, w: usize, h: usize) -> GuidanceMapF {
    let mut rng = keyed_rng(seed, "gmap-test", &[]);
    GuidanceMap::from_fn(w, h, |_, _| match rng.random_range(0..3) {
        0 => Level::B,
        1 => Level::Band,
        _ => Level::A,
    })
    .unwrap()
}

fn uniform(w: usize, h: usize, level: Level) -> GuidanceMapF {
    GuidanceMap::from_fn(w, h, |_, _| level).unwrap()
}

#[test]
fn all_ones_map_returns_source_a_exactly() {
    let a = random_image(1, 20, 15, 3);
    let b = random_image(2, 20, 15, 3);
    let gt = random_image(3, 20, 15, 3);
    let ones = uniform(20, 15, Level::A);
    for corr in [
        CorrectionSource::Zero,
        CorrectionSource::Image(random_image(4, 20, 15, 3).map(|v| 2.0 * v - 1.0)),
        CorrectionSource::Oracle(gt),
    ] {
        assert_eq!(final_fusion(&a, &b, &ones, &corr).unwrap(), a);
    }
    assert_eq!(initial_fusion(&a, &b, &uniform(20, 15, Level::B)).unwrap(), b);
}

#[test]
fn boundary_map_is_exact_band_indicator() {
    let g = random_gmap(5, 31, 17);
    let bmap = boundary_map(&g);
    for y in 0..17 {
        for x in 0..31 {
            let want = if g.level(x, y) == Level::Band { 1.0 } else { 0.0 };
            assert_eq!(bmap.get(x, y, 0), want);
        }
    }
}

#[test]
fn oracle_correction_reproduces_ground_truth_on_band() {
    for seed in 0..10 {
        let a = random_image(seed, 24, 24, 3);
        let b = random_image(seed + 100, 24, 24, 3);
        let gt = random_image(seed + 200, 24, 24, 3);
        let g = random_gmap(seed, 24, 24);
        let ini = initial_fusion(&a, &b, &g).unwrap();
        let out = final_fusion(&a, &b, &g, &CorrectionSource::Oracle(gt.clone())).unwrap();
        for y in 0..24 {
            for x in 0..24 {
                let want = if g.level(x, y) == Level::Band { &gt } else { &ini };
                for c in 0..3 {
                    assert!((out.get(x, y, c) - want.get(x, y, c)).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn oracle_fusion_of_generated_pair_recovers_ground_truth() {
    let n = 64;
    let color = texture(n, n, 3, 8).unwrap();
    let matte = ellipse_matte(n, n, 30.0, 34.0, 18.0, 15.0).unwrap();
    let fg = ForegroundAsset::from_straight(&color, matte).unwrap();
    let p = generate_pair(&fg, &texture(n, n, 3, 9).unwrap(), 2.5, true).unwrap();
    let out = final_fusion(&p.img_a, &p.img_b, &p.gmap, &CorrectionSource::Oracle(p.gt.clone())).unwrap();
    assert!(out.max_abs_diff(&p.gt).unwrap() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fusion_off_band_ignores_correction(seed in 0u64..10_000) {
        let a = random_image(seed, 10, 9, 3);
        let b = random_image(seed ^ 1, 10, 9, 3);
        let g = random_gmap(seed, 10, 9);
        let corr = random_image(seed ^ 2, 10, 9, 3).map(|v| 2.0 * v - 1.0);
        let plain = final_fusion(&a, &b, &g, &CorrectionSource::Zero).unwrap();
        let fixed = final_fusion(&a, &b, &g, &CorrectionSource::Image(corr)).unwrap();
        for y in 0..9 {
            for x in 0..10 {
                let lvl = g.level(x, y);
                for c in 0..3 {
                    if lvl != Level::Band {
                        prop_assert_eq!(fixed.get(x, y, c), plain.get(x, y, c));
                    }
                    let want = match lvl {
                        Level::A => a.get(x, y, c),
                        Level::B => b.get(x, y, c),
                        Level::Band => 0.5 * a.get(x, y, c) + 0.5 * b.get(x, y, c),
                    };
                    prop_assert_eq!(plain.get(x, y, c), want);
                }
            }
        }
        let (lo, hi) = fixed.min_max();
        prop_assert!(lo >= 0.0 && hi <= 1.0);
    }

    #[test]
    fn swapping_sources_and_map_commutes(seed in 0u64..10_000) {
        let a = random_image(seed, 8, 8, 1);
        let b = random_image(seed ^ 9, 8, 8, 1);
        let g = random_gmap(seed, 8, 8);
        let x = initial_fusion(&a, &b, &g).unwrap();
        let y = initial_fusion(&b, &a, &g.swapped()).unwrap();
        prop_assert!(x.max_abs_diff(&y).unwrap() < 1e-15);
    }
}

#[test]
fn f32_fusion_matches_f64() {
    let a = random_image(1, 12, 12, 3);
    let b = random_image(2, 12, 12, 3);
    let g = random_gmap(3, 12, 12);
    let g32 = GuidanceMap::<f32>::from_levels(12, 12, &g.to_levels()).unwrap();
    let want = initial_fusion(&a, &b, &g).unwrap();
    let (a32, b32): (ImageF32, ImageF32) = (a.cast(), b.cast());
    let got = initial_fusion(&a32, &b32, &g32).unwrap().cast::<f64>();
    assert!(want.max_abs_diff(&got).unwrap() < 1e-6);
}

/// A focused texture on one half and its blur on the other, and vice versa.
fn half_focused_pair(n: usize, sigma: f64) -> (ImageF, ImageF, GuidanceMapF) {
    let tex = texture(n, n, 3, 21).unwrap();
    let blurred = focusfuse::blur::gaussian_blur(&tex, sigma).unwrap();
    let left = |x: usize| x < n / 2;
    let a = ImageF::from_fn(n, n, 3, |x, y, c| if left(x) { tex.get(x, y, c) } else { blurred.get(x, y, c) }).unwrap();
    let b = ImageF::from_fn(n, n, 3, |x, y, c| if left(x) { blurred.get(x, y, c) } else { tex.get(x, y, c) }).unwrap();
    let truth = GuidanceMap::from_fn(n, n, |x, _| if left(x) { Level::A } else { Level::B }).unwrap();
    (a, b, truth)
}

#[test]
fn estimator_finds_focused_halves() {
    let (a, b, truth) = half_focused_pair(96, 2.5);
    let est = estimate_guidance(&a, &b, EstimateParams::default()).unwrap();
    let mut agree = 0;
    let mut total = 0;
    for y in 0..96 {
        for x in 0..96 {
            if est.level(x, y) == Level::Band {
                continue;
            }
            total += 1;
            agree += (est.level(x, y) == truth.level(x, y)) as usize;
        }
    }
    assert!(agree as f64 / total as f64 > 0.98, "{agree}/{total}");
    // Band pixels sit between the two decided regions.
    let r = EstimateParams::default().band_radius;
    assert!(est.band_violations(2 * r + 1).is_empty());
    let swapped = estimate_guidance(&b, &a, EstimateParams::default()).unwrap();
    assert_eq!(swapped, est.swapped());
}

#[test]
fn estimator_output_is_three_level_and_band_is_bounded() {
    for seed in 0..4u64 {
        let n = 64;
        let tex = texture(n, n, 1, seed).unwrap();
        let blurred = focusfuse::blur::gaussian_blur(&tex, 3.0).unwrap();
        let m = ellipse_matte(n, n, 32.0, 32.0, 20.0, 14.0).unwrap();
        let a = ImageF::from_fn(n, n, 1, |x, y, _| if m.get(x, y, 0) > 0.5 { tex.get(x, y, 0) } else { blurred.get(x, y, 0) })
            .unwrap();
        let b = ImageF::from_fn(n, n, 1, |x, y, _| if m.get(x, y, 0) > 0.5 { blurred.get(x, y, 0) } else { tex.get(x, y, 0) })
            .unwrap();
        let est = estimate_guidance(&a, &b, EstimateParams::default()).unwrap();
        for v in est.as_image().data() {
            assert!(*v == 0.0 || *v == 0.5 || *v == 1.0);
        }
        assert!(est.band_violations(2 * EstimateParams::default().band_radius + 1).is_empty());
    }
}

#[test]
fn sharp_source_wins_everywhere_but_the_border() {
    let n = 64;
    let window = EstimateParams::default().window;
    for seed in 0..3 {
        let a = texture(n, n, 3, 40 + seed).unwrap();
        let b = focusfuse::blur::gaussian_blur(&a, 3.0).unwrap();
        let est = estimate_guidance(&a, &b, EstimateParams::default()).unwrap();
        for y in window..n - window {
            for x in window..n - window {
                assert_eq!(est.level(x, y), Level::A, "seed {seed} ({x}, {y})");
            }
        }
    }
}

#[test]
fn identical_sources_give_constant_map() {
    let a = texture(40, 40, 3, 3).unwrap();
    let est = estimate_guidance(&a, &a, EstimateParams::default()).unwrap();
    assert_eq!(est.counts(), [1600, 0, 0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn estimated_band_separates_decided_regions(
        seed in 0u64..1000,
        cx in 10.0f64..54.0,
        cy in 10.0f64..54.0,
        rx in 3.0f64..30.0,
        ry in 3.0f64..30.0,
        sigma in 1.0f64..4.0,
    ) {
        let n = 64;
        let tex = texture(n, n, 1, seed).unwrap();
        let blurred = focusfuse::blur::gaussian_blur(&tex, sigma).unwrap();
        let m = ellipse_matte(n, n, cx, cy, rx, ry).unwrap();
        let pick = |inside: bool| {
            ImageF::from_fn(n, n, 1, |x, y, _| {
                if (m.get(x, y, 0) > 0.5) == inside { tex.get(x, y, 0) } else { blurred.get(x, y, 0) }
            })
            .unwrap()
        };
        let params = EstimateParams::default();
        let est = estimate_guidance(&pick(true), &pick(false), params).unwrap();
        prop_assert!(est.as_image().data().iter().all(|&v| v == 0.0 || v == 0.5 || v == 1.0));
        let [zeros, band, ones] = est.counts();
        if zeros > 0 && ones > 0 {
            prop_assert!(est.band_violations(2 * params.band_radius + 1).is_empty());
        } else {
            prop_assert_eq!(band, 0);
        }
    }
}

#[test]
fn stored_guidance_round_trip_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let g = random_gmap(11, 13, 7);
    let p = dir.path().join("g.png");
    save_guidance(&g, &p).unwrap();
    assert_eq!(load_guidance::<f64>(&p).unwrap(), g);
    assert!(validate_guidance(&p, None).unwrap().is_valid());

    let mut levels = g.to_levels();
    levels[20] = 77;
    levels[30] = 200;
    let bad = dir.path().join("bad.png");
    std::fs::write(&bad, encode_gray8(13, 7, levels).unwrap()).unwrap();
    let report = validate_guidance(&bad, None).unwrap();
    assert_eq!(report.off_level_count, 2);
    assert_eq!((report.off_level[0].x, report.off_level[0].y, report.off_level[0].value), (7, 1, 77));
    assert_eq!(
        load_guidance::<f64>(&bad).unwrap_err().kind(),
        focusfuse::ErrorKind::Validation
    );
}
