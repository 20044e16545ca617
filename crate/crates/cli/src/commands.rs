use std::path::{Path, PathBuf};

use focusfuse::dataset::{generate_dataset, planned_pair_count, AssetCatalog, GenConfig, Manifest};
use focusfuse::defocus::{
    load_scene_file, make_fig7_scene_with, render_alpha_matte, render_one_param_scene, render_two_param,
    render_two_param_scene, SceneSpec,
};
use focusfuse::fusion::{final_fusion, load_correction, oracle_correction, CorrectionSource};
use focusfuse::guidance::{estimate_guidance, load_guidance, save_guidance, validate_guidance, EstimateParams};
use focusfuse::io::{load_png, save_png, write_atomic, BitDepth};
use focusfuse::losses::{gradient_check, LossConfig, LossInputs, WeightSource};
use focusfuse::metrics::{evaluate_batch, MethodInput, MetricValues};
use focusfuse::rng::keyed_rng;
use focusfuse::{blur, synth, ImageF};
use rand::Rng;
use serde::Serialize;

use crate::args::*;
use crate::{Failure, Globals};

type CmdResult = Result<(), Failure>;

fn create_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))
}

pub fn simulate(args: &SimulateArgs, g: Globals) -> CmdResult {
    let depth = BitDepth::from_bits(args.bit_depth)?;
    if args.all_layers && args.model != Model::Matte {
        return Err(Failure::argument("--all-layers needs --model matte"));
    }
    let (scene, boundary) = match (&args.scene, args.fig7) {
        (Some(path), _) => match load_scene_file(path)? {
            SceneSpec::Layered(s) => (s, None),
            SceneSpec::Boundary(b) => (b.to_scene()?, Some(b)),
        },
        (None, Some(n)) => (make_fig7_scene_with::<f64>(n, args.near_sigma, args.far_sigma)?, None),
        (None, None) => unreachable!("clap requires a scene source"),
    };
    log::info!("rendering {} layers at {}x{}", scene.len(), scene.width(), scene.height());

    create_dir(&args.out)?;
    let mut image = match args.model {
        Model::One => render_one_param_scene(&scene)?,
        Model::Two => match &boundary {
            Some(b) => render_two_param(b)?,
            None => render_two_param_scene(&scene)?,
        },
        Model::Matte => {
            let r = render_alpha_matte(&scene)?;
            if args.all_layers {
                for n in 0..scene.len() {
                    let k = n + 1;
                    save_png(&r.surfaces[n], args.out.join(format!("layer{k}_surface.png")), depth)?;
                    save_png(&r.pre_mattes[n], args.out.join(format!("layer{k}_matte_pre.png")), depth)?;
                    save_png(&r.mattes[n], args.out.join(format!("layer{k}_matte.png")), depth)?;
                    save_png(&r.contributions[n], args.out.join(format!("layer{k}_contribution.png")), depth)?;
                }
            }
            r.image
        }
    };
    if let Some(std) = args.noise {
        let mut rng = keyed_rng(g.seed, "simulate-noise", &[]);
        image = blur::add_noise(&image, std, &mut rng)?.clamp01();
    }
    let out = args.out.join("render.png");
    save_png(&image, &out, depth)?;
    println!("{}", out.display());
    Ok(())
}

pub fn gen_dataset(args: &GenDatasetArgs, g: Globals) -> CmdResult {
    let catalog = AssetCatalog::load(&args.catalog)?;
    let cfg = GenConfig {
        out_size: args.size,
        backgrounds_per_fg: args.per_fg,
        sigma_range: (args.sigma_min, args.sigma_max),
        bg_sigma_range: args.bg_sigma_min.zip(args.bg_sigma_max),
        swap_probability: args.swap_probability,
        seed: g.seed,
        noise: args.noise,
    };
    let planned = planned_pair_count(&catalog, &cfg)?;
    if args.dry_run {
        println!(
            "{} foregrounds x {} backgrounds each = {planned} pairs",
            catalog.foregrounds.len(),
            cfg.backgrounds_per_fg
        );
        return Ok(());
    }
    let manifest = generate_dataset(&catalog, &cfg, &args.out)?;
    println!("{} of {} pairs written to {}", manifest.pairs.len(), manifest.planned, args.out.display());
    if manifest.errors.is_empty() {
        Ok(())
    } else {
        for e in &manifest.errors {
            eprintln!("pair {}: {}", e.id, e.message);
        }
        Err(Failure::io(format!("{} pairs failed; see the manifest", manifest.errors.len())))
    }
}

#[derive(Serialize)]
struct FuseMetrics {
    #[serde(flatten)]
    values: MetricValues,
    zero_image: bool,
}

pub fn fuse(args: &FuseArgs) -> CmdResult {
    let depth = BitDepth::from_bits(args.bit_depth)?;
    let a: ImageF = load_png(&args.a)?;
    let b: ImageF = load_png(&args.b)?;
    let channels = a.channels().max(b.channels());
    let (a, b) = (a.with_channels(channels)?, b.with_channels(channels)?);

    let gmap = match &args.gmap {
        Some(p) => load_guidance(p)?,
        None => {
            let est = estimate_guidance(&a, &b, EstimateParams::default())?;
            if let Some(p) = &args.save_gmap {
                save_guidance(&est, p)?;
            }
            est
        }
    };
    let corr = if let Some(p) = &args.corr {
        CorrectionSource::Image(load_correction(p)?)
    } else if let Some(p) = &args.oracle_gt {
        oracle_correction(Some(load_png(p)?))?
    } else {
        CorrectionSource::Zero
    };
    let fused = final_fusion(&a, &b, &gmap, &corr)?;
    save_png(&fused, &args.out, depth)?;

    if let Some(p) = &args.metrics {
        let (values, zero_image) = MetricValues::compute(&fused, 1.0)?;
        let json = serde_json::to_string_pretty(&FuseMetrics { values, zero_image }).expect("metrics serialise");
        write_atomic(p, json.as_bytes())?;
    }
    println!("{}", args.out.display());
    Ok(())
}

fn expand_inputs(label: &str, spec: &str) -> Result<MethodInput, Failure> {
    let path = Path::new(spec);
    if path.is_dir() {
        return Ok(MethodInput::from_dir(label, path)?);
    }
    let paths = glob::glob(spec)
        .map_err(|e| Failure::argument(format!("bad pattern {spec:?}: {e}")))?
        .collect::<Result<Vec<PathBuf>, _>>()
        .map_err(|e| Failure::io(e.to_string()))?;
    if paths.is_empty() {
        return Err(Failure::io(format!("{spec}: no matching files")));
    }
    Ok(MethodInput::from_files(label, paths))
}

pub fn evaluate(args: &EvaluateArgs) -> CmdResult {
    let mut methods: Vec<MethodInput> = Vec::new();
    if !args.inputs.is_empty() {
        let mut merged = MethodInput { label: args.label.clone(), files: Vec::new() };
        for spec in &args.inputs {
            merged.files.extend(expand_inputs(&args.label, spec)?.files);
        }
        merged.files.sort();
        merged.files.dedup();
        methods.push(merged);
    }
    for m in &args.methods {
        let (label, spec) = m
            .split_once('=')
            .ok_or_else(|| Failure::argument(format!("--methods expects LABEL=PATH, got {m:?}")))?;
        if methods.iter().any(|x| x.label == label) {
            return Err(Failure::argument(format!("method label {label:?} given twice")));
        }
        methods.push(expand_inputs(label, spec)?);
    }
    if methods.is_empty() {
        return Err(Failure::argument("nothing to evaluate: give --inputs or --methods"));
    }
    if !(args.scale.is_finite() && args.scale > 0.0) {
        return Err(Failure::argument("--scale must be positive"));
    }

    let report = evaluate_batch(&methods, args.scale);
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    write_atomic(&args.out, json.as_bytes())?;
    let table = report.to_table();
    write_atomic(args.out.with_extension("txt"), table.as_bytes())?;
    print!("{table}");
    if report.ok {
        Ok(())
    } else {
        for e in &report.errors {
            eprintln!("{} [{}]: {}", e.id, e.method, e.message);
        }
        Err(Failure::io(format!("{} inputs could not be evaluated", report.errors.len())))
    }
}

fn random_image(rng: &mut impl Rng, n: usize, channels: usize) -> Result<ImageF, Failure> {
    let data = (0..n * n * channels).map(|_| rng.random::<f64>()).collect();
    Ok(ImageF::from_vec(n, n, channels, data)?)
}

pub fn grad_check(args: &GradCheckArgs, g: Globals) -> CmdResult {
    if args.size == 0 || args.instances == 0 {
        return Err(Failure::argument("--size and --instances must be at least 1"));
    }
    if !(args.step > 0.0 && args.step < 1e-3) {
        return Err(Failure::argument("--step must lie in (0, 1e-3)"));
    }
    let cfg = LossConfig {
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        k: args.k,
        weight_source: match args.weight_from {
            WeightFrom::Predicted => WeightSource::Predicted,
            WeightFrom::GroundTruth => WeightSource::GroundTruth,
        },
    };
    cfg.validate()?;

    let mut worst = 0.0f64;
    for i in 0..args.instances {
        let mut rng = keyed_rng(g.seed, "grad-check", &[i as u64]);
        let n = args.size;
        let matte_pred = random_image(&mut rng, n, 1)?;
        let matte_gt = random_image(&mut rng, n, 1)?;
        let fusion_ini = random_image(&mut rng, n, 3)?;
        let fusion_fin = random_image(&mut rng, n, 3)?;
        let fusion_gt = random_image(&mut rng, n, 3)?;
        let inputs = LossInputs {
            matte_pred: &matte_pred,
            matte_gt: &matte_gt,
            fusion_ini: &fusion_ini,
            fusion_fin: &fusion_fin,
            fusion_gt: &fusion_gt,
        };
        let r = gradient_check(inputs, &cfg, args.step, 1e-3)?;
        println!(
            "instance {i}: matte {:.6} ini {:.6} weighted {:.6} total {:.6}",
            r.matte, r.ini, r.weighted, r.total
        );
        println!(
            "  rel. error matte {:.3e} ({} checked, {} near kinks skipped), fusion {:.3e} ({} checked)",
            r.max_rel_error_matte, r.checked_matte, r.skipped_matte, r.max_rel_error_fusion, r.checked_fusion
        );
        worst = worst.max(r.max_rel_error_matte).max(r.max_rel_error_fusion);
    }
    println!("max rel. error {worst:.3e} (tolerance {:.1e})", args.tolerance);
    if worst < args.tolerance {
        Ok(())
    } else {
        Err(Failure::validation(format!("gradient mismatch {worst:.3e} exceeds {:.1e}", args.tolerance)))
    }
}

pub fn validate(args: &ValidateArgs) -> CmdResult {
    if let Some(p) = &args.gmap {
        validate_gmap(p, args.band_radius)?;
    }
    if let Some(p) = &args.manifest {
        validate_manifest(p)?;
    }
    Ok(())
}

fn validate_gmap(path: &Path, band_radius: Option<usize>) -> CmdResult {
    let r = validate_guidance(path, band_radius)?;
    println!(
        "{}: {}x{}, levels 0/0.5/1: {}/{}/{}",
        path.display(),
        r.width,
        r.height,
        r.counts[0],
        r.counts[1],
        r.counts[2]
    );
    if r.off_level_count > 0 {
        for p in &r.off_level {
            println!("  off-level pixel ({}, {}) = {}", p.x, p.y, p.value);
        }
        return Err(Failure::validation(format!("{} off-level pixels", r.off_level_count)));
    }
    match r.band_violation_count {
        Some(n) if n > 0 => Err(Failure::validation(format!("{n} band pixels are not between a 0 and a 1 region"))),
        _ => Ok(()),
    }
}

fn validate_manifest(path: &Path) -> CmdResult {
    use sha2::{Digest, Sha256};

    let manifest = Manifest::load(path)?;
    let root = path.parent().unwrap_or(Path::new("."));
    let mut bad = 0;
    for rec in &manifest.pairs {
        let mut hasher = Sha256::new();
        for rel in [&rec.a, &rec.b, &rec.gt, &rec.matte, &rec.gmap] {
            let p = root.join(rel);
            let bytes = std::fs::read(&p).map_err(|e| Failure::io(format!("{}: {e}", p.display())))?;
            hasher.update(&bytes);
        }
        if hex::encode(hasher.finalize()) != rec.checksum {
            println!("  {}: checksum mismatch", rec.id);
            bad += 1;
            continue;
        }
        if let Err(e) = load_guidance::<f64>(root.join(&rec.gmap)) {
            println!("  {}: {e}", rec.id);
            bad += 1;
        }
    }
    println!(
        "{}: {} pairs checked, {} failed, {} generation errors recorded",
        path.display(),
        manifest.pairs.len(),
        bad,
        manifest.errors.len()
    );
    if bad > 0 {
        Err(Failure::validation(format!("{bad} pairs failed validation")))
    } else {
        Ok(())
    }
}

pub fn make_assets(args: &MakeAssetsArgs, g: Globals) -> CmdResult {
    if args.foregrounds == 0 || args.backgrounds == 0 || args.size < 16 {
        return Err(Failure::argument("need at least one foreground and background, size >= 16"));
    }
    let catalog = synth::write_desk_assets(&args.out, args.foregrounds, args.backgrounds, args.size, g.seed)?;
    println!("{}", catalog.display());
    Ok(())
}
