use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "focusfuse", version, about = "Defocus simulation, multi-focus dataset generation, fusion and evaluation")]
pub struct Cli {
    /// Master seed for every random choice (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: available parallelism). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output; repeat for debug detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// TOML file with defaults for `seed`, `threads` and `verbose`. Flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a layered scene or the built-in four-layer fixture.
    Simulate(SimulateArgs),
    /// Generate a multi-focus training set from a foreground/background catalog.
    GenDataset(GenDatasetArgs),
    /// Fuse two sources with a guidance map and an optional boundary correction.
    Fuse(FuseArgs),
    /// Compute AG, LIF, MSD and GLD over one or more sets of images.
    Evaluate(EvaluateArgs),
    /// Check loss gradients against central finite differences.
    GradCheck(GradCheckArgs),
    /// Check a guidance map PNG or a dataset manifest.
    Validate(ValidateArgs),
    /// Write procedural foreground/background assets and a catalog.
    MakeAssets(MakeAssetsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// Regional one-parameter model: each region blurred with its own σ.
    One,
    /// Two-parameter model: each side blurred separately, then spliced.
    Two,
    /// Layered α-matte model with occlusion.
    Matte,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["scene", "fig7"]))]
pub struct SimulateArgs {
    /// TOML scene description.
    #[arg(long, value_name = "FILE")]
    pub scene: Option<PathBuf>,

    /// Built-in fixture focused on object 1, 2 or 3 (1 is frontmost).
    #[arg(long, value_name = "N")]
    pub fig7: Option<usize>,

    #[arg(long, value_enum, default_value_t = Model::Matte)]
    pub model: Model,

    /// Output directory; the render is written to `render.png`.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Also write every layer's blurred surface, pre-occlusion matte,
    /// effective matte and contribution (matte model only).
    #[arg(long)]
    pub all_layers: bool,

    /// Fixture σ for layers in front of the focused one.
    #[arg(long, default_value_t = 4.0)]
    pub near_sigma: f64,

    /// Fixture σ for layers behind the focused one.
    #[arg(long, default_value_t = 2.0)]
    pub far_sigma: f64,

    /// PNG bit depth, 8 or 16.
    #[arg(long, default_value_t = 16)]
    pub bit_depth: u32,

    /// Standard deviation of additive Gaussian noise on the render.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    /// Asset catalog (TOML).
    #[arg(long, value_name = "FILE")]
    pub catalog: PathBuf,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Side of the square output images.
    #[arg(long, default_value_t = 512)]
    pub size: usize,

    #[arg(long, default_value_t = 1.0)]
    pub sigma_min: f64,

    #[arg(long, default_value_t = 5.0)]
    pub sigma_max: f64,

    /// Draw the background σ independently (requires --bg-sigma-max too).
    #[arg(long, requires = "bg_sigma_max")]
    pub bg_sigma_min: Option<f64>,

    #[arg(long, requires = "bg_sigma_min")]
    pub bg_sigma_max: Option<f64>,

    /// Backgrounds per foreground.
    #[arg(long, default_value_t = 20)]
    pub per_fg: usize,

    /// Probability that the focused-foreground image is written as source B.
    #[arg(long, default_value_t = 0.5)]
    pub swap_probability: f64,

    /// Standard deviation of additive Gaussian noise on both sources.
    #[arg(long)]
    pub noise: Option<f64>,

    /// Validate and print the planned pair count without writing anything.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Source A.
    #[arg(long, value_name = "PNG")]
    pub a: PathBuf,

    /// Source B.
    #[arg(long, value_name = "PNG")]
    pub b: PathBuf,

    /// Three-level guidance map (8-bit: 0, 128, 255). Estimated from the
    /// sources when omitted.
    #[arg(long, value_name = "PNG")]
    pub gmap: Option<PathBuf>,

    /// Write the estimated guidance map here.
    #[arg(long, value_name = "PNG", conflicts_with = "gmap")]
    pub save_gmap: Option<PathBuf>,

    /// Boundary correction stored with a 0.5 bias.
    #[arg(long, value_name = "PNG", conflicts_with = "oracle_gt")]
    pub corr: Option<PathBuf>,

    /// Use the exact correction from this ground truth.
    #[arg(long, value_name = "PNG")]
    pub oracle_gt: Option<PathBuf>,

    /// Fused output PNG.
    #[arg(long, value_name = "PNG")]
    pub out: PathBuf,

    /// Also write the output's metrics as JSON.
    #[arg(long, value_name = "FILE")]
    pub metrics: Option<PathBuf>,

    #[arg(long, default_value_t = 16)]
    pub bit_depth: u32,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory or glob pattern of PNGs evaluated under the label given by --label.
    #[arg(long, value_name = "DIR|GLOB")]
    pub inputs: Vec<String>,

    #[arg(long, default_value = "fused")]
    pub label: String,

    /// Additional method as LABEL=DIR|GLOB; repeatable. Images are matched
    /// across methods by file name.
    #[arg(long, value_name = "LABEL=PATH")]
    pub methods: Vec<String>,

    /// JSON report path; a text table is written next to it with a `.txt` extension.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Multiplier applied to [0, 1] intensities before computing metrics.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightFrom {
    Predicted,
    GroundTruth,
}

#[derive(Debug, Args)]
pub struct GradCheckArgs {
    /// Side of the random square instances.
    #[arg(long, default_value_t = 6)]
    pub size: usize,

    /// Number of random instances.
    #[arg(long, default_value_t = 1)]
    pub instances: usize,

    #[arg(long, default_value_t = 5.0)]
    pub k: f64,

    #[arg(long, default_value_t = 0.2)]
    pub lambda1: f64,

    #[arg(long, default_value_t = 0.2)]
    pub lambda2: f64,

    /// Matte driving the weight map.
    #[arg(long, value_enum, default_value_t = WeightFrom::Predicted)]
    pub weight_from: WeightFrom,

    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,

    /// Maximum accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("target").required(true).args(["gmap", "manifest"]))]
pub struct ValidateArgs {
    /// Guidance map PNG to check for off-level pixels.
    #[arg(long, value_name = "PNG")]
    pub gmap: Option<PathBuf>,

    /// Also require every band pixel to lie within this distance of both a 0 and a 1 pixel.
    #[arg(long, requires = "gmap")]
    pub band_radius: Option<usize>,

    /// Dataset manifest whose pair checksums and guidance maps are re-checked.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MakeAssetsArgs {
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    #[arg(long, default_value_t = 3)]
    pub foregrounds: usize,

    #[arg(long, default_value_t = 2)]
    pub backgrounds: usize,

    #[arg(long, default_value_t = 256)]
    pub size: usize,
}
