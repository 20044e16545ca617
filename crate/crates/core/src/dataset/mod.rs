//! Synthetic multi-focus training pairs from foreground/matte assets and
//! background images.

mod catalog;
mod config;
mod generate;
mod pair;

pub use catalog::{AssetCatalog, ForegroundEntry};
pub use config::{GenConfig, MAX_SIGMA, MIN_OUT_SIZE, MIN_SIGMA};
pub use generate::{
    generate_dataset, plan_dataset, planned_pair_count, prepare_background, prepare_foreground, Manifest, PairError,
    PairPlan, PairRecord, MANIFEST_FILE,
};
pub use pair::{generate_pair, generate_pair_split, make_guidance, FocusSide, ForegroundAsset, FusionPair, GUIDANCE_EPS};
