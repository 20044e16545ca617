//! Defocus simulation: the space-invariant model, the two-sided boundary
//! model and the layered α-matte model, plus the three-object comparison
//! fixture and the scene description format.

mod fig7;
mod render;
mod scene;
mod scene_file;

pub use fig7::{
    fig7_all_in_focus, fig7_scene_with_sigmas, fig7_sigmas, make_fig7_scene, make_fig7_scene_with, Rect,
    FIG7_FAR_SIGMA, FIG7_NEAR_SIGMA, FIG7_OBJECTS, FIG7_SIZE,
};
pub use render::{
    compose_two_surface, over, render_alpha_matte, render_one_param, render_one_param_scene, render_two_param,
    render_two_param_scene, AlphaMatteRender,
};
pub use scene::{BoundaryLineScene, Layer, Line, Scene};
pub use scene_file::{load_scene_file, parse_scene, SceneSpec};
