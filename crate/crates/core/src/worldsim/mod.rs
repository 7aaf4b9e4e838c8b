//! Procedural 2.5-D scenes, camera projection, rendering and grasp judging.

pub mod camera;
pub mod judge;
pub mod render;
pub mod scene;
pub mod support;
pub mod texture;

pub use camera::CameraModel;
pub use judge::{judge_grasp, Judgement, Outcome};
pub use render::{render_rgb, render_rgb_at, visible_mask};
pub use scene::{
    class_shape, generate_scene, BackgroundChoice, Layout, ObjectInstance, Scene, SceneSpec, NUM_CLASSES,
};
pub use support::{SupportField, SupportKind};
pub use texture::{Background, TextureFamily};
