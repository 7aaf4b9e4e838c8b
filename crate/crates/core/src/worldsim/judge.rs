use serde::{Deserialize, Serialize};

use crate::grasp::{GripperSpec, WorldGrasp};
use crate::worldsim::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Miss,
    Slide,
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Judgement {
    pub outcome: Outcome,
    /// Nearest engaged object, if any.
    pub object_id: Option<usize>,
    pub distance: f64,
}

/// Ground-truth grasp outcome.
///
/// Only objects whose top is above the gripper's lowest point are engaged;
/// the nearest engaged centroid decides: within `kappa * rho` and narrower
/// than the aperture is a success, within `rho` a slide, otherwise a miss.
pub fn judge_grasp(scene: &Scene, g: &WorldGrasp, gripper: &GripperSpec) -> Judgement {
    let nearest = scene
        .objects
        .iter()
        .filter(|o| o.top_height > g.h)
        .map(|o| (o, o.centroid().dist(g.p)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.id.cmp(&b.0.id)));
    let Some((o, d)) = nearest else {
        return Judgement { outcome: Outcome::Miss, object_id: None, distance: f64::INFINITY };
    };
    let outcome = if d <= gripper.capture_radius() && o.graspable_diameter <= gripper.aperture {
        Outcome::Success
    } else if d > gripper.capture_radius() && d <= gripper.radius {
        Outcome::Slide
    } else {
        Outcome::Miss
    };
    Judgement { outcome, object_id: Some(o.id), distance: d }
}
