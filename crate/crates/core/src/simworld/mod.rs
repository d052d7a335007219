//! Deterministic planar world: unicycle vehicles and a pinhole renderer for
//! the follower's camera.

mod render;
mod scene;

pub use render::{
    ground_truth, project_scene, render_frame, render_frame_with_truth, Drawable, GroundTruth, MarkerTruth, Projection,
};
pub use scene::{Distractor, LightingSchedule, Occluder, SceneConfig, Texture};

use crate::guidance::{wrap, Command};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub u: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap(psi),
            u: 0.0,
        }
    }

    pub fn pose(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.psi)
    }

    /// World point expressed in this vehicle's camera frame: `(X, Z)` with
    /// Z forward and X to the right.
    pub fn to_camera(&self, px: f64, py: f64) -> (f64, f64) {
        let (dx, dy) = (px - self.x, py - self.y);
        let (s, c) = self.psi.sin_cos();
        (dx * s - dy * c, dx * c + dy * s)
    }
}

/// Forward-Euler unicycle step with the commanded speed and heading rate.
pub fn step_kinematics(s: &VehicleState, cmd: &Command, dt: f64) -> VehicleState {
    debug_assert!(dt > 0.0 && dt <= 0.1);
    let (sin, cos) = s.psi.sin_cos();
    VehicleState {
        x: s.x + cmd.u * cos * dt,
        y: s.y + cmd.u * sin * dt,
        psi: wrap(s.psi + cmd.delta * dt),
        u: cmd.u,
    }
}
