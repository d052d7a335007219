//! Range and bearing of the leader from the tracked marker rectangle.
//!
//! Camera frame: Z along the optical axis, X to the right of the image.
//! Bearings are positive when the marker lies right of the axis.

use thiserror::Error;

use crate::tracker::TargetBox;

#[derive(Debug, Error, PartialEq)]
pub enum PoseError {
    #[error("marker window is {0:.2} px wide; at least 2 px are needed")]
    DegenerateWindow(f64),
    #[error("marker edges coincide laterally; yaw is undefined")]
    DegenerateBaseline,
    #[error("marker depth must be positive")]
    NonPositiveDepth,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraModel {
    pub focal_px: f64,
    pub cx: f64,
    pub cy: f64,
    pub img_w: usize,
    pub img_h: usize,
    pub marker_width_m: f64,
    pub marker_height_m: f64,
}

impl CameraModel {
    /// Principal point at the image center.
    pub fn centered(img_w: usize, img_h: usize, focal_px: f64, marker_width_m: f64, marker_height_m: f64) -> Self {
        Self {
            focal_px,
            cx: img_w as f64 / 2.0,
            cy: img_h as f64 / 2.0,
            img_w,
            img_h,
            marker_width_m,
            marker_height_m,
        }
    }

    /// Projects a camera-frame point to continuous pixel coordinates.
    pub fn project(&self, x: f64, y_down: f64, z: f64) -> (f64, f64) {
        (self.cx + self.focal_px * x / z, self.cy + self.focal_px * y_down / z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkerGeometry {
    pub x_l: f64,
    pub z_l: f64,
    pub x_r: f64,
    pub z_r: f64,
    pub x_t: f64,
    pub z_t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativePose {
    pub bearing: f64,
    pub marker_yaw: f64,
    pub los_angle: f64,
    pub range: f64,
}

/// Pinhole inversion of the tracked marker with a flat, camera-facing
/// marker: both edges share the depth implied by the apparent width.
pub fn window_to_marker(target: &TargetBox, cam: &CameraModel) -> Result<MarkerGeometry, PoseError> {
    if !(target.width >= 2.0) {
        return Err(PoseError::DegenerateWindow(target.width));
    }
    let z = cam.focal_px * cam.marker_width_m / target.width;
    Ok(edges_at(target, z, z, cam))
}

/// As [`window_to_marker`], but with each edge's depth taken from the
/// apparent marker height measured at that edge.
pub fn window_to_marker_with_edges(
    target: &TargetBox,
    left_height_px: f64,
    right_height_px: f64,
    cam: &CameraModel,
) -> Result<MarkerGeometry, PoseError> {
    if !(target.width >= 2.0) {
        return Err(PoseError::DegenerateWindow(target.width));
    }
    if !(left_height_px > 0.0 && right_height_px > 0.0) {
        return Err(PoseError::NonPositiveDepth);
    }
    let z_l = cam.focal_px * cam.marker_height_m / left_height_px;
    let z_r = cam.focal_px * cam.marker_height_m / right_height_px;
    Ok(edges_at(target, z_l, z_r, cam))
}

fn edges_at(target: &TargetBox, z_l: f64, z_r: f64, cam: &CameraModel) -> MarkerGeometry {
    let x_l = (target.left() - cam.cx) * z_l / cam.focal_px;
    let x_r = (target.right() - cam.cx) * z_r / cam.focal_px;
    MarkerGeometry {
        x_l,
        z_l,
        x_r,
        z_r,
        x_t: (x_l + x_r) / 2.0,
        z_t: (z_l + z_r) / 2.0,
    }
}

pub fn relative_pose(m: &MarkerGeometry) -> Result<RelativePose, PoseError> {
    if !(m.z_t > 0.0) {
        return Err(PoseError::NonPositiveDepth);
    }
    if m.x_r == m.x_l {
        return Err(PoseError::DegenerateBaseline);
    }
    let los_angle = m.x_t.atan2(m.z_t);
    let marker_yaw = (m.z_r - m.z_l).atan2(m.x_r - m.x_l);
    Ok(RelativePose {
        bearing: los_angle + marker_yaw,
        marker_yaw,
        los_angle,
        range: m.x_t.hypot(m.z_t),
    })
}

/// Window-to-pose in one step.
pub fn estimate_pose(target: &TargetBox, cam: &CameraModel) -> Result<RelativePose, PoseError> {
    relative_pose(&window_to_marker(target, cam)?)
}
