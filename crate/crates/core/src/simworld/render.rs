use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{SceneConfig, VehicleState};
use crate::imaging::{Raster, RgbImage};
use crate::pose::CameraModel;

/// Nothing closer than this to the image plane is drawn.
const NEAR_PLANE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Drawable {
    Marker,
    Distractor(usize),
    Occluder(usize),
}

/// Image-plane footprint of one scene element, continuous pixel
/// coordinates, with the depth used for visibility ordering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub what: Drawable,
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
    pub depth: f64,
    /// Camera-frame offset of the element's left edge (distractors only).
    pub x_left: f64,
}

impl Projection {
    fn area(&self) -> f64 {
        (self.u1 - self.u0).max(0.0) * (self.v1 - self.v0).max(0.0)
    }
}

fn billboard(
    what: Drawable,
    (x, z): (f64, f64),
    width: f64,
    height: f64,
    elevation: f64,
    cam: &CameraModel,
) -> Option<Projection> {
    if z <= NEAR_PLANE {
        return None;
    }
    let f = cam.focal_px;
    let vc = cam.cy - f * elevation / z;
    Some(Projection {
        what,
        u0: cam.cx + f * (x - width / 2.0) / z,
        u1: cam.cx + f * (x + width / 2.0) / z,
        v0: vc - f * height / (2.0 * z),
        v1: vc + f * height / (2.0 * z),
        depth: z,
        x_left: x - width / 2.0,
    })
}

/// Clips a camera-frame polygon to the half-space in front of the near plane.
fn clip_near(poly: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ina, inb) = (a.1 >= NEAR_PLANE, b.1 >= NEAR_PLANE);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = (NEAR_PLANE - a.1) / (b.1 - a.1);
            out.push((a.0 + t * (b.0 - a.0), NEAR_PLANE));
        }
    }
    out
}

/// Every visible element of the scene, ordered far to near.
pub fn project_scene(
    leader: &VehicleState,
    follower: &VehicleState,
    scene: &SceneConfig,
    cam: &CameraModel,
) -> Vec<Projection> {
    let mut items = Vec::new();
    for (i, d) in scene.distractors.iter().enumerate() {
        let p = follower.to_camera(d.x, d.y);
        items.extend(billboard(Drawable::Distractor(i), p, d.width_m, d.height_m, d.elevation_m, cam));
    }
    let m = follower.to_camera(leader.x, leader.y);
    items.extend(billboard(Drawable::Marker, m, cam.marker_width_m, cam.marker_height_m, 0.0, cam));
    for (i, o) in scene.occluders.iter().enumerate() {
        let poly: Vec<_> = o.corners().iter().map(|&(x, y)| follower.to_camera(x, y)).collect();
        let clipped = clip_near(&poly);
        if clipped.is_empty() {
            continue;
        }
        let us = clipped.iter().map(|&(x, z)| cam.cx + cam.focal_px * x / z);
        let (u0, u1) = us.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| (lo.min(u), hi.max(u)));
        let depth = clipped.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        items.push(Projection {
            what: Drawable::Occluder(i),
            u0,
            u1,
            v0: if o.tall { f64::NEG_INFINITY } else { cam.cy },
            v1: f64::INFINITY,
            depth,
            x_left: 0.0,
        });
    }
    items.sort_by(|a, b| b.depth.total_cmp(&a.depth));
    items
}

/// Index range of pixels whose centers fall in `[lo, hi)`.
fn pixel_span(lo: f64, hi: f64, n: usize) -> std::ops::Range<usize> {
    let first = (lo - 0.5).ceil().max(0.0);
    let end = (hi - 0.5).ceil().min(n as f64);
    if !(end > first) {
        return 0..0;
    }
    first as usize..end as usize
}

/// Visible marker pixels in a rendered frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkerTruth {
    pub pixels: usize,
    /// Mean of visible marker pixel centers, continuous coordinates.
    pub centroid: Option<(f64, f64)>,
}

pub fn render_frame(
    leader: &VehicleState,
    follower: &VehicleState,
    scene: &SceneConfig,
    cam: &CameraModel,
    t: f64,
    rng_seed: u64,
) -> RgbImage {
    render_frame_with_truth(leader, follower, scene, cam, t, rng_seed).0
}

pub fn render_frame_with_truth(
    leader: &VehicleState,
    follower: &VehicleState,
    scene: &SceneConfig,
    cam: &CameraModel,
    t: f64,
    rng_seed: u64,
) -> (RgbImage, MarkerTruth) {
    let (w, h) = (cam.img_w, cam.img_h);
    let mut img = Raster::filled(w, h, scene.background_rgb);
    let mut mask = Raster::filled(w, h, false);
    for p in project_scene(leader, follower, scene, cam) {
        let cols = pixel_span(p.u0, p.u1, w);
        let rows = pixel_span(p.v0, p.v1, h);
        match p.what {
            Drawable::Distractor(i) => {
                let d = &scene.distractors[i];
                let scale = p.depth / cam.focal_px;
                for y in rows.clone() {
                    let ly = (y as f64 + 0.5 - p.v0) * scale;
                    for x in cols.clone() {
                        let lx = (x as f64 + 0.5 - cam.cx) * scale - p.x_left;
                        img.set(x, y, d.texture.color_at(d.rgb, lx, ly));
                        mask.set(x, y, false);
                    }
                }
            }
            Drawable::Marker | Drawable::Occluder(_) => {
                let (rgb, is_marker) = match p.what {
                    Drawable::Occluder(i) => (scene.occluders[i].rgb, false),
                    _ => (scene.marker_rgb, true),
                };
                for y in rows.clone() {
                    for x in cols.clone() {
                        img.set(x, y, rgb);
                        mask.set(x, y, is_marker);
                    }
                }
            }
        }
    }

    let (mut n, mut sx, mut sy) = (0usize, 0.0, 0.0);
    for y in 0..h {
        for (x, &m) in mask.row(y).iter().enumerate() {
            if m {
                n += 1;
                sx += x as f64 + 0.5;
                sy += y as f64 + 0.5;
            }
        }
    }
    let truth = MarkerTruth {
        pixels: n,
        centroid: (n > 0).then(|| (sx / n as f64, sy / n as f64)),
    };

    let gamma = scene.lighting.gamma(t);
    if scene.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let noise = Normal::new(0.0, scene.noise_std).expect("finite noise std");
        for px in img.pixels_mut() {
            for c in px.iter_mut() {
                let v = *c as f64 * gamma + noise.sample(&mut rng);
                *c = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    } else if gamma != 1.0 {
        for px in img.pixels_mut() {
            for c in px.iter_mut() {
                *c = (*c as f64 * gamma).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    (img, truth)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundTruth {
    pub range: f64,
    /// Positive to the right of the optical axis.
    pub bearing: f64,
    pub visible_fraction: f64,
}

/// Area of the union of axis-aligned rectangles `(u0, u1, v0, v1)`.
fn union_area(rects: &[(f64, f64, f64, f64)]) -> f64 {
    let mut us: Vec<f64> = rects.iter().flat_map(|r| [r.0, r.1]).collect();
    let mut vs: Vec<f64> = rects.iter().flat_map(|r| [r.2, r.3]).collect();
    us.sort_by(f64::total_cmp);
    vs.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for cu in us.windows(2) {
        for cv in vs.windows(2) {
            let (mu, mv) = ((cu[0] + cu[1]) / 2.0, (cv[0] + cv[1]) / 2.0);
            if rects.iter().any(|r| r.0 <= mu && mu < r.1 && r.2 <= mv && mv < r.3) {
                area += (cu[1] - cu[0]) * (cv[1] - cv[0]);
            }
        }
    }
    area
}

/// Exact geometric range and bearing of the marker from the follower camera,
/// and the fraction of the marker's image area not hidden by nearer scene
/// elements.
pub fn ground_truth(
    leader: &VehicleState,
    follower: &VehicleState,
    scene: &SceneConfig,
    cam: &CameraModel,
) -> GroundTruth {
    let (x, z) = follower.to_camera(leader.x, leader.y);
    let items = project_scene(leader, follower, scene, cam);
    let visible_fraction = match items.iter().find(|p| p.what == Drawable::Marker) {
        None => 0.0,
        Some(m) => {
            let clipped: Vec<_> = items
                .iter()
                .filter(|p| p.what != Drawable::Marker && p.depth < m.depth)
                .map(|p| (p.u0.max(m.u0), p.u1.min(m.u1), p.v0.max(m.v0), p.v1.min(m.v1)))
                .filter(|r| r.1 > r.0 && r.3 > r.2)
                .collect();
            (1.0 - union_area(&clipped) / m.area()).clamp(0.0, 1.0)
        }
    };
    GroundTruth {
        range: x.hypot(z),
        bearing: x.atan2(z),
        visible_fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::rgb_to_hsv;
    use crate::simworld::{Distractor, LightingSchedule, Occluder, Texture};

    fn cam(focal: f64, marker_w: f64) -> CameraModel {
        CameraModel::centered(320, 240, focal, marker_w, 0.2)
    }

    fn quiet() -> SceneConfig {
        SceneConfig {
            noise_std: 0.0,
            ..SceneConfig::default()
        }
    }

    fn marker_columns(img: &RgbImage, rgb: [u8; 3]) -> usize {
        let y = img.height() / 2;
        img.row(y).iter().filter(|&&p| p == rgb).count()
    }

    #[test]
    fn projected_width_follows_pinhole() {
        let c = cam(300.0, 0.3);
        let s = quiet();
        let img = render_frame(&VehicleState::new(5.0, 0.0, 0.0), &VehicleState::new(0.0, 0.0, 0.0), &s, &c, 0.0, 1);
        assert_eq!(marker_columns(&img, s.marker_rgb), (300.0f64 * 0.3 / 5.0).round() as usize);
    }

    #[test]
    fn behind_camera_is_background_only() {
        let s = quiet();
        let img = render_frame(&VehicleState::new(-5.0, 0.0, 0.0), &VehicleState::new(0.0, 0.0, 0.0), &s, &cam(300.0, 0.3), 0.0, 1);
        assert!(img.pixels().iter().all(|&p| p == s.background_rgb));
    }

    #[test]
    fn full_occluder_hides_marker() {
        let mut s = quiet();
        s.occluders.push(Occluder {
            x_min: 2.0,
            y_min: -1.0,
            x_max: 2.5,
            y_max: 1.0,
            tall: true,
            rgb: [60, 60, 60],
        });
        let c = cam(300.0, 0.3);
        let (l, f) = (VehicleState::new(5.0, 0.0, 0.0), VehicleState::new(0.0, 0.0, 0.0));
        let (img, truth) = render_frame_with_truth(&l, &f, &s, &c, 0.0, 1);
        assert_eq!(marker_columns(&img, s.marker_rgb), 0);
        assert_eq!(truth.pixels, 0);
        assert_eq!(ground_truth(&l, &f, &s, &c).visible_fraction, 0.0);
    }

    #[test]
    fn occluder_behind_marker_does_nothing() {
        let mut s = quiet();
        s.occluders.push(Occluder {
            x_min: 7.0,
            y_min: -1.0,
            x_max: 7.5,
            y_max: 1.0,
            tall: true,
            rgb: [60, 60, 60],
        });
        let c = cam(300.0, 0.3);
        let (l, f) = (VehicleState::new(5.0, 0.0, 0.0), VehicleState::new(0.0, 0.0, 0.0));
        assert_eq!(ground_truth(&l, &f, &s, &c).visible_fraction, 1.0);
        let (_, truth) = render_frame_with_truth(&l, &f, &s, &c, 0.0, 1);
        assert_eq!(truth.pixels, 18 * 12);
    }

    #[test]
    fn half_covered_marker() {
        // Occluder edge on the optical axis at 2 m covers the marker's
        // left half (world +y is camera left).
        let mut s = quiet();
        s.occluders.push(Occluder {
            x_min: 2.0,
            y_min: 0.0,
            x_max: 2.2,
            y_max: 3.0,
            tall: true,
            rgb: [60, 60, 60],
        });
        let c = cam(300.0, 0.4);
        let (l, f) = (VehicleState::new(5.0, 0.0, 0.0), VehicleState::new(0.0, 0.0, 0.0));
        let g = ground_truth(&l, &f, &s, &c);
        // Oracle: clip the marker rectangle at the occluder's edge column.
        let (m0, m1) = (c.cx - 300.0 * 0.2 / 5.0, c.cx + 300.0 * 0.2 / 5.0);
        let edge = c.cx;
        assert!((g.visible_fraction - (m1 - edge) / (m1 - m0)).abs() < 1e-12);
        assert!((g.visible_fraction - 0.5).abs() < 1e-12);
        let short = SceneConfig {
            occluders: vec![Occluder { tall: false, y_min: -3.0, ..s.occluders[0] }],
            ..quiet()
        };
        assert!((ground_truth(&l, &f, &short, &c).visible_fraction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_occluders_full_visibility() {
        let g = ground_truth(&VehicleState::new(5.0, 0.0, 0.0), &VehicleState::new(0.0, 0.0, 0.0), &quiet(), &cam(300.0, 0.3));
        assert_eq!((g.range, g.bearing, g.visible_fraction), (5.0, 0.0, 1.0));
    }

    #[test]
    fn dimming_preserves_marker_hue() {
        let mut s = quiet();
        s.lighting = LightingSchedule::constant(0.5);
        let c = cam(300.0, 0.3);
        let (l, f) = (VehicleState::new(5.0, 0.0, 0.0), VehicleState::new(0.0, 0.0, 0.0));
        let bright = rgb_to_hsv(&render_frame(&l, &f, &quiet(), &c, 0.0, 1));
        let dim = rgb_to_hsv(&render_frame(&l, &f, &s, &c, 0.0, 1));
        let (x, y) = (160, 120);
        assert_eq!(dim.get(x, y).h, bright.get(x, y).h);
        assert!((dim.get(x, y).v as i32 - bright.get(x, y).v as i32 / 2).abs() <= 1);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let s = SceneConfig::default();
        let c = cam(300.0, 0.3);
        let (l, f) = (VehicleState::new(5.0, 0.3, 0.0), VehicleState::new(0.0, 0.0, 0.0));
        let a = render_frame(&l, &f, &s, &c, 1.0, 42);
        let b = render_frame(&l, &f, &s, &c, 1.0, 42);
        let other = render_frame(&l, &f, &s, &c, 1.0, 43);
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn distractor_texture_is_drawn_behind_marker() {
        let mut s = quiet();
        s.distractors.push(Distractor {
            x: 9.0,
            y: 0.0,
            width_m: 2.0,
            height_m: 1.2,
            elevation_m: 0.0,
            rgb: [215, 120, 110],
            texture: Texture::Stripes { period_m: 0.2, alt: [150, 175, 225] },
        });
        let c = cam(200.0, 0.6);
        let (l, f) = (VehicleState::new(5.0, 0.0, 0.0), VehicleState::new(0.0, 0.0, 0.0));
        let (img, truth) = render_frame_with_truth(&l, &f, &s, &c, 0.0, 1);
        assert_eq!(truth.pixels, 24 * 8);
        assert_eq!(img.get(160, 120), s.marker_rgb);
        let row = img.row(120);
        assert!(row.contains(&[215, 120, 110]));
        let (cx, cy) = truth.centroid.unwrap();
        assert!((cx - 160.0).abs() < 1e-9 && (cy - 120.0).abs() < 1e-9);
    }

    #[test]
    fn union_area_counts_overlap_once() {
        let a = union_area(&[(0.0, 2.0, 0.0, 2.0), (1.0, 3.0, 1.0, 3.0)]);
        assert!((a - 7.0).abs() < 1e-12);
    }
}
