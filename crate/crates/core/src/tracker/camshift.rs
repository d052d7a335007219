//! Mean-shift mode seeking and the CAMShift window update.

use super::moments::{compute_moments, WindowMoments};
use super::TrackError;
use crate::imaging::{rect_from_center, BackProjection, Rect};

/// Search windows never shrink below this many pixels per side.
pub const MIN_WINDOW: usize = 4;

/// Bound on the window aspect ratio derived from the moments.
const MAX_ASPECT: f64 = 4.0;

/// The mean-shift/CAMShift search window.
pub type SearchWindow = Rect;

/// Window of at least [`MIN_WINDOW`] pixels per side (image permitting)
/// centered on continuous coordinates and clamped to `bounds`.
pub fn window_around(cx: f64, cy: f64, w: f64, h: f64, bounds: &Rect) -> SearchWindow {
    let w = w.max(MIN_WINDOW as f64).min(bounds.w as f64);
    let h = h.max(MIN_WINDOW as f64).min(bounds.h as f64);
    let cx = cx.clamp(bounds.x as f64 + w / 2.0, bounds.right() as f64 - w / 2.0);
    let cy = cy.clamp(bounds.y as f64 + h / 2.0, bounds.bottom() as f64 - h / 2.0);
    rect_from_center(cx, cy, w, h, bounds)
}

/// Sub-pixel estimate of the tracked region: the rectangle with the same
/// first and second moments as the back-projection mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetBox {
    /// Center in continuous image coordinates.
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
    /// Major-axis orientation, radians.
    pub angle: f64,
}

impl TargetBox {
    pub fn from_moments(m: &WindowMoments) -> Self {
        // A run of n equally weighted pixels has variance (n² − 1)/12.
        Self {
            cx: m.xc + 0.5,
            cy: m.yc + 0.5,
            width: (12.0 * m.a + 1.0).sqrt(),
            height: (12.0 * m.c + 1.0).sqrt(),
            angle: orientation(m),
        }
    }

    pub fn left(&self) -> f64 {
        self.cx - self.width / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.width / 2.0
    }

    pub fn rect(&self, bounds: &Rect) -> Rect {
        rect_from_center(self.cx, self.cy, self.width, self.height, bounds)
    }
}

impl From<Rect> for TargetBox {
    fn from(r: Rect) -> Self {
        let (cx, cy) = r.center();
        Self {
            cx,
            cy,
            width: r.w as f64,
            height: r.h as f64,
            angle: 0.0,
        }
    }
}

/// Major-axis angle `½·atan2(2b, a − c)`.
pub fn orientation(m: &WindowMoments) -> f64 {
    0.5 * (2.0 * m.b).atan2(m.a - m.c)
}

#[derive(Clone, Debug)]
pub struct MeanShiftResult {
    pub window: SearchWindow,
    pub moments: WindowMoments,
    pub iterations: usize,
    /// Centroid after each iteration.
    pub path: Vec<(f64, f64)>,
}

fn window_center(w: &Rect) -> (f64, f64) {
    // Index-space center: pixel i contributes coordinate i.
    (
        w.x as f64 + (w.w as f64 - 1.0) / 2.0,
        w.y as f64 + (w.h as f64 - 1.0) / 2.0,
    )
}

fn recenter(win: &Rect, xc: f64, yc: f64, bounds: &Rect) -> Rect {
    let max_x = bounds.right().saturating_sub(win.w);
    let max_y = bounds.bottom().saturating_sub(win.h);
    let x = (xc - (win.w as f64 - 1.0) / 2.0).round().max(bounds.x as f64) as usize;
    let y = (yc - (win.h as f64 - 1.0) / 2.0).round().max(bounds.y as f64) as usize;
    Rect::new(x.min(max_x), y.min(max_y), win.w, win.h)
}

/// Moves a fixed-size window onto the local centroid of the back-projection
/// until the shift drops below `eps` pixels or `max_iter` is reached.
pub fn mean_shift_iterate(
    bp: &BackProjection,
    win: SearchWindow,
    max_iter: usize,
    eps: f64,
) -> Result<MeanShiftResult, TrackError> {
    debug_assert!(max_iter >= 1 && eps > 0.0);
    let bounds = bp.bounds();
    let mut win = win.intersect(&bounds);
    let mut path = Vec::new();
    for iter in 1..=max_iter {
        let m = compute_moments(bp, win);
        if m.m00 == 0.0 {
            return Err(TrackError::ZeroMass);
        }
        path.push((m.xc, m.yc));
        let (cx, cy) = window_center(&win);
        let shift = (m.xc - cx).hypot(m.yc - cy);
        let moved = recenter(&win, m.xc, m.yc, &bounds);
        if shift < eps || moved == win {
            return Ok(MeanShiftResult {
                window: win,
                moments: m,
                iterations: iter,
                path,
            });
        }
        win = moved;
    }
    let moments = compute_moments(bp, win);
    if moments.m00 == 0.0 {
        return Err(TrackError::ZeroMass);
    }
    Ok(MeanShiftResult {
        window: win,
        moments,
        iterations: max_iter,
        path,
    })
}

#[derive(Clone, Debug)]
pub struct CamshiftResult {
    /// Resized window around the converged centroid.
    pub window: SearchWindow,
    pub moments: WindowMoments,
    pub target: TargetBox,
    pub orientation: f64,
    pub iterations: usize,
}

/// Window side scale from the zeroth moment, `2·sqrt(m00/255)`.
pub fn window_scale(m00: f64) -> f64 {
    2.0 * (m00 / 255.0).sqrt()
}

/// Width/height ratio of the resized window: the fourth root of the ratio
/// of principal variances, oriented by whichever image axis is closer to
/// the major axis.
pub fn window_aspect(m: &WindowMoments) -> f64 {
    let half_trace = (m.a + m.c) / 2.0;
    let disc = (((m.a - m.c) / 2.0).powi(2) + m.b * m.b).sqrt();
    let major = half_trace + disc;
    let minor = (half_trace - disc).max(0.0);
    if major <= 0.0 {
        return 1.0;
    }
    let ratio = if minor > 0.0 {
        (major / minor).sqrt().sqrt()
    } else {
        MAX_ASPECT
    };
    let ratio = ratio.min(MAX_ASPECT);
    if orientation(m).abs() <= std::f64::consts::FRAC_PI_4 {
        ratio
    } else {
        1.0 / ratio
    }
}

/// One CAMShift frame: mean shift in `search`, then resize the window to
/// `s·aspect × s/aspect` with `s = 2·sqrt(m00/255)`.
pub fn camshift(
    bp: &BackProjection,
    search: SearchWindow,
    max_iter: usize,
    eps: f64,
) -> Result<CamshiftResult, TrackError> {
    let ms = mean_shift_iterate(bp, search, max_iter, eps)?;
    let m = ms.moments;
    let s = window_scale(m.m00);
    let aspect = window_aspect(&m);
    let window = window_around(m.xc + 0.5, m.yc + 0.5, s * aspect, s / aspect, &bp.bounds());
    Ok(CamshiftResult {
        window,
        moments: m,
        target: TargetBox::from_moments(&m),
        orientation: orientation(&m),
        iterations: ms.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Raster;
    use approx::assert_abs_diff_eq;

    fn blob(w: usize, h: usize, rect: Rect, value: u8) -> BackProjection {
        Raster::from_fn(w, h, |x, y| if rect.contains(x, y) { value } else { 0 })
    }

    #[test]
    fn converges_to_blob_centroid() {
        let rect = Rect::new(40, 30, 12, 8);
        let bp = blob(100, 80, rect, 200);
        // Brute-force centroid over all blob pixels.
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for y in 0..80 {
            for x in 0..100 {
                if rect.contains(x, y) {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1.0;
                }
            }
        }
        let res = mean_shift_iterate(&bp, Rect::new(33, 25, 16, 12), 20, 1.0).unwrap();
        assert!((res.moments.xc - sx / n).hypot(res.moments.yc - sy / n) < 1.0);
    }

    #[test]
    fn centered_window_is_a_fixed_point() {
        let bp = blob(60, 60, Rect::new(25, 25, 10, 10), 255);
        let res = mean_shift_iterate(&bp, Rect::new(20, 20, 20, 20), 10, 1.0).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.window, Rect::new(20, 20, 20, 20));
    }

    #[test]
    fn zero_mass_is_reported() {
        let bp = Raster::filled(30, 30, 0u8);
        assert!(matches!(
            mean_shift_iterate(&bp, Rect::new(5, 5, 8, 8), 10, 1.0),
            Err(TrackError::ZeroMass)
        ));
    }

    #[test]
    fn scale_grows_with_root_of_mass() {
        let small = blob(200, 200, Rect::new(90, 90, 20, 20), 255);
        let big = blob(200, 200, Rect::new(86, 86, 28, 28), 255);
        let a = camshift(&small, Rect::new(80, 80, 40, 40), 10, 1.0).unwrap();
        let b = camshift(&big, Rect::new(80, 80, 40, 40), 10, 1.0).unwrap();
        // 28² ≈ 2·20², so the linear size should grow by ≈ √2.
        let oracle = window_scale(b.moments.m00) / window_scale(a.moments.m00);
        assert_abs_diff_eq!(oracle, (784.0f64 / 400.0).sqrt(), epsilon = 1e-12);
        let ratio = b.window.w as f64 / a.window.w as f64;
        assert!((ratio - 2f64.sqrt()).abs() < 0.06, "ratio {ratio}");
        // Uniform full-intensity square: window is twice the blob.
        assert_eq!(a.window.w, 40);
        assert_abs_diff_eq!(a.target.width, 20.0, epsilon = 1e-9);
    }

    #[test]
    fn horizontal_blob_orientation() {
        let bp = blob(120, 80, Rect::new(30, 35, 40, 8), 255);
        let res = camshift(&bp, Rect::new(25, 25, 50, 30), 10, 1.0).unwrap();
        assert!(res.orientation.abs() < 5f64.to_radians());
        assert!(res.window.w > res.window.h);

        let tall = blob(120, 120, Rect::new(50, 20, 8, 40), 255);
        let res = camshift(&tall, Rect::new(35, 15, 40, 50), 10, 1.0).unwrap();
        assert!((res.orientation.abs() - std::f64::consts::FRAC_PI_2).abs() < 5f64.to_radians());
        assert!(res.window.h > res.window.w);
    }

    #[test]
    fn window_is_clamped_to_image() {
        let b = Rect::new(0, 0, 50, 40);
        let w = window_around(2.0, 39.0, 20.0, 10.0, &b);
        assert_eq!(w, Rect::new(0, 30, 20, 10));
        let huge = window_around(25.0, 20.0, 500.0, 500.0, &b);
        assert_eq!(huge, b);
        let tiny = window_around(25.0, 20.0, 1.0, 0.5, &b);
        assert_eq!((tiny.w, tiny.h), (MIN_WINDOW, MIN_WINDOW));
    }
}
