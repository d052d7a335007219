//! Raster types and the image-side pipeline: color conversion, texture
//! coding, contour tracing and histogram back-projection.

mod color;
mod contour;
mod histogram;
mod lbp;
pub mod ppm;

pub use color::{hue_distance, pixel_to_hsv, rgb_to_hsv, threshold_hue, Hsv};
pub use contour::{find_blobs, trace_contour, Blob, ChainCode, CHAIN_OFFSETS};
pub use histogram::{
    back_project, bhattacharyya, bhattacharyya_distance, build_histogram,
    build_histogram_excluding, weight_against_background, FeatureSet, JointHistogram,
    HUE_BINS, LBP_BINS, SAT_BINS, TOTAL_BINS,
};
pub use lbp::compute_lbp;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("start pixel ({row}, {col}) is not foreground")]
    StartNotForeground { row: usize, col: usize },
    #[error("start pixel ({row}, {col}) has no background neighbour")]
    StartNotBoundary { row: usize, col: usize },
    #[error("region of interest is empty or outside the image")]
    EmptyRoi,
    #[error("histogram has no mass")]
    EmptyHistogram,
    #[error("image must be at least 3x3, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("malformed PPM: {0}")]
    Ppm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Row-major raster of arbitrary pixel type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster<P> {
    width: usize,
    height: usize,
    data: Vec<P>,
}

/// 8-bit RGB frame.
pub type RgbImage = Raster<[u8; 3]>;
/// Per-pixel hue (0..=180), saturation and value.
pub type HsvImage = Raster<Hsv>;
/// Per-pixel 8-bit local binary pattern code.
pub type LbpImage = Raster<u8>;
/// Marker candidate mask.
pub type BinaryImage = Raster<bool>;
/// Target probability image, 0..=255.
pub type BackProjection = Raster<u8>;

impl<P: Copy> Raster<P> {
    pub fn filled(width: usize, height: usize, value: P) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Panics if `data.len() != width * height`.
    pub fn from_vec(width: usize, height: usize, data: Vec<P>) -> Self {
        assert_eq!(
            data.len(),
            width * height,
            "raster data length does not match dimensions"
        );
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> P) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> P {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: P) {
        self.data[y * self.width + x] = value;
    }

    /// Bounds-checked access with signed coordinates.
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> Option<P> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(self.get(x as usize, y as usize))
        }
    }

    pub fn pixels(&self) -> &[P] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn row(&self, y: usize) -> &[P] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<Q: Copy>(&self, f: impl Fn(P) -> Q) -> Raster<Q> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }
}

/// Axis-aligned pixel rectangle, top-left origin, half-open extent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> usize {
        self.x + self.w
    }

    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 <= x0 || y1 <= y0 {
            Rect::new(x0, y0, 0, 0)
        } else {
            Rect::new(x0, y0, x1 - x0, y1 - y0)
        }
    }

    /// Center in continuous pixel coordinates (pixel `i` spans `[i, i+1)`).
    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }

    /// Scales the rectangle about its center and clips it to `bounds`.
    pub fn scaled(&self, factor: f64, bounds: &Rect) -> Rect {
        let (cx, cy) = self.center();
        rect_from_center(cx, cy, self.w as f64 * factor, self.h as f64 * factor, bounds)
    }
}

/// Rectangle of (rounded) size `w`×`h` centered on continuous `(cx, cy)`,
/// clipped to `bounds`.
pub fn rect_from_center(cx: f64, cy: f64, w: f64, h: f64, bounds: &Rect) -> Rect {
    let x0 = (cx - w / 2.0).round();
    let y0 = (cy - h / 2.0).round();
    let x1 = (cx + w / 2.0).round();
    let y1 = (cy + h / 2.0).round();
    let clip = |v: f64, lo: usize, hi: usize| v.max(lo as f64).min(hi as f64) as usize;
    let (bx0, by0) = (bounds.x, bounds.y);
    let (bx1, by1) = (bounds.right(), bounds.bottom());
    let x0 = clip(x0, bx0, bx1);
    let x1 = clip(x1, bx0, bx1);
    let y0 = clip(y0, by0, by1);
    let y1 = clip(y1, by0, by1);
    Rect::new(x0, y0, x1.saturating_sub(x0), y1.saturating_sub(y0))
}
