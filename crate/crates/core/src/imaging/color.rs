use super::{BinaryImage, HsvImage, RgbImage};

/// HSV pixel with hue stored at half resolution (0..=180) so it fits a byte.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Hsv {
    pub h: u8,
    pub s: u8,
    pub v: u8,
}

/// Converts one RGB triple. Hue follows the four-branch definition on
/// channels normalized to [0, 1], is wrapped into [0, 360) and then halved.
#[inline]
pub fn pixel_to_hsv([r, g, b]: [u8; 3]) -> Hsv {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    if max == min {
        return Hsv { h: 0, s: 0, v: max };
    }
    // The [0, 1] normalization cancels inside each ratio; integer differences
    // keep the quotient exact under uniform scaling of the channels.
    let (r, g, b) = (r as i32, g as i32, b as i32);
    let delta = (max - min) as f64;
    let mut hue = if r == max as i32 {
        60.0 * (g - b) as f64 / delta + 360.0
    } else if g == max as i32 {
        60.0 * (b - r) as f64 / delta + 120.0
    } else {
        60.0 * (r - g) as f64 / delta + 240.0
    };
    if hue >= 360.0 {
        hue -= 360.0;
    }
    let h = (hue / 2.0).round() as u8;
    let s = (255.0 * (max - min) as f64 / max as f64).round() as u8;
    Hsv { h, s, v: max }
}

pub fn rgb_to_hsv(img: &RgbImage) -> HsvImage {
    img.map(pixel_to_hsv)
}

/// Circular distance between two half-resolution hues.
#[inline]
pub fn hue_distance(a: u8, b: u8) -> u8 {
    let d = (a as i16 - b as i16).unsigned_abs() as u8;
    d.min(180 - d)
}

/// Marks pixels whose hue lies within `tol_frac` of the full hue range
/// around `target_h`, wrapping at 180.
pub fn threshold_hue(img: &HsvImage, target_h: u8, tol_frac: f64) -> BinaryImage {
    debug_assert!(tol_frac > 0.0 && tol_frac <= 1.0);
    let band = tol_frac * 180.0;
    img.map(|p| hue_distance(p.h, target_h) as f64 <= band)
}
