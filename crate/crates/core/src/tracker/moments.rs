use crate::imaging::{BackProjection, Rect};

/// Raw image moments of a back-projection window plus the derived centroid
/// and normalized second central moments.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WindowMoments {
    pub m00: f64,
    pub m10: f64,
    pub m01: f64,
    pub m11: f64,
    pub m20: f64,
    pub m02: f64,
    /// Centroid, pixel-index coordinates.
    pub xc: f64,
    pub yc: f64,
    /// `m20/m00 − xc²`
    pub a: f64,
    /// `m11/m00 − xc·yc`
    pub b: f64,
    /// `m02/m00 − yc²`
    pub c: f64,
}

/// Exact integer moment sums over a window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RawMoments {
    pub m00: u64,
    pub m10: u64,
    pub m01: u64,
    pub m11: u64,
    pub m20: u64,
    pub m02: u64,
}

pub fn raw_moments(bp: &BackProjection, win: Rect) -> RawMoments {
    let win = win.intersect(&bp.bounds());
    let mut m = RawMoments::default();
    for y in win.y..win.bottom() {
        let row = &bp.row(y)[win.x..win.right()];
        let yy = y as u64;
        // Per-row sums first; the row's y weights are applied once.
        let (mut s0, mut s1, mut s2) = (0u64, 0u64, 0u64);
        for (i, &v) in row.iter().enumerate() {
            let v = v as u64;
            if v == 0 {
                continue;
            }
            let x = (win.x + i) as u64;
            s0 += v;
            s1 += x * v;
            s2 += x * x * v;
        }
        m.m00 += s0;
        m.m10 += s1;
        m.m20 += s2;
        m.m01 += yy * s0;
        m.m11 += yy * s1;
        m.m02 += yy * yy * s0;
    }
    m
}

impl RawMoments {
    pub fn derive(&self) -> WindowMoments {
        let mut out = WindowMoments {
            m00: self.m00 as f64,
            m10: self.m10 as f64,
            m01: self.m01 as f64,
            m11: self.m11 as f64,
            m20: self.m20 as f64,
            m02: self.m02 as f64,
            ..Default::default()
        };
        if self.m00 == 0 {
            return out;
        }
        let n = self.m00 as i128;
        out.xc = out.m10 / out.m00;
        out.yc = out.m01 / out.m00;
        // Central moments from exact integer numerators: (m20·m00 − m10²)/m00².
        let n2 = (n * n) as f64;
        let (m10, m01) = (self.m10 as i128, self.m01 as i128);
        out.a = ((self.m20 as i128 * n - m10 * m10) as f64 / n2).max(0.0);
        out.b = (self.m11 as i128 * n - m10 * m01) as f64 / n2;
        out.c = ((self.m02 as i128 * n - m01 * m01) as f64 / n2).max(0.0);
        out
    }
}

pub fn compute_moments(bp: &BackProjection, win: Rect) -> WindowMoments {
    raw_moments(bp, win).derive()
}
