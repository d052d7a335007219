/// Surface pattern of a distractor patch, in world units so it scales with
/// distance like the patch itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Texture {
    Solid,
    /// Vertical stripes alternating with `alt` every `period_m` metres.
    Stripes { period_m: f64, alt: [u8; 3] },
    Checker { period_m: f64, alt: [u8; 3] },
}

impl Texture {
    pub fn color_at(&self, base: [u8; 3], lx: f64, ly: f64) -> [u8; 3] {
        match *self {
            Texture::Solid => base,
            Texture::Stripes { period_m, alt } => {
                if (lx / period_m).floor() as i64 % 2 == 0 {
                    base
                } else {
                    alt
                }
            }
            Texture::Checker { period_m, alt } => {
                let k = (lx / period_m).floor() as i64 + (ly / period_m).floor() as i64;
                if k.rem_euclid(2) == 0 {
                    base
                } else {
                    alt
                }
            }
        }
    }
}

/// A camera-facing patch standing in the world (a poster, a coloured box).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distractor {
    pub x: f64,
    pub y: f64,
    pub width_m: f64,
    pub height_m: f64,
    /// Height of the patch center above the camera axis.
    pub elevation_m: f64,
    pub rgb: [u8; 3],
    pub texture: Texture,
}

/// Axis-aligned ground footprint. A tall occluder hides everything behind
/// it; a short one hides only what lies below the camera axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Occluder {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub tall: bool,
    pub rgb: [u8; 3],
}

impl Occluder {
    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_max, self.y_max),
            (self.x_min, self.y_max),
        ]
    }
}

/// Piecewise-linear lighting gain, held constant outside the knots.
#[derive(Clone, Debug, PartialEq)]
pub struct LightingSchedule {
    knots: Vec<(f64, f64)>,
}

impl LightingSchedule {
    pub fn constant(gamma: f64) -> Self {
        Self {
            knots: vec![(0.0, gamma)],
        }
    }

    /// Knots must have strictly increasing times and gains in (0, 1.5].
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, String> {
        if knots.is_empty() {
            return Err("lighting schedule needs at least one knot".into());
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err("lighting knot times must increase".into());
        }
        if knots.iter().any(|&(_, g)| !(g > 0.0 && g <= 1.5)) {
            return Err("lighting gain must lie in (0, 1.5]".into());
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn gamma(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((t0, g0), (t1, g1)) = (w[0], w[1]);
            if t <= t1 {
                return g0 + (g1 - g0) * (t - t0) / (t1 - t0);
            }
        }
        k[k.len() - 1].1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneConfig {
    pub marker_rgb: [u8; 3],
    pub background_rgb: [u8; 3],
    pub distractors: Vec<Distractor>,
    pub occluders: Vec<Occluder>,
    pub lighting: LightingSchedule,
    pub noise_std: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            marker_rgb: [210, 45, 30],
            background_rgb: [150, 175, 225],
            distractors: Vec::new(),
            occluders: Vec::new(),
            lighting: LightingSchedule::constant(1.0),
            noise_std: 2.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lighting_interpolates_and_holds() {
        let l = LightingSchedule::new(vec![(0.0, 1.0), (10.0, 0.6), (20.0, 1.0)]).unwrap();
        assert_eq!(l.gamma(-1.0), 1.0);
        assert!((l.gamma(5.0) - 0.8).abs() < 1e-12);
        assert_eq!(l.gamma(10.0), 0.6);
        assert!((l.gamma(15.0) - 0.8).abs() < 1e-12);
        assert_eq!(l.gamma(99.0), 1.0);
        assert!(LightingSchedule::new(vec![(0.0, 0.0)]).is_err());
        assert!(LightingSchedule::new(vec![(1.0, 1.0), (1.0, 0.5)]).is_err());
    }

    #[test]
    fn checker_alternates() {
        let t = Texture::Checker { period_m: 0.1, alt: [0, 0, 0] };
        let b = [9, 9, 9];
        assert_eq!(t.color_at(b, 0.05, 0.05), b);
        assert_eq!(t.color_at(b, 0.15, 0.05), [0, 0, 0]);
        assert_eq!(t.color_at(b, 0.15, 0.15), b);
    }
}
