//! Joint hue × saturation × LBP histograms and back-projection.

use super::{BackProjection, HsvImage, Hsv, ImagingError, LbpImage, Raster, Rect};

pub const HUE_BINS: usize = 32;
pub const SAT_BINS: usize = 16;
pub const LBP_BINS: usize = 36;
pub const TOTAL_BINS: usize = HUE_BINS * SAT_BINS * LBP_BINS;

/// Floor on the target/background weight ratio.
const WEIGHT_FLOOR: f64 = 1e-3;

/// Which channels participate in binning. Disabled channels collapse to
/// bin 0, so every configuration shares the same 32×16×36 layout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FeatureSet {
    Hue,
    HueSat,
    #[default]
    HueSatLbp,
}

impl FeatureSet {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Hue => "hue",
            FeatureSet::HueSat => "hue_sat",
            FeatureSet::HueSatLbp => "hue_sat_lbp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hue" => Some(FeatureSet::Hue),
            "hue_sat" => Some(FeatureSet::HueSat),
            "hue_sat_lbp" => Some(FeatureSet::HueSatLbp),
            _ => None,
        }
    }

    #[inline]
    pub fn bin_index(self, px: Hsv, code: u8) -> usize {
        let hb = px.h as usize * HUE_BINS / 181;
        let sb = match self {
            FeatureSet::Hue => 0,
            _ => px.s as usize * SAT_BINS / 256,
        };
        let lb = match self {
            FeatureSet::HueSatLbp => code as usize * LBP_BINS / 256,
            _ => 0,
        };
        (hb * SAT_BINS + sb) * LBP_BINS + lb
    }
}

/// Weighted 3-D histogram together with its 8-bit lookup table.
#[derive(Clone, Debug, PartialEq)]
pub struct JointHistogram {
    features: FeatureSet,
    bins: Vec<f64>,
    lookup: Vec<u8>,
}

impl JointHistogram {
    pub fn empty(features: FeatureSet) -> Self {
        Self {
            features,
            bins: vec![0.0; TOTAL_BINS],
            lookup: vec![0; TOTAL_BINS],
        }
    }

    /// Builds a histogram from raw bin weights and normalizes its lookup.
    pub fn from_bins(features: FeatureSet, bins: Vec<f64>) -> Self {
        assert_eq!(bins.len(), TOTAL_BINS);
        let mut hist = Self {
            features,
            bins,
            lookup: vec![0; TOTAL_BINS],
        };
        hist.normalize_lookup();
        hist
    }

    pub fn features(&self) -> FeatureSet {
        self.features
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn lookup(&self) -> &[u8] {
        &self.lookup
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }

    /// Bin weights divided by their total; `None` for an empty histogram.
    pub fn probabilities(&self) -> Option<Vec<f64>> {
        let total = self.total();
        (total > 0.0).then(|| self.bins.iter().map(|b| b / total).collect())
    }

    #[inline]
    pub fn lookup_at(&self, px: Hsv, code: u8) -> u8 {
        self.lookup[self.features.bin_index(px, code)]
    }

    /// Rescales the lookup table so the heaviest bin maps to 255.
    pub fn normalize_lookup(&mut self) {
        let max = self.bins.iter().cloned().fold(0.0f64, f64::max);
        if max <= 0.0 {
            self.lookup.iter_mut().for_each(|l| *l = 0);
            return;
        }
        for (l, &b) in self.lookup.iter_mut().zip(&self.bins) {
            *l = (255.0 * b / max).round() as u8;
        }
    }

    /// Bin-wise blend `keep·self + (1−keep)·other` of the unit-normalized
    /// histograms, followed by lookup renormalization.
    pub fn blend(&self, other: &JointHistogram, keep: f64) -> JointHistogram {
        let (Some(p), Some(q)) = (self.probabilities(), other.probabilities()) else {
            return self.clone();
        };
        let bins = p
            .iter()
            .zip(&q)
            .map(|(a, b)| keep * a + (1.0 - keep) * b)
            .collect();
        JointHistogram::from_bins(self.features, bins)
    }
}

fn accumulate(
    hsv: &HsvImage,
    lbp: &LbpImage,
    features: FeatureSet,
    mut include: impl FnMut(usize, usize) -> bool,
    roi: Rect,
) -> Vec<f64> {
    let mut bins = vec![0.0; TOTAL_BINS];
    for y in roi.y..roi.bottom() {
        let hrow = hsv.row(y);
        let lrow = lbp.row(y);
        for x in roi.x..roi.right() {
            if include(x, y) {
                bins[features.bin_index(hrow[x], lrow[x])] += 1.0;
            }
        }
    }
    bins
}

/// Raw-count histogram of the pixels inside `roi`, lookup normalized so the
/// most populated bin maps to 255.
pub fn build_histogram(
    hsv: &HsvImage,
    lbp: &LbpImage,
    roi: Rect,
    features: FeatureSet,
) -> Result<JointHistogram, ImagingError> {
    let roi = roi.intersect(&hsv.bounds());
    if roi.is_empty() {
        return Err(ImagingError::EmptyRoi);
    }
    let bins = accumulate(hsv, lbp, features, |_, _| true, roi);
    Ok(JointHistogram::from_bins(features, bins))
}

/// Histogram of every pixel outside `exclude`.
pub fn build_histogram_excluding(
    hsv: &HsvImage,
    lbp: &LbpImage,
    exclude: Rect,
    features: FeatureSet,
) -> JointHistogram {
    let bins = accumulate(
        hsv,
        lbp,
        features,
        |x, y| !exclude.contains(x, y),
        hsv.bounds(),
    );
    JointHistogram::from_bins(features, bins)
}

/// Down-weights target bins that are also common in the background:
/// each bin is scaled by `min(1, ε + t/(t + b))` with `t`, `b` the bin
/// densities of target and background.
pub fn weight_against_background(
    target: &JointHistogram,
    background: &JointHistogram,
) -> JointHistogram {
    let t_total = target.total();
    let b_total = background.total();
    let bins = target
        .bins
        .iter()
        .zip(&background.bins)
        .map(|(&t, &b)| {
            if t <= 0.0 {
                return 0.0;
            }
            let td = t / t_total;
            let bd = if b_total > 0.0 { b / b_total } else { 0.0 };
            t * (WEIGHT_FLOOR + td / (td + bd)).min(1.0)
        })
        .collect();
    JointHistogram::from_bins(target.features, bins)
}

/// Maps each pixel's (hue, saturation, LBP) bin through the lookup table.
pub fn back_project(hsv: &HsvImage, lbp: &LbpImage, hist: &JointHistogram) -> BackProjection {
    let data = hsv
        .pixels()
        .iter()
        .zip(lbp.pixels())
        .map(|(&px, &code)| hist.lookup_at(px, code))
        .collect();
    Raster::from_vec(hsv.width(), hsv.height(), data)
}

/// Bhattacharyya distance `sqrt(1 − Σ sqrt(p·q))` between two weight
/// vectors after unit normalization.
pub fn bhattacharyya(p: &[f64], q: &[f64]) -> Result<f64, ImagingError> {
    assert_eq!(p.len(), q.len());
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if sp <= 0.0 || sq <= 0.0 {
        return Err(ImagingError::EmptyHistogram);
    }
    let coeff: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| ((a / sp) * (b / sq)).sqrt())
        .sum();
    Ok((1.0 - coeff).max(0.0).sqrt())
}

pub fn bhattacharyya_distance(
    h1: &JointHistogram,
    h2: &JointHistogram,
) -> Result<f64, ImagingError> {
    bhattacharyya(&h1.bins, &h2.bins)
}
