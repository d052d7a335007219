//! CAMShift tracking over back-projection images with Kalman prediction,
//! occlusion coasting, area monitoring and gated histogram refresh.

mod camshift;
mod kalman;
mod moments;

pub use camshift::{
    camshift, mean_shift_iterate, orientation, window_around, window_aspect, window_scale,
    CamshiftResult, MeanShiftResult, SearchWindow, TargetBox, MIN_WINDOW,
};
pub use kalman::{AreaFilter, KalmanCV};
pub use moments::{compute_moments, raw_moments, RawMoments, WindowMoments};

use thiserror::Error;

use crate::imaging::{
    back_project, bhattacharyya_distance, build_histogram, build_histogram_excluding,
    compute_lbp, find_blobs, rgb_to_hsv, weight_against_background, BackProjection, FeatureSet,
    HsvImage, ImagingError, JointHistogram, LbpImage, Rect, RgbImage,
};

#[derive(Debug, Error)]
pub enum TrackError {
    #[error("back-projection has no mass inside the search window")]
    ZeroMass,
    #[error("no marker-coloured region found for acquisition")]
    NoMarker,
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrackStatus {
    Locked,
    PartialOcclusion,
    FullOcclusion,
    Lost,
}

impl TrackStatus {
    pub fn code(self) -> u8 {
        match self {
            TrackStatus::Locked => 0,
            TrackStatus::PartialOcclusion => 1,
            TrackStatus::FullOcclusion => 2,
            TrackStatus::Lost => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrackStatus::Locked => "locked",
            TrackStatus::PartialOcclusion => "partial",
            TrackStatus::FullOcclusion => "full",
            TrackStatus::Lost => "lost",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            TrackStatus::Locked,
            TrackStatus::PartialOcclusion,
            TrackStatus::FullOcclusion,
            TrackStatus::Lost,
        ]
        .into_iter()
        .find(|st| st.name() == s)
    }

    pub fn is_occluded(self) -> bool {
        matches!(self, TrackStatus::PartialOcclusion | TrackStatus::FullOcclusion)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerConfig {
    pub features: FeatureSet,
    pub refresh: bool,
    /// Process noise diagonal (px², px², (px/frame)², (px/frame)²).
    pub q: [f64; 4],
    /// Measurement noise diagonal, px².
    pub r: [f64; 2],
    /// Process noise of the coasting filter.
    pub coast_q: [f64; 4],
    pub partial_ratio: f64,
    pub full_ratio: f64,
    /// Mass ratio below which a locked frame counts as a dip: the area
    /// filter adapts only weakly and the frame is not used as a coasting
    /// snapshot.
    pub healthy_ratio: f64,
    /// Area measurement variance multiplier applied during a dip.
    pub dip_noise_scale: f64,
    pub lost_after: u32,
    pub inflate_per_frame: f64,
    pub inflate_cap: f64,
    pub refresh_gate: f64,
    pub refresh_rate: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub search_inflate: f64,
    pub hue_tol: f64,
    pub acquire_min_sat: u8,
    pub background_dilate: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            features: FeatureSet::HueSatLbp,
            refresh: true,
            q: [0.01, 0.01, 0.1, 0.1],
            r: [4.0, 4.0],
            coast_q: [0.01, 0.01, 0.01, 0.01],
            partial_ratio: 0.5,
            full_ratio: 0.1,
            healthy_ratio: 0.8,
            dip_noise_scale: 25.0,
            lost_after: 60,
            inflate_per_frame: 0.1,
            inflate_cap: 4.0,
            refresh_gate: 0.3,
            refresh_rate: 0.1,
            eps: 1.0,
            max_iter: 10,
            search_inflate: 0.2,
            hue_tol: 0.1,
            acquire_min_sat: 128,
            background_dilate: 1.5,
        }
    }
}

/// Classifies the current window mass against the area filter's prediction.
pub fn detect_occlusion(area_f: &AreaFilter, m00: f64, cfg: &TrackerConfig) -> TrackStatus {
    let predicted = area_f.area();
    if m00 <= 0.0 || m00 < cfg.full_ratio * predicted {
        TrackStatus::FullOcclusion
    } else if m00 < cfg.partial_ratio * predicted {
        TrackStatus::PartialOcclusion
    } else {
        TrackStatus::Locked
    }
}

/// Search window while coasting: centered on the filter prediction and
/// inflated per occluded frame up to the configured cap.
pub fn coast_window(
    pre_occlusion: &Rect,
    frames_occluded: u32,
    filter: &KalmanCV,
    bounds: &Rect,
    cfg: &TrackerConfig,
) -> SearchWindow {
    let growth = (1.0 + cfg.inflate_per_frame)
        .powi(frames_occluded as i32)
        .min(cfg.inflate_cap);
    let (px, py) = filter.position();
    window_around(
        px,
        py,
        pre_occlusion.w as f64 * growth,
        pre_occlusion.h as f64 * growth,
        bounds,
    )
}

#[derive(Clone, Debug)]
pub struct TrackState {
    pub window: SearchWindow,
    pub moments: WindowMoments,
    pub status: TrackStatus,
    pub frames_occluded: u32,
    pub reference_hist: JointHistogram,
    pub current_hist: JointHistogram,
    /// Background statistics from acquisition, used to weight candidates.
    pub background_hist: JointHistogram,
    /// Per-frame position predictor feeding the search window.
    pub position_filter: KalmanCV,
    /// Snapshot of the position filter taken when an occlusion starts.
    pub coast_filter: Option<KalmanCV>,
    pub area_filter: AreaFilter,
    pub pre_occlusion_window: Option<SearchWindow>,
    /// Position filter and window after the last undipped locked frame.
    pub last_healthy: Option<(KalmanCV, SearchWindow, u64)>,
    pub frame: u64,
}

/// Continues a track through an occluded frame.
pub fn occlusion_coast(track: &mut TrackState, bounds: &Rect, cfg: &TrackerConfig) {
    track.frames_occluded += 1;
    if track.frames_occluded > cfg.lost_after {
        track.status = TrackStatus::Lost;
        return;
    }
    let pre = track.pre_occlusion_window.unwrap_or(track.window);
    let filter = track
        .coast_filter
        .get_or_insert_with(|| track.position_filter.clone());
    track.window = coast_window(&pre, track.frames_occluded, filter, bounds, cfg);
}

/// Outcome of a histogram refresh attempt.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefreshOutcome {
    pub distance: f64,
    pub applied: bool,
}

/// Compares the candidate histogram over `region` with the reference and
/// blends it into the current histogram only when the Bhattacharyya
/// distance is below the gate.
pub fn refresh_histogram(
    track: &mut TrackState,
    hsv: &HsvImage,
    lbp: &LbpImage,
    region: Rect,
    cfg: &TrackerConfig,
) -> Result<RefreshOutcome, TrackError> {
    let candidate = build_histogram(hsv, lbp, region, track.reference_hist.features())?;
    let distance = bhattacharyya_distance(&track.reference_hist, &candidate)?;
    if distance >= cfg.refresh_gate {
        return Ok(RefreshOutcome {
            distance,
            applied: false,
        });
    }
    let weighted = weight_against_background(&candidate, &track.background_hist);
    track.current_hist = track.current_hist.blend(&weighted, 1.0 - cfg.refresh_rate);
    Ok(RefreshOutcome {
        distance,
        applied: true,
    })
}

/// Finds the largest marker-coloured component: hue within the tolerance
/// band and saturation at least `min_sat`.
pub fn detect_marker(hsv: &HsvImage, target_h: u8, hue_tol: f64, min_sat: u8) -> Option<Rect> {
    let band = hue_tol * 180.0;
    let mask = hsv.map(|p| {
        crate::imaging::hue_distance(p.h, target_h) as f64 <= band && p.s >= min_sat
    });
    find_blobs(&mask)
        .into_iter()
        .max_by_key(|b| b.area)
        .filter(|b| b.area >= 4)
        .map(|b| b.bbox)
}

/// Per-frame tracker output.
#[derive(Clone, Debug)]
pub struct TrackReport {
    pub frame: u64,
    pub status: TrackStatus,
    /// Track center in continuous pixel coordinates; the filter prediction
    /// when the target is not measured.
    pub centroid: (f64, f64),
    pub search_window: SearchWindow,
    pub window: SearchWindow,
    /// Moment-equivalent target rectangle, present only when locked.
    pub target: Option<TargetBox>,
    pub m00: f64,
    pub predicted_area: f64,
    pub iterations: usize,
    pub refresh: Option<RefreshOutcome>,
}

#[derive(Clone, Debug)]
pub struct Tracker {
    cfg: TrackerConfig,
    state: TrackState,
    bounds: Rect,
}

impl Tracker {
    /// Starts a track on `window` in `frame`: the target histogram comes from
    /// the window, the background from everything outside the dilated window.
    pub fn new(frame: &RgbImage, window: Rect, cfg: TrackerConfig) -> Result<Self, TrackError> {
        let hsv = rgb_to_hsv(frame);
        let lbp = compute_lbp(&hsv)?;
        Self::from_planes(&hsv, &lbp, window, cfg)
    }

    /// Acquires the marker automatically by hue/saturation thresholding and
    /// contour tracing, then starts a track on its bounding box.
    pub fn acquire(frame: &RgbImage, target_h: u8, cfg: TrackerConfig) -> Result<Self, TrackError> {
        let hsv = rgb_to_hsv(frame);
        let lbp = compute_lbp(&hsv)?;
        let window = detect_marker(&hsv, target_h, cfg.hue_tol, cfg.acquire_min_sat)
            .ok_or(TrackError::NoMarker)?;
        Self::from_planes(&hsv, &lbp, window, cfg)
    }

    fn from_planes(
        hsv: &HsvImage,
        lbp: &LbpImage,
        window: Rect,
        cfg: TrackerConfig,
    ) -> Result<Self, TrackError> {
        let bounds = hsv.bounds();
        let window = window.intersect(&bounds);
        let reference = build_histogram(hsv, lbp, window, cfg.features)?;
        let exclude = window.scaled(cfg.background_dilate, &bounds);
        let background = build_histogram_excluding(hsv, lbp, exclude, cfg.features);
        let current = weight_against_background(&reference, &background);
        let bp = back_project(hsv, lbp, &current);
        let moments = compute_moments(&bp, window);
        if moments.m00 <= 0.0 {
            return Err(TrackError::ZeroMass);
        }
        let (cx, cy) = window.center();
        let position_filter = KalmanCV::new((cx, cy), (0.0, 0.0), [16.0, 16.0, 4.0, 4.0], cfg.q, cfg.r, 1.0);
        let state = TrackState {
            window,
            moments,
            status: TrackStatus::Locked,
            frames_occluded: 0,
            reference_hist: reference,
            current_hist: current,
            background_hist: background,
            position_filter,
            coast_filter: None,
            area_filter: AreaFilter::new(moments.m00),
            pre_occlusion_window: None,
            last_healthy: None,
            frame: 0,
        };
        Ok(Self { cfg, state, bounds })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &TrackState {
        &self.state
    }

    pub fn status(&self) -> TrackStatus {
        self.state.status
    }

    pub fn back_projection(&self, hsv: &HsvImage, lbp: &LbpImage) -> BackProjection {
        back_project(hsv, lbp, &self.state.current_hist)
    }

    /// Full per-frame pipeline: color conversion, texture coding,
    /// back-projection, CAMShift, occlusion logic and histogram refresh.
    pub fn process(&mut self, frame: &RgbImage) -> Result<TrackReport, TrackError> {
        let hsv = rgb_to_hsv(frame);
        let lbp = compute_lbp(&hsv)?;
        let bp = self.back_projection(&hsv, &lbp);
        self.step(&hsv, &lbp, &bp)
    }

    /// Advances the track by one frame given precomputed image planes.
    pub fn step(
        &mut self,
        hsv: &HsvImage,
        lbp: &LbpImage,
        bp: &BackProjection,
    ) -> Result<TrackReport, TrackError> {
        let cfg = &self.cfg;
        let st = &mut self.state;
        st.frame += 1;
        let frame = st.frame;

        if st.status == TrackStatus::Lost {
            let filter = st.coast_filter.as_mut().unwrap_or(&mut st.position_filter);
            filter.predict();
            return Ok(TrackReport {
                frame,
                status: TrackStatus::Lost,
                centroid: filter.position(),
                search_window: st.window,
                window: st.window,
                target: None,
                m00: 0.0,
                predicted_area: st.area_filter.area(),
                iterations: 0,
                refresh: None,
            });
        }

        let was_locked = st.status == TrackStatus::Locked;
        st.area_filter.predict();
        let search = if was_locked {
            st.position_filter.predict();
            let (px, py) = st.position_filter.position();
            let grow = 1.0 + cfg.search_inflate;
            window_around(px, py, st.window.w as f64 * grow, st.window.h as f64 * grow, &self.bounds)
        } else {
            let filter = st
                .coast_filter
                .as_mut()
                .expect("occluded track carries a coast filter");
            filter.predict();
            let pre = st.pre_occlusion_window.unwrap_or(st.window);
            coast_window(&pre, st.frames_occluded, filter, &self.bounds, cfg)
        };

        let shifted = match camshift(bp, search, cfg.max_iter, cfg.eps) {
            Ok(r) => Some(r),
            Err(TrackError::ZeroMass) => None,
            Err(e) => return Err(e),
        };
        let m00 = shifted.as_ref().map_or(0.0, |r| r.moments.m00);
        let predicted_area = st.area_filter.area();
        let detected = detect_occlusion(&st.area_filter, m00, cfg);

        if detected == TrackStatus::Locked {
            let res = shifted.expect("locked implies positive mass");
            if !was_locked {
                if let Some(mut coast) = st.coast_filter.take() {
                    coast.q = st.position_filter.q;
                    st.position_filter = coast;
                }
                st.pre_occlusion_window = None;
            }
            let center = (res.target.cx, res.target.cy);
            let healthy = m00 >= cfg.healthy_ratio * predicted_area;
            st.position_filter.update(center);
            st.window = res.window;
            st.moments = res.moments;
            st.status = TrackStatus::Locked;
            st.frames_occluded = 0;
            if healthy {
                st.area_filter.update(m00);
                st.last_healthy = Some((st.position_filter.clone(), res.window, frame));
            } else {
                st.area_filter.freeze_rate();
                st.area_filter.update_weighted(m00, cfg.dip_noise_scale);
            }
            let refresh = if cfg.refresh && healthy {
                let region = res.target.rect(&self.bounds);
                if region.is_empty() {
                    None
                } else {
                    Some(refresh_histogram(st, hsv, lbp, region, cfg)?)
                }
            } else {
                None
            };
            return Ok(TrackReport {
                frame,
                status: TrackStatus::Locked,
                centroid: center,
                search_window: search,
                window: res.window,
                target: Some(res.target),
                m00,
                predicted_area,
                iterations: res.iterations,
                refresh,
            });
        }

        if was_locked {
            // Coast from the last frame before the mass started to dip, so a
            // target sliding behind an edge does not bias velocity or size.
            let (mut coast, pre, at) = st
                .last_healthy
                .clone()
                .unwrap_or_else(|| (st.position_filter.clone(), st.window, frame));
            for _ in at..frame {
                coast.predict();
            }
            st.pre_occlusion_window = Some(pre);
            coast.q = nalgebra::Matrix4::from_diagonal(&nalgebra::Vector4::from(cfg.coast_q));
            st.coast_filter = Some(coast);
        }
        st.area_filter.freeze_rate();
        st.status = detected;
        if let Some(r) = &shifted {
            st.moments = r.moments;
        }
        occlusion_coast(st, &self.bounds, cfg);
        let centroid = st
            .coast_filter
            .as_ref()
            .map(|f| f.position())
            .unwrap_or_else(|| st.position_filter.position());
        Ok(TrackReport {
            frame,
            status: st.status,
            centroid,
            search_window: search,
            window: st.window,
            target: None,
            m00,
            predicted_area,
            iterations: shifted.as_ref().map_or(0, |r| r.iterations),
            refresh: None,
        })
    }
}
