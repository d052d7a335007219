//! C ABI over the convoy library.
//!
//! Fallible functions return a `ConvoyStatus`; on failure a message is kept
//! per thread and can be read with `convoy_last_error`. Handles are opaque,
//! owned by the caller and released with the matching `_free` function,
//! which accepts NULL. Images are tightly packed 8-bit RGB, row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use convoy::guidance::{follower_heading, follower_speed, wrap, SmcGains};
use convoy::harness::{
    load_scenario, parse_scenario, run, write_telemetry, RunError, RunResult, Scenario,
    ScenarioError, Summary, TelemetryRow,
};
use convoy::imaging::{pixel_to_hsv, FeatureSet, Raster, Rect, RgbImage};
use convoy::pose::{estimate_pose, CameraModel, PoseError, RelativePose};
use convoy::tracker::{TargetBox, TrackError, TrackReport, TrackStatus, Tracker, TrackerConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvoyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Io = 5,
    Track = 6,
    Pose = 7,
    Panic = 8,
}

struct Failure {
    status: ConvoyStatus,
    message: String,
}

impl Failure {
    fn new(status: ConvoyStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn null(name: &str) -> Self {
        Self::new(ConvoyStatus::NullPointer, format!("{name} is NULL"))
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(ConvoyStatus::InvalidArgument, message)
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let status = match e {
            ScenarioError::Parse { .. } => ConvoyStatus::Parse,
            ScenarioError::Validation(_) => ConvoyStatus::Validation,
            ScenarioError::Io(_) => ConvoyStatus::Io,
        };
        Self::new(status, e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let status = match e {
            RunError::Track(_) => ConvoyStatus::Track,
            RunError::Dump(_) | RunError::Io(_) => ConvoyStatus::Io,
        };
        Self::new(status, e.to_string())
    }
}

impl From<TrackError> for Failure {
    fn from(e: TrackError) -> Self {
        Self::new(ConvoyStatus::Track, e.to_string())
    }
}

impl From<PoseError> for Failure {
    fn from(e: PoseError) -> Self {
        Self::new(ConvoyStatus::Pose, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(ConvoyStatus::Io, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ConvoyStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ConvoyStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(e.message);
            e.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            ConvoyStatus::Panic
        }
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(name))
}

unsafe fn arg_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(name))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    out.write(value);
    Ok(())
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::invalid(format!("{name} is not valid UTF-8")))
}

unsafe fn frame(rgb: *const u8, width: usize, height: usize) -> Result<RgbImage, Failure> {
    if rgb.is_null() {
        return Err(Failure::null("rgb"));
    }
    if width == 0 || height == 0 {
        return Err(Failure::invalid("image dimensions must be positive"));
    }
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Failure::invalid("image dimensions overflow"))?;
    let bytes = std::slice::from_raw_parts(rgb, len);
    let pixels = bytes.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
    Ok(Raster::from_vec(width, height, pixels))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn convoy_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn convoy_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

// Scenarios and closed-loop runs.

pub struct ConvoyScenario(Scenario);

pub struct ConvoyRun(RunResult);

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_scenario_load(path: *const c_char, out: *mut *mut ConvoyScenario) -> ConvoyStatus {
    guard(|| {
        let path = text(path, "path")?;
        let sc = load_scenario(Path::new(path))?;
        put(out, Box::into_raw(Box::new(ConvoyScenario(sc))))
    })
}

/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_scenario_parse(source: *const c_char, out: *mut *mut ConvoyScenario) -> ConvoyStatus {
    guard(|| {
        let source = text(source, "source")?;
        let sc = parse_scenario(source)?;
        put(out, Box::into_raw(Box::new(ConvoyScenario(sc))))
    })
}

/// # Safety
/// `scenario` must come from `convoy_scenario_load` or `convoy_scenario_parse`.
#[no_mangle]
pub unsafe extern "C" fn convoy_scenario_set_seed(scenario: *mut ConvoyScenario, seed: u64) -> ConvoyStatus {
    guard(|| {
        arg_mut(scenario, "scenario")?.0.run.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from `convoy_scenario_load` or `convoy_scenario_parse`.
#[no_mangle]
pub unsafe extern "C" fn convoy_scenario_set_frame_stride(scenario: *mut ConvoyScenario, stride: usize) -> ConvoyStatus {
    guard(|| {
        let sc = arg_mut(scenario, "scenario")?;
        if stride == 0 {
            return Err(Failure::new(ConvoyStatus::Validation, "frame_stride must be >= 1"));
        }
        sc.0.run.frame_stride = stride;
        Ok(())
    })
}

/// Number of control steps the scenario runs for; 0 for NULL.
///
/// # Safety
/// `scenario` must be NULL or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn convoy_scenario_steps(scenario: *const ConvoyScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.steps())
}

/// # Safety
/// `scenario` must be NULL or a live scenario handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn convoy_scenario_free(scenario: *mut ConvoyScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the scenario to completion.
///
/// # Safety
/// `scenario` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_run(scenario: *const ConvoyScenario, out: *mut *mut ConvoyRun) -> ConvoyStatus {
    guard(|| {
        let sc = arg(scenario, "scenario")?;
        let result = run(&sc.0)?;
        put(out, Box::into_raw(Box::new(ConvoyRun(result))))
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConvoyTelemetryRow {
    pub t: f64,
    pub leader_x: f64,
    pub leader_y: f64,
    pub leader_psi: f64,
    pub follower_x: f64,
    pub follower_y: f64,
    pub follower_psi: f64,
    pub range_true: f64,
    /// NaN until the first pose fix.
    pub range_est: f64,
    pub bearing_est: f64,
    pub cmd_speed: f64,
    pub cmd_heading: f64,
    pub track_cx: f64,
    pub track_cy: f64,
    pub track_area: f64,
    /// 0 locked, 1 partial, 2 full occlusion, 3 lost or not yet acquired.
    pub status: u8,
}

impl From<&TelemetryRow> for ConvoyTelemetryRow {
    fn from(r: &TelemetryRow) -> Self {
        Self {
            t: r.t,
            leader_x: r.leader_x,
            leader_y: r.leader_y,
            leader_psi: r.leader_psi,
            follower_x: r.follower_x,
            follower_y: r.follower_y,
            follower_psi: r.follower_psi,
            range_true: r.range_true,
            range_est: r.range_est,
            bearing_est: r.bearing_est,
            cmd_speed: r.cmd_speed,
            cmd_heading: r.cmd_heading,
            track_cx: r.track_cx,
            track_cy: r.track_cy,
            track_area: r.track_area,
            status: r.status,
        }
    }
}

/// Run summary; times and errors that never occurred are NaN and
/// `max_relock_frames` is -1 when no relock happened.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConvoySummary {
    pub steps: usize,
    pub frames: usize,
    pub acquired_at: f64,
    pub converged_at: f64,
    pub max_bearing_error_after_convergence: f64,
    pub final_range_error: f64,
    pub frames_locked: usize,
    pub frames_partial: usize,
    pub frames_full: usize,
    pub frames_lost: usize,
    pub occlusion_episodes: usize,
    pub max_relock_frames: i64,
    pub track_lost_at: f64,
    pub max_cmd_speed: f64,
    pub max_abs_cmd_heading: f64,
}

impl From<&Summary> for ConvoySummary {
    fn from(s: &Summary) -> Self {
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        Self {
            steps: s.steps,
            frames: s.frames,
            acquired_at: nan(s.acquired_at),
            converged_at: nan(s.converged_at),
            max_bearing_error_after_convergence: nan(s.max_bearing_error_after_convergence),
            final_range_error: nan(s.final_range_error),
            frames_locked: s.frames_locked,
            frames_partial: s.frames_partial,
            frames_full: s.frames_full,
            frames_lost: s.frames_lost,
            occlusion_episodes: s.occlusion_episodes,
            max_relock_frames: s.max_relock_frames.map_or(-1, |v| v as i64),
            track_lost_at: nan(s.track_lost_at),
            max_cmd_speed: s.max_cmd_speed,
            max_abs_cmd_heading: s.max_abs_cmd_heading,
        }
    }
}

/// Number of telemetry rows (one per control step); 0 for NULL.
///
/// # Safety
/// `run` must be NULL or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn convoy_run_row_count(run: *const ConvoyRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `run` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_run_row(run: *const ConvoyRun, index: usize, out: *mut ConvoyTelemetryRow) -> ConvoyStatus {
    guard(|| {
        let rows = &arg(run, "run")?.0.rows;
        let row = rows
            .get(index)
            .ok_or_else(|| Failure::invalid(format!("row {index} out of range (run has {})", rows.len())))?;
        put(out, row.into())
    })
}

/// # Safety
/// `run` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_run_summary(run: *const ConvoyRun, out: *mut ConvoySummary) -> ConvoyStatus {
    guard(|| put(out, (&arg(run, "run")?.0.summary).into()))
}

/// Writes the telemetry as CSV with a header line.
///
/// # Safety
/// `run` must be a live run handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn convoy_run_write_telemetry(run: *const ConvoyRun, path: *const c_char) -> ConvoyStatus {
    guard(|| {
        let r = arg(run, "run")?;
        let path = text(path, "path")?;
        write_telemetry(&r.0.rows, Path::new(path))?;
        Ok(())
    })
}

/// # Safety
/// `run` must be NULL or a live run handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn convoy_run_free(run: *mut ConvoyRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

// Tracker.

pub struct ConvoyTracker {
    inner: Tracker,
    width: usize,
    height: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvoyFeatures {
    Hue = 0,
    HueSat = 1,
    HueSatLbp = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvoyTrackStatus {
    Locked = 0,
    Partial = 1,
    Full = 2,
    Lost = 3,
}

impl From<TrackStatus> for ConvoyTrackStatus {
    fn from(s: TrackStatus) -> Self {
        match s {
            TrackStatus::Locked => Self::Locked,
            TrackStatus::PartialOcclusion => Self::Partial,
            TrackStatus::FullOcclusion => Self::Full,
            TrackStatus::Lost => Self::Lost,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConvoyRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl From<Rect> for ConvoyRect {
    fn from(r: Rect) -> Self {
        Self { x: r.x, y: r.y, w: r.w, h: r.h }
    }
}

/// Moment-equivalent target rectangle in continuous pixel coordinates.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConvoyTargetBox {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
    pub angle: f64,
}

impl From<TargetBox> for ConvoyTargetBox {
    fn from(b: TargetBox) -> Self {
        Self { cx: b.cx, cy: b.cy, width: b.width, height: b.height, angle: b.angle }
    }
}

impl From<ConvoyTargetBox> for TargetBox {
    fn from(b: ConvoyTargetBox) -> Self {
        Self { cx: b.cx, cy: b.cy, width: b.width, height: b.height, angle: b.angle }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvoyTrackReport {
    pub frame: u64,
    pub status: ConvoyTrackStatus,
    /// Track center; the filter prediction when the target is not measured.
    pub centroid_x: f64,
    pub centroid_y: f64,
    pub search_window: ConvoyRect,
    pub window: ConvoyRect,
    pub m00: f64,
    pub predicted_area: f64,
    pub iterations: usize,
    /// `target` is meaningful only when set (locked frames).
    pub has_target: bool,
    pub target: ConvoyTargetBox,
    /// The appearance model was blended with the current frame.
    pub refreshed: bool,
}

impl From<&TrackReport> for ConvoyTrackReport {
    fn from(r: &TrackReport) -> Self {
        Self {
            frame: r.frame,
            status: r.status.into(),
            centroid_x: r.centroid.0,
            centroid_y: r.centroid.1,
            search_window: r.search_window.into(),
            window: r.window.into(),
            m00: r.m00,
            predicted_area: r.predicted_area,
            iterations: r.iterations,
            has_target: r.target.is_some(),
            target: r.target.map(Into::into).unwrap_or_default(),
            refreshed: r.refresh.is_some_and(|o| o.applied),
        }
    }
}

fn tracker_config(features: ConvoyFeatures, refresh: bool) -> TrackerConfig {
    let features = match features {
        ConvoyFeatures::Hue => FeatureSet::Hue,
        ConvoyFeatures::HueSat => FeatureSet::HueSat,
        ConvoyFeatures::HueSatLbp => FeatureSet::HueSatLbp,
    };
    TrackerConfig { features, refresh, ..TrackerConfig::default() }
}

/// Hue of an RGB colour on the 0..180 scale used by `convoy_tracker_acquire`.
#[no_mangle]
pub extern "C" fn convoy_hue(r: u8, g: u8, b: u8) -> u8 {
    pixel_to_hsv([r, g, b]).h
}

/// Starts a track on `window` of the first frame.
///
/// # Safety
/// `rgb` must hold `width * height * 3` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_tracker_new(
    rgb: *const u8,
    width: usize,
    height: usize,
    window: ConvoyRect,
    features: ConvoyFeatures,
    refresh: bool,
    out: *mut *mut ConvoyTracker,
) -> ConvoyStatus {
    guard(|| {
        let img = frame(rgb, width, height)?;
        let rect = Rect::new(window.x, window.y, window.w, window.h);
        if rect.is_empty() || rect.right() > width || rect.bottom() > height {
            return Err(Failure::invalid("window must be non-empty and inside the image"));
        }
        let inner = Tracker::new(&img, rect, tracker_config(features, refresh))?;
        put(out, Box::into_raw(Box::new(ConvoyTracker { inner, width, height })))
    })
}

/// Finds the marker of hue `target_hue` (0..180) and starts a track on it.
///
/// # Safety
/// `rgb` must hold `width * height * 3` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_tracker_acquire(
    rgb: *const u8,
    width: usize,
    height: usize,
    target_hue: u8,
    features: ConvoyFeatures,
    refresh: bool,
    out: *mut *mut ConvoyTracker,
) -> ConvoyStatus {
    guard(|| {
        if target_hue > 180 {
            return Err(Failure::invalid("target_hue must lie in 0..=180"));
        }
        let img = frame(rgb, width, height)?;
        let inner = Tracker::acquire(&img, target_hue, tracker_config(features, refresh))?;
        put(out, Box::into_raw(Box::new(ConvoyTracker { inner, width, height })))
    })
}

/// Tracks one frame, which must have the size of the first frame.
///
/// # Safety
/// `tracker` must be a live tracker handle; `rgb` must hold
/// `width * height * 3` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_tracker_process(
    tracker: *mut ConvoyTracker,
    rgb: *const u8,
    width: usize,
    height: usize,
    out: *mut ConvoyTrackReport,
) -> ConvoyStatus {
    guard(|| {
        let t = arg_mut(tracker, "tracker")?;
        if (width, height) != (t.width, t.height) {
            return Err(Failure::invalid(format!(
                "frame is {width}x{height}, tracker expects {}x{}",
                t.width, t.height
            )));
        }
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let img = frame(rgb, width, height)?;
        let report = t.inner.process(&img)?;
        put(out, (&report).into())
    })
}

/// # Safety
/// `tracker` must be NULL or a live tracker handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn convoy_tracker_free(tracker: *mut ConvoyTracker) {
    if !tracker.is_null() {
        drop(Box::from_raw(tracker));
    }
}

// Pose.

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvoyCamera {
    pub focal_px: f64,
    pub cx: f64,
    pub cy: f64,
    pub img_w: usize,
    pub img_h: usize,
    pub marker_width_m: f64,
    pub marker_height_m: f64,
}

impl From<ConvoyCamera> for CameraModel {
    fn from(c: ConvoyCamera) -> Self {
        Self {
            focal_px: c.focal_px,
            cx: c.cx,
            cy: c.cy,
            img_w: c.img_w,
            img_h: c.img_h,
            marker_width_m: c.marker_width_m,
            marker_height_m: c.marker_height_m,
        }
    }
}

/// Relative pose of the marker: bearing is positive to the right of the
/// optical axis; angles in radians, range in metres.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConvoyPose {
    pub bearing: f64,
    pub marker_yaw: f64,
    pub los_angle: f64,
    pub range: f64,
}

impl From<RelativePose> for ConvoyPose {
    fn from(p: RelativePose) -> Self {
        Self { bearing: p.bearing, marker_yaw: p.marker_yaw, los_angle: p.los_angle, range: p.range }
    }
}

/// Camera with the principal point at the image center.
#[no_mangle]
pub extern "C" fn convoy_camera_centered(
    width: usize,
    height: usize,
    focal_px: f64,
    marker_width_m: f64,
    marker_height_m: f64,
) -> ConvoyCamera {
    let c = CameraModel::centered(width, height, focal_px, marker_width_m, marker_height_m);
    ConvoyCamera {
        focal_px: c.focal_px,
        cx: c.cx,
        cy: c.cy,
        img_w: c.img_w,
        img_h: c.img_h,
        marker_width_m: c.marker_width_m,
        marker_height_m: c.marker_height_m,
    }
}

/// # Safety
/// `camera` and `target` must be readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_estimate_pose(
    camera: *const ConvoyCamera,
    target: *const ConvoyTargetBox,
    out: *mut ConvoyPose,
) -> ConvoyStatus {
    guard(|| {
        let cam: CameraModel = (*arg(camera, "camera")?).into();
        if !(cam.focal_px > 0.0 && cam.marker_width_m > 0.0) {
            return Err(Failure::invalid("focal length and marker width must be positive"));
        }
        let tb: TargetBox = (*arg(target, "target")?).into();
        put(out, estimate_pose(&tb, &cam)?.into())
    })
}

// Guidance.

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvoyGains {
    pub eta_z: f64,
    pub eta_beta: f64,
    pub lambda: f64,
    pub boundary_layer: f64,
    pub u_max: f64,
    pub delta_max: f64,
    /// Use the discontinuous sign law instead of the boundary-layer saturation.
    pub pure_sgn: bool,
}

impl From<SmcGains> for ConvoyGains {
    fn from(g: SmcGains) -> Self {
        Self {
            eta_z: g.eta_z,
            eta_beta: g.eta_beta,
            lambda: g.lambda,
            boundary_layer: g.boundary_layer,
            u_max: g.u_max,
            delta_max: g.delta_max,
            pure_sgn: g.pure_sgn,
        }
    }
}

impl From<ConvoyGains> for SmcGains {
    fn from(g: ConvoyGains) -> Self {
        Self {
            eta_z: g.eta_z,
            eta_beta: g.eta_beta,
            lambda: g.lambda,
            boundary_layer: g.boundary_layer,
            u_max: g.u_max,
            delta_max: g.delta_max,
            pure_sgn: g.pure_sgn,
        }
    }
}

fn checked_gains(g: &ConvoyGains) -> Result<SmcGains, Failure> {
    if !(g.boundary_layer > 0.0 || g.pure_sgn) || g.u_max < 0.0 || g.delta_max < 0.0 {
        return Err(Failure::invalid("gains need boundary_layer > 0 (or pure_sgn) and non-negative limits"));
    }
    Ok((*g).into())
}

#[no_mangle]
pub extern "C" fn convoy_gains_default() -> ConvoyGains {
    SmcGains::default().into()
}

/// Wraps an angle to (-pi, pi].
#[no_mangle]
pub extern "C" fn convoy_wrap_angle(angle: f64) -> f64 {
    wrap(angle)
}

/// Heading-rate command from the bearing error and its rate.
///
/// # Safety
/// `gains` must be readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_follower_heading(
    gains: *const ConvoyGains,
    bearing_error: f64,
    bearing_rate: f64,
    out: *mut f64,
) -> ConvoyStatus {
    guard(|| {
        let g = checked_gains(arg(gains, "gains")?)?;
        put(out, follower_heading(bearing_error, bearing_rate, &g))
    })
}

/// Speed command from the leader state `{x, y, vx, vy}`, the follower pose
/// `{x, y, psi}` and the range error; `prev_speed` is held when the heading
/// is nearly perpendicular to the line of sight.
///
/// # Safety
/// `gains` must be readable, `leader` must hold 4 and `follower` 3 doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn convoy_follower_speed(
    gains: *const ConvoyGains,
    leader: *const f64,
    follower: *const f64,
    range_error: f64,
    prev_speed: f64,
    out: *mut f64,
) -> ConvoyStatus {
    guard(|| {
        let g = checked_gains(arg(gains, "gains")?)?;
        if leader.is_null() {
            return Err(Failure::null("leader"));
        }
        if follower.is_null() {
            return Err(Failure::null("follower"));
        }
        let l = std::slice::from_raw_parts(leader, 4);
        let f = std::slice::from_raw_parts(follower, 3);
        let u = follower_speed((l[0], l[1], l[2], l[3]), (f[0], f[1], f[2]), range_error, &g, prev_speed);
        put(out, u)
    })
}
