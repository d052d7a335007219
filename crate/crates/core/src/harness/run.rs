use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use super::scenario::Scenario;
use super::telemetry::{frame_path, TelemetryRow};
use crate::guidance::{
    leader_heading_control, los_update, wrap, Command, ControlTrace, FollowerController,
    FollowerInputs, GuidanceError,
};
use crate::imaging::{pixel_to_hsv, ppm, ImagingError, Rect};
use crate::pose::{estimate_pose, RelativePose};
use crate::simworld::{
    ground_truth, render_frame_with_truth, step_kinematics, GroundTruth, MarkerTruth,
    VehicleState,
};
use crate::tracker::{KalmanCV, TargetBox, TrackError, TrackStatus, Tracker};

/// World-frame leader estimator tuning: per-frame process noise and the
/// position noise of a pose fix, metres.
const LEADER_P0: [f64; 4] = [0.25, 0.25, 1.0, 1.0];
const LEADER_Q: [f64; 4] = [1e-4, 1e-4, 2e-3, 2e-3];
const LEADER_R: [f64; 2] = [0.01, 0.01];

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("tracker failure: {0}")]
    Track(#[from] TrackError),
    #[error("frame dump failed: {0}")]
    Dump(#[from] ImagingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Optional knobs that do not change the scenario itself.
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Write every camera frame as PPM into this directory.
    pub dump_frames: Option<PathBuf>,
    /// Applied to the ground-truth channel before it is logged. Nothing on
    /// the estimation or control path reads ground truth, so this must not
    /// change any command.
    pub truth_hook: Option<&'a dyn Fn(&mut GroundTruth)>,
}

/// Everything observed on one camera frame.
#[derive(Clone, Debug)]
pub struct FrameRecord {
    pub index: usize,
    pub step: usize,
    pub t: f64,
    /// `None` until the marker has been acquired.
    pub status: Option<TrackStatus>,
    pub centroid: Option<(f64, f64)>,
    pub window: Option<Rect>,
    pub target: Option<TargetBox>,
    pub m00: f64,
    pub marker: MarkerTruth,
    pub truth: GroundTruth,
    pub pose: Option<RelativePose>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub scenario: String,
    pub steps: usize,
    pub frames: usize,
    pub acquired_at: Option<f64>,
    /// Time after which the true range error stays within 5% of `S_com`.
    pub converged_at: Option<f64>,
    pub max_bearing_error_after_convergence: Option<f64>,
    pub final_range_error: Option<f64>,
    pub frames_locked: usize,
    pub frames_partial: usize,
    pub frames_full: usize,
    pub frames_lost: usize,
    pub occlusion_episodes: usize,
    /// Longest wait, in frames, between the marker reappearing and the
    /// track locking again.
    pub max_relock_frames: Option<usize>,
    pub track_lost_at: Option<f64>,
    pub max_cmd_speed: f64,
    pub max_abs_cmd_heading: f64,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| x.to_string())
}

impl Summary {
    pub fn frames_occluded(&self) -> usize {
        self.frames_partial + self.frames_full
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("scenario", self.scenario.clone());
        kv("steps", self.steps.to_string());
        kv("frames", self.frames.to_string());
        kv("acquired_at", opt(self.acquired_at));
        kv("converged_at", opt(self.converged_at));
        kv("max_bearing_error_after_convergence", opt(self.max_bearing_error_after_convergence));
        kv("final_range_error", opt(self.final_range_error));
        kv("frames_locked", self.frames_locked.to_string());
        kv("frames_partial", self.frames_partial.to_string());
        kv("frames_full", self.frames_full.to_string());
        kv("frames_lost", self.frames_lost.to_string());
        kv("frames_occluded", self.frames_occluded().to_string());
        kv("occlusion_episodes", self.occlusion_episodes.to_string());
        kv("max_relock_frames", self.max_relock_frames.map_or("none".into(), |v| v.to_string()));
        kv("track_lost_at", opt(self.track_lost_at));
        kv("max_cmd_speed", self.max_cmd_speed.to_string());
        kv("max_abs_cmd_heading", self.max_abs_cmd_heading.to_string());
        s
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub rows: Vec<TelemetryRow>,
    /// Ground truth per control step, after the truth hook.
    pub truth: Vec<GroundTruth>,
    /// Controller internals per control step; `None` before the first fix.
    pub control: Vec<Option<ControlTrace>>,
    pub frames: Vec<FrameRecord>,
    pub summary: Summary,
    /// Wall time spent inside the tracker.
    pub tracking_time: Duration,
}

/// Per-frame noise seed: distinct for every frame, fixed by the run seed.
pub fn frame_seed(seed: u64, frame: usize) -> u64 {
    seed ^ (frame as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn run(sc: &Scenario) -> Result<RunResult, RunError> {
    run_with(sc, &RunOptions::default())
}

/// The closed loop: render → track → pose → guidance → kinematics. Vision
/// runs every `frame_stride` control steps; in between the follower works
/// from its leader estimate propagated with its own odometry.
pub fn run_with(sc: &Scenario, opts: &RunOptions) -> Result<RunResult, RunError> {
    let cam = sc.camera;
    let dt = sc.run.dt;
    let stride = sc.run.frame_stride;
    let steps = sc.steps();
    let frame_dt = dt * stride as f64;
    let target_h = pixel_to_hsv(sc.scene.marker_rgb).h;
    if let Some(dir) = &opts.dump_frames {
        std::fs::create_dir_all(dir)?;
    }

    let plan = &sc.leader.plan;
    let (w0, w1) = (plan.waypoints()[0], plan.waypoints()[1]);
    let mut leader = VehicleState::new(w0.0, w0.1, (w1.1 - w0.1).atan2(w1.0 - w0.0));
    let mut leader_idx = 1;
    let mut leader_done = false;
    let f = &sc.follower;
    let mut follower = VehicleState::new(f.x, f.y, f.psi);

    let mut tracker: Option<Tracker> = None;
    let mut controller = FollowerController::new(sc.gains, sc.formation);
    let mut leader_est: Option<KalmanCV> = None;
    let mut est_time = 0.0;
    let mut track_view = (f64::NAN, f64::NAN, 0.0, TrackStatus::Lost.code());
    let mut tracking_time = Duration::ZERO;

    let mut rows = Vec::with_capacity(steps);
    let mut truths = Vec::with_capacity(steps);
    let mut control = Vec::with_capacity(steps);
    let mut frames = Vec::with_capacity(steps / stride + 1);

    for k in 0..steps {
        let t = k as f64 * dt;
        let mut truth = ground_truth(&leader, &follower, &sc.scene, &cam);
        if let Some(hook) = opts.truth_hook {
            hook(&mut truth);
        }

        if k % stride == 0 {
            let index = frames.len() + 1;
            let (img, marker) = render_frame_with_truth(
                &leader,
                &follower,
                &sc.scene,
                &cam,
                t,
                frame_seed(sc.run.seed, index),
            );
            if let Some(dir) = &opts.dump_frames {
                ppm::write_ppm(frame_path(dir, index), &img)?;
            }

            let started = Instant::now();
            if tracker.is_none() {
                let cfg = sc.tracker.config.clone();
                let acquired = match sc.tracker.initial_window {
                    Some(w) => Tracker::new(&img, w, cfg),
                    None => Tracker::acquire(&img, target_h, cfg),
                };
                match acquired {
                    Ok(tr) => tracker = Some(tr),
                    Err(TrackError::NoMarker | TrackError::ZeroMass) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            let report = match tracker.as_mut() {
                Some(tr) => Some(tr.process(&img)?),
                None => None,
            };
            tracking_time += started.elapsed();

            let status = report.as_ref().map(|r| r.status);
            let target = report.as_ref().and_then(|r| r.target);
            let pose = match (status, target) {
                (Some(TrackStatus::Locked), Some(tb)) => estimate_pose(&tb, &cam).ok(),
                _ => None,
            };
            if let Some(kf) = leader_est.as_mut() {
                kf.predict();
            }
            if let Some(p) = pose {
                let heading = follower.psi - p.bearing;
                let fix = (
                    follower.x + p.range * heading.cos(),
                    follower.y + p.range * heading.sin(),
                );
                match leader_est.as_mut() {
                    Some(kf) => kf.update(fix),
                    None => {
                        leader_est = Some(KalmanCV::new(fix, (0.0, 0.0), LEADER_P0, LEADER_Q, LEADER_R, frame_dt))
                    }
                }
            }
            est_time = t;
            if let Some(r) = &report {
                track_view = (r.centroid.0, r.centroid.1, r.m00, r.status.code());
            }
            frames.push(FrameRecord {
                index,
                step: k,
                t,
                status,
                centroid: report.as_ref().map(|r| r.centroid),
                window: report.as_ref().map(|r| r.window),
                target,
                m00: report.as_ref().map_or(0.0, |r| r.m00),
                marker,
                truth,
                pose,
            });
        }

        let (cmd, trace, range_est, bearing_est) = match &leader_est {
            Some(kf) => {
                let (px, py) = kf.position();
                let (vx, vy) = kf.velocity();
                let age = t - est_time;
                let (lx, ly) = (px + vx * age, py + vy * age);
                let (x, z) = follower.to_camera(lx, ly);
                let range = x.hypot(z);
                let bearing = x.atan2(z);
                let inputs = FollowerInputs {
                    pose: RelativePose {
                        bearing,
                        marker_yaw: 0.0,
                        los_angle: bearing,
                        range,
                    },
                    leader: (lx, ly, vx, vy),
                    follower: follower.pose(),
                };
                let (cmd, trace) = controller.step(&inputs, dt);
                (cmd, Some(trace), range, bearing)
            }
            None => (controller.halt(), None, f64::NAN, f64::NAN),
        };

        let leader_cmd = if leader_done {
            Command::default()
        } else {
            match los_update(plan, leader.pose(), leader_idx) {
                Ok((los, idx)) => {
                    leader_idx = idx;
                    leader_heading_control(&los, &sc.leader.gains, sc.leader.speed)
                }
                Err(GuidanceError::PlanExhausted) => {
                    leader_done = true;
                    Command::default()
                }
                Err(e) => unreachable!("validated plan: {e}"),
            }
        };

        rows.push(TelemetryRow {
            t,
            leader_x: leader.x,
            leader_y: leader.y,
            leader_psi: leader.psi,
            follower_x: follower.x,
            follower_y: follower.y,
            follower_psi: follower.psi,
            range_true: truth.range,
            range_est,
            bearing_est,
            cmd_speed: cmd.u,
            cmd_heading: cmd.delta,
            track_cx: track_view.0,
            track_cy: track_view.1,
            track_area: track_view.2,
            status: track_view.3,
        });
        truths.push(truth);
        control.push(trace);

        leader = step_kinematics(&leader, &leader_cmd, dt);
        if sc.follower.controlled {
            follower = step_kinematics(&follower, &cmd, dt);
        }
    }

    let summary = summarize(sc, &rows, &truths, &frames);
    Ok(RunResult {
        rows,
        truth: truths,
        control,
        frames,
        summary,
        tracking_time,
    })
}

fn summarize(sc: &Scenario, rows: &[TelemetryRow], truth: &[GroundTruth], frames: &[FrameRecord]) -> Summary {
    let s_com = sc.formation.s_com;
    let band = 0.05 * s_com;
    let mut summary = Summary {
        scenario: sc.name.clone(),
        steps: rows.len(),
        frames: frames.len(),
        ..Summary::default()
    };

    // First step after which the range error never leaves the band.
    let mut start = None;
    for (k, g) in truth.iter().enumerate().rev() {
        if (g.range - s_com).abs() <= band {
            start = Some(k);
        } else {
            break;
        }
    }
    if let Some(k) = start {
        summary.converged_at = Some(rows[k].t);
        summary.max_bearing_error_after_convergence = truth[k..]
            .iter()
            .map(|g| wrap(g.bearing - sc.formation.beta_com).abs())
            .reduce(f64::max);
    }
    summary.final_range_error = truth.last().map(|g| g.range - s_com);
    summary.max_cmd_speed = rows.iter().map(|r| r.cmd_speed.abs()).fold(0.0, f64::max);
    summary.max_abs_cmd_heading = rows.iter().map(|r| r.cmd_heading.abs()).fold(0.0, f64::max);

    summary.acquired_at = frames.iter().find(|f| f.status.is_some()).map(|f| f.t);
    for f in frames {
        match f.status {
            Some(TrackStatus::Locked) => summary.frames_locked += 1,
            Some(TrackStatus::PartialOcclusion) => summary.frames_partial += 1,
            Some(TrackStatus::FullOcclusion) => summary.frames_full += 1,
            Some(TrackStatus::Lost) => {
                summary.frames_lost += 1;
                summary.track_lost_at.get_or_insert(f.t);
            }
            None => {}
        }
    }
    let episodes = occlusion_episodes(frames);
    summary.occlusion_episodes = episodes.len();
    summary.max_relock_frames = episodes.iter().filter_map(|e| e.relock_frames).max();
    summary
}

/// A maximal run of non-locked frames after acquisition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OcclusionEpisode {
    /// Frame-list positions of the first non-locked frame and of the frame
    /// that locked again (if any).
    pub start: usize,
    pub relocked: Option<usize>,
    /// First frame after the last fully hidden one; the episode start if
    /// the marker never fully disappeared.
    pub reappeared: usize,
    pub relock_frames: Option<usize>,
}

pub fn occlusion_episodes(frames: &[FrameRecord]) -> Vec<OcclusionEpisode> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < frames.len() {
        let occluded = matches!(frames[i].status, Some(s) if s != TrackStatus::Locked);
        if !occluded {
            i += 1;
            continue;
        }
        let start = i;
        while i < frames.len() && frames[i].status != Some(TrackStatus::Locked) {
            i += 1;
        }
        let relocked = (i < frames.len()).then_some(i);
        let end = relocked.unwrap_or(frames.len());
        let last_hidden = (start..end).rev().find(|&j| frames[j].marker.pixels == 0);
        let reappeared = last_hidden.map_or(start, |j| j + 1);
        out.push(OcclusionEpisode {
            start,
            relocked,
            reappeared,
            relock_frames: relocked.map(|r| r.saturating_sub(reappeared)),
        });
    }
    out
}
