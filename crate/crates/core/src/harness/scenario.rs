//! Scenario files: `[section]` headers followed by `key = value` lines.
//! `#` starts a comment. `[distractor]` and `[occluder]` may repeat; every
//! other section appears at most once and every key is optional.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::guidance::{FormationSetpoint, SmcGains, WaypointPlan};
use crate::imaging::{FeatureSet, Rect};
use crate::pose::CameraModel;
use crate::simworld::{Distractor, LightingSchedule, Occluder, SceneConfig, Texture};
use crate::tracker::TrackerConfig;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeaderSpec {
    pub plan: WaypointPlan,
    pub speed: f64,
    /// Track-following gains; only `eta_beta`, `lambda`, `boundary_layer`
    /// and `delta_max` are used.
    pub gains: SmcGains,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FollowerSpec {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    /// When false the follower stays put and only observes.
    pub controlled: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerSpec {
    pub config: TrackerConfig,
    /// Explicit first-frame window; otherwise the marker is found by colour.
    pub initial_window: Option<Rect>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSpec {
    pub duration: f64,
    pub dt: f64,
    pub frame_stride: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub camera: CameraModel,
    pub scene: SceneConfig,
    pub leader: LeaderSpec,
    pub follower: FollowerSpec,
    pub formation: FormationSetpoint,
    pub gains: SmcGains,
    pub tracker: TrackerSpec,
    pub run: RunSpec,
}

impl Scenario {
    pub fn steps(&self) -> usize {
        (self.run.duration / self.run.dt).round() as usize
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    let mut s = parse_scenario(&text)?;
    if let Some(stem) = path.file_stem() {
        s.name = stem.to_string_lossy().into_owned();
    }
    Ok(s)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Camera,
    Scene,
    Distractor,
    Occluder,
    Lighting,
    Leader,
    Follower,
    Formation,
    Gains,
    Tracker,
    Run,
}

impl Section {
    const ALL: [(Section, &'static str); 11] = [
        (Section::Camera, "camera"),
        (Section::Scene, "scene"),
        (Section::Distractor, "distractor"),
        (Section::Occluder, "occluder"),
        (Section::Lighting, "lighting"),
        (Section::Leader, "leader"),
        (Section::Follower, "follower"),
        (Section::Formation, "formation"),
        (Section::Gains, "gains"),
        (Section::Tracker, "tracker"),
        (Section::Run, "run"),
    ];

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, n)| *n == s).map(|(sec, _)| *sec)
    }

    fn name(self) -> &'static str {
        Self::ALL.iter().find(|(s, _)| *s == self).map(|(_, n)| *n).unwrap()
    }

    fn repeatable(self) -> bool {
        matches!(self, Section::Distractor | Section::Occluder)
    }
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

struct Camera {
    width: usize,
    height: usize,
    focal: f64,
    cx: Option<f64>,
    cy: Option<f64>,
    marker_width: f64,
    marker_height: f64,
}

struct Follower {
    x: Option<f64>,
    y: Option<f64>,
    psi: Option<f64>,
    controlled: bool,
}

struct Leader {
    waypoints: Option<Vec<(f64, f64)>>,
    speed: f64,
    acceptance_radius: f64,
    gains: SmcGains,
}

/// Accumulates parsed values before validation.
struct Draft {
    camera: Camera,
    scene: SceneConfig,
    lighting: Option<Vec<(f64, f64)>>,
    leader: Leader,
    follower: Follower,
    formation: FormationSetpoint,
    gains: SmcGains,
    tracker: TrackerSpec,
    run: RunSpec,
}

impl Default for Draft {
    fn default() -> Self {
        Self {
            camera: Camera {
                width: 320,
                height: 240,
                focal: 200.0,
                cx: None,
                cy: None,
                marker_width: 0.6,
                marker_height: 0.4,
            },
            scene: SceneConfig::default(),
            lighting: None,
            leader: Leader {
                waypoints: None,
                speed: 0.5,
                acceptance_radius: 0.5,
                gains: SmcGains {
                    eta_beta: 0.8,
                    lambda: 0.5,
                    boundary_layer: 0.2,
                    delta_max: 1.0,
                    ..SmcGains::default()
                },
            },
            follower: Follower {
                x: None,
                y: None,
                psi: None,
                controlled: true,
            },
            formation: FormationSetpoint {
                s_com: 2.0,
                beta_com: 0.0,
            },
            gains: SmcGains::default(),
            tracker: TrackerSpec {
                config: TrackerConfig::default(),
                initial_window: None,
            },
            run: RunSpec {
                duration: 60.0,
                dt: 0.01,
                frame_stride: 5,
                seed: 1,
            },
        }
    }
}

fn num(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    if !x.is_finite() {
        return Err(format!("`{v}` is not finite"));
    }
    Ok(x)
}

fn int<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{v}` is not a non-negative integer"))
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}

fn list(v: &str, n: usize) -> Result<Vec<f64>, String> {
    let xs = v.split(',').map(|p| num(p.trim())).collect::<Result<Vec<_>, _>>()?;
    if xs.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", xs.len()));
    }
    Ok(xs)
}

fn rgb(v: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("colour `{v}` must be r, g, b"));
    }
    let mut out = [0u8; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("colour channel `{p}` is not in 0..=255"))?;
    }
    Ok(out)
}

fn pairs(v: &str, sep: char) -> Result<Vec<(f64, f64)>, String> {
    v.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (a, b) = p
                .split_once(sep)
                .ok_or_else(|| format!("`{p}` is not a pair separated by `{sep}`"))?;
            Ok((num(a.trim())?, num(b.trim())?))
        })
        .collect()
}

fn pairs_list(v: &str) -> Result<Vec<(f64, f64)>, String> {
    // Lighting knots may be separated by commas or semicolons.
    let normalized = v.replace(',', ";");
    pairs(&normalized, ':')
}

fn arr<const N: usize>(v: &str) -> Result<[f64; N], String> {
    let xs = list(v, N)?;
    Ok(std::array::from_fn(|i| xs[i]))
}

fn texture(kind: &str, period: f64, alt: [u8; 3]) -> Result<Texture, String> {
    match kind {
        "solid" => Ok(Texture::Solid),
        "stripes" => Ok(Texture::Stripes { period_m: period, alt }),
        "checker" => Ok(Texture::Checker { period_m: period, alt }),
        _ => Err(format!("unknown texture `{kind}` (solid, stripes, checker)")),
    }
}

struct DistractorDraft {
    d: Distractor,
    kind: String,
    period: f64,
    alt: [u8; 3],
}

fn set_key(draft: &mut Draft, sec: Section, dist: &mut [DistractorDraft], key: &str, v: &str) -> Result<(), String> {
    let unknown = || Err(format!("unknown key `{key}` in [{}]", sec.name()));
    match sec {
        Section::Camera => {
            let c = &mut draft.camera;
            match key {
                "width" => c.width = int(v)?,
                "height" => c.height = int(v)?,
                "focal" => c.focal = num(v)?,
                "cx" => c.cx = Some(num(v)?),
                "cy" => c.cy = Some(num(v)?),
                "marker_width" => c.marker_width = num(v)?,
                "marker_height" => c.marker_height = num(v)?,
                _ => return unknown(),
            }
        }
        Section::Scene => {
            let s = &mut draft.scene;
            match key {
                "marker_rgb" => s.marker_rgb = rgb(v)?,
                "background_rgb" => s.background_rgb = rgb(v)?,
                "noise_std" => s.noise_std = num(v)?,
                _ => return unknown(),
            }
        }
        Section::Distractor => {
            let d = dist.last_mut().expect("distractor section opened");
            match key {
                "x" => d.d.x = num(v)?,
                "y" => d.d.y = num(v)?,
                "width" => d.d.width_m = num(v)?,
                "height" => d.d.height_m = num(v)?,
                "elevation" => d.d.elevation_m = num(v)?,
                "rgb" => d.d.rgb = rgb(v)?,
                "texture" => d.kind = v.to_string(),
                "period" => d.period = num(v)?,
                "alt_rgb" => d.alt = rgb(v)?,
                _ => return unknown(),
            }
        }
        Section::Occluder => {
            let o = draft.scene.occluders.last_mut().expect("occluder section opened");
            match key {
                "x_min" => o.x_min = num(v)?,
                "y_min" => o.y_min = num(v)?,
                "x_max" => o.x_max = num(v)?,
                "y_max" => o.y_max = num(v)?,
                "tall" => o.tall = boolean(v)?,
                "rgb" => o.rgb = rgb(v)?,
                _ => return unknown(),
            }
        }
        Section::Lighting => match key {
            "schedule" => draft.lighting = Some(pairs_list(v)?),
            _ => return unknown(),
        },
        Section::Leader => {
            let l = &mut draft.leader;
            match key {
                "waypoints" => l.waypoints = Some(pairs(v, ',')?),
                "speed" => l.speed = num(v)?,
                "acceptance_radius" => l.acceptance_radius = num(v)?,
                "eta" => l.gains.eta_beta = num(v)?,
                "lambda" => l.gains.lambda = num(v)?,
                "boundary_layer" => l.gains.boundary_layer = num(v)?,
                "rate_max" => l.gains.delta_max = num(v)?,
                _ => return unknown(),
            }
        }
        Section::Follower => {
            let f = &mut draft.follower;
            match key {
                "x" => f.x = Some(num(v)?),
                "y" => f.y = Some(num(v)?),
                "psi" => f.psi = Some(num(v)?),
                "controlled" => f.controlled = boolean(v)?,
                _ => return unknown(),
            }
        }
        Section::Formation => match key {
            "s_com" => draft.formation.s_com = num(v)?,
            "beta_com" => draft.formation.beta_com = num(v)?,
            _ => return unknown(),
        },
        Section::Gains => {
            let g = &mut draft.gains;
            match key {
                "eta_z" => g.eta_z = num(v)?,
                "eta_beta" => g.eta_beta = num(v)?,
                "lambda" => g.lambda = num(v)?,
                "boundary_layer" => g.boundary_layer = num(v)?,
                "u_max" => g.u_max = num(v)?,
                "delta_max" => g.delta_max = num(v)?,
                "pure_sgn" => g.pure_sgn = boolean(v)?,
                _ => return unknown(),
            }
        }
        Section::Tracker => {
            let t = &mut draft.tracker.config;
            match key {
                "features" => {
                    t.features = FeatureSet::parse(v).ok_or_else(|| format!("unknown feature set `{v}`"))?
                }
                "refresh" => t.refresh = boolean(v)?,
                "q" => t.q = arr(v)?,
                "r" => t.r = arr(v)?,
                "coast_q" => t.coast_q = arr(v)?,
                "partial_ratio" => t.partial_ratio = num(v)?,
                "full_ratio" => t.full_ratio = num(v)?,
                "healthy_ratio" => t.healthy_ratio = num(v)?,
                "dip_noise_scale" => t.dip_noise_scale = num(v)?,
                "lost_after" => t.lost_after = int(v)?,
                "inflate_per_frame" => t.inflate_per_frame = num(v)?,
                "inflate_cap" => t.inflate_cap = num(v)?,
                "refresh_gate" => t.refresh_gate = num(v)?,
                "refresh_rate" => t.refresh_rate = num(v)?,
                "eps" => t.eps = num(v)?,
                "max_iter" => t.max_iter = int(v)?,
                "search_inflate" => t.search_inflate = num(v)?,
                "hue_tol" => t.hue_tol = num(v)?,
                "min_sat" => t.acquire_min_sat = int(v)?,
                "background_dilate" => t.background_dilate = num(v)?,
                "initial_window" => {
                    let [x, y, w, h] = arr::<4>(v)?;
                    if [x, y, w, h].iter().any(|c| *c < 0.0 || c.fract() != 0.0) {
                        return Err("initial_window needs non-negative integers x, y, w, h".into());
                    }
                    draft.tracker.initial_window = Some(Rect::new(x as usize, y as usize, w as usize, h as usize));
                }
                _ => return unknown(),
            }
        }
        Section::Run => {
            let r = &mut draft.run;
            match key {
                "duration" => r.duration = num(v)?,
                "dt" => r.dt = num(v)?,
                "frame_stride" => r.frame_stride = int(v)?,
                "seed" => r.seed = int(v)?,
                _ => return unknown(),
            }
        }
    }
    Ok(())
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut draft = Draft::default();
    let mut dist: Vec<DistractorDraft> = Vec::new();
    let mut seen: Vec<Section> = Vec::new();
    let mut current: Option<Section> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| ScenarioError::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(format!("malformed section header `{line}`")))?
                .trim();
            let sec = Section::parse(name).ok_or_else(|| err(format!("unknown section [{name}]")))?;
            if seen.contains(&sec) && !sec.repeatable() {
                return Err(err(format!("section [{name}] appears twice")));
            }
            seen.push(sec);
            match sec {
                Section::Distractor => dist.push(DistractorDraft {
                    d: Distractor {
                        x: 0.0,
                        y: 0.0,
                        width_m: 1.0,
                        height_m: 1.0,
                        elevation_m: 0.0,
                        rgb: [0, 0, 0],
                        texture: Texture::Solid,
                    },
                    kind: "solid".into(),
                    period: 0.2,
                    alt: draft.scene.background_rgb,
                }),
                Section::Occluder => draft.scene.occluders.push(Occluder {
                    x_min: 0.0,
                    y_min: 0.0,
                    x_max: 0.0,
                    y_max: 0.0,
                    tall: true,
                    rgb: [70, 70, 70],
                }),
                _ => {}
            }
            current = Some(sec);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let sec = current.ok_or_else(|| err("key outside of any section".into()))?;
        set_key(&mut draft, sec, &mut dist, key.trim(), value.trim()).map_err(err)?;
    }
    for d in dist {
        let mut out = d.d;
        out.texture = texture(&d.kind, d.period, d.alt).map_err(ScenarioError::Validation)?;
        if !(d.period > 0.0) {
            return Err(invalid("distractor period must be > 0"));
        }
        draft.scene.distractors.push(out);
    }
    finish(draft)
}

fn invalid(msg: &str) -> ScenarioError {
    ScenarioError::Validation(msg.to_string())
}

fn positive(v: f64, field: &str) -> Result<(), ScenarioError> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::Validation(format!("{field} must be > 0")))
    }
}

fn finish(d: Draft) -> Result<Scenario, ScenarioError> {
    let c = &d.camera;
    if c.width < 16 || c.height < 16 {
        return Err(invalid("camera width and height must be at least 16"));
    }
    positive(c.focal, "camera focal")?;
    positive(c.marker_width, "marker_width")?;
    positive(c.marker_height, "marker_height")?;
    let camera = CameraModel {
        focal_px: c.focal,
        cx: c.cx.unwrap_or(c.width as f64 / 2.0),
        cy: c.cy.unwrap_or(c.height as f64 / 2.0),
        img_w: c.width,
        img_h: c.height,
        marker_width_m: c.marker_width,
        marker_height_m: c.marker_height,
    };

    let mut scene = d.scene;
    if !(scene.noise_std >= 0.0) {
        return Err(invalid("noise_std must be >= 0"));
    }
    if let Some(knots) = d.lighting {
        scene.lighting = LightingSchedule::new(knots).map_err(ScenarioError::Validation)?;
    }
    for dd in &scene.distractors {
        positive(dd.width_m, "distractor width")?;
        positive(dd.height_m, "distractor height")?;
    }
    for o in &scene.occluders {
        if !(o.x_max > o.x_min && o.y_max > o.y_min) {
            return Err(invalid("occluder needs x_min < x_max and y_min < y_max"));
        }
    }

    let wps = d
        .leader
        .waypoints
        .ok_or_else(|| invalid("leader waypoints are required"))?;
    let plan = WaypointPlan::new(wps, d.leader.acceptance_radius)
        .map_err(|e| ScenarioError::Validation(format!("leader waypoints: {e}")))?;
    if !(d.leader.speed >= 0.0) {
        return Err(invalid("leader speed must be >= 0"));
    }
    let lg = &d.leader.gains;
    positive(lg.eta_beta, "leader eta")?;
    positive(lg.lambda, "leader lambda")?;
    positive(lg.boundary_layer, "leader boundary_layer")?;
    positive(lg.delta_max, "leader rate_max")?;

    positive(d.formation.s_com, "S_com")?;
    let g = &d.gains;
    positive(g.eta_z, "eta_z")?;
    positive(g.eta_beta, "eta_beta")?;
    positive(g.lambda, "lambda")?;
    positive(g.boundary_layer, "boundary_layer")?;
    positive(g.u_max, "u_max")?;
    positive(g.delta_max, "delta_max")?;

    let t = &d.tracker.config;
    if !(0.0 < t.full_ratio && t.full_ratio < t.partial_ratio && t.partial_ratio <= 1.0) {
        return Err(invalid("tracker ratios need 0 < full_ratio < partial_ratio <= 1"));
    }
    if !(t.partial_ratio <= t.healthy_ratio && t.healthy_ratio <= 1.0) {
        return Err(invalid("healthy_ratio must lie in [partial_ratio, 1]"));
    }
    if !(t.dip_noise_scale >= 1.0) {
        return Err(invalid("dip_noise_scale must be >= 1"));
    }
    if t.q.iter().chain(&t.r).chain(&t.coast_q).any(|v| !(*v >= 0.0)) {
        return Err(invalid("tracker noise terms must be >= 0"));
    }
    positive(t.eps, "tracker eps")?;
    if t.max_iter == 0 {
        return Err(invalid("tracker max_iter must be > 0"));
    }
    if !(t.inflate_per_frame >= 0.0 && t.inflate_cap >= 1.0) {
        return Err(invalid("tracker inflation needs inflate_per_frame >= 0 and inflate_cap >= 1"));
    }
    if !(t.refresh_gate > 0.0 && t.refresh_gate <= 1.0) {
        return Err(invalid("refresh_gate must lie in (0, 1]"));
    }
    if !(t.refresh_rate >= 0.0 && t.refresh_rate <= 1.0) {
        return Err(invalid("refresh_rate must lie in [0, 1]"));
    }
    if !(t.hue_tol > 0.0 && t.hue_tol <= 1.0) {
        return Err(invalid("hue_tol must lie in (0, 1]"));
    }
    if !(t.search_inflate >= 0.0 && t.background_dilate >= 1.0) {
        return Err(invalid("search_inflate must be >= 0 and background_dilate >= 1"));
    }
    if let Some(w) = d.tracker.initial_window {
        if w.w < 4 || w.h < 4 || w.right() > camera.img_w || w.bottom() > camera.img_h {
            return Err(invalid("initial_window must be at least 4x4 and inside the image"));
        }
    }

    let r = &d.run;
    if !(r.duration >= 0.0) {
        return Err(invalid("duration must be >= 0"));
    }
    if !(r.dt > 0.0 && r.dt <= 0.1) {
        return Err(invalid("dt must lie in (0, 0.1]"));
    }
    if r.frame_stride == 0 {
        return Err(invalid("frame_stride must be >= 1"));
    }

    // Default follower: four metres behind the leader's start, facing along
    // the first leg.
    let (x0, y0) = plan.waypoints()[0];
    let (x1, y1) = plan.waypoints()[1];
    let heading = (y1 - y0).atan2(x1 - x0);
    let follower = FollowerSpec {
        x: d.follower.x.unwrap_or(x0 - 4.0 * heading.cos()),
        y: d.follower.y.unwrap_or(y0 - 4.0 * heading.sin()),
        psi: d.follower.psi.unwrap_or(heading),
        controlled: d.follower.controlled,
    };

    Ok(Scenario {
        name: "scenario".into(),
        camera,
        scene,
        leader: LeaderSpec {
            plan,
            speed: d.leader.speed,
            gains: d.leader.gains,
        },
        follower,
        formation: d.formation,
        gains: d.gains,
        tracker: d.tracker,
        run: d.run,
    })
}
