use std::ffi::{CStr, CString};
use std::ptr;

use convoy_ffi::*;

const SHORT: &str = "
[camera]
width = 160
height = 120
focal = 100
marker_width = 0.6
marker_height = 0.4

[leader]
waypoints = 0,0; 50,0
speed = 0.5

[follower]
x = -3

[formation]
s_com = 2

[run]
duration = 2
";

fn last_error() -> String {
    let p = convoy_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> Result<*mut ConvoyScenario, ConvoyStatus> {
    let c = CString::new(text).unwrap();
    let mut sc = ptr::null_mut();
    match unsafe { convoy_scenario_parse(c.as_ptr(), &mut sc) } {
        ConvoyStatus::Ok => Ok(sc),
        e => Err(e),
    }
}

/// Grey background with a saturated red rectangle.
fn scene(w: usize, h: usize, marker: (usize, usize, usize, usize)) -> Vec<u8> {
    let (mx, my, mw, mh) = marker;
    let mut px = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let inside = x >= mx && x < mx + mw && y >= my && y < my + mh;
            let texture = ((x / 4 + y / 4) % 2) as u8 * 30;
            let rgb = if inside { [220, 20, 20] } else { [90 + texture, 100, 95] };
            px.extend_from_slice(&rgb);
        }
    }
    px
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(convoy_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn scenario_run_round_trip_matches_the_library() {
    let sc = parse(SHORT).unwrap();
    assert_eq!(unsafe { convoy_scenario_steps(sc) }, 200);
    assert_eq!(unsafe { convoy_scenario_set_seed(sc, 9) }, ConvoyStatus::Ok);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { convoy_run(sc, &mut r) }, ConvoyStatus::Ok);
    let n = unsafe { convoy_run_row_count(r) };
    assert_eq!(n, 200);

    let mut lib_sc = convoy::harness::parse_scenario(SHORT).unwrap();
    lib_sc.run.seed = 9;
    let lib = convoy::harness::run(&lib_sc).unwrap();
    let mut row = ConvoyTelemetryRow::default();
    for (i, expected) in lib.rows.iter().enumerate() {
        assert_eq!(unsafe { convoy_run_row(r, i, &mut row) }, ConvoyStatus::Ok);
        assert_eq!(row.t.to_bits(), expected.t.to_bits());
        assert_eq!(row.cmd_speed.to_bits(), expected.cmd_speed.to_bits());
        assert_eq!(row.range_est.to_bits(), expected.range_est.to_bits());
        assert_eq!(row.status, expected.status);
    }
    assert_eq!(unsafe { convoy_run_row(r, n, &mut row) }, ConvoyStatus::InvalidArgument);
    assert!(last_error().contains("out of range"));

    let mut s = ConvoySummary::default();
    assert_eq!(unsafe { convoy_run_summary(r, &mut s) }, ConvoyStatus::Ok);
    assert_eq!(s.steps, 200);
    assert_eq!(s.frames, lib.summary.frames);
    assert_eq!(s.acquired_at.is_nan(), lib.summary.acquired_at.is_none());
    assert_eq!(s.max_relock_frames, lib.summary.max_relock_frames.map_or(-1, |v| v as i64));

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("t.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { convoy_run_write_telemetry(r, path.as_ptr()) }, ConvoyStatus::Ok);
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv, convoy::harness::telemetry_csv(&lib.rows));

    let bad = CString::new(dir.path().join("missing/t.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { convoy_run_write_telemetry(r, bad.as_ptr()) }, ConvoyStatus::Io);

    unsafe {
        convoy_run_free(r);
        convoy_scenario_free(sc);
    }
}

#[test]
fn scenario_errors_map_to_distinct_codes() {
    assert_eq!(parse("[run]\nwarp = 1\n").unwrap_err(), ConvoyStatus::Parse);
    assert!(last_error().contains("line 2"));
    assert_eq!(parse(&SHORT.replace("s_com = 2", "s_com = -1")).unwrap_err(), ConvoyStatus::Validation);
    assert!(last_error().contains("S_com"));

    let missing = CString::new("/nonexistent/x.scn").unwrap();
    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { convoy_scenario_load(missing.as_ptr(), &mut sc) }, ConvoyStatus::Io);
    assert!(sc.is_null());

    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { convoy_scenario_parse(ptr::null(), &mut sc) }, ConvoyStatus::NullPointer);
    let bytes = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { convoy_scenario_parse(bytes.as_ptr().cast(), &mut sc) },
        ConvoyStatus::InvalidArgument
    );

    let sc = parse(SHORT).unwrap();
    assert_eq!(unsafe { convoy_scenario_set_frame_stride(sc, 0) }, ConvoyStatus::Validation);
    assert_eq!(unsafe { convoy_scenario_set_frame_stride(sc, 2) }, ConvoyStatus::Ok);
    unsafe { convoy_scenario_free(sc) };
}

#[test]
fn null_handles_are_rejected_and_free_accepts_null() {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { convoy_run(ptr::null(), &mut r) }, ConvoyStatus::NullPointer);
    assert!(last_error().contains("scenario"));
    assert_eq!(unsafe { convoy_run_row_count(ptr::null()) }, 0);
    assert_eq!(unsafe { convoy_scenario_steps(ptr::null()) }, 0);
    let mut s = ConvoySummary::default();
    assert_eq!(unsafe { convoy_run_summary(ptr::null(), &mut s) }, ConvoyStatus::NullPointer);
    let sc = parse(SHORT).unwrap();
    assert_eq!(unsafe { convoy_run(sc, ptr::null_mut()) }, ConvoyStatus::NullPointer);
    unsafe {
        convoy_scenario_free(sc);
        convoy_scenario_free(ptr::null_mut());
        convoy_run_free(ptr::null_mut());
        convoy_tracker_free(ptr::null_mut());
    }
}

#[test]
fn tracker_follows_a_moving_marker() {
    let (w, h) = (160, 120);
    let hue = convoy_hue(220, 20, 20);
    assert_eq!(hue, convoy::imaging::pixel_to_hsv([220, 20, 20]).h);

    let first = scene(w, h, (40, 50, 20, 14));
    let mut t = ptr::null_mut();
    let st = unsafe { convoy_tracker_acquire(first.as_ptr(), w, h, hue, ConvoyFeatures::HueSatLbp, true, &mut t) };
    assert_eq!(st, ConvoyStatus::Ok);

    let mut rep = std::mem::MaybeUninit::<ConvoyTrackReport>::uninit();
    for k in 1..=20 {
        let x = 40 + 2 * k;
        let img = scene(w, h, (x, 50, 20, 14));
        assert_eq!(unsafe { convoy_tracker_process(t, img.as_ptr(), w, h, rep.as_mut_ptr()) }, ConvoyStatus::Ok);
        let r = unsafe { rep.assume_init_ref() };
        assert_eq!(r.frame, k as u64);
        assert_eq!(r.status, ConvoyTrackStatus::Locked);
        assert!(r.has_target);
        assert!((r.target.cx - (x as f64 + 10.0)).abs() < 1.5, "frame {k}: {}", r.target.cx);
        assert!((r.target.cy - 57.0).abs() < 1.5);
    }

    let small = scene(80, 60, (10, 10, 10, 10));
    assert_eq!(
        unsafe { convoy_tracker_process(t, small.as_ptr(), 80, 60, rep.as_mut_ptr()) },
        ConvoyStatus::InvalidArgument
    );
    unsafe { convoy_tracker_free(t) };
}

#[test]
fn tracker_construction_errors() {
    let (w, h) = (64, 48);
    let grey = vec![100u8; w * h * 3];
    let mut t = ptr::null_mut();
    let st = unsafe { convoy_tracker_acquire(grey.as_ptr(), w, h, 0, ConvoyFeatures::Hue, false, &mut t) };
    assert_eq!(st, ConvoyStatus::Track);
    assert!(t.is_null());

    let outside = ConvoyRect { x: 60, y: 0, w: 10, h: 10 };
    let st = unsafe { convoy_tracker_new(grey.as_ptr(), w, h, outside, ConvoyFeatures::Hue, false, &mut t) };
    assert_eq!(st, ConvoyStatus::InvalidArgument);
    let st = unsafe { convoy_tracker_new(ptr::null(), w, h, outside, ConvoyFeatures::Hue, false, &mut t) };
    assert_eq!(st, ConvoyStatus::NullPointer);
    let st = unsafe { convoy_tracker_acquire(grey.as_ptr(), w, h, 200, ConvoyFeatures::Hue, false, &mut t) };
    assert_eq!(st, ConvoyStatus::InvalidArgument);

    let img = scene(w, h, (20, 20, 12, 8));
    let win = ConvoyRect { x: 20, y: 20, w: 12, h: 8 };
    let st = unsafe { convoy_tracker_new(img.as_ptr(), w, h, win, ConvoyFeatures::HueSat, false, &mut t) };
    assert_eq!(st, ConvoyStatus::Ok);
    unsafe { convoy_tracker_free(t) };
}

#[test]
fn pose_matches_the_pinhole_model() {
    let cam = convoy_camera_centered(640, 480, 320.0, 0.9, 0.5);
    assert_eq!((cam.cx, cam.cy), (320.0, 240.0));
    // Marker 0.9 m wide at 4 m, centered: 72 px.
    let tb = ConvoyTargetBox { cx: 320.0, cy: 240.0, width: 72.0, height: 40.0, angle: 0.0 };
    let mut pose = ConvoyPose::default();
    assert_eq!(unsafe { convoy_estimate_pose(&cam, &tb, &mut pose) }, ConvoyStatus::Ok);
    assert!((pose.range - 4.0).abs() < 1e-9);
    assert!(pose.bearing.abs() < 1e-9);

    let right = ConvoyTargetBox { cx: 400.0, ..tb };
    assert_eq!(unsafe { convoy_estimate_pose(&cam, &right, &mut pose) }, ConvoyStatus::Ok);
    assert!(pose.bearing > 0.0);

    let thin = ConvoyTargetBox { width: 1.0, ..tb };
    assert_eq!(unsafe { convoy_estimate_pose(&cam, &thin, &mut pose) }, ConvoyStatus::Pose);
    assert!(last_error().contains("wide"));
    let bad_cam = ConvoyCamera { focal_px: 0.0, ..cam };
    assert_eq!(unsafe { convoy_estimate_pose(&bad_cam, &tb, &mut pose) }, ConvoyStatus::InvalidArgument);
}

#[test]
fn guidance_helpers_match_the_library() {
    let g = convoy_gains_default();
    let lib = convoy::guidance::SmcGains::default();
    assert_eq!(g.lambda, lib.lambda);
    assert_eq!(convoy_wrap_angle(3.0 * std::f64::consts::PI), convoy::guidance::wrap(3.0 * std::f64::consts::PI));

    let mut d = 0.0;
    assert_eq!(unsafe { convoy_follower_heading(&g, 0.1, 0.0, &mut d) }, ConvoyStatus::Ok);
    assert_eq!(d, convoy::guidance::follower_heading(0.1, 0.0, &lib));
    assert!(d < 0.0);

    let leader = [5.0, 0.0, 1.0, 0.0];
    let follower = [0.0, 0.0, 0.0];
    let mut u = 0.0;
    assert_eq!(
        unsafe { convoy_follower_speed(&g, leader.as_ptr(), follower.as_ptr(), 3.0, 0.0, &mut u) },
        ConvoyStatus::Ok
    );
    assert_eq!(u, convoy::guidance::follower_speed((5.0, 0.0, 1.0, 0.0), (0.0, 0.0, 0.0), 3.0, &lib, 0.0));
    assert!(u > 0.0 && u <= g.u_max);

    let broken = ConvoyGains { boundary_layer: 0.0, ..g };
    assert_eq!(unsafe { convoy_follower_heading(&broken, 0.1, 0.0, &mut d) }, ConvoyStatus::InvalidArgument);
    assert_eq!(
        unsafe { convoy_follower_speed(&g, ptr::null(), follower.as_ptr(), 3.0, 0.0, &mut u) },
        ConvoyStatus::NullPointer
    );
}
