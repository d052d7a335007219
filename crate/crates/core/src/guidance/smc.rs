use super::{wrap, LosState};
use crate::pose::RelativePose;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormationSetpoint {
    pub s_com: f64,
    pub beta_com: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmcGains {
    pub eta_z: f64,
    pub eta_beta: f64,
    pub lambda: f64,
    pub boundary_layer: f64,
    pub u_max: f64,
    pub delta_max: f64,
    /// Use the discontinuous sign law instead of the boundary-layer saturation.
    pub pure_sgn: bool,
}

impl Default for SmcGains {
    fn default() -> Self {
        Self {
            eta_z: 0.8,
            eta_beta: 1.2,
            lambda: 0.15,
            boundary_layer: 0.2,
            u_max: 2.0,
            delta_max: 1.0,
            pure_sgn: false,
        }
    }
}

impl SmcGains {
    /// The switching function: `sgn(σ)` or its boundary-layer saturation.
    pub fn switch(&self, sigma: f64) -> f64 {
        if self.pure_sgn {
            sgn(sigma)
        } else {
            sat(sigma, self.boundary_layer)
        }
    }
}

/// Sign with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `clamp(x/φ, −1, 1)`; equals `sgn(x)` once `|x| ≥ φ`.
pub fn sat(x: f64, phi: f64) -> f64 {
    if x.abs() >= phi {
        sgn(x)
    } else {
        x / phi
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Command {
    pub u: f64,
    /// Heading-rate command, rad/s.
    pub delta: f64,
}

/// Leader track following: heading rate from the surface `ψ̃ + λ·ε`, with
/// the cross-track error taken per metre.
pub fn leader_heading_control(los: &LosState, gains: &SmcGains, speed: f64) -> Command {
    let sigma = los.heading_err + gains.lambda * los.eps;
    let rate = gains.eta_beta * gains.switch(sigma);
    Command {
        u: speed,
        delta: rate.clamp(-gains.delta_max, gains.delta_max),
    }
}

pub fn range_error(pose: &RelativePose, sp: &FormationSetpoint) -> f64 {
    pose.range - sp.s_com
}

pub fn bearing_error(pose: &RelativePose, sp: &FormationSetpoint) -> f64 {
    wrap(pose.bearing - sp.beta_com)
}

/// Speed that makes the range rate follow the reaching law; the previous
/// speed is held when the heading is nearly perpendicular to the line of
/// sight. The result is clamped to `[0, U_max]`.
pub fn follower_speed(
    leader: (f64, f64, f64, f64),
    follower: (f64, f64, f64),
    s_tilde: f64,
    gains: &SmcGains,
    prev_u: f64,
) -> f64 {
    let (x0, y0, vx0, vy0) = leader;
    let (x, y, psi) = follower;
    let (dx, dy) = (x - x0, y - y0);
    let d = dx.hypot(dy);
    let den = psi.cos() * dx + psi.sin() * dy;
    let u = if den.abs() < 0.05 * d || d == 0.0 {
        prev_u
    } else {
        (-gains.eta_z * gains.switch(s_tilde) * d + vx0 * dx + vy0 * dy) / den
    };
    u.clamp(0.0, gains.u_max)
}

/// Heading-rate command from the bearing surface `β̃ + λ·β̃_rate`.
pub fn follower_heading(beta_tilde: f64, beta_rate: f64, gains: &SmcGains) -> f64 {
    let delta = -gains.eta_beta * gains.switch(beta_tilde + gains.lambda * beta_rate);
    delta.clamp(-gains.delta_max, gains.delta_max)
}

/// Inputs of one follower control step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FollowerInputs {
    pub pose: RelativePose,
    /// Leader position and velocity estimate, world frame.
    pub leader: (f64, f64, f64, f64),
    /// Follower odometry.
    pub follower: (f64, f64, f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ControlTrace {
    pub range_err: f64,
    pub bearing_err: f64,
    pub bearing_rate: f64,
}

/// Memory of the follower's control loop: the held speed and the filtered
/// bearing-error rate.
#[derive(Clone, Debug)]
pub struct FollowerController {
    gains: SmcGains,
    setpoint: FormationSetpoint,
    prev_u: f64,
    prev_bearing_err: Option<f64>,
    bearing_rate: f64,
}

/// Weight of the previous rate estimate in the first-order low-pass.
const RATE_SMOOTHING: f64 = 0.5;

impl FollowerController {
    pub fn new(gains: SmcGains, setpoint: FormationSetpoint) -> Self {
        Self {
            gains,
            setpoint,
            prev_u: 0.0,
            prev_bearing_err: None,
            bearing_rate: 0.0,
        }
    }

    pub fn gains(&self) -> &SmcGains {
        &self.gains
    }

    pub fn setpoint(&self) -> &FormationSetpoint {
        &self.setpoint
    }

    pub fn step(&mut self, inputs: &FollowerInputs, dt: f64) -> (Command, ControlTrace) {
        let s_tilde = range_error(&inputs.pose, &self.setpoint);
        let b_tilde = bearing_error(&inputs.pose, &self.setpoint);
        if let Some(prev) = self.prev_bearing_err {
            let raw = wrap(b_tilde - prev) / dt;
            self.bearing_rate = RATE_SMOOTHING * self.bearing_rate + (1.0 - RATE_SMOOTHING) * raw;
        }
        self.prev_bearing_err = Some(b_tilde);
        let u = follower_speed(inputs.leader, inputs.follower, s_tilde, &self.gains, self.prev_u);
        self.prev_u = u;
        let delta = follower_heading(b_tilde, self.bearing_rate, &self.gains);
        (
            Command { u, delta },
            ControlTrace {
                range_err: s_tilde,
                bearing_err: b_tilde,
                bearing_rate: self.bearing_rate,
            },
        )
    }

    /// Command issued when no estimate is available: stop and hold heading.
    pub fn halt(&mut self) -> Command {
        self.prev_u = 0.0;
        Command::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn los(heading_err: f64, eps: f64) -> LosState {
        LosState {
            psi_los: 0.0,
            psi_d: 0.0,
            heading_err,
            s_i: 5.0,
            d_p: 0.0,
            eps,
        }
    }

    fn pose(range: f64, bearing: f64) -> RelativePose {
        RelativePose {
            bearing,
            marker_yaw: 0.0,
            los_angle: bearing,
            range,
        }
    }

    #[test]
    fn leader_on_track_is_quiet() {
        let c = leader_heading_control(&los(0.0, 0.0), &SmcGains::default(), 0.5);
        assert_eq!(c.delta, 0.0);
        assert_eq!(c.u, 0.5);
    }

    #[test]
    fn leader_left_of_track_steers_right() {
        // Left of the track the cross-track error is negative; a right turn
        // is a negative heading rate.
        let c = leader_heading_control(&los(0.0, -0.3), &SmcGains::default(), 0.5);
        assert!(c.delta < 0.0);
        let c = leader_heading_control(&los(0.0, 0.3), &SmcGains::default(), 0.5);
        assert!(c.delta > 0.0);
    }

    #[test]
    fn leader_saturates() {
        let g = SmcGains {
            delta_max: 10.0,
            ..SmcGains::default()
        };
        let c = leader_heading_control(&los(2.0, 0.0), &g, 0.5);
        assert_eq!(c.delta, g.eta_beta);
        let c = leader_heading_control(&los(-2.0, 0.0), &g, 0.5);
        assert_eq!(c.delta, -g.eta_beta);
    }

    #[test]
    fn range_error_examples() {
        let sp = FormationSetpoint { s_com: 7.0, beta_com: 0.0 };
        assert_eq!(range_error(&pose(7.0, 0.0), &sp), 0.0);
        assert_eq!(range_error(&pose(10.0, 0.0), &sp), 3.0);
    }

    #[test]
    fn stationary_leader_at_range_gives_zero_speed() {
        let u = follower_speed((5.0, 0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 0.0, &SmcGains::default(), 1.0);
        assert_eq!(u, 0.0);
    }

    #[test]
    fn far_behind_closes_range() {
        // Follower behind and facing the leader: the denominator is −D < 0.
        let g = SmcGains::default();
        let u = follower_speed((5.0, 0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 3.0, &g, 0.0);
        assert!(u > 0.0);
        assert_abs_diff_eq!(u, g.eta_z, epsilon = 1e-12);
        // Matching a moving leader at the set range.
        let u = follower_speed((5.0, 0.0, 0.5, 0.0), (0.0, 0.0, 0.0), 0.0, &g, 0.0);
        assert_abs_diff_eq!(u, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn perpendicular_heading_holds_previous_speed() {
        let u = follower_speed((5.0, 0.0, 0.5, 0.0), (0.0, 0.0, std::f64::consts::FRAC_PI_2), 1.0, &SmcGains::default(), 0.7);
        assert_eq!(u, 0.7);
    }

    #[test]
    fn heading_law_examples() {
        let g = SmcGains::default();
        assert_eq!(follower_heading(0.0, 0.0, &g), 0.0);
        assert_eq!(follower_heading(0.2, 0.0, &g), -g.delta_max.min(g.eta_beta));
        let loose = SmcGains { delta_max: 5.0, lambda: 0.5, ..g };
        assert_eq!(follower_heading(0.2, 0.0, &loose), -loose.eta_beta);
        let inside = follower_heading(0.05, 0.1, &loose);
        assert_abs_diff_eq!(inside, -loose.eta_beta * (0.05 + 0.5 * 0.1) / 0.2, epsilon = 1e-12);
    }

    #[test]
    fn default_heading_loop_does_not_chatter() {
        // Pure rotation: the bearing error moves by exactly the commanded
        // turn, so the filtered-rate loop has a pole at (1 - K)/2 with
        // K = eta_beta * lambda / boundary_layer; K < 1 keeps it positive.
        let g = SmcGains::default();
        assert!(g.eta_beta * g.lambda / g.boundary_layer < 1.0);
        let sp = FormationSetpoint { s_com: 2.0, beta_com: 0.0 };
        let mut c = FollowerController::new(g, sp);
        let dt = 0.01;
        let mut beta = 0.3f64;
        let mut prev_beta = beta;
        let mut flips = 0;
        let mut prev_delta = 0.0;
        for _ in 0..1000 {
            let pose = RelativePose { bearing: beta, marker_yaw: 0.0, los_angle: beta, range: 2.0 };
            let inputs = FollowerInputs { pose, leader: (2.0, 0.0, 0.0, 0.0), follower: (0.0, 0.0, 0.0) };
            let (cmd, _) = c.step(&inputs, dt);
            if cmd.delta * prev_delta < 0.0 {
                flips += 1;
            }
            prev_delta = cmd.delta;
            prev_beta = beta;
            beta += cmd.delta * dt;
        }
        assert_eq!(flips, 0);
        assert!(beta.abs() < 1e-3 && beta.abs() <= prev_beta.abs());
    }

    #[test]
    fn sign_convention() {
        assert_eq!(sgn(0.0), 0.0);
        assert_eq!(sat(0.0, 0.2), 0.0);
        let g = SmcGains { pure_sgn: true, ..SmcGains::default() };
        assert_eq!(g.switch(1e-9), 1.0);
        assert_eq!(g.switch(0.0), 0.0);
    }

    #[test]
    fn controller_filters_bearing_rate() {
        let sp = FormationSetpoint { s_com: 2.0, beta_com: 0.0 };
        let mut c = FollowerController::new(SmcGains::default(), sp);
        let inputs = |b: f64| FollowerInputs {
            pose: pose(2.0, b),
            leader: (2.0, 0.0, 0.0, 0.0),
            follower: (0.0, 0.0, 0.0),
        };
        let (_, t0) = c.step(&inputs(0.0), 0.01);
        assert_eq!(t0.bearing_rate, 0.0);
        let (_, t1) = c.step(&inputs(0.01), 0.01);
        assert_abs_diff_eq!(t1.bearing_rate, 0.5, epsilon = 1e-9);
        let (_, t2) = c.step(&inputs(0.02), 0.01);
        assert_abs_diff_eq!(t2.bearing_rate, 0.75, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn saturation_matches_sgn_outside_layer(x in -10.0..10.0f64, phi in 0.01..2.0f64) {
            prop_assume!(x.abs() > phi);
            prop_assert_eq!(sat(x, phi), sgn(x));
        }

        #[test]
        fn commands_respect_clamps(
            x0 in -20.0..20.0f64, y0 in -20.0..20.0f64, vx in -3.0..3.0f64, vy in -3.0..3.0f64,
            x in -20.0..20.0f64, y in -20.0..20.0f64, psi in -4.0..4.0f64,
            s in -10.0..10.0f64, b in -3.0..3.0f64, r in -50.0..50.0f64, prev in 0.0..2.0f64,
        ) {
            let g = SmcGains::default();
            let u = follower_speed((x0, y0, vx, vy), (x, y, psi), s, &g, prev);
            prop_assert!((0.0..=g.u_max).contains(&u));
            prop_assert!(follower_heading(b, r, &g).abs() <= g.delta_max);
        }
    }
}
