//! Line-of-sight waypoint guidance for the leader and sliding-mode range and
//! bearing keeping for the follower.

mod los;
mod smc;

pub use los::{los_update, LosState, WaypointPlan};
pub use smc::{
    bearing_error, follower_heading, follower_speed, leader_heading_control, range_error, sat,
    sgn, Command, ControlTrace, FollowerController, FollowerInputs, FormationSetpoint, SmcGains,
};

use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GuidanceError {
    #[error("the last waypoint has been reached")]
    PlanExhausted,
    #[error("invalid waypoint plan: {0}")]
    InvalidPlan(String),
}

/// Wraps an angle into (−π, π].
pub fn wrap(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_edges() {
        assert_eq!(wrap(PI), PI);
        assert_eq!(wrap(-PI), PI);
        assert_eq!(wrap(0.0), 0.0);
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_in_range(a in -100.0..100.0f64) {
            let w = wrap(a);
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap(w), w);
            prop_assert!(((a - w) / TAU - ((a - w) / TAU).round()).abs() < 1e-9);
        }
    }
}
