use super::{wrap, GuidanceError};

#[derive(Clone, Debug, PartialEq)]
pub struct WaypointPlan {
    waypoints: Vec<(f64, f64)>,
    acceptance_radius: f64,
}

impl WaypointPlan {
    pub fn new(waypoints: Vec<(f64, f64)>, acceptance_radius: f64) -> Result<Self, GuidanceError> {
        if waypoints.len() < 2 {
            return Err(GuidanceError::InvalidPlan("at least two waypoints are required".into()));
        }
        if let Some(i) = waypoints.windows(2).position(|w| w[0] == w[1]) {
            return Err(GuidanceError::InvalidPlan(format!(
                "waypoints {} and {} coincide",
                i,
                i + 1
            )));
        }
        if waypoints.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(GuidanceError::InvalidPlan("waypoints must be finite".into()));
        }
        if !(acceptance_radius > 0.0) {
            return Err(GuidanceError::InvalidPlan("acceptance radius must be > 0".into()));
        }
        Ok(Self {
            waypoints,
            acceptance_radius,
        })
    }

    pub fn waypoints(&self) -> &[(f64, f64)] {
        &self.waypoints
    }

    pub fn acceptance_radius(&self) -> f64 {
        self.acceptance_radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LosState {
    pub psi_los: f64,
    pub psi_d: f64,
    /// `wrap(ψ_d − ψ)`
    pub heading_err: f64,
    /// Distance to the active waypoint.
    pub s_i: f64,
    pub d_p: f64,
    /// Cross-track error `S_i·sin(d_p)`; negative left of the track.
    pub eps: f64,
}

fn evaluate(plan: &WaypointPlan, (x, y, psi): (f64, f64, f64), idx: usize) -> LosState {
    let (xp, yp) = plan.waypoints[idx - 1];
    let (xi, yi) = plan.waypoints[idx];
    let psi_los = wrap((yi - y).atan2(xi - x));
    let psi_d = wrap((yi - yp).atan2(xi - xp));
    let s_i = (xi - x).hypot(yi - y);
    let d_p = wrap(psi_los - psi_d);
    LosState {
        psi_los,
        psi_d,
        heading_err: wrap(psi_d - psi),
        s_i,
        d_p,
        eps: s_i * d_p.sin(),
    }
}

/// Guidance geometry toward waypoint `active_idx`, advancing through every
/// waypoint already inside the acceptance radius.
pub fn los_update(
    plan: &WaypointPlan,
    pose: (f64, f64, f64),
    active_idx: usize,
) -> Result<(LosState, usize), GuidanceError> {
    assert!(active_idx >= 1, "the active waypoint index starts at 1");
    let mut idx = active_idx;
    loop {
        if idx >= plan.waypoints.len() {
            return Err(GuidanceError::PlanExhausted);
        }
        let st = evaluate(plan, pose, idx);
        if st.s_i < plan.acceptance_radius {
            idx += 1;
            continue;
        }
        return Ok((st, idx));
    }
}
