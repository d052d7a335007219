//! Constant-velocity Kalman filters.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};

/// 2-D constant-velocity filter, state `(px, py, vx, vy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KalmanCV {
    pub state: Vector4<f64>,
    pub p: Matrix4<f64>,
    pub q: Matrix4<f64>,
    pub r: Matrix2<f64>,
    transition: Matrix4<f64>,
}

const H: Matrix2x4<f64> = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);

impl KalmanCV {
    /// `q` and `r` are the diagonals of the process and measurement noise;
    /// `dt` is the step between predictions in the caller's time unit.
    pub fn new(position: (f64, f64), velocity: (f64, f64), p0: [f64; 4], q: [f64; 4], r: [f64; 2], dt: f64) -> Self {
        let mut transition = Matrix4::identity();
        transition[(0, 2)] = dt;
        transition[(1, 3)] = dt;
        Self {
            state: Vector4::new(position.0, position.1, velocity.0, velocity.1),
            p: Matrix4::from_diagonal(&Vector4::from(p0)),
            q: Matrix4::from_diagonal(&Vector4::from(q)),
            r: Matrix2::from_diagonal(&Vector2::from(r)),
            transition,
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.state[0], self.state[1])
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.state[2], self.state[3])
    }

    pub fn predict(&mut self) {
        self.state = self.transition * self.state;
        self.p = self.transition * self.p * self.transition.transpose() + self.q;
        self.symmetrize();
    }

    pub fn update(&mut self, meas: (f64, f64)) {
        let z = Vector2::new(meas.0, meas.1);
        let s = H * self.p * H.transpose() + self.r;
        // A singular innovation covariance only arises when both P and R
        // vanish along the measured axes; the prediction is then exact.
        let Some(s_inv) = s.try_inverse() else {
            return;
        };
        let k = self.p * H.transpose() * s_inv;
        self.state += k * (z - H * self.state);
        // Joseph form keeps P positive semidefinite.
        let i_kh = Matrix4::identity() - k * H;
        self.p = i_kh * self.p * i_kh.transpose() + k * self.r * k.transpose();
        self.symmetrize();
    }

    fn symmetrize(&mut self) {
        self.p = (self.p + self.p.transpose()) * 0.5;
    }
}

/// Scalar constant-velocity filter over window mass (area and area rate).
#[derive(Clone, Debug, PartialEq)]
pub struct AreaFilter {
    state: Vector2<f64>,
    p: Matrix2<f64>,
    q: Matrix2<f64>,
    r: f64,
}

impl AreaFilter {
    /// Noise levels scale with the initial area so the filter is
    /// independent of target size.
    pub fn new(initial_area: f64) -> Self {
        let a = initial_area.max(1.0);
        Self {
            state: Vector2::new(initial_area, 0.0),
            p: Matrix2::from_diagonal(&Vector2::new((0.1 * a).powi(2), (0.01 * a).powi(2))),
            q: Matrix2::from_diagonal(&Vector2::new((0.02 * a).powi(2), (0.005 * a).powi(2))),
            r: (0.08 * a).powi(2),
        }
    }

    pub fn area(&self) -> f64 {
        self.state[0].max(0.0)
    }

    pub fn rate(&self) -> f64 {
        self.state[1]
    }

    pub fn predict(&mut self) {
        let f = Matrix2::new(1.0, 1.0, 0.0, 1.0);
        self.state = f * self.state;
        if self.state[0] < 0.0 {
            self.state[0] = 0.0;
            self.state[1] = self.state[1].max(0.0);
        }
        self.p = f * self.p * f.transpose() + self.q;
    }

    pub fn update(&mut self, area: f64) {
        self.update_weighted(area, 1.0);
    }

    /// Update with the measurement variance scaled by `noise_scale`.
    pub fn update_weighted(&mut self, area: f64, noise_scale: f64) {
        let r = self.r * noise_scale;
        let s = self.p[(0, 0)] + r;
        let k = Vector2::new(self.p[(0, 0)] / s, self.p[(1, 0)] / s);
        self.state += k * (area - self.state[0]);
        self.state[0] = self.state[0].max(0.0);
        let h = nalgebra::RowVector2::new(1.0, 0.0);
        let i_kh = Matrix2::identity() - k * h;
        self.p = i_kh * self.p * i_kh.transpose() + k * r * k.transpose();
        self.p = (self.p + self.p.transpose()) * 0.5;
    }

    /// Drops the rate estimate; used while the area is not being measured.
    pub fn freeze_rate(&mut self) {
        self.state[1] = 0.0;
    }
}
