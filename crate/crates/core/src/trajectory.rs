//! Desired load trajectories.

use std::f64::consts::PI;

use crate::manifold::{RotationMatrix, Vec3};

/// Desired load pose, its first derivatives and the translational feedforward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesiredSample {
    pub x: Vec3,
    pub v: Vec3,
    pub a: Vec3,
    pub r: RotationMatrix,
    /// Desired body angular velocity.
    pub omega: Vec3,
    pub omega_dot: Vec3,
}

pub trait DesiredTrajectory: Send + Sync {
    fn sample(&self, t: f64) -> DesiredSample;
}

/// Stationary load at a fixed point with identity attitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hover {
    pub position: Vec3,
}

impl DesiredTrajectory for Hover {
    fn sample(&self, _t: f64) -> DesiredSample {
        DesiredSample {
            x: self.position,
            v: Vec3::zeros(),
            a: Vec3::zeros(),
            r: RotationMatrix::identity(),
            omega: Vec3::zeros(),
            omega_dot: Vec3::zeros(),
        }
    }
}

/// Horizontal figure-eight `x = [a sin(2π f_x t), b cos(2π f_y t), h]` with the
/// load heading aligned with the velocity: `R = [v/|v|, e3 × v/|e3 × v|, e3]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigureEight {
    pub amp_x: f64,
    pub freq_x: f64,
    pub amp_y: f64,
    pub freq_y: f64,
    pub height: f64,
}

impl FigureEight {
    /// `[1.2 sin(0.4πt), 4.2 cos(0.2πt), 5]`.
    pub fn reference() -> Self {
        Self { amp_x: 1.2, freq_x: 0.2, amp_y: 4.2, freq_y: 0.1, height: 5.0 }
    }

    /// Position derivatives of order 0..=3 in the horizontal plane.
    fn derivs(&self, t: f64) -> [[f64; 2]; 4] {
        let (wx, wy) = (2.0 * PI * self.freq_x, 2.0 * PI * self.freq_y);
        let (sx, cx) = (wx * t).sin_cos();
        let (sy, cy) = (wy * t).sin_cos();
        let (a, b) = (self.amp_x, self.amp_y);
        [
            [a * sx, b * cy],
            [a * wx * cx, -b * wy * sy],
            [-a * wx * wx * sx, -b * wy * wy * cy],
            [-a * wx.powi(3) * cx, b * wy.powi(3) * sy],
        ]
    }
}

impl DesiredTrajectory for FigureEight {
    fn sample(&self, t: f64) -> DesiredSample {
        let [p, v, a, j] = self.derivs(t);
        let den = v[0] * v[0] + v[1] * v[1];
        let num = v[0] * a[1] - v[1] * a[0];
        let num_dot = v[0] * j[1] - v[1] * j[0];
        let den_dot = 2.0 * (v[0] * a[0] + v[1] * a[1]);
        let yaw_rate = num / den;
        let yaw_acc = (num_dot * den - num * den_dot) / (den * den);
        let n = den.sqrt();
        let b1 = Vec3::new(v[0] / n, v[1] / n, 0.0);
        let b2 = Vec3::new(-b1.y, b1.x, 0.0);
        DesiredSample {
            x: Vec3::new(p[0], p[1], self.height),
            v: Vec3::new(v[0], v[1], 0.0),
            a: Vec3::new(a[0], a[1], 0.0),
            r: RotationMatrix::new_unchecked(nalgebra::Matrix3::from_columns(&[b1, b2, Vec3::z()])),
            omega: Vec3::new(0.0, 0.0, yaw_rate),
            omega_dot: Vec3::new(0.0, 0.0, yaw_acc),
        }
    }
}
