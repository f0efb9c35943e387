//! Planar poses, relative detections and the transforms between them.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(theta: f64) -> f64 {
    let t = wrap_two_pi(theta);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

/// Smallest absolute difference between two angles, in `[0, π]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Position2D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Robot pose in the world frame. `theta` is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_two_pi(theta),
        }
    }

    pub fn position(&self) -> Position2D {
        Position2D::new(self.x, self.y)
    }

    /// Composes a body-frame displacement onto this pose.
    pub fn compose(&self, dx: f64, dy: f64, dtheta: f64) -> Pose {
        let (s, c) = self.theta.sin_cos();
        Pose::new(self.x + c * dx - s * dy, self.y + s * dx + c * dy, self.theta + dtheta)
    }

    /// Body-frame displacement `(dx, dy, dtheta)` that takes `self` to `other`.
    pub fn between(&self, other: &Pose) -> (f64, f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let gx = other.x - self.x;
        let gy = other.y - self.y;
        (c * gx + s * gy, -s * gx + c * gy, wrap_pi(other.theta - self.theta))
    }
}

/// Relative polar observation of another robot, in the observer's body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Detection {
    pub range: f64,
    pub bearing: f64,
}

impl Detection {
    pub fn new(range: f64, bearing: f64) -> Self {
        debug_assert!(range >= 0.0);
        Self {
            range,
            bearing: wrap_pi(bearing),
        }
    }
}

/// Absolute position of a detection made from `observer`.
pub fn to_absolute(d: &Detection, observer: &Pose) -> Position2D {
    let (s, c) = (observer.theta + d.bearing).sin_cos();
    Position2D::new(observer.x + d.range * c, observer.y + d.range * s)
}

/// Inverse of [`to_absolute`]. A point on top of the observer maps to `(0, 0)`.
pub fn to_relative(p: &Position2D, observer: &Pose) -> Detection {
    let dx = p.x - observer.x;
    let dy = p.y - observer.y;
    let range = dx.hypot(dy);
    if range == 0.0 {
        return Detection {
            range: 0.0,
            bearing: 0.0,
        };
    }
    Detection {
        range,
        bearing: wrap_pi(dy.atan2(dx) - observer.theta),
    }
}

/// Symmetric 2×2 covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cov2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Cov2 {
    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub const fn isotropic(var: f64) -> Self {
        Self {
            xx: var,
            xy: 0.0,
            yy: var,
        }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn add(&self, other: &Cov2) -> Cov2 {
        Cov2::new(self.xx + other.xx, self.xy + other.xy, self.yy + other.yy)
    }

    /// Adds `eps` to the diagonal.
    pub fn floored(&self, eps: f64) -> Cov2 {
        Cov2::new(self.xx + eps, self.xy, self.yy + eps)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Eigenvalues, smallest first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        (m - r, m + r)
    }

    pub fn is_psd(&self) -> bool {
        self.xx.is_finite() && self.yy.is_finite() && self.xy.is_finite() && self.eigenvalues().0 >= -1e-15
    }

    /// `[a b; b c]^-1` as `(a', b', c')`; `None` when singular.
    pub fn inverse(&self) -> Option<Cov2> {
        let d = self.det();
        if !(d > 0.0) {
            return None;
        }
        Some(Cov2::new(self.yy / d, -self.xy / d, self.xx / d))
    }

    /// Squared Mahalanobis norm of `(dx, dy)` under this covariance's inverse.
    pub fn mahalanobis_sq(&self, dx: f64, dy: f64) -> Option<f64> {
        let inv = self.inverse()?;
        Some(inv.xx * dx * dx + 2.0 * inv.xy * dx * dy + inv.yy * dy * dy)
    }
}
