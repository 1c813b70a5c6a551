//! Rigid-body geometry: vectors, rotation matrices, roll-pitch-yaw
//! conversions, poses, and oriented boxes with separating-axis overlap
//! tests.
//!
//! Conventions used throughout the crate:
//! - Column vectors, row-major `[[f64; 3]; 3]` rotation matrices.
//! - A roll-pitch-yaw triple `[roll, pitch, yaw]` denotes the rotation
//!   `Rz(yaw) * Ry(pitch) * Rx(roll)` applied to column vectors.
//! - Angles are radians. Normalized angles live in `[-PI, PI]`; the two
//!   endpoints are distinct values but name the same rotation, which is why
//!   comparisons go through [`angle_eq`] rather than `==`.

use std::f64::consts::PI;
use thiserror::Error;

/// Below this value of `|cos(pitch)|` the roll and yaw axes coincide and a
/// rotation matrix no longer determines a unique roll-pitch-yaw triple.
pub const GIMBAL_EPS: f64 = 1e-9;

pub type Vec3 = [f64; 3];

pub const EX: Vec3 = [1.0, 0.0, 0.0];
pub const EY: Vec3 = [0.0, 1.0, 0.0];
pub const EZ: Vec3 = [0.0, 0.0, 1.0];

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("gimbal lock: |cos(pitch)| < {GIMBAL_EPS}, roll and yaw are not separable")]
    GimbalLock,
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(v: Vec3, s: f64) -> Vec3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(v: Vec3) -> f64 {
    dot(v, v).sqrt()
}

/// Wraps an angle into `[-PI, PI]`. Values already inside the interval are
/// returned unchanged, so `-PI` stays `-PI` and `PI` stays `PI`.
pub fn normalize_angle(a: f64) -> f64 {
    if (-PI..=PI).contains(&a) {
        a
    } else {
        (a + PI).rem_euclid(2.0 * PI) - PI
    }
}

/// Angle equality on the circle: `PI` and `-PI` compare equal, as do any
/// two angles a multiple of `2*PI` apart.
pub fn angle_eq(a: f64, b: f64, tol: f64) -> bool {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d) <= tol
}

/// Componentwise [`angle_eq`] over roll-pitch-yaw triples.
pub fn rpy_eq(a: Vec3, b: Vec3, tol: f64) -> bool {
    angle_eq(a[0], b[0], tol) && angle_eq(a[1], b[1], tol) && angle_eq(a[2], b[2], tol)
}

/// A 3x3 rotation matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rot {
    pub m: [[f64; 3]; 3],
}

impl Rot {
    pub fn identity() -> Rot {
        Rot {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn rx(a: f64) -> Rot {
        let (s, c) = a.sin_cos();
        Rot {
            m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        }
    }

    pub fn ry(a: f64) -> Rot {
        let (s, c) = a.sin_cos();
        Rot {
            m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        }
    }

    pub fn rz(a: f64) -> Rot {
        let (s, c) = a.sin_cos();
        Rot {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// `Rz(yaw) * Ry(pitch) * Rx(roll)` for `rpy = [roll, pitch, yaw]`.
    pub fn from_rpy(rpy: Vec3) -> Rot {
        Rot::rz(rpy[2]).mul(&Rot::ry(rpy[1])).mul(&Rot::rx(rpy[0]))
    }

    /// Rodrigues' formula; `axis` must be unit length.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Rot {
        let [x, y, z] = axis;
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Rot {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    /// Builds the matrix whose columns are the images of the local axes.
    pub fn from_cols(x: Vec3, y: Vec3, z: Vec3) -> Rot {
        Rot {
            m: [[x[0], y[0], z[0]], [x[1], y[1], z[1]], [x[2], y[2], z[2]]],
        }
    }

    /// Column `i`: the world direction of local axis `i`.
    pub fn col(&self, i: usize) -> Vec3 {
        [self.m[0][i], self.m[1][i], self.m[2][i]]
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        [
            dot(self.m[0], v),
            dot(self.m[1], v),
            dot(self.m[2], v),
        ]
    }

    pub fn mul(&self, o: &Rot) -> Rot {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = self.m[r][0] * o.m[0][c] + self.m[r][1] * o.m[1][c] + self.m[r][2] * o.m[2][c];
            }
        }
        Rot { m }
    }

    pub fn transpose(&self) -> Rot {
        let m = &self.m;
        Rot {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    /// Extracts `[roll, pitch, yaw]`, failing near `pitch = +-PI/2` where
    /// the decomposition is not unique.
    pub fn to_rpy(&self) -> Result<Vec3, GeomError> {
        let m = &self.m;
        let cb = (m[2][1] * m[2][1] + m[2][2] * m[2][2]).sqrt();
        if cb < GIMBAL_EPS {
            return Err(GeomError::GimbalLock);
        }
        Ok([
            m[2][1].atan2(m[2][2]),
            (-m[2][0]).atan2(cb),
            m[1][0].atan2(m[0][0]),
        ])
    }

    /// Like [`Rot::to_rpy`], but at gimbal lock returns the canonical
    /// representative with `roll = 0`, absorbing the free degree of freedom
    /// into yaw. Always reproduces the matrix exactly.
    pub fn to_rpy_canonical(&self) -> Vec3 {
        match self.to_rpy() {
            Ok(w) => w,
            Err(GeomError::GimbalLock) => {
                let pitch = if self.m[2][0] < 0.0 { PI / 2.0 } else { -PI / 2.0 };
                [0.0, pitch, (-self.m[0][1]).atan2(self.m[1][1])]
            }
        }
    }
}

/// The rotation of smallest angle sending unit vector `u` onto unit vector
/// `v`. For antiparallel inputs the axis is ambiguous; this picks the
/// half-turn about the x axis (projected perpendicular to `u`), or about
/// the z axis when `u` is itself along x.
pub fn rotation_between(u: Vec3, v: Vec3) -> Rot {
    let c = dot(u, v).clamp(-1.0, 1.0);
    let w = cross(u, v);
    let s = norm(w);
    if s < 1e-12 {
        if c > 0.0 {
            return Rot::identity();
        }
        let px = sub(EX, scale(u, u[0]));
        let n = norm(px);
        let axis = if n < 1e-9 { EZ } else { scale(px, 1.0 / n) };
        return Rot::from_axis_angle(axis, PI);
    }
    Rot::from_axis_angle(scale(w, 1.0 / s), c.acos())
}

/// A rigid transform: rotate by `rot`, then translate by `pos`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub pos: Vec3,
    pub rot: Rot,
}

impl Pose {
    pub fn identity() -> Pose {
        Pose {
            pos: [0.0; 3],
            rot: Rot::identity(),
        }
    }

    pub fn new(pos: Vec3, rot: Rot) -> Pose {
        Pose { pos, rot }
    }

    pub fn from_rpy(pos: Vec3, rpy: Vec3) -> Pose {
        Pose {
            pos,
            rot: Rot::from_rpy(rpy),
        }
    }

    /// `self * other`: interprets `other` in `self`'s frame.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            pos: add(self.pos, self.rot.apply(other.pos)),
            rot: self.rot.mul(&other.rot),
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rot.transpose();
        Pose {
            pos: scale(rt.apply(self.pos), -1.0),
            rot: rt,
        }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        add(self.pos, self.rot.apply(p))
    }
}

/// An oriented box: `pose` places its center, `half` holds half-extents
/// along the local axes.
#[derive(Clone, Copy, Debug)]
pub struct Obb {
    pub pose: Pose,
    pub half: Vec3,
}

impl Obb {
    pub fn new(pose: Pose, half: Vec3) -> Obb {
        Obb { pose, half }
    }

    /// `size` holds full edge lengths.
    pub fn from_size(pose: Pose, size: Vec3) -> Obb {
        Obb {
            pose,
            half: scale(size, 0.5),
        }
    }

    /// Closed containment: points on the boundary (within `tol`) count as
    /// inside.
    pub fn contains(&self, point: Vec3, tol: f64) -> bool {
        let local = self.pose.rot.transpose().apply(sub(point, self.pose.pos));
        (0..3).all(|i| local[i].abs() <= self.half[i] + tol)
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [[0.0; 3]; 8];
        for (k, c) in out.iter_mut().enumerate() {
            let sx = if k & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if k & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if k & 4 == 0 { -1.0 } else { 1.0 };
            *c = self.pose.transform_point([
                sx * self.half[0],
                sy * self.half[1],
                sz * self.half[2],
            ]);
        }
        out
    }

    fn radius_along(&self, axis: Vec3) -> f64 {
        (0..3)
            .map(|i| self.half[i] * dot(self.pose.rot.col(i), axis).abs())
            .sum()
    }

    /// Separating-axis overlap test. Returns true only when the boxes
    /// interpenetrate by more than `tol` along every candidate axis, so
    /// boxes in surface contact do not intersect.
    pub fn intersects(&self, other: &Obb, tol: f64) -> bool {
        let d = sub(other.pose.pos, self.pose.pos);
        let mut axes: Vec<Vec3> = Vec::with_capacity(15);
        for i in 0..3 {
            axes.push(self.pose.rot.col(i));
            axes.push(other.pose.rot.col(i));
        }
        for i in 0..3 {
            for j in 0..3 {
                let c = cross(self.pose.rot.col(i), other.pose.rot.col(j));
                let n = norm(c);
                if n > 1e-12 {
                    axes.push(scale(c, 1.0 / n));
                }
            }
        }
        for axis in axes {
            let overlap = self.radius_along(axis) + other.radius_along(axis) - dot(d, axis).abs();
            if overlap <= tol {
                return false;
            }
        }
        true
    }
}
