//! Coordinate conversions between equirectangular (ERP) pixels, spherical
//! angles, Cartesian unit vectors and the epipole-oriented frame.
//!
//! Conventions (fixed, all tests depend on them):
//!
//! * ERP pixel centers sit at integer coordinates. `phi = 2π(u + 0.5)/W − π`
//!   and `theta = π(v + 0.5)/H`, so azimuth grows with `u` and the polar angle
//!   grows with `v`.
//! * Cartesian form is `x = sinθ·cosφ`, `y = sinθ·sinφ`, `z = cosθ`.
//! * At the poles (`x = y = 0`) the azimuth is defined as `0`.
//! * The epipole frame is reached with the minimal rotation taking `q` onto
//!   `+z`. For `q = −z` the rotation is π about `+x`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Tolerance accepted on the norm of vectors passed in as "unit".
pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("geometry: ERP coordinate ({u}, {v}) outside a {width}x{height} frame")]
    OutOfFrame {
        u: f64,
        v: f64,
        width: usize,
        height: usize,
    },
    #[error("geometry: invalid ERP dimensions {width}x{height}")]
    BadDimensions { width: usize, height: usize },
    #[error("geometry: vector norm {norm} is not unit")]
    NotUnit { norm: f64 },
    #[error("geometry: zero-length vector cannot be normalized")]
    ZeroVector,
}

/// Wraps an azimuth into `[−π, π)`.
#[inline]
pub fn wrap_angle(phi: f64) -> f64 {
    if (-PI..PI).contains(&phi) {
        return phi;
    }
    let wrapped = phi - TAU * ((phi + PI) / TAU).floor();
    // floor() rounding can leave the value exactly on +π
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Wraps an angle difference into `(−π, π]`.
#[inline]
pub fn wrap_angle_half_open_above(phi: f64) -> f64 {
    -wrap_angle(-phi)
}

/// A direction on the unit sphere in polar/azimuth form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    /// Polar angle from `+z`, radians, in `[0, π]`.
    pub theta: f64,
    /// Azimuth, radians, in `[−π, π)`.
    pub phi: f64,
}

impl SphericalPoint {
    /// Builds a point, clamping `theta` into `[0, π]` and wrapping `phi`.
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta: theta.clamp(0.0, PI),
            phi: wrap_angle(phi),
        }
    }

    pub fn to_cartesian(self) -> UnitVector3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        UnitVector3(Vector3::new(st * cp, st * sp, ct))
    }

    /// Inverse of [`ErpCoord::to_sphere`]; the result always has `u ∈ [0, W)`.
    pub fn to_erp(self, width: usize, height: usize) -> ErpCoord {
        let (u, v) = angles_to_erp(self.theta, self.phi, width, height);
        ErpCoord { u, v, width, height }
    }
}

/// Maps raw angles to continuous ERP coordinates. `u` lands in `[0, W)`.
#[inline]
pub fn angles_to_erp(theta: f64, phi: f64, width: usize, height: usize) -> (f64, f64) {
    let w = width as f64;
    let mut u = (wrap_angle(phi) + PI) * w / TAU - 0.5;
    if u < 0.0 {
        u += w;
    }
    if u >= w {
        u -= w;
    }
    let v = theta * height as f64 / PI - 0.5;
    (u, v)
}

/// Unit-norm Cartesian direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3(Vector3<f64>);

impl UnitVector3 {
    pub const Z: UnitVector3 = UnitVector3(Vector3::new(0.0, 0.0, 1.0));
    pub const X: UnitVector3 = UnitVector3(Vector3::new(1.0, 0.0, 0.0));
    pub const Y: UnitVector3 = UnitVector3(Vector3::new(0.0, 1.0, 0.0));

    /// Accepts components already of unit length (within
    /// [`UNIT_NORM_TOLERANCE`]) and removes the residual scale.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let v = Vector3::new(x, y, z);
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(GeometryError::NotUnit { norm });
        }
        Ok(Self(v / norm))
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalize(x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self, GeometryError> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GeometryError::ZeroVector);
        }
        Ok(Self(v / norm))
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.0.x
    }
    #[inline]
    pub fn y(&self) -> f64 {
        self.0.y
    }
    #[inline]
    pub fn z(&self) -> f64 {
        self.0.z
    }

    #[inline]
    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn dot(&self, other: &UnitVector3) -> f64 {
        self.0.dot(&other.0)
    }

    /// Great-circle angle to `other`, accurate for tiny separations.
    pub fn angle_to(&self, other: &UnitVector3) -> f64 {
        let cross = self.0.cross(&other.0).norm();
        cross.atan2(self.0.dot(&other.0))
    }

    pub fn to_spherical(self) -> SphericalPoint {
        let (x, y, z) = (self.0.x, self.0.y, self.0.z);
        let rho = x.hypot(y);
        let theta = rho.atan2(z);
        let phi = if rho == 0.0 || z.abs() == 1.0 {
            0.0
        } else {
            wrap_angle(y.atan2(x))
        };
        SphericalPoint { theta, phi }
    }
}

impl std::ops::Neg for UnitVector3 {
    type Output = UnitVector3;
    fn neg(self) -> UnitVector3 {
        UnitVector3(-self.0)
    }
}

/// A proper rotation (orthonormal, det = +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Rotation about a unit `axis` by `angle` radians (right-handed).
    pub fn about_axis(axis: &UnitVector3, angle: f64) -> Self {
        let k = axis.as_vector();
        let skew = k.cross_matrix();
        let (s, c) = angle.sin_cos();
        Self(Matrix3::identity() + skew * s + skew * skew * (1.0 - c))
    }

    /// Minimal rotation taking `q` onto `+z`.
    pub fn to_epipole(q: &UnitVector3) -> Self {
        let (qx, qy, qz) = (q.x(), q.y(), q.z());
        let lateral = qx * qx + qy * qy;
        if lateral == 0.0 {
            return if qz > 0.0 {
                Self::identity()
            } else {
                Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0))
            };
        }
        // v = q × z, c = q · z; R = I + [v]× + [v]×² / (1 + c).
        // 1 + c loses precision near q = −z, so it is rebuilt from qx, qy there.
        let one_plus_c = if qz >= 0.0 { 1.0 + qz } else { lateral / (1.0 - qz) };
        let v = Vector3::new(qy, -qx, 0.0);
        let skew = v.cross_matrix();
        Self(Matrix3::identity() + skew + skew * skew / one_plus_c)
    }

    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation3) -> Self {
        Self(self.0 * other.0)
    }

    #[inline]
    pub fn apply(&self, v: &UnitVector3) -> UnitVector3 {
        UnitVector3(self.0 * v.0)
    }

    #[inline]
    pub fn apply_raw(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[(0, 0)] * v[0] + m[(0, 1)] * v[1] + m[(0, 2)] * v[2],
            m[(1, 0)] * v[0] + m[(1, 1)] * v[1] + m[(1, 2)] * v[2],
            m[(2, 0)] * v[0] + m[(2, 1)] * v[1] + m[(2, 2)] * v[2],
        ]
    }
}

/// Continuous ERP pixel coordinate together with its frame size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErpCoord {
    pub u: f64,
    pub v: f64,
    pub width: usize,
    pub height: usize,
}

impl ErpCoord {
    pub fn new(u: f64, v: f64, width: usize, height: usize) -> Self {
        Self { u, v, width, height }
    }

    /// Accepts `u ∈ [0, W)` and `v ∈ [−0.5, H − 0.5]`, the vertical range that
    /// covers the sphere from pole to pole.
    pub fn to_sphere(&self) -> Result<SphericalPoint, GeometryError> {
        if self.width < 2 || self.height < 1 {
            return Err(GeometryError::BadDimensions {
                width: self.width,
                height: self.height,
            });
        }
        let (w, h) = (self.width as f64, self.height as f64);
        let inside = self.u.is_finite()
            && self.v.is_finite()
            && (0.0..w).contains(&self.u)
            && (-0.5..=h - 0.5).contains(&self.v);
        if !inside {
            return Err(GeometryError::OutOfFrame {
                u: self.u,
                v: self.v,
                width: self.width,
                height: self.height,
            });
        }
        let phi = wrap_angle(TAU * (self.u + 0.5) / w - PI);
        let theta = (PI * (self.v + 0.5) / h).clamp(0.0, PI);
        Ok(SphericalPoint { theta, phi })
    }
}

/// Spherical angles of an ERP pixel without range checks.
#[inline]
pub fn erp_to_angles(u: f64, v: f64, width: usize, height: usize) -> (f64, f64) {
    let phi = wrap_angle(TAU * (u + 0.5) / width as f64 - PI);
    let theta = PI * (v + 0.5) / height as f64;
    (theta, phi)
}
