//! Rotation-group and unit-sphere primitives.
//!
//! Rotations act on the right for body-frame rates (`Ṙ = R Ω^`) and unit
//! vectors rotate on the left with spatial rates (`q̇ = ω × q`).

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance used when validating that a matrix is skew-symmetric.
pub const SKEW_TOL: f64 = 1e-9;
/// Tolerance used when validating orthogonality of a rotation.
pub const ORTHO_TOL: f64 = 1e-8;
/// Tolerance used when validating the norm of a unit vector.
pub const UNIT_TOL: f64 = 1e-8;

/// A 3×3 skew-symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewMatrix(Mat3);

impl SkewMatrix {
    pub fn new(m: Mat3) -> Result<Self> {
        let asym = (m + m.transpose()).abs().max();
        let scale = 1.0_f64.max(m.abs().max());
        if asym > SKEW_TOL * scale {
            return Err(Error::InvalidArgument(format!(
                "matrix is not skew-symmetric (|S + S^T| = {asym:.3e})"
            )));
        }
        Ok(Self(0.5 * (m - m.transpose())))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn vee(&self) -> Vec3 {
        vee_unchecked(&self.0)
    }
}

/// An element of SO(3).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat3", into = "Mat3")]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    /// Validates orthogonality and orientation.
    pub fn new(m: Mat3) -> Result<Self> {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument("rotation has non-finite entries".into()));
        }
        let err = orthogonality_error(&m);
        if err > ORTHO_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not orthogonal (|R^T R - I|_inf = {err:.3e})"
            )));
        }
        if m.determinant() <= 0.0 {
            return Err(Error::InvalidArgument("matrix is a reflection".into()));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix without checking; used by integrators whose
    /// retraction already guarantees membership up to round-off.
    pub fn new_unchecked(m: Mat3) -> Self {
        Self(m)
    }

    pub fn from_columns(b1: &Vec3, b2: &Vec3, b3: &Vec3) -> Result<Self> {
        Self::new(Mat3::from_columns(&[*b1, *b2, *b3]))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, other: &RotationMatrix) -> Self {
        Self(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn apply_transpose(&self, v: &Vec3) -> Vec3 {
        self.0.tr_mul(v)
    }

    pub fn column(&self, i: usize) -> Vec3 {
        self.0.column(i).into_owned()
    }

    /// `‖RᵀR − I‖∞` (max-abs entry).
    pub fn orthogonality_error(&self) -> f64 {
        orthogonality_error(&self.0)
    }
}

impl TryFrom<Mat3> for RotationMatrix {
    type Error = Error;
    fn try_from(m: Mat3) -> Result<Self> {
        Self::new(m)
    }
}

impl From<RotationMatrix> for Mat3 {
    fn from(r: RotationMatrix) -> Mat3 {
        r.0
    }
}

impl Default for RotationMatrix {
    fn default() -> Self {
        Self::identity()
    }
}

/// A point on the unit sphere S².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec3", into = "Vec3")]
pub struct UnitVector(Vec3);

impl UnitVector {
    /// Accepts vectors whose norm is within `UNIT_TOL` of one and renormalizes them.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!(
                "vector is not unit length (|v| = {n})"
            )));
        }
        Ok(Self(v / n))
    }

    /// Normalizes any vector whose norm exceeds `min_norm`.
    pub fn normalize(v: Vec3, min_norm: f64) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n <= min_norm {
            return Err(Error::InvalidArgument(format!(
                "cannot normalize vector with norm {n:.3e}"
            )));
        }
        Ok(Self(v / n))
    }

    pub fn new_unchecked(v: Vec3) -> Self {
        Self(v)
    }

    pub fn e1() -> Self {
        Self(Vec3::x())
    }
    pub fn e2() -> Self {
        Self(Vec3::y())
    }
    pub fn e3() -> Self {
        Self(Vec3::z())
    }
    pub fn minus_e3() -> Self {
        Self(-Vec3::z())
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    pub fn into_inner(self) -> Vec3 {
        self.0
    }

    /// `|‖q‖ − 1|`.
    pub fn norm_error(&self) -> f64 {
        (self.0.norm() - 1.0).abs()
    }
}

impl TryFrom<Vec3> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec3) -> Result<Self> {
        Self::new(v)
    }
}

impl From<UnitVector> for Vec3 {
    fn from(q: UnitVector) -> Vec3 {
        q.0
    }
}

/// Skew-symmetric matrix with `hat(a) b = a × b`.
pub fn hat(v: &Vec3) -> SkewMatrix {
    SkewMatrix(hat_mat(v))
}

/// Same as [`hat`] but returns the raw matrix.
#[inline]
pub fn hat_mat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]; rejects matrices that are not skew-symmetric.
pub fn vee(m: &Mat3) -> Result<Vec3> {
    Ok(SkewMatrix::new(*m)?.vee())
}

#[inline]
pub(crate) fn vee_unchecked(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Exponential map so(3) → SO(3) (Rodrigues), with a Taylor branch near zero.
pub fn so3_exp(v: &Vec3) -> RotationMatrix {
    let th2 = v.norm_squared();
    let k = hat_mat(v);
    let (a, b) = if th2 < 1e-12 {
        (1.0 - th2 / 6.0, 0.5 - th2 / 24.0)
    } else {
        let th = th2.sqrt();
        (th.sin() / th, (1.0 - th.cos()) / th2)
    };
    RotationMatrix(Mat3::identity() + a * k + b * k * k)
}

/// Coefficient of `φ^²` shared by both inverse Jacobians.
fn jac_inv_coeff(th2: f64) -> f64 {
    if th2 < 1e-8 {
        1.0 / 12.0 + th2 / 720.0
    } else {
        let th = th2.sqrt();
        1.0 / th2 - (1.0 + th.cos()) / (2.0 * th * th.sin())
    }
}

/// Inverse left Jacobian: if `q(t) = exp(ξ(t)) q0` and `q̇ = ω × q`, then `ξ̇ = J_l⁻¹(ξ) ω`.
pub fn left_jacobian_inv(xi: &Vec3) -> Mat3 {
    let k = hat_mat(xi);
    Mat3::identity() - 0.5 * k + jac_inv_coeff(xi.norm_squared()) * k * k
}

/// Inverse right Jacobian: if `R(t) = R0 exp(ξ(t))` and `Ṙ = R Ω^`, then `ξ̇ = J_r⁻¹(ξ) Ω`.
pub fn right_jacobian_inv(xi: &Vec3) -> Mat3 {
    let k = hat_mat(xi);
    Mat3::identity() + 0.5 * k + jac_inv_coeff(xi.norm_squared()) * k * k
}

/// Nearest rotation in the Frobenius norm (polar factor).
pub fn project_so3(m: &Mat3) -> Result<RotationMatrix> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let det = m.determinant();
    if det <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cannot project matrix with det = {det:.3e} onto SO(3)"
        )));
    }
    let svd = m.svd(true, true);
    let s = &svd.singular_values;
    if s.min() <= 1e-12 * s.max() {
        return Err(Error::InvalidArgument("matrix is numerically singular".into()));
    }
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    Ok(RotationMatrix(u * vt))
}

/// `e_R = ½ (R̃ᵀR − RᵀR̃)^∨`.
pub fn rotation_error(r: &RotationMatrix, rd: &RotationMatrix) -> Vec3 {
    let a = rd.0.tr_mul(&r.0);
    0.5 * vee_unchecked(&(a - a.transpose()))
}

/// `Ψ = ½ tr(I − R̃ᵀR)`, in `[0, 2]`.
pub fn attitude_psi(r: &RotationMatrix, rd: &RotationMatrix) -> f64 {
    0.5 * (3.0 - rd.0.tr_mul(&r.0).trace())
}

/// `Ψ_q = 1 − q̃ᵀq`, in `[0, 2]`.
pub fn sphere_psi(q: &UnitVector, qd: &UnitVector) -> f64 {
    1.0 - qd.0.dot(&q.0)
}

/// Configuration and velocity errors on S²: `e_q = q̃ × q`, `e_ω = ω + q^² ω̃`.
pub fn sphere_errors(q: &UnitVector, omega: &Vec3, qd: &UnitVector, omega_d: &Vec3) -> (Vec3, Vec3) {
    let e_q = qd.0.cross(&q.0);
    let e_w = omega + q.0.cross(&q.0.cross(omega_d));
    (e_q, e_w)
}

/// `‖RᵀR − I‖∞` for an arbitrary matrix.
pub fn orthogonality_error(m: &Mat3) -> f64 {
    (m.tr_mul(m) - Mat3::identity()).abs().max()
}

/// Rotation `exp(ξ) q` of a unit vector.
pub fn rotate_unit(q: &UnitVector, xi: &Vec3) -> UnitVector {
    UnitVector(so3_exp(xi).0 * q.0)
}
