use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Point3, Vector3};

use crate::error::{Error, Result};

/// Per-entry tolerance for `RᵀR = I` and `det(R) = 1` on construction.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-9;

/// Composed rotations drifting further than this from orthonormal are
/// projected back onto SO(3).
pub const DRIFT_TOLERANCE: f64 = 1e-7;

/// Below this rotation angle the exponential map switches to its Taylor series.
pub const SMALL_ANGLE: f64 = 1e-8;

/// A rigid transform in SE(3), acting on points as `p ↦ R p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl fmt::Display for RigidTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.translation;
        let (yaw, pitch, roll) = self.euler_zyx().angles;
        write!(
            f,
            "RigidTransform(t: [{:.4}, {:.4}, {:.4}], ypr: [{:.4}, {:.4}, {:.4}])",
            t.x, t.y, t.z, yaw, pitch, roll
        )
    }
}

/// ZYX (yaw, pitch, roll) angles with `R = Rz(yaw) Ry(pitch) Rx(roll)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerZyx {
    pub angles: (f64, f64, f64),
    /// Pitch is within 1e-6 rad of ±π/2; roll was fixed to 0.
    pub gimbal_lock: bool,
}

pub(crate) fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    let e = r.transpose() * r - Matrix3::identity();
    e.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Nearest rotation in the Frobenius sense (polar decomposition via SVD).
pub(crate) fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    r
}

fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Validated constructor: the rotation must be orthonormal with
    /// determinant +1 within [`ORTHONORMAL_TOLERANCE`].
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidTransform("non-finite entry".into()));
        }
        let err = orthonormality_error(&rotation);
        if err > ORTHONORMAL_TOLERANCE {
            return Err(Error::InvalidTransform(format!(
                "rotation not orthonormal (max |RᵀR - I| = {err:e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOLERANCE {
            return Err(Error::InvalidTransform(format!(
                "rotation determinant {det} != 1"
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds from a homogeneous matrix, snapping a slightly non-orthonormal
    /// rotation (within `tolerance`) to the nearest rotation.
    pub fn from_matrix(m: &Matrix4<f64>, tolerance: f64) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTransform("non-finite entry".into()));
        }
        let bottom = [m[(3, 0)], m[(3, 1)], m[(3, 2)], m[(3, 3)]];
        if bottom != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::InvalidTransform(format!(
                "last row must be [0, 0, 0, 1], got {bottom:?}"
            )));
        }
        let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
        let err = orthonormality_error(&r);
        if err > tolerance {
            return Err(Error::InvalidTransform(format!(
                "rotation not orthonormal (max |RᵀR - I| = {err:e})"
            )));
        }
        if r.determinant() <= 0.0 {
            return Err(Error::InvalidTransform("rotation is a reflection".into()));
        }
        let rotation = if err > 0.0 { nearest_rotation(&r) } else { r };
        Ok(Self {
            rotation,
            translation: Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]),
        })
    }

    /// Row-major 4×4 array; inverse of [`RigidTransform::from_matrix`].
    pub fn to_rows(&self) -> [[f64; 4]; 4] {
        let m = self.to_matrix();
        let mut rows = [[0.0; 4]; 4];
        for (r, row) in rows.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = m[(r, c)];
            }
        }
        rows
    }

    pub fn from_rows(rows: &[[f64; 4]; 4], tolerance: f64) -> Result<Self> {
        let m = Matrix4::from_fn(|r, c| rows[r][c]);
        Self::from_matrix(&m, tolerance)
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    pub fn from_rotation(rotation: Matrix3<f64>) -> Result<Self> {
        Self::new(rotation, Vector3::zeros())
    }

    /// Rotation about the x axis by `angle` radians.
    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::unchecked(
            Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
            Vector3::zeros(),
        )
    }

    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::unchecked(
            Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
            Vector3::zeros(),
        )
    }

    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::unchecked(
            Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            Vector3::zeros(),
        )
    }

    /// Same rotation, translation replaced.
    pub fn with_translation(mut self, t: Vector3<f64>) -> Self {
        self.translation = t;
        self
    }

    pub(crate) fn unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    /// SE(3) exponential of the twist `(omega, rho)`: `omega` is the
    /// axis-angle rotation and `rho` the translational tangent component.
    pub fn exp(omega: Vector3<f64>, rho: Vector3<f64>) -> Self {
        let theta = omega.norm();
        let k = skew(&omega);
        let k2 = k * k;
        let t2 = theta * theta;
        let (a, b) = if theta < SMALL_ANGLE {
            (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
        } else {
            let half = (0.5 * theta).sin();
            (theta.sin() / theta, 2.0 * half * half / t2)
        };
        // (θ - sin θ) / θ³ cancels badly well above the rotation cutoff.
        let c = if theta < 1e-2 {
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
        } else {
            (theta - theta.sin()) / (t2 * theta)
        };
        let rotation = Matrix3::identity() + k * a + k2 * b;
        let v = Matrix3::identity() + k * b + k2 * c;
        Self {
            rotation,
            translation: v * rho,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        let mut rotation = self.rotation * other.rotation;
        if orthonormality_error(&rotation) > DRIFT_TOLERANCE {
            rotation = nearest_rotation(&rotation);
        }
        RigidTransform {
            rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `inner` expressed through `self`: `self⁻¹ ∘ inner ∘ self`.
    pub fn conjugate(&self, inner: &RigidTransform) -> RigidTransform {
        self.inverse().compose(inner).compose(self)
    }

    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Largest per-entry deviation of `RᵀR` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.rotation)
    }

    /// Largest absolute entry difference between the two homogeneous matrices.
    pub fn max_abs_diff(&self, other: &RigidTransform) -> f64 {
        (self.to_matrix() - other.to_matrix())
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Intrinsic ZYX Euler angles. At gimbal lock roll is set to zero and
    /// yaw absorbs the remaining rotation.
    pub fn euler_zyx(&self) -> EulerZyx {
        let r = &self.rotation;
        let sp = (-r[(2, 0)]).clamp(-1.0, 1.0);
        let pitch = sp.asin();
        if (pitch.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-6 {
            let yaw = (-r[(0, 1)]).atan2(r[(1, 1)]);
            return EulerZyx {
                angles: (yaw, pitch, 0.0),
                gimbal_lock: true,
            };
        }
        let yaw = r[(1, 0)].atan2(r[(0, 0)]);
        let roll = r[(2, 1)].atan2(r[(2, 2)]);
        EulerZyx {
            angles: (yaw, pitch, roll),
            gimbal_lock: false,
        }
    }
}

impl Mul for RigidTransform {
    type Output = RigidTransform;

    fn mul(self, rhs: RigidTransform) -> RigidTransform {
        self.compose(&rhs)
    }
}

impl Mul<&RigidTransform> for &RigidTransform {
    type Output = RigidTransform;

    fn mul(self, rhs: &RigidTransform) -> RigidTransform {
        self.compose(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn homogeneous(t: &RigidTransform) -> [[f64; 4]; 4] {
        t.to_rows()
    }

    fn matmul4(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    fn rows_close(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4], tol: f64) -> bool {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn compose_identity() {
        let i = RigidTransform::identity();
        assert_eq!(i.compose(&i), i);
    }

    #[test]
    fn compose_matches_homogeneous_product() {
        let a = RigidTransform::rot_z(FRAC_PI_2).with_translation(Vector3::new(1.0, 0.0, 0.0));
        let b = RigidTransform::rot_z(FRAC_PI_2);
        let c = a.compose(&b);
        let oracle = matmul4(&homogeneous(&a), &homogeneous(&b));
        assert!(rows_close(&c.to_rows(), &oracle, 1e-12));
        let expected = RigidTransform::rot_z(PI).with_translation(Vector3::new(1.0, 0.0, 0.0));
        assert!(c.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn inverse_cases() {
        assert_eq!(RigidTransform::identity().inverse(), RigidTransform::identity());
        let t = RigidTransform::from_translation(Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(*t.inverse().translation(), Vector3::new(-1.0, -2.0, -3.0));

        let a = RigidTransform::rot_z(FRAC_PI_2).with_translation(Vector3::new(1.0, 0.0, 0.0));
        let inv = a.inverse();
        let expected = RigidTransform::rot_z(-FRAC_PI_2).with_translation(Vector3::new(0.0, 1.0, 0.0));
        assert!(inv.max_abs_diff(&expected) < 1e-12);
        // Homogeneous oracle: A · A⁻¹ = I.
        let prod = matmul4(&homogeneous(&a), &homogeneous(&inv));
        assert!(rows_close(&prod, &homogeneous(&RigidTransform::identity()), 1e-12));
    }

    #[test]
    fn new_rejects_non_rotation() {
        let m = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(RigidTransform::new(m, Vector3::zeros()).is_err());
        let reflection = Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(RigidTransform::new(reflection, Vector3::zeros()).is_err());
    }

    #[test]
    fn from_matrix_snaps_small_drift() {
        let mut m = RigidTransform::rot_y(0.3).to_matrix();
        m[(0, 0)] += 1e-8;
        let t = RigidTransform::from_matrix(&m, 1e-6).unwrap();
        assert!(t.orthonormality_error() < 1e-12);
        assert!(RigidTransform::from_matrix(&m, 1e-10).is_err());
        m[(3, 0)] = 0.5;
        assert!(RigidTransform::from_matrix(&m, 1e-6).is_err());
    }

    #[test]
    fn exp_small_angle_and_quarter_turn() {
        let t = RigidTransform::exp(Vector3::zeros(), Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(*t.rotation(), Matrix3::identity());
        assert_eq!(*t.translation(), Vector3::new(1.0, 2.0, 3.0));

        let q = RigidTransform::exp(Vector3::new(0.0, 0.0, FRAC_PI_2), Vector3::zeros());
        assert!(q.max_abs_diff(&RigidTransform::rot_z(FRAC_PI_2)) < 1e-12);

        // Series and closed form agree across the switch-over.
        let w = Vector3::new(0.6, -0.8, 0.0);
        let lo = RigidTransform::exp(w * 0.99e-8, Vector3::new(1.0, 0.0, 0.0));
        let hi = RigidTransform::exp(w * 1.01e-8, Vector3::new(1.0, 0.0, 0.0));
        assert!(lo.max_abs_diff(&hi) < 1e-9);
    }

    #[test]
    fn euler_round_trip_and_gimbal() {
        let (y, p, r) = (0.4, -0.2, 1.1);
        let t = RigidTransform::rot_z(y) * RigidTransform::rot_y(p) * RigidTransform::rot_x(r);
        let e = t.euler_zyx();
        assert!(!e.gimbal_lock);
        assert!((e.angles.0 - y).abs() < 1e-12);
        assert!((e.angles.1 - p).abs() < 1e-12);
        assert!((e.angles.2 - r).abs() < 1e-12);

        let g = RigidTransform::rot_z(0.3) * RigidTransform::rot_y(FRAC_PI_2);
        let e = g.euler_zyx();
        assert!(e.gimbal_lock);
        assert_eq!(e.angles.2, 0.0);
        assert!((e.angles.0 - 0.3).abs() < 1e-6);
    }

    #[test]
    fn long_chains_stay_orthonormal() {
        let step = RigidTransform::exp(Vector3::new(0.013, -0.021, 0.007), Vector3::new(0.1, 0.0, 0.05));
        let mut acc = RigidTransform::identity();
        for _ in 0..100 {
            acc = acc.compose(&step);
            assert!(acc.orthonormality_error() < 1e-6);
        }
    }
}
