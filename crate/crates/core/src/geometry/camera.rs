use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points at or closer than this (meters, along the optical axis) cannot
/// be projected.
pub const DEPTH_EPSILON: f64 = 1e-6;

/// Pinhole intrinsics. Pixel coordinates are `(u, v) = (column, row)` with
/// the origin at the center of the top-left pixel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fx.is_finite() && fy > 0.0 && fy.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "focal lengths must be positive and finite, got fx={fx}, fy={fy}"
            )));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::InvalidArgument(
                "principal point must be finite".into(),
            ));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Direction through pixel `(u, v)` with unit z component, `K⁻¹ [u v 1]ᵀ`.
    pub fn ray(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    pub fn project(&self, p: &Point3<f64>) -> Result<(f64, f64)> {
        if !(p.z > DEPTH_EPSILON) {
            return Err(Error::NonPositiveDepth {
                depth: p.z,
                epsilon: DEPTH_EPSILON,
            });
        }
        Ok(self.project_unchecked(p))
    }

    #[inline]
    pub(crate) fn project_unchecked(&self, p: &Point3<f64>) -> (f64, f64) {
        (
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        )
    }

    /// Lifts pixel `(u, v)` at z-depth `depth`; the returned point has `z == depth`.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Result<Point3<f64>> {
        if !(depth > 0.0) {
            return Err(Error::NonPositiveDepth {
                depth,
                epsilon: 0.0,
            });
        }
        Ok(self.unproject_unchecked(u, v, depth))
    }

    #[inline]
    pub(crate) fn unproject_unchecked(&self, u: f64, v: f64, depth: f64) -> Point3<f64> {
        Point3::new(
            (u - self.cx) / self.fx * depth,
            (v - self.cy) / self.fy * depth,
            depth,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> Intrinsics {
        Intrinsics::new(100.0, 100.0, 50.0, 50.0).unwrap()
    }

    #[test]
    fn project_examples() {
        assert_eq!(k().project(&Point3::new(0.0, 0.0, 5.0)).unwrap(), (50.0, 50.0));
        // u = 100 * 1/5 + 50
        assert_eq!(k().project(&Point3::new(1.0, 0.0, 5.0)).unwrap(), (70.0, 50.0));
        assert!(matches!(
            k().project(&Point3::new(0.0, 0.0, -1.0)),
            Err(Error::NonPositiveDepth { .. })
        ));
        assert!(k().project(&Point3::new(0.0, 0.0, DEPTH_EPSILON)).is_err());
    }

    #[test]
    fn unproject_examples() {
        assert_eq!(k().unproject(50.0, 50.0, 5.0).unwrap(), Point3::new(0.0, 0.0, 5.0));
        assert_eq!(k().unproject(70.0, 50.0, 5.0).unwrap(), Point3::new(1.0, 0.0, 5.0));
        assert!(k().unproject(1.0, 1.0, 0.0).is_err());
        assert!(k().unproject(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn rejects_bad_focal() {
        assert!(Intrinsics::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(Intrinsics::new(1.0, -1.0, 0.0, 0.0).is_err());
        assert!(Intrinsics::new(1.0, 1.0, f64::INFINITY, 0.0).is_err());
    }
}
