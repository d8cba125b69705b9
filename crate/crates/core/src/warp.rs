//! Inverse-warping view synthesis: lift target pixels with depth, move them
//! into the source camera, project, and bilinearly sample the source image.

use crate::error::{Error, Result};
use crate::geometry::{Intrinsics, RigidTransform, DEPTH_EPSILON};
use crate::raster::{bilinear_sample, ColorImage, CoordGrid, Grid, ScalarMap};

/// A synthesized view. Invalid pixels carry zeros and are excluded from
/// every loss through the mask of `synthesized`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpResult {
    pub synthesized: ColorImage,
    pub coords: CoordGrid,
}

impl WarpResult {
    pub fn validity(&self) -> &[bool] {
        self.synthesized.mask()
    }

    pub fn valid_count(&self) -> usize {
        self.synthesized.valid_count()
    }
}

/// Sampling position in the source view for every target pixel.
///
/// `depth` lives in the target camera (intrinsics `k_target`); `x` maps
/// target-camera points into the source camera. Pixels with invalid or
/// non-positive depth, or that land at or behind the source image plane,
/// are invalid.
pub fn warp_coords(
    depth: &ScalarMap,
    k_target: &Intrinsics,
    k_source: &Intrinsics,
    x: &RigidTransform,
) -> CoordGrid {
    Grid::from_fn(depth.height(), depth.width(), |r, c| {
        let d = depth.get(r, c)?;
        if !(d > 0.0) {
            return None;
        }
        let p = k_target.unproject_unchecked(c as f64, r as f64, d);
        let q = x.transform_point(&p);
        if !(q.z > DEPTH_EPSILON) {
            return None;
        }
        let (u, v) = k_source.project_unchecked(&q);
        Some([u, v])
    })
}

/// Samples `source` at `coords`. `occlusion`, when given, is a target-view
/// mask where `false` marks pixels covered by the ego vehicle.
pub fn synthesize(
    source: &ColorImage,
    coords: &CoordGrid,
    occlusion: Option<&[bool]>,
) -> Result<WarpResult> {
    let mut synthesized = bilinear_sample(source, coords);
    if let Some(mask) = occlusion {
        if mask.len() != synthesized.len() {
            return Err(Error::DimensionMismatch(format!(
                "occlusion mask has {} entries, target has {}",
                mask.len(),
                synthesized.len()
            )));
        }
        synthesized = synthesized.masked(mask)?;
    }
    Ok(WarpResult {
        synthesized,
        coords: coords.clone(),
    })
}

/// [`warp_coords`] followed by [`synthesize`].
pub fn warp_view(
    depth: &ScalarMap,
    k_target: &Intrinsics,
    k_source: &Intrinsics,
    x: &RigidTransform,
    source: &ColorImage,
    occlusion: Option<&[bool]>,
) -> Result<WarpResult> {
    let coords = warp_coords(depth, k_target, k_source, x);
    synthesize(source, &coords, occlusion)
}
