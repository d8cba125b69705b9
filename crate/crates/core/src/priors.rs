//! Geometry priors from scale/shift-ambiguous depth: pseudo depth from a
//! relative inverse-depth prediction, and surface-normal maps whose
//! direction does not depend on the global depth scale.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Intrinsics;
use crate::raster::{Grid, ScalarMap, VectorMap};
use crate::spatial_depth::ReconstructedDepth;

/// Cross products with a smaller norm are treated as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Depth range the normalized disparity is mapped onto.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoDepthConfig {
    pub d_tgt_min: f64,
    pub d_tgt_max: f64,
}

impl Default for PseudoDepthConfig {
    fn default() -> Self {
        Self {
            d_tgt_min: 0.1,
            d_tgt_max: 200.0,
        }
    }
}

impl PseudoDepthConfig {
    pub fn new(d_tgt_min: f64, d_tgt_max: f64) -> Result<Self> {
        if !(d_tgt_min > 0.0 && d_tgt_min < d_tgt_max && d_tgt_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < min < max, got min={d_tgt_min}, max={d_tgt_max}"
            )));
        }
        Ok(Self {
            d_tgt_min,
            d_tgt_max,
        })
    }
}

/// Converts a raw relative inverse-depth map into depth within the target
/// range: min-max normalize to `[0, 1]`, then interpolate linearly in
/// disparity between `1/d_tgt_max` (at 0) and `1/d_tgt_min` (at 1).
///
/// Min-max normalization cancels any positive affine change `αS + β`.
pub fn pseudo_depth(raw: &ScalarMap, cfg: &PseudoDepthConfig) -> Result<ScalarMap> {
    let cfg = PseudoDepthConfig::new(cfg.d_tgt_min, cfg.d_tgt_max)?;
    let (lo, hi) = raw
        .iter_valid()
        .fold(None, |acc: Option<(f64, f64)>, (_, v)| match acc {
            None => Some((v, v)),
            Some((a, b)) => Some((a.min(v), b.max(v))),
        })
        .ok_or(Error::AllInvalid("pseudo depth"))?;
    if hi <= lo {
        return Err(Error::ConstantMap(lo));
    }
    let disp_min = 1.0 / cfg.d_tgt_max;
    let disp_max = 1.0 / cfg.d_tgt_min;
    let range = hi - lo;
    Ok(raw.map(|s| {
        let normalized = (s - lo) / range;
        let d = 1.0 / (disp_min + (disp_max - disp_min) * normalized);
        Some(d.clamp(cfg.d_tgt_min, cfg.d_tgt_max))
    }))
}

/// Pixel offset `(du, dv)` within the 8-neighborhood.
pub type Offset = (i32, i32);

/// Four ordered pairs of neighbor offsets used to build normals.
///
/// Offsets within a pair are perpendicular and ordered counterclockwise as
/// seen on screen (u right, v down), i.e. `du0·dv1 − dv0·du1 < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborPairs {
    pairs: [(Offset, Offset); 4],
}

const E: Offset = (1, 0);
const N: Offset = (0, -1);
const W: Offset = (-1, 0);
const S: Offset = (0, 1);

impl Default for NeighborPairs {
    /// `(e, n), (n, w), (w, s), (s, e)`.
    fn default() -> Self {
        Self {
            pairs: [(E, N), (N, W), (W, S), (S, E)],
        }
    }
}

impl NeighborPairs {
    pub fn new(pairs: [(Offset, Offset); 4]) -> Result<Self> {
        for (k, (a, b)) in pairs.iter().enumerate() {
            for o in [a, b] {
                if o.0.abs() > 1 || o.1.abs() > 1 || *o == (0, 0) {
                    return Err(Error::InvalidArgument(format!(
                        "pair {k}: offset {o:?} is outside the 8-neighborhood"
                    )));
                }
            }
            if a.0 * b.0 + a.1 * b.1 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "pair {k}: offsets {a:?} and {b:?} are not perpendicular"
                )));
            }
            if a.0 * b.1 - a.1 * b.0 >= 0 {
                return Err(Error::InvalidArgument(format!(
                    "pair {k}: offsets {a:?}, {b:?} are not counterclockwise"
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(Offset, Offset); 4] {
        &self.pairs
    }

    /// Same pairs with each pair's order swapped, so every per-pair normal
    /// flips sign. The result is clockwise and only meant for checking
    /// orientation invariance.
    pub fn reversed(&self) -> Self {
        Self {
            pairs: self.pairs.map(|(a, b)| (b, a)),
        }
    }
}

#[inline]
fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Unit surface normals from depth, in the camera frame.
///
/// Each pixel is lifted to 3D together with its neighbors. Every pair gives
/// a unit normal from the cross product of the two offset vectors; the four
/// are sign-aligned with the first and averaged, then renormalized. Border
/// pixels, pixels with an invalid neighbor and degenerate cross products are
/// invalid.
pub fn normal_map(depth: &ScalarMap, k: &Intrinsics, pairs: &NeighborPairs) -> VectorMap {
    let (h, w) = depth.dims();
    let lift = |r: i64, c: i64| -> Option<Vector3<f64>> {
        let d = depth.get(r as usize, c as usize).filter(|d| *d > 0.0)?;
        Some(k.unproject_unchecked(c as f64, r as f64, d).coords)
    };
    Grid::from_fn(h, w, |r, c| {
        if r == 0 || c == 0 || r + 1 >= h || c + 1 >= w {
            return None;
        }
        let (r, c) = (r as i64, c as i64);
        let p = lift(r, c)?;
        let mut normals = [Vector3::zeros(); 4];
        for (slot, (a, b)) in normals.iter_mut().zip(pairs.pairs()) {
            let pa = lift(r + a.1 as i64, c + a.0 as i64)?;
            let pb = lift(r + b.1 as i64, c + b.0 as i64)?;
            let n = (pa - p).cross(&(pb - p));
            let norm = n.norm();
            if !(norm >= DEGENERATE_NORM) {
                return None;
            }
            *slot = n / norm;
        }
        let n0 = normals[0];
        let sum = normals
            .iter()
            .fold(Vector3::zeros(), |acc, n| acc + n * sgn(n0.dot(n)));
        let avg = sum / 4.0;
        let norm = avg.norm();
        (norm >= DEGENERATE_NORM).then(|| avg / norm)
    })
}

/// Normals of a cross-view reconstructed depth map, in the target camera.
pub fn spatial_normal_map(
    reconstructed: &ReconstructedDepth,
    k_target: &Intrinsics,
    pairs: &NeighborPairs,
) -> VectorMap {
    normal_map(&reconstructed.depth, k_target, pairs)
}

/// Largest angle (radians) between corresponding valid normals, ignoring
/// orientation when `unsigned` is set. Pixels valid in only one map count
/// as a mismatch of π.
pub fn max_angle_between(a: &VectorMap, b: &VectorMap, unsigned: bool) -> Result<f64> {
    a.ensure_same_dims(b, "normal maps")?;
    let mut worst = 0.0_f64;
    for i in 0..a.len() {
        match (a.mask()[i], b.mask()[i]) {
            (true, true) => {
                let mut cos = a.data()[i].dot(&b.data()[i]);
                if unsigned {
                    cos = cos.abs();
                }
                // acos loses precision near 1; use the cross-product form.
                let sin = a.data()[i].cross(&b.data()[i]).norm();
                let angle = sin.atan2(cos);
                worst = worst.max(angle);
            }
            (false, false) => {}
            _ => worst = std::f64::consts::PI,
        }
    }
    Ok(worst)
}
