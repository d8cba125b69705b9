//! Cross-view depth reconstruction: rebuild a target-view depth map from an
//! adjacent (source) camera's depth.
//!
//! Four strategies are provided:
//! - **FW** splats every source point into the target image (z-buffer,
//!   nearest pixel); geometrically correct but leaves holes.
//! - **BW** samples the source depth map at the warped coordinates. The
//!   sampled values are source-frame depths, so this is wrong whenever the
//!   cameras' optical axes differ; kept as a comparison baseline.
//! - **MBW** first re-expresses each source point's depth in the target
//!   frame, then samples that map at the warped coordinates.
//! - **MFBW** lifts BW-sampled depths at the warped source coordinates and
//!   splats them into the target like FW.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Intrinsics, RigidTransform, DEPTH_EPSILON};
use crate::raster::{bilinear_sample, sample_at, Grid, ScalarMap};
use crate::warp::warp_coords;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Fw,
    Bw,
    Mbw,
    Mfbw,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Fw, Strategy::Bw, Strategy::Mbw, Strategy::Mfbw];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Fw => "fw",
            Strategy::Bw => "bw",
            Strategy::Mbw => "mbw",
            Strategy::Mfbw => "mfbw",
        }
    }

    /// Whether the strategy needs the target view's own depth to locate
    /// sampling positions.
    pub fn needs_target_depth(self) -> bool {
        !matches!(self, Strategy::Fw)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fw" => Ok(Strategy::Fw),
            "bw" => Ok(Strategy::Bw),
            "mbw" => Ok(Strategy::Mbw),
            "mfbw" => Ok(Strategy::Mfbw),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy `{other}` (expected fw, bw, mbw or mfbw)"
            ))),
        }
    }
}

/// Target-view depth rebuilt from the source view. The mask is the overlap
/// region; valid depths are positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructedDepth {
    pub depth: ScalarMap,
    pub strategy: Strategy,
}

impl ReconstructedDepth {
    pub fn overlap(&self) -> &[bool] {
        self.depth.mask()
    }
}

/// Geometry shared by all strategies.
#[derive(Clone, Copy, Debug)]
pub struct CrossView<'a> {
    pub source_depth: &'a ScalarMap,
    pub k_source: Intrinsics,
    pub k_target: Intrinsics,
    /// `(height, width)` of the target view.
    pub target_dims: (usize, usize),
    /// Maps source-camera points into the target camera.
    pub source_to_target: RigidTransform,
}

/// Z-min splat of `(pixel index, z)` hits. Hits are merged in the order
/// given, which together with the min rule makes the result independent of
/// how they were produced.
fn splat(dims: (usize, usize), hits: impl IntoIterator<Item = (usize, f64)>) -> ScalarMap {
    let (h, w) = dims;
    let mut best = vec![f64::INFINITY; h * w];
    for (i, z) in hits {
        if z < best[i] {
            best[i] = z;
        }
    }
    let mask = best.iter().map(|z| z.is_finite()).collect();
    let data = best.into_iter().map(|z| if z.is_finite() { z } else { 0.0 }).collect();
    Grid::with_mask(h, w, data, mask).expect("splat buffer matches dims")
}

/// Target pixel index hit by a target-frame point, via nearest-pixel rounding.
fn target_hit(k: &Intrinsics, dims: (usize, usize), p: &nalgebra::Point3<f64>) -> Option<(usize, f64)> {
    if !(p.z > DEPTH_EPSILON) {
        return None;
    }
    let (u, v) = k.project_unchecked(p);
    let (c, r) = (u.round(), v.round());
    if c < 0.0 || r < 0.0 || c > (dims.1 - 1) as f64 || r > (dims.0 - 1) as f64 {
        return None;
    }
    Some((r as usize * dims.1 + c as usize, p.z))
}

pub fn reconstruct_fw(view: &CrossView) -> ReconstructedDepth {
    let src = view.source_depth;
    let hits = Grid::from_fn(src.height(), src.width(), |r, c| {
        let d = src.get(r, c).filter(|d| *d > 0.0)?;
        let p = view.k_source.unproject_unchecked(c as f64, r as f64, d);
        let q = view.source_to_target.transform_point(&p);
        target_hit(&view.k_target, view.target_dims, &q).map(|(i, z)| [i as f64, z])
    });
    let depth = splat(
        view.target_dims,
        hits.iter_valid().map(|(_, [i, z])| (i as usize, z)),
    );
    ReconstructedDepth {
        depth,
        strategy: Strategy::Fw,
    }
}

fn target_coords(view: &CrossView, target_depth: &ScalarMap) -> Result<crate::raster::CoordGrid> {
    if target_depth.dims() != view.target_dims {
        return Err(Error::DimensionMismatch(format!(
            "target depth is {}x{}, target view is {}x{}",
            target_depth.height(),
            target_depth.width(),
            view.target_dims.0,
            view.target_dims.1
        )));
    }
    Ok(warp_coords(
        target_depth,
        &view.k_target,
        &view.k_source,
        &view.source_to_target.inverse(),
    ))
}

pub fn reconstruct_bw(view: &CrossView, target_depth: &ScalarMap) -> Result<ReconstructedDepth> {
    let coords = target_coords(view, target_depth)?;
    let depth = bilinear_sample(view.source_depth, &coords).map(|d| (d > 0.0).then_some(d));
    Ok(ReconstructedDepth {
        depth,
        strategy: Strategy::Bw,
    })
}

/// Source-pixel map of each source point's z coordinate in the target frame.
pub fn target_frame_z(view: &CrossView) -> ScalarMap {
    let src = view.source_depth;
    Grid::from_fn(src.height(), src.width(), |r, c| {
        let d = src.get(r, c).filter(|d| *d > 0.0)?;
        let p = view.k_source.unproject_unchecked(c as f64, r as f64, d);
        let z = view.source_to_target.transform_point(&p).z;
        (z > DEPTH_EPSILON).then_some(z)
    })
}

pub fn reconstruct_mbw(view: &CrossView, target_depth: &ScalarMap) -> Result<ReconstructedDepth> {
    let coords = target_coords(view, target_depth)?;
    let z = target_frame_z(view);
    let depth = bilinear_sample(&z, &coords).map(|d| (d > DEPTH_EPSILON).then_some(d));
    Ok(ReconstructedDepth {
        depth,
        strategy: Strategy::Mbw,
    })
}

pub fn reconstruct_mfbw(view: &CrossView, target_depth: &ScalarMap) -> Result<ReconstructedDepth> {
    let coords = target_coords(view, target_depth)?;
    let hits = Grid::from_fn(coords.height(), coords.width(), |r, c| {
        let [u, v] = coords.get(r, c)?;
        let d = sample_at(view.source_depth, u, v).filter(|d| *d > 0.0)?;
        let p = view.k_source.unproject_unchecked(u, v, d);
        let q = view.source_to_target.transform_point(&p);
        target_hit(&view.k_target, view.target_dims, &q).map(|(i, z)| [i as f64, z])
    });
    let depth = splat(
        view.target_dims,
        hits.iter_valid().map(|(_, [i, z])| (i as usize, z)),
    );
    Ok(ReconstructedDepth {
        depth,
        strategy: Strategy::Mfbw,
    })
}

/// Dispatches on `strategy`. `target_depth` is required for every strategy
/// except FW.
pub fn reconstruct(
    strategy: Strategy,
    view: &CrossView,
    target_depth: Option<&ScalarMap>,
) -> Result<ReconstructedDepth> {
    let need = || {
        target_depth.ok_or_else(|| {
            Error::InvalidArgument(format!("strategy {strategy} needs the target-view depth"))
        })
    };
    match strategy {
        Strategy::Fw => Ok(reconstruct_fw(view)),
        Strategy::Bw => reconstruct_bw(view, need()?),
        Strategy::Mbw => reconstruct_mbw(view, need()?),
        Strategy::Mfbw => reconstruct_mfbw(view, need()?),
    }
}
