//! Rig-wide loss evaluation: every camera against its cyclic neighbors and
//! every temporal context, pooled into one [`LossTerms`].

use crate::error::{Error, Result};
use crate::geometry::{ContextKind, Rig, RigidTransform};
use crate::priors::{normal_map, NeighborPairs};
use crate::raster::{ColorImage, MaskedSum, ScalarMap};
use crate::spatial_depth::{reconstruct, reconstruct_mbw, CrossView, ReconstructedDepth, Strategy};
use crate::warp::{warp_view, WarpResult};

use super::depth::{dsc_sums, sdc_sum, smoothness_sums, snc_sum};
use super::photometric::min_pe_sum;
use super::pose::{pose_consistency, PoseConsistency};
use super::{LossTerm, LossTerms, TermKind};

/// All cameras at one adjacent time step `t′`.
#[derive(Clone, Debug)]
pub struct ContextFrame {
    /// Images at `t′`, in rig order.
    pub images: Vec<ColorImage>,
    /// Per-camera motion from `t` to `t′`, in rig order.
    pub poses: Vec<RigidTransform>,
}

/// Everything needed to evaluate the rig-wide losses at time `t`.
#[derive(Clone, Debug)]
pub struct FrameSet {
    pub rig: Rig,
    /// Images at `t`, in rig order.
    pub targets: Vec<ColorImage>,
    /// Depth estimates at `t`, in rig order.
    pub depths: Vec<ScalarMap>,
    pub contexts: Vec<ContextFrame>,
    /// Pseudo depths from a relative-depth prior, in rig order.
    pub priors: Option<Vec<ScalarMap>>,
    /// Static self-occlusion masks (`false` = covered), in rig order.
    pub occlusion: Option<Vec<Vec<bool>>>,
}

#[derive(Clone, Copy, Debug)]
pub struct FrameSetOptions {
    pub alpha: f64,
    /// Strategy for the metric spatial dense depth.
    pub strategy: Strategy,
    pub pairs: NeighborPairs,
    pub alpha_t: f64,
    pub alpha_r: f64,
}

impl Default for FrameSetOptions {
    fn default() -> Self {
        Self {
            alpha: super::photometric::DEFAULT_ALPHA,
            strategy: Strategy::Mbw,
            pairs: NeighborPairs::default(),
            alpha_t: 1.0,
            alpha_r: 1.0,
        }
    }
}

impl FrameSet {
    pub fn validate(&self) -> Result<()> {
        let n = self.rig.len();
        let check = |what: &str, len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(Error::ShapeMismatch(format!("{len} {what} for a {n}-camera rig")))
            }
        };
        check("target images", self.targets.len())?;
        check("depth maps", self.depths.len())?;
        for (k, ctx) in self.contexts.iter().enumerate() {
            check(&format!("images in context {k}"), ctx.images.len())?;
            check(&format!("poses in context {k}"), ctx.poses.len())?;
        }
        if let Some(p) = &self.priors {
            check("prior maps", p.len())?;
        }
        if let Some(o) = &self.occlusion {
            check("occlusion masks", o.len())?;
        }
        for (idx, cam) in self.rig.cameras().iter().enumerate() {
            let dims = (cam.height, cam.width);
            let mut grids: Vec<(String, (usize, usize))> = vec![
                (format!("target image of camera {}", cam.id), self.targets[idx].dims()),
                (format!("depth of camera {}", cam.id), self.depths[idx].dims()),
            ];
            for (k, ctx) in self.contexts.iter().enumerate() {
                grids.push((format!("context {k} image of camera {}", cam.id), ctx.images[idx].dims()));
            }
            if let Some(p) = &self.priors {
                grids.push((format!("prior of camera {}", cam.id), p[idx].dims()));
            }
            for (what, d) in grids {
                if d != dims {
                    return Err(Error::DimensionMismatch(format!(
                        "{what} is {}x{}, camera is {}x{}",
                        d.0, d.1, dims.0, dims.1
                    )));
                }
            }
            if let Some(o) = &self.occlusion {
                if o[idx].len() != cam.height * cam.width {
                    return Err(Error::DimensionMismatch(format!(
                        "occlusion mask of camera {} has {} entries",
                        cam.id,
                        o[idx].len()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Photometric {
    temporal: MaskedSum,
    spatial: MaskedSum,
    spatial_temporal: MaskedSum,
    mvrc: MaskedSum,
}

fn merge(into: &mut MaskedSum, other: MaskedSum) {
    into.sum += other.sum;
    into.count += other.count;
}

/// Mean of `(u, v)` axis sums added together; `None` when both are empty.
fn two_axis(u: MaskedSum, v: MaskedSum) -> Option<LossTerm> {
    if u.count == 0 && v.count == 0 {
        return None;
    }
    Some(LossTerm {
        value: u.mean().unwrap_or(0.0) + v.mean().unwrap_or(0.0),
        count: u.count + v.count,
    })
}

struct Evaluator<'a> {
    fs: &'a FrameSet,
    opts: &'a FrameSetOptions,
}

impl Evaluator<'_> {
    fn occlusion(&self, idx: usize) -> Option<&[bool]> {
        self.fs.occlusion.as_ref().map(|o| o[idx].as_slice())
    }

    fn warp(&self, depth: &ScalarMap, i: usize, j: usize, x: &RigidTransform, src: &ColorImage) -> Result<WarpResult> {
        let cams = self.fs.rig.cameras();
        warp_view(
            depth,
            &cams[i].intrinsics,
            &cams[j].intrinsics,
            x,
            src,
            self.occlusion(i),
        )
    }

    /// Temporal term of camera `i` using `depth` for lifting.
    fn temporal(&self, i: usize, depth: &ScalarMap, acc: &mut Photometric) -> Result<()> {
        if self.fs.contexts.is_empty() {
            return Ok(());
        }
        let warped = self
            .fs
            .contexts
            .iter()
            .map(|ctx| self.warp(depth, i, i, &ctx.poses[i], &ctx.images[i]))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&ColorImage> = warped.iter().map(|w| &w.synthesized).collect();
        merge(&mut acc.temporal, min_pe_sum(&self.fs.targets[i], &refs, self.opts.alpha)?);
        Ok(())
    }

    /// Spatial, spatial-temporal and MVRC terms for the pair `i ← j`.
    fn cross(&self, i: usize, j: usize, depth: &ScalarMap, acc: &mut Photometric) -> Result<()> {
        let rig = &self.fs.rig;
        let (id_i, id_j) = (rig.cameras()[i].id, rig.cameras()[j].id);
        let x = rig.context_transform(ContextKind::Spatial, id_i, id_j, &[])?;
        let target = &self.fs.targets[i];
        let spatial = self.warp(depth, i, j, &x, &self.fs.targets[j])?;
        merge(&mut acc.spatial, min_pe_sum(target, &[&spatial.synthesized], self.opts.alpha)?);
        if self.fs.contexts.is_empty() {
            return Ok(());
        }
        let st = self
            .fs
            .contexts
            .iter()
            .map(|ctx| {
                let x = rig.context_transform(ContextKind::SpatialTemporal, id_i, id_j, &ctx.poses)?;
                self.warp(depth, i, j, &x, &ctx.images[j])
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&ColorImage> = st.iter().map(|w| &w.synthesized).collect();
        merge(&mut acc.spatial_temporal, min_pe_sum(target, &refs, self.opts.alpha)?);
        merge(&mut acc.mvrc, min_pe_sum(&spatial.synthesized, &refs, self.opts.alpha)?);
        Ok(())
    }

    fn cross_view<'b>(&self, i: usize, j: usize, source_depth: &'b ScalarMap) -> CrossView<'b> {
        let cams = self.fs.rig.cameras();
        CrossView {
            source_depth,
            k_source: cams[j].intrinsics,
            k_target: cams[i].intrinsics,
            target_dims: (cams[i].height, cams[i].width),
            source_to_target: cams[i].extrinsics.inverse().compose(&cams[j].extrinsics),
        }
    }

    fn reconstructed(&self, i: usize, j: usize) -> Result<ReconstructedDepth> {
        let view = self.cross_view(i, j, &self.fs.depths[j]);
        reconstruct(self.opts.strategy, &view, Some(&self.fs.depths[i]))
    }
}

fn photometric_terms(acc: Photometric, has_contexts: bool) -> [Option<LossTerm>; 4] {
    let zero_ok = |s: MaskedSum| Some(LossTerm::from_sum(s).unwrap_or_default());
    if !has_contexts {
        return [None, zero_ok(acc.spatial), None, None];
    }
    [
        zero_ok(acc.temporal),
        zero_ok(acc.spatial),
        zero_ok(acc.spatial_temporal),
        zero_ok(acc.mvrc),
    ]
}

/// Mean pose consistency over the temporal contexts.
fn pose_term(fs: &FrameSet, opts: &FrameSetOptions) -> Result<Option<PoseConsistency>> {
    if fs.rig.len() < 2 || fs.contexts.is_empty() {
        return Ok(None);
    }
    let mut out = PoseConsistency {
        value: 0.0,
        translation: 0.0,
        rotation: 0.0,
        gimbal_lock: false,
    };
    let n = fs.contexts.len() as f64;
    for ctx in &fs.contexts {
        let pc = pose_consistency(&ctx.poses, &fs.rig, opts.alpha_t, opts.alpha_r)?;
        out.value += pc.value / n;
        out.translation += pc.translation / n;
        out.rotation += pc.rotation / n;
        out.gimbal_lock |= pc.gimbal_lock;
    }
    Ok(Some(out))
}

/// Evaluates every loss term over the whole rig.
///
/// Terms are pooled masked means over all cameras (and neighbor pairs for
/// cross-view terms). Without temporal contexts the temporal,
/// spatial-temporal and MVRC terms are absent; without priors SNC, DSC and
/// the spatial SNC are absent. The temporal term fails with
/// [`Error::AllInvalid`] when no pixel of any camera is valid; the
/// cross-view terms report a zero value with count 0 instead.
pub fn rig_terms(fs: &FrameSet, opts: &FrameSetOptions) -> Result<LossTerms> {
    fs.validate()?;
    let ev = Evaluator { fs, opts };
    let n = fs.rig.len();
    let mut base = Photometric::default();
    let mut src = Photometric::default();
    let mut sdc = MaskedSum::default();
    let (mut smooth_u, mut smooth_v) = (MaskedSum::default(), MaskedSum::default());
    let (mut dsc_u, mut dsc_v) = (MaskedSum::default(), MaskedSum::default());
    let mut snc = MaskedSum::default();
    let mut spatial_snc = MaskedSum::default();

    let prior_normals = fs
        .priors
        .as_ref()
        .map(|p| {
            fs.rig
                .cameras()
                .iter()
                .zip(p)
                .map(|(cam, d)| normal_map(d, &cam.intrinsics, &opts.pairs))
                .collect::<Vec<_>>()
        });

    for i in 0..n {
        let cam = &fs.rig.cameras()[i];
        let depth = &fs.depths[i];
        ev.temporal(i, depth, &mut base)?;
        let (u, v) = smoothness_sums(depth, &fs.targets[i])?;
        merge(&mut smooth_u, u);
        merge(&mut smooth_v, v);
        if let (Some(priors), Some(pn)) = (&fs.priors, &prior_normals) {
            let n_hat = normal_map(depth, &cam.intrinsics, &opts.pairs);
            merge(&mut snc, snc_sum(&n_hat, &pn[i])?);
            let (u, v) = dsc_sums(depth, &priors[i])?;
            merge(&mut dsc_u, u);
            merge(&mut dsc_v, v);
        }

        for id_j in fs.rig.neighbors(cam.id)? {
            let j = fs.rig.index_of(id_j)?;
            ev.cross(i, j, depth, &mut base)?;
            let d_tilde = ev.reconstructed(i, j)?;
            merge(&mut sdc, sdc_sum(depth, &d_tilde.depth)?);

            ev.temporal(i, &d_tilde.depth, &mut src)?;
            ev.cross(i, j, &d_tilde.depth, &mut src)?;

            if let Some(priors) = &fs.priors {
                let view = ev.cross_view(i, j, &priors[j]);
                let prior_tilde = reconstruct_mbw(&view, depth)?;
                let n_metric = normal_map(&d_tilde.depth, &cam.intrinsics, &opts.pairs);
                let n_prior = normal_map(&prior_tilde.depth, &cam.intrinsics, &opts.pairs);
                merge(&mut spatial_snc, snc_sum(&n_metric, &n_prior)?);
            }
        }
    }

    let has_contexts = !fs.contexts.is_empty();
    let [temporal, spatial, spatial_temporal, mvrc] = photometric_terms(base, has_contexts);
    if has_contexts && temporal.is_some_and(|t| t.count == 0) {
        return Err(Error::AllInvalid("temporal photometric"));
    }
    let [src_t, src_s, src_st, src_m] = photometric_terms(src, has_contexts);
    let with_priors = fs.priors.is_some();
    let mut terms = LossTerms::default();
    terms.set(TermKind::Temporal, temporal);
    terms.set(TermKind::Spatial, spatial);
    terms.set(TermKind::SpatialTemporal, spatial_temporal);
    terms.set(TermKind::Mvrc, mvrc);
    terms.set(
        TermKind::Smoothness,
        Some(two_axis(smooth_u, smooth_v).ok_or(Error::AllInvalid("smoothness"))?),
    );
    terms.set(TermKind::Sdc, Some(LossTerm::from_sum(sdc).unwrap_or_default()));
    if with_priors {
        terms.set(
            TermKind::Snc,
            Some(LossTerm::from_sum(snc).ok_or(Error::AllInvalid("surface normal consistency"))?),
        );
        terms.set(
            TermKind::Dsc,
            Some(two_axis(dsc_u, dsc_v).ok_or(Error::AllInvalid("disparity smoothness consistency"))?),
        );
        terms.set(TermKind::SpatialSnc, Some(LossTerm::from_sum(spatial_snc).unwrap_or_default()));
    }
    terms.set(TermKind::SrcTemporal, src_t);
    terms.set(TermKind::SrcSpatial, src_s);
    terms.set(TermKind::SrcSpatialTemporal, src_st);
    terms.set(TermKind::SrcMvrc, src_m);
    terms.pose_consistency = pose_term(fs, opts)?;
    Ok(terms)
}
