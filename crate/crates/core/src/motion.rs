//! Distributing rig motion to cameras: per-camera, front-camera, joint and
//! adaptively weighted joint strategies, with the pose decoder and view
//! weigher injected.

use std::path::Path;

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{Rig, RigidTransform};
use crate::tensor::{ensure_same_shapes, AffineMap, FeatureArray};

/// Per-camera feature arrays `f_i`, all of one shape, in rig order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStack {
    features: Vec<FeatureArray>,
}

impl FeatureStack {
    pub fn new(features: Vec<FeatureArray>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::ShapeMismatch("feature stack needs at least one camera".into()));
        }
        ensure_same_shapes(&features)?;
        Ok(Self { features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureArray] {
        &self.features
    }

    pub fn channels(&self) -> usize {
        self.features[0].channels()
    }

    /// Spatially pooled, then averaged over cameras: `f̄_N ∈ R^C`.
    pub fn global_descriptor(&self) -> DVector<f64> {
        let sum = self
            .features
            .iter()
            .fold(DVector::zeros(self.channels()), |acc, f| acc + f.pooled());
        sum / self.len() as f64
    }

    fn ensure_rig(&self, rig: &Rig) -> Result<()> {
        if self.len() != rig.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature arrays for a rig of {} cameras",
                self.len(),
                rig.len()
            )));
        }
        Ok(())
    }
}

/// Maps one feature array to a rigid motion. Must be deterministic.
pub trait PoseDecoder: Sync {
    fn decode(&self, features: &FeatureArray) -> Result<RigidTransform>;
}

/// Maps the global descriptor `f̄_N` to `N` logits. Must be deterministic.
pub trait ViewWeigher: Sync {
    fn logits(&self, descriptor: &DVector<f64>) -> Result<DVector<f64>>;
}

impl<F> PoseDecoder for F
where
    F: Fn(&FeatureArray) -> Result<RigidTransform> + Sync,
{
    fn decode(&self, features: &FeatureArray) -> Result<RigidTransform> {
        self(features)
    }
}

/// Global average pool, then an affine map to `(ω, t)`: rotation
/// `exp(ω)` (axis-angle) and translation `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePoseDecoder {
    pub map: AffineMap,
}

impl AffinePoseDecoder {
    pub fn new(map: AffineMap) -> Result<Self> {
        if map.output_dim() != 6 {
            return Err(Error::ShapeMismatch(format!(
                "pose decoder must output 6 values, got {}",
                map.output_dim()
            )));
        }
        Ok(Self { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(AffineMap::load(path)?).map_err(|e| Error::parse(path, "weight", e.to_string()))
    }
}

impl PoseDecoder for AffinePoseDecoder {
    fn decode(&self, features: &FeatureArray) -> Result<RigidTransform> {
        let v = self.map.apply(&features.pooled())?;
        let omega = Vector3::new(v[0], v[1], v[2]);
        let t = Vector3::new(v[3], v[4], v[5]);
        Ok(RigidTransform::exp(omega, Vector3::zeros()).with_translation(t))
    }
}

/// A single affine layer `ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineWeigher {
    pub map: AffineMap,
}

impl AffineWeigher {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self {
            map: AffineMap::load(path)?,
        })
    }
}

impl ViewWeigher for AffineWeigher {
    fn logits(&self, descriptor: &DVector<f64>) -> Result<DVector<f64>> {
        self.map.apply(descriptor)
    }
}

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// `ω = softmax(ξ(f̄_N))`.
pub fn adaptive_weights(f: &FeatureStack, xi: &dyn ViewWeigher) -> Result<Vec<f64>> {
    let logits = xi.logits(&f.global_descriptor())?;
    if logits.len() != f.len() {
        return Err(Error::ShapeMismatch(format!(
            "view weigher produced {} logits for {} cameras",
            logits.len(),
            f.len()
        )));
    }
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument("non-finite view logit".into()));
    }
    Ok(softmax(logits.as_slice()))
}

/// `T̂_i = E_i⁻¹ M E_i` for every camera.
pub fn distribute(rig: &Rig, body_motion: &RigidTransform) -> Vec<RigidTransform> {
    rig.cameras().iter().map(|c| c.extrinsics.conjugate(body_motion)).collect()
}

fn weighted_joint(f: &FeatureStack, weights: &[f64], decoder: &dyn PoseDecoder, rig: &Rig) -> Result<Vec<RigidTransform>> {
    f.ensure_rig(rig)?;
    let fused = FeatureArray::weighted_sum(f.features(), weights)?;
    Ok(distribute(rig, &decoder.decode(&fused)?))
}

/// Decodes one body motion from `Σ ω_i f_i` and distributes it to every
/// camera through its extrinsics.
pub fn adaptive_joint_motion(
    f: &FeatureStack,
    xi: &dyn ViewWeigher,
    decoder: &dyn PoseDecoder,
    rig: &Rig,
) -> Result<Vec<RigidTransform>> {
    f.ensure_rig(rig)?;
    let w = adaptive_weights(f, xi)?;
    weighted_joint(f, &w, decoder, rig)
}

/// As [`adaptive_joint_motion`] with uniform weights `1/N`.
pub fn joint_motion(f: &FeatureStack, decoder: &dyn PoseDecoder, rig: &Rig) -> Result<Vec<RigidTransform>> {
    let w = vec![1.0 / f.len() as f64; f.len()];
    weighted_joint(f, &w, decoder, rig)
}

/// Decodes the front camera's motion `M` (from `f₁`, or the uniform
/// aggregate when `use_all_features`) and maps it to camera `i` as
/// `E_i⁻¹ E₁ M E₁⁻¹ E_i`.
pub fn front_motion(
    f: &FeatureStack,
    decoder: &dyn PoseDecoder,
    rig: &Rig,
    use_all_features: bool,
) -> Result<Vec<RigidTransform>> {
    f.ensure_rig(rig)?;
    let m = if use_all_features {
        let w = vec![1.0 / f.len() as f64; f.len()];
        decoder.decode(&FeatureArray::weighted_sum(f.features(), &w)?)?
    } else {
        decoder.decode(&f.features()[0])?
    };
    let e1 = &rig.front().extrinsics;
    Ok(rig
        .cameras()
        .iter()
        .map(|c| e1.inverse().compose(&c.extrinsics).conjugate(&m))
        .collect())
}

/// `T̂_i = decoder(f_i)`, independently per camera.
pub fn per_camera_motion(f: &FeatureStack, decoder: &dyn PoseDecoder) -> Result<Vec<RigidTransform>> {
    f.features().iter().map(|fi| decoder.decode(fi)).collect()
}
